from fractions import Fraction

import pytest
from scipy import integrate

from model.model_params import (
    ModelParams,
    ModelParamsError,
    PresetIC,
    ValidationMode,
    d_of_t,
    g,
    h,
    h_integral,
    n_of_t,
    preset,
)


def test_scalar_examples():
    params = ModelParams(lam=2, m=3, d0=6, n0=2, initial_counts={3: 2})
    assert d_of_t(params, 1) == 18
    assert h(params, 2, 1) == 18
    assert g(params, 1) == pytest.approx(3 ** 0.5)

    params = ModelParams(lam=0.5, m=1, d0=4, n0=4, initial_counts={1: 4})
    assert n_of_t(params, 4) == 6


def test_floats_are_read_as_their_decimal():
    params = ModelParams(lam=0.1, m=1, d0=2, n0=2, initial_counts={1: 2})
    assert params.lam == Fraction(1, 10)


def test_integrating_factor_multiplies(kr_params):
    t = 2.5
    assert h(kr_params, 3, t) == pytest.approx(h(kr_params, 1, t) * h(kr_params, 2, t), rel=1e-14)
    assert h(kr_params, 0, t) == 1.0
    assert g(kr_params, t) == pytest.approx(h(kr_params, 1, t) / h(kr_params, 1, 0), rel=1e-14)


@pytest.mark.parametrize("k", [-1, 0, 1, 3])
def test_h_integral_is_an_antiderivative(kr_params, k):
    numeric, _ = integrate.quad(lambda s: h(kr_params, k, s), 0.0, 7.0, epsabs=0, epsrel=1e-12)
    assert h_integral(kr_params, k, 7.0) - h_integral(kr_params, k, 0.0) == pytest.approx(numeric, rel=1e-10)


def test_h_integral_rejects_logarithmic_case(kr_params):
    with pytest.raises(ModelParamsError):
        h_integral(kr_params, -2, 1.0)


@pytest.mark.parametrize("t", [-1.0, float("nan")])
def test_negative_time_is_rejected(kr_params, t):
    with pytest.raises(ModelParamsError):
        d_of_t(kr_params, t)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"m": 0},
        {"m": True},
        {"lam": 0},
        {"d0": -2},
        {"n0": 0},
        {"initial_counts": {0: 2}},
        {"initial_counts": {1: -1}},
        {"lam": float("inf")},
    ],
)
def test_invalid_parameters(kwargs):
    values = {"lam": 1, "m": 1, "d0": 2, "n0": 2, "initial_counts": {1: 2}, "mode": ValidationMode.LENIENT}
    values.update(kwargs)
    with pytest.raises(ModelParamsError):
        ModelParams(**values)


def test_strict_mode_rejects_inconsistent_counts():
    with pytest.raises(ModelParamsError, match="strict"):
        ModelParams(lam=1, m=1, d0=2, n0=3, initial_counts={1: 2})


def test_lenient_mode_records_defects():
    params = ModelParams(lam=1, m=1, d0=2, n0=3, initial_counts={1: 2}, mode="lenient")
    assert len(params.defects) == 1
    assert params.consistency_report().node_defect == 1


def test_standard_preset(standard_params):
    m = standard_params.m
    assert standard_params.mode is ValidationMode.LENIENT
    assert standard_params.n0 == m + 1
    assert standard_params.d0 == 2 * m
    assert dict(standard_params.initial_counts) == {m: 1}
    assert standard_params.defects


def test_krapivsky_redner_preset_is_strictly_consistent(kr_params):
    assert kr_params.consistency_report().consistent
    assert kr_params.initial_count(1) == 2
    assert kr_params.initial_count(2) == 0
    assert kr_params.preset is PresetIC.KRAPIVSKY_REDNER


def test_krapivsky_redner_preset_ignores_other_m():
    assert preset("krapivsky_redner", m=3).m == 1


def test_dict_round_trip_keeps_exact_values():
    params = ModelParams(lam=Fraction(1, 3), m=2, d0=6, n0=Fraction(5, 2), initial_counts={2: Fraction(1, 2), 3: 1, 4: 0}, mode="lenient")
    restored = ModelParams.from_dict(params.to_dict())
    assert restored == params
    assert params.to_dict()["lambda"] == "1/3"
    assert params.to_dict()["n0"] == 2.5
    assert 4 not in params.initial_counts


def test_from_dict_preset_shortcut():
    params = ModelParams.from_dict({"preset": "standard", "m": 2, "lambda": 0.5})
    assert params.m == 2 and params.lam == Fraction(1, 2)


@pytest.mark.parametrize(
    "document, message",
    [
        ({"lambda": 1, "m": 1, "d0": 2, "n0": 2}, "initial_counts"),
        ({"preset": "nope"}, "preset"),
        ({"lambda": 1, "m": 1, "d0": 2, "n0": 2, "initial_counts": {"one": 2}}, "initial_counts"),
        ({"lambda": 1, "m": 1, "d0": 2, "n0": 2, "initial_counts": {"1": 2}, "mode": "loose"}, "mode"),
    ],
)
def test_from_dict_errors(document, message):
    with pytest.raises(ModelParamsError, match=message):
        ModelParams.from_dict(document)
