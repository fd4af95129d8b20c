import dataclasses

import pytest

import common.settings_manager as settings_manager
from model.model_params import preset


@pytest.fixture(autouse=True)
def restore_settings():
    """Tests may change the module-level settings; put them back afterwards."""
    saved = dataclasses.replace(settings_manager.settings)
    yield
    for settings_field in dataclasses.fields(saved):
        setattr(settings_manager.settings, settings_field.name, getattr(saved, settings_field.name))


@pytest.fixture(autouse=True)
def no_thread_override(monkeypatch):
    monkeypatch.delenv("ABNET_THREADS", raising=False)


@pytest.fixture
def kr_params():
    return preset("krapivsky_redner")


@pytest.fixture(params=[1, 2, 3], ids=lambda m: f"m={m}")
def standard_params(request):
    return preset("standard", m=request.param)
