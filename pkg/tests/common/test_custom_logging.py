import io
import logging

from common import custom_logging
from common.custom_logging import ColoredFormatter, DynamicFormatter, LoggerManager


def test_component_loggers_write_their_own_files(tmp_path):
    manager = LoggerManager(log_dir=str(tmp_path), log_to_file=True, stream=io.StringIO())
    logger = manager.get_logger("oracle/ode")
    logger.info("integrated to t=10")
    for handler in logger.handlers:
        handler.flush()

    assert logger.name == "abnet.oracle.ode"
    assert "integrated to t=10" in (tmp_path / "oracle" / "ode.log").read_text(encoding="utf-8")
    assert manager.get_logger("oracle/ode") is logger


def test_console_is_not_colored_when_not_a_terminal():
    stream = io.StringIO()
    logger = LoggerManager(log_to_file=False, stream=stream).get_logger("plain")
    logger.warning("mean-field gap")

    assert isinstance(logger.handlers[0].formatter, DynamicFormatter)
    assert not isinstance(logger.handlers[0].formatter, ColoredFormatter)
    assert "[WARNING]" in stream.getvalue()
    assert "\x1b[" not in stream.getvalue()


def test_info_lines_are_short_and_worker_threads_are_named():
    record = logging.LogRecord("abnet.general", logging.INFO, __file__, 1, "replica done", None, None)
    record.threadName = "ThreadPoolExecutor-0_1"
    line = DynamicFormatter().format(record)
    assert line.startswith("[ThreadPoolExecutor-0_1] ")
    assert line.endswith("-> replica done")
    assert "[INFO]" not in line


def test_set_log_level_applies_to_every_logger():
    custom_logging.initialize(log_to_file=False)
    ensemble_logger = custom_logging.get_custom_logger("simulation/ensemble")
    custom_logging.set_log_level("debug")
    assert custom_logging.get_general_logger().level == logging.DEBUG
    assert ensemble_logger.level == logging.DEBUG

    custom_logging.set_log_level("nonsense")
    assert ensemble_logger.level == logging.DEBUG
    custom_logging.set_log_level("INFO")
