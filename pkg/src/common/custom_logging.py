import logging
import os
import sys

from colorama import Back, Fore, Style, just_fix_windows_console


LEVEL_COLORS = {
    logging.DEBUG: Fore.BLUE,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Back.RED + Fore.WHITE,
    logging.CRITICAL: Back.RED + Fore.WHITE + Style.BRIGHT,
}

VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
LOGGER_NAMESPACE = "abnet"


class DynamicFormatter(logging.Formatter):
    """Short lines for INFO, source location for everything else; ensemble worker threads are named."""

    FORMATS = {
        logging.INFO: "%(asctime)s -> %(message)s",
        "default": "%(asctime)s [%(levelname)s] (%(module)s.%(funcName)s:ln%(lineno)d) -> %(message)s",
    }

    def __init__(self):
        super().__init__()
        self._formatters = {level: logging.Formatter(fmt) for level, fmt in self.FORMATS.items()}

    def format(self, record):
        formatter = self._formatters.get(record.levelno, self._formatters["default"])
        line = formatter.format(record)
        if record.threadName != "MainThread":
            line = f"[{record.threadName}] {line}"
        return line


class ColoredFormatter(DynamicFormatter):
    def format(self, record):
        return f"{LEVEL_COLORS.get(record.levelno, '')}{super().format(record)}{Style.RESET_ALL}"


class LoggerManager:
    """
    Hands out the loggers of one process. Each logger writes to its own file under log_dir
    ("oracle/ode" -> {log_dir}/oracle/ode.log) and to stderr.
    """

    def __init__(self, log_dir: str = "logs", log_to_file: bool = True, log_level: str = "INFO", stream=None):
        self.loggers: dict[str, logging.Logger] = {}
        self.log_dir = log_dir
        self.log_to_file = log_to_file
        self.log_level = log_level
        self.stream = stream if stream is not None else sys.stderr

    def get_logger(self, name: str) -> logging.Logger:
        if name not in self.loggers:
            self.loggers[name] = self._setup_logger(name)
        return self.loggers[name]

    def _console_formatter(self) -> logging.Formatter:
        isatty = getattr(self.stream, "isatty", None)
        return ColoredFormatter() if isatty is not None and isatty() else DynamicFormatter()

    def _setup_logger(self, name: str) -> logging.Logger:
        logger = logging.getLogger(f"{LOGGER_NAMESPACE}.{name.replace('/', '.')}")
        logger.setLevel(self.log_level)
        logger.propagate = False
        for handler in list(logger.handlers):
            logger.removeHandler(handler)
            handler.close()

        if self.log_to_file:
            log_file = os.path.join(self.log_dir, f"{name}.log")
            os.makedirs(os.path.dirname(log_file), exist_ok=True)
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setFormatter(DynamicFormatter())
            logger.addHandler(file_handler)

        console_handler = logging.StreamHandler(self.stream)
        console_handler.setFormatter(self._console_formatter())
        logger.addHandler(console_handler)
        return logger


__logger_manager: LoggerManager | None = None


def initialize(log_dir: str = "logs", log_to_file: bool = True, log_level: str = "INFO"):
    """(Re)creates the logger manager. Loggers handed out earlier are rebuilt with the new handlers."""
    just_fix_windows_console()

    global __logger_manager
    previous = list(__logger_manager.loggers) if __logger_manager is not None else []
    __logger_manager = LoggerManager(log_dir=log_dir, log_to_file=log_to_file, log_level=log_level.upper())
    for name in ["general", *previous]:
        __logger_manager.get_logger(name)


def configure_from_settings(settings, log_dir: str, log_level: str | None = None):
    """Applies the `log_to_file` and `general_log_level` settings; an explicit log_level wins."""
    initialize(log_dir=log_dir, log_to_file=settings.log_to_file, log_level=log_level or settings.general_log_level)


def _manager() -> LoggerManager:
    # Library use without the CLI (tests, notebooks) gets console-only logging
    if __logger_manager is None:
        initialize(log_to_file=False)
    return __logger_manager


def get_general_logger() -> logging.Logger:
    return _manager().get_logger("general")


def get_custom_logger(name: str) -> logging.Logger:
    """Logger of one component, e.g. get_custom_logger("simulation/ensemble")."""
    return _manager().get_logger(name)


def set_log_level(log_level: str):
    manager = _manager()
    log_level = log_level.upper()
    if log_level not in VALID_LOG_LEVELS:
        get_general_logger().error(f"Invalid log level: {log_level}")
        return

    manager.log_level = log_level
    for logger in manager.loggers.values():
        logger.setLevel(log_level)
    get_general_logger().debug(f"Log level set to: {log_level}")
