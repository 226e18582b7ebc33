import logging
import atexit
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional
from pydantic import BaseModel
from pythonjsonlogger.json import JsonFormatter
from rich.logging import RichHandler


class LoggingConfig(BaseModel):
    log_level: str = "INFO"
    file_log: bool = False
    log_path: Optional[str] = None
    json_log: bool = False
    json_path: Optional[str] = None


LOG_FORMATTER = logging.Formatter(
    "%(levelname)s | %(asctime)s | %(name)s:%(funcName)s:%(lineno)d | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)

JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(message)s %(stage)s %(status)s %(duration)s"


class LoggingManager:
    """
    Owns the two package loggers.

    ``bl.internal`` carries library diagnostics and never propagates;
    ``bl.run`` carries experiment progress records (stage, status, duration).
    """

    def __init__(self):
        self.internal_logger = logging.getLogger("bl.internal")
        self.internal_logger.propagate = False
        self.run_logger = logging.getLogger("bl.run")
        self.run_logger.propagate = False
        self.internal_console_handler = RichHandler(
            rich_tracebacks=True, tracebacks_show_locals=False, show_time=True, show_level=True)
        self.internal_console_handler.setFormatter(logging.Formatter("%(message)s", datefmt="%H:%M:%S"))
        self.run_console_handler = RichHandler(
            rich_tracebacks=False, show_time=True, show_level=True, markup=True)
        self.run_console_handler.setFormatter(logging.Formatter("%(message)s"))
        self.internal_logger.addHandler(self.internal_console_handler)
        self.run_logger.addHandler(self.run_console_handler)
        self.internal_logger.setLevel(logging.INFO)
        self.run_logger.setLevel(logging.INFO)
        self._file_handlers: list[logging.Handler] = []

    def initialize_handlers(self, config):
        """
        Re-apply levels and optional file handlers from a LoggingConfig
        (or anything exposing the same attributes).
        """
        log_level = getattr(logging, str(getattr(config, "log_level", "INFO")).upper(), logging.INFO)
        for logger in (self.internal_logger, self.run_logger):
            logger.setLevel(log_level)
        self.internal_console_handler.setLevel(log_level)
        self.run_console_handler.setLevel(log_level)
        self.remove_file_handlers()

        if getattr(config, "file_log", False):
            log_path = getattr(config, "log_path", None)
            log_file = Path(log_path or Path.cwd() / "logs" / "bl_lab.log").expanduser()
            log_file.parent.mkdir(parents=True, exist_ok=True)
            handler = create_file_handler(log_file, log_level)
            self.internal_logger.addHandler(handler)
            self.run_logger.addHandler(handler)
            self._file_handlers.append(handler)

        if getattr(config, "json_log", False):
            json_path = getattr(config, "json_path", None)
            json_file = Path(json_path or Path.cwd() / "logs" / "run_log.jsonl").expanduser()
            json_file.parent.mkdir(parents=True, exist_ok=True)
            handler = create_json_handler(json_file, log_level)
            self.run_logger.addHandler(handler)
            self._file_handlers.append(handler)

    def remove_file_handlers(self):
        for handler in self._file_handlers:
            for logger in (self.internal_logger, self.run_logger):
                logger.removeHandler(handler)
            try:
                handler.flush()
                handler.close()
            except Exception as e:  # pylint: disable=broad-except
                self.internal_logger.warning(f"Error closing handler {handler}: {e}")
        self._file_handlers.clear()

    def shutdown_logging(self):
        try:
            self.remove_file_handlers()
            self.internal_logger.debug("Logging shutdown completed")
        except Exception as e:  # pylint: disable=broad-except
            self.internal_logger.error(f"Shutdown error: {e}")

    def get_internal_logger(self):
        return self.internal_logger

    def get_run_logger(self):
        return self.run_logger


def create_file_handler(path, log_level, formatter=None):
    handler = RotatingFileHandler(path, maxBytes=10 * 1024 * 1024, backupCount=10)
    handler.setFormatter(formatter or LOG_FORMATTER)
    handler.setLevel(log_level)
    return handler


def create_json_handler(path, log_level):
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(JsonFormatter(JSON_FIELDS))
    handler.setLevel(log_level)
    return handler


logging_manager = LoggingManager()
internal_logger = logging_manager.get_internal_logger()
run_logger = logging_manager.get_run_logger()


def initialize_handlers(config):
    """
    Initialize logging handlers. Accepts either an ExperimentConfig or a LoggingConfig.
    """
    logging_config = getattr(config, "logging", config)
    logging_manager.initialize_handlers(logging_config)


def shutdown_logging():
    logging_manager.shutdown_logging()


atexit.register(shutdown_logging)


def reconfigure_logging(config):
    internal_logger.debug("Reconfiguring logging due to config change")
    initialize_handlers(config)


__all__ = ["internal_logger", "run_logger", "LoggingConfig",
           "reconfigure_logging", "initialize_handlers", "shutdown_logging"]
