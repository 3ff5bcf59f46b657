"""
Error Types and Structured Logging
Typed simulator exceptions, structured logging, error tracking and slow-operation monitoring
"""

import json
import logging
import os
import sys
import traceback
from datetime import datetime
from enum import Enum
from functools import wraps
from pathlib import Path
from typing import Dict, List, Optional


class LogLevel(Enum):
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class ErrorCategory(Enum):
    """Categories of errors for better tracking"""

    CONFIGURATION_ERROR = "configuration_error"
    VALIDATION_ERROR = "validation_error"
    GEOMETRY_ERROR = "geometry_error"
    NUMERICAL_ERROR = "numerical_error"
    EXPERIMENT_ERROR = "experiment_error"
    UNKNOWN_ERROR = "unknown_error"


# ============= EXCEPTIONS =============


class ToMAError(Exception):
    """Base class for all simulator errors"""

    category = ErrorCategory.UNKNOWN_ERROR


class InfeasibleGeometryError(ToMAError):
    """Array geometry violates the cable-length or drone-separation constraint"""

    category = ErrorCategory.GEOMETRY_ERROR

    def __init__(self, message: str, violations: Optional[List] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class DegeneratePositionError(ToMAError):
    """A position coincides with an antenna element or collapses to the origin"""

    category = ErrorCategory.GEOMETRY_ERROR


class RankDeficiencyError(ToMAError):
    """ZF Gram matrix is numerically singular"""

    category = ErrorCategory.NUMERICAL_ERROR

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


class DomainError(ToMAError, ValueError):
    """Argument outside the mathematical domain of an operation"""

    category = ErrorCategory.VALIDATION_ERROR


class ConfigError(ToMAError):
    """Experiment configuration could not be parsed or validated"""

    category = ErrorCategory.CONFIGURATION_ERROR

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.detail = message


# ============= LOGGING =============


def _log_dir() -> Optional[Path]:
    value = os.getenv("TOMA_LOG_DIR")
    if not value:
        return None
    path = Path(value)
    path.mkdir(parents=True, exist_ok=True)
    return path


class CustomLogger:
    """Logger with structured output; file handlers only when TOMA_LOG_DIR is set"""

    def __init__(self, name: str, log_level: Optional[str] = None):
        log_level = (log_level or os.getenv("TOMA_LOG_LEVEL", "INFO")).upper()
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level, logging.INFO))
        self.logger.propagate = False

        # Remove existing handlers to avoid duplicates
        self.logger.handlers = []

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, log_level, logging.INFO))
        console_handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
        )
        self.logger.addHandler(console_handler)

        self.json_handler: Optional[JsonFileHandler] = None
        logs_dir = _log_dir()
        if logs_dir is None:
            return

        stamp = datetime.now().strftime("%Y%m%d")
        file_format = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        file_handler = logging.FileHandler(logs_dir / f"{name}_{stamp}.log")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_format)
        self.logger.addHandler(file_handler)

        error_handler = logging.FileHandler(logs_dir / f"errors_{stamp}.log")
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(file_format)
        self.logger.addHandler(error_handler)

        self.json_handler = JsonFileHandler(logs_dir / f"structured_{name}_{stamp}.json")
        self.logger.addHandler(self.json_handler)

    def log_structured(self, level: LogLevel, message: str, **kwargs) -> Dict:
        """Log with structured metadata"""
        log_data = {
            "timestamp": datetime.now().isoformat(),
            "level": level.value,
            "message": message,
            "metadata": kwargs,
        }

        log_func = getattr(self.logger, level.value.lower())
        log_func(f"{message} | {json.dumps(kwargs, default=str)}")

        if self.json_handler is not None:
            self.json_handler.emit_json(log_data)

        return log_data

    def log_error(self, error: Exception, category: Optional[ErrorCategory] = None, **context) -> Dict:
        """Log error with full context and traceback"""
        if category is None:
            category = getattr(error, "category", ErrorCategory.UNKNOWN_ERROR)
        error_data = {
            "error_type": type(error).__name__,
            "error_message": str(error),
            "category": category.value,
            "traceback": traceback.format_exc(),
            "context": context,
        }

        self.log_structured(LogLevel.ERROR, f"Error occurred: {error}", **error_data)
        return error_data

    def log_optimizer_iteration(self, outer: int, objective: float, accepted_steps: int, **kwargs):
        """Log one outer iteration of the alternating optimizer"""
        self.log_structured(
            LogLevel.INFO,
            f"Outer iteration {outer}: objective {objective:.6f} bps/Hz",
            outer=outer,
            objective=objective,
            accepted_steps=accepted_steps,
            **kwargs,
        )

    def log_experiment_cell(self, experiment: str, scheme: str, sweep_value: float, rate: float, runtime_s: float):
        """Log a finished sweep cell"""
        self.log_structured(
            LogLevel.INFO,
            f"{experiment} [{scheme} @ {sweep_value}]: {rate:.4f} bps/Hz",
            experiment=experiment,
            scheme=scheme,
            sweep_value=sweep_value,
            rate=rate,
            runtime_s=runtime_s,
        )


class JsonFileHandler(logging.Handler):
    """Handler writing JSON-lines structured records"""

    def __init__(self, filename: Path):
        super().__init__()
        self.filename = filename

    def emit(self, record):
        """Plain records go to the text handlers"""

    def emit_json(self, log_data: Dict):
        """Write JSON log entry"""
        try:
            with open(self.filename, "a") as f:
                f.write(json.dumps(log_data, default=str) + "\n")
        except OSError as e:
            print(f"Failed to write JSON log: {e}", file=sys.stderr)


_LOGGERS: Dict[str, CustomLogger] = {}


def get_logger(name: str) -> CustomLogger:
    """Return a cached CustomLogger for name"""
    if name not in _LOGGERS:
        _LOGGERS[name] = CustomLogger(name)
    return _LOGGERS[name]


# ============= ERROR TRACKING =============


class ErrorHandler:
    """Counts errors per category and raises an alert past a threshold"""

    def __init__(self, logger: CustomLogger, error_threshold: int = 10):
        self.logger = logger
        self.error_counts: Dict[str, int] = {}
        self.error_threshold = error_threshold

    def handle_error(self, error: Exception, category: Optional[ErrorCategory] = None, **context) -> Dict:
        """Log an error and track how often it recurs"""
        if category is None:
            category = getattr(error, "category", ErrorCategory.UNKNOWN_ERROR)
        error_data = self.logger.log_error(error, category, **context)

        error_key = f"{category.value}:{type(error).__name__}"
        self.error_counts[error_key] = self.error_counts.get(error_key, 0) + 1

        if self.error_counts[error_key] == self.error_threshold:
            self.send_alert(error_key, error_data)

        return {"error": error_data, "count": self.error_counts[error_key]}

    def record(self, key: str, count: int = 1):
        """Track a soft failure that is not an exception (e.g. a rank-deficient sample)"""
        if count <= 0:
            return
        before = self.error_counts.get(key, 0)
        self.error_counts[key] = before + count
        if before < self.error_threshold <= self.error_counts[key]:
            self.send_alert(key, {"count": self.error_counts[key]})

    def send_alert(self, error_key: str, error_data: Dict):
        """Emit a critical record once the threshold is reached"""
        self.logger.log_structured(
            LogLevel.CRITICAL,
            f"ALERT: Error threshold reached for {error_key}",
            error_key=error_key,
            count=self.error_counts[error_key],
            latest_error=error_data,
        )


def error_handler_decorator(category: ErrorCategory = ErrorCategory.UNKNOWN_ERROR):
    """Decorator that logs and re-raises"""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                handler = ErrorHandler(get_logger(func.__module__))
                handler.handle_error(
                    e, getattr(e, "category", category), function=func.__name__, args=str(args)[:100]
                )
                raise

        return wrapper

    return decorator


class PerformanceMonitor:
    """Monitor performance and log slow operations"""

    def __init__(self, logger: CustomLogger, slow_objective_ms: float = 500.0, slow_cell_s: float = 300.0):
        self.logger = logger
        self.slow_objective_ms = slow_objective_ms
        self.slow_cell_s = slow_cell_s

    def log_slow_operation(self, operation_type: str, duration_ms: float, **context):
        """Log slow operations for analysis"""
        self.logger.log_structured(
            LogLevel.WARNING,
            f"Slow {operation_type} detected: {duration_ms:.1f}ms",
            operation_type=operation_type,
            duration_ms=duration_ms,
            **context,
        )

    def check_objective_performance(self, num_realizations: int, duration_ms: float):
        if duration_ms > self.slow_objective_ms:
            self.log_slow_operation("objective", duration_ms, realizations=num_realizations)

    def check_cell_performance(self, experiment: str, scheme: str, duration_s: float):
        if duration_s > self.slow_cell_s:
            self.log_slow_operation("sweep_cell", duration_s * 1000.0, experiment=experiment, scheme=scheme)


# Global logger instance
main_logger = get_logger("toma")
error_handler = ErrorHandler(main_logger)
performance_monitor = PerformanceMonitor(main_logger)


def log_info(message: str, **kwargs):
    """Convenience function for info logging"""
    main_logger.log_structured(LogLevel.INFO, message, **kwargs)


def log_error(error: Exception, **kwargs):
    """Convenience function for error logging"""
    error_handler.handle_error(error, **kwargs)


def log_warning(message: str, **kwargs):
    """Convenience function for warning logging"""
    main_logger.log_structured(LogLevel.WARNING, message, **kwargs)


def log_debug(message: str, **kwargs):
    """Convenience function for debug logging"""
    main_logger.log_structured(LogLevel.DEBUG, message, **kwargs)
