"""
Tests for simulator exceptions, structured logging and error tracking
"""

import json
from unittest.mock import Mock, patch

import pytest

from src.core.errors import (
    ConfigError,
    CustomLogger,
    DomainError,
    ErrorCategory,
    ErrorHandler,
    InfeasibleGeometryError,
    LogLevel,
    PerformanceMonitor,
    RankDeficiencyError,
    ToMAError,
    error_handler_decorator,
)


class TestExceptions:
    def test_categories(self):
        assert InfeasibleGeometryError("x").category == ErrorCategory.GEOMETRY_ERROR
        assert RankDeficiencyError("x").category == ErrorCategory.NUMERICAL_ERROR
        assert ConfigError("x").category == ErrorCategory.CONFIGURATION_ERROR

    def test_domain_error_is_value_error(self):
        assert issubclass(DomainError, ValueError)
        assert issubclass(DomainError, ToMAError)

    def test_config_error_position(self):
        error = ConfigError("unknown key", 4, 7)
        assert str(error) == "line 4, column 7: unknown key"
        assert (error.line, error.column, error.detail) == (4, 7, "unknown key")


class TestCustomLogger:
    """Structured log records"""

    def test_structured_record(self):
        logger = CustomLogger("test_structured")
        record = logger.log_structured(LogLevel.INFO, "cell done", rate=1.5)
        assert record["level"] == "INFO"
        assert record["metadata"] == {"rate": 1.5}

    def test_error_record_uses_exception_category(self):
        logger = CustomLogger("test_error_record")
        data = logger.log_error(RankDeficiencyError("singular"), cell=3)
        assert data["category"] == "numerical_error"
        assert data["error_type"] == "RankDeficiencyError"
        assert data["context"] == {"cell": 3}

    def test_json_log_file(self, tmp_path):
        """Setting TOMA_LOG_DIR adds text and JSON-lines files"""
        with patch.dict("os.environ", {"TOMA_LOG_DIR": str(tmp_path)}):
            logger = CustomLogger("test_json_file")
        logger.log_optimizer_iteration(2, 12.5, 7, increment=0.1)
        files = list(tmp_path.glob("structured_test_json_file_*.json"))
        assert len(files) == 1
        entry = json.loads(files[0].read_text().splitlines()[-1])
        assert entry["metadata"]["outer"] == 2
        assert entry["metadata"]["accepted_steps"] == 7


class TestErrorHandler:
    """Error counting and alerts"""

    def test_counts_per_category(self):
        handler = ErrorHandler(Mock())
        handler.handle_error(InfeasibleGeometryError("collision"))
        result = handler.handle_error(InfeasibleGeometryError("collision"))
        assert result["count"] == 2
        assert handler.error_counts == {"geometry_error:InfeasibleGeometryError": 2}

    def test_alert_at_threshold(self):
        handler = ErrorHandler(Mock(), error_threshold=3)
        with patch.object(handler, "send_alert") as alert:
            for _ in range(4):
                handler.handle_error(ValueError("bad"), ErrorCategory.EXPERIMENT_ERROR)
        alert.assert_called_once()
        assert alert.call_args[0][0] == "experiment_error:ValueError"

    def test_record_soft_failures(self):
        handler = ErrorHandler(Mock(), error_threshold=5)
        with patch.object(handler, "send_alert") as alert:
            handler.record("numerical_error:rank_deficient", 3)
            handler.record("numerical_error:rank_deficient", 0)
            handler.record("numerical_error:rank_deficient", 4)
        assert handler.error_counts["numerical_error:rank_deficient"] == 7
        alert.assert_called_once()


class TestDecorator:
    def test_logs_and_reraises(self):
        @error_handler_decorator(ErrorCategory.EXPERIMENT_ERROR)
        def failing():
            raise RankDeficiencyError("singular")

        with patch.object(ErrorHandler, "handle_error") as handle:
            with pytest.raises(RankDeficiencyError):
                failing()
        error, category = handle.call_args[0]
        assert isinstance(error, RankDeficiencyError)
        assert category == ErrorCategory.NUMERICAL_ERROR

    def test_passes_result_through(self):
        @error_handler_decorator()
        def succeed(x):
            return x * 2

        assert succeed(4) == 8


class TestPerformanceMonitor:
    def test_slow_objective(self):
        logger = Mock()
        monitor = PerformanceMonitor(logger, slow_objective_ms=100.0)
        monitor.check_objective_performance(100, 50.0)
        logger.log_structured.assert_not_called()
        monitor.check_objective_performance(100, 250.0)
        logger.log_structured.assert_called_once()
        assert logger.log_structured.call_args[1]["operation_type"] == "objective"

    def test_slow_cell(self):
        logger = Mock()
        PerformanceMonitor(logger, slow_cell_s=1.0).check_cell_performance("sweep_n", "toma_opt", 2.0)
        assert logger.log_structured.call_args[1]["duration_ms"] == pytest.approx(2000.0)
