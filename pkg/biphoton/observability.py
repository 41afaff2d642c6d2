#!/usr/bin/env python3
"""
Logging, timing and error reporting for biphoton runs
"""

import os
import sys
import time
import logging
from typing import Dict, Any, Optional, List
from datetime import datetime
from contextlib import contextmanager
from functools import wraps

from pythonjsonlogger import jsonlogger

# Sentry integration
SENTRY_AVAILABLE = False
sentry_sdk = None
try:
    import sentry_sdk
    from sentry_sdk.integrations.logging import LoggingIntegration
    SENTRY_AVAILABLE = True
except ImportError:
    pass

logger = logging.getLogger(__name__)

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'


class ObservabilitySettings:
    """Process-level settings read from the environment"""

    def __init__(self):
        self.LOG_LEVEL = os.getenv("BIPHOTON_LOG_LEVEL", "INFO").upper()
        self.LOG_FORMAT = os.getenv("BIPHOTON_LOG_FORMAT", "text").lower()
        self.LOG_FILE = os.getenv("BIPHOTON_LOG_FILE")
        self.SLOW_OPERATION_SECONDS = float(os.getenv("BIPHOTON_SLOW_OPERATION_SECONDS", "10.0"))

        # Sentry Configuration
        self.SENTRY_DSN = os.getenv("SENTRY_DSN")
        self.SENTRY_ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
        self.SENTRY_RELEASE = os.getenv("GIT_SHA", "unknown")


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None,
                      log_file: Optional[str] = None) -> None:
    """Install root handlers; JSON records via python-json-logger when fmt == 'json'"""
    settings = ObservabilitySettings()
    level = (level or settings.LOG_LEVEL).upper()
    fmt = (fmt or settings.LOG_FORMAT).lower()
    log_file = log_file or settings.LOG_FILE

    if fmt == "json":
        formatter: logging.Formatter = jsonlogger.JsonFormatter(JSON_FORMAT)
    else:
        formatter = logging.Formatter(TEXT_FORMAT)

    # stdout carries command results
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    for handler in handlers:
        handler.setFormatter(formatter)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


class SentryManager:
    """Sentry error reporting for failed commands"""

    def __init__(self, settings: Optional[ObservabilitySettings] = None):
        self.settings = settings or ObservabilitySettings()
        self.initialized = False

    def setup(self):
        """Initialize Sentry when a DSN is configured"""
        if self.initialized:
            return
        if not SENTRY_AVAILABLE:
            logger.debug("Sentry SDK not available")
            return
        if not self.settings.SENTRY_DSN:
            logger.debug("Sentry DSN not configured")
            return

        try:
            sentry_sdk.init(
                dsn=self.settings.SENTRY_DSN,
                environment=self.settings.SENTRY_ENVIRONMENT,
                release=self.settings.SENTRY_RELEASE,
                integrations=[LoggingIntegration(level=logging.INFO, event_level=logging.ERROR)],
                send_default_pii=False,
                attach_stacktrace=True,
            )
            sentry_sdk.set_tag("service", "biphoton")
            self.initialized = True
            logger.info("Sentry initialized")
        except Exception as e:
            logger.error(f"Sentry initialization failed: {e}")

    def capture_exception(self, error: Exception, extra_data: Dict[str, Any] = None):
        """Capture exception with additional context"""
        if not self.initialized:
            return

        try:
            with sentry_sdk.push_scope() as scope:
                for key, value in (extra_data or {}).items():
                    scope.set_extra(key, value)
                sentry_sdk.capture_exception(error)
        except Exception as e:
            logger.error(f"Failed to send exception to Sentry: {e}")


class PerformanceMonitor:
    """Timing of numerical operations"""

    def __init__(self, slow_threshold: Optional[float] = None):
        self.slow_threshold = (
            slow_threshold if slow_threshold is not None
            else ObservabilitySettings().SLOW_OPERATION_SECONDS
        )
        self.metrics: Dict[str, Dict[str, Any]] = {}
        self.slow_operations: List[Dict[str, Any]] = []
        self.start_time = time.perf_counter()

    @contextmanager
    def measure_operation(self, operation_name: str):
        """Context manager to measure operation duration"""
        start_time = time.perf_counter()
        success = True
        error = None

        try:
            yield
        except Exception as e:
            success = False
            error = str(e)
            raise
        finally:
            duration = time.perf_counter() - start_time
            self._record(operation_name, duration, success)
            if duration > self.slow_threshold:
                self._record_slow_operation(operation_name, duration, error)

    def _record(self, operation: str, duration: float, success: bool):
        metric = self.metrics.setdefault(operation, {
            "count": 0,
            "total_duration": 0.0,
            "error_count": 0,
            "min_duration": float('inf'),
            "max_duration": 0.0,
        })
        metric["count"] += 1
        metric["total_duration"] += duration
        metric["min_duration"] = min(metric["min_duration"], duration)
        metric["max_duration"] = max(metric["max_duration"], duration)
        if not success:
            metric["error_count"] += 1

    def _record_slow_operation(self, operation: str, duration: float, error: str = None):
        slow_op = {
            "operation": operation,
            "duration_s": duration,
            "timestamp": datetime.utcnow().isoformat(),
            "error": error,
        }
        self.slow_operations.append(slow_op)
        # Keep only last 100 slow operations
        if len(self.slow_operations) > 100:
            self.slow_operations = self.slow_operations[-100:]
        logger.warning(f"Slow operation: {operation} took {duration:.2f}s", extra=slow_op)

    def get_performance_summary(self) -> Dict[str, Any]:
        """Per-operation counts and mean durations"""
        summary = {}
        for operation, metric in self.metrics.items():
            summary[operation] = {
                "count": metric["count"],
                "avg_duration_s": metric["total_duration"] / metric["count"],
                "error_count": metric["error_count"],
                "min_duration_s": metric["min_duration"],
                "max_duration_s": metric["max_duration"],
            }
        return {
            "metrics": summary,
            "slow_operations_count": len(self.slow_operations),
            "uptime_s": time.perf_counter() - self.start_time,
        }


class StructuredLogger:
    """Domain events logged with structured payloads"""

    def __init__(self, name: str = "biphoton.events"):
        self.logger = logging.getLogger(name)

    def log_event(self, event_type: str, message: str, level: int = logging.INFO, **fields: Any):
        log_data = {"event_type": event_type, **fields}
        self.logger.log(level, message, extra=log_data)

    def log_wavepacket(self, alpha: float, omega_c: float, gamma: float,
                       n_points: int, duration_ms: float = None):
        self.log_event("wavepacket_computed", "Wave packet computed", alpha=alpha,
                       omega_c=omega_c, gamma=gamma, n_points=n_points, duration_ms=duration_ms,
                       level=logging.DEBUG)

    def log_simulation(self, n_trials: int, n_records: int, seed: int):
        self.log_event("simulation_completed", "Time tags synthesized",
                       n_trials=n_trials, n_records=n_records, seed=seed)

    def log_analysis(self, n_bins: int, sbr: float, generated_pair_rate: float):
        self.log_event("analysis_completed", "Histogram analyzed", n_bins=n_bins,
                       sbr=sbr, generated_pair_rate=generated_pair_rate)

    def log_fit(self, free: List[str], converged: bool, iterations: int, rss: float):
        self.log_event("fit_completed", "Wave packet fit finished", free=free,
                       converged=converged, iterations=iterations, rss=rss)

    def log_command_failure(self, command: str, error_code: str, message: str):
        self.log_event("command_failed", f"Command {command} failed: {message}",
                       level=logging.ERROR, command=command, error_code=error_code)


def track_performance(operation_name: str):
    """Decorator to time a function with the shared monitor"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            with performance_monitor.measure_operation(operation_name):
                return func(*args, **kwargs)
        return wrapper
    return decorator


performance_monitor = PerformanceMonitor()
structured_logger = StructuredLogger()
sentry_manager = SentryManager()


def capture_exception(error: Exception, extra_data: Dict[str, Any] = None):
    """Convenience function to capture exceptions"""
    sentry_manager.capture_exception(error, extra_data)
