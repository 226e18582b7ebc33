import time
from contextlib import contextmanager
from typing import Optional
from benney_luke.common.logging_config import run_logger


class StageTracer:
    """
    Helper for logging structured experiment stages into run_logger.
    """

    @staticmethod
    def log_stage(stage: str,
                  status: str,
                  duration: Optional[float] = None,
                  error: Optional[str] = None):

        status_str = status.upper() if status else "UNKNOWN"

        if duration is not None:
            duration_str = f", duration: {duration:.2f}s"
        else:
            duration_str = ""

        if error:
            log_line = f"Stage '{stage}' ... {status_str} (error: {error}){duration_str}"
        else:
            log_line = f"Stage '{stage}' ... {status_str}{duration_str}"

        run_logger.info(log_line, extra={"stage": stage, "status": status_str, "duration": duration})

    @contextmanager
    def stage(self, name: str):
        """Log START, then DONE or FAILED with the elapsed wall time."""
        self.log_stage(name, "start")
        started = time.perf_counter()
        try:
            yield
        except Exception as e:
            self.log_stage(name, "failed", time.perf_counter() - started, error=str(e))
            raise
        self.log_stage(name, "done", time.perf_counter() - started)


stage_tracer = StageTracer()
