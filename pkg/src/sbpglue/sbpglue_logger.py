"""
sbpglue logger module.

Every record is one JSON object (a LogLine) so that long convergence studies can be
filtered by scenario, order and resolution after the fact.
"""
import contextlib
import inspect
import logging
import time
from datetime import datetime
from typing import Dict, Iterator, Optional, Union

from pydantic import BaseModel, StrictFloat, StrictInt, StrictStr

ContextValue = Union[StrictInt, StrictFloat, StrictStr]


class LogLine(BaseModel):
    """
    Represents a line in the sbpglue log
    """

    time: str
    level: str
    caller_file: str
    caller_name: str
    caller_line: int
    context: Dict[str, ContextValue] = {}
    elapsed: Optional[float] = None
    message: str


class SbpGlueLogger:
    """
    Thin wrapper over the "sbpglue" stdlib logger. ``bind`` returns a child that stamps
    run identifiers (scenario, q, N, ...) on every line it writes.
    """

    def __init__(self, level: int = logging.INFO, context: Optional[Dict[str, ContextValue]] = None) -> None:
        self.logger = logging.getLogger("sbpglue")
        self.logger.setLevel(level)
        self.context: Dict[str, ContextValue] = dict(context or {})

    def bind(self, **context: ContextValue) -> "SbpGlueLogger":
        child = SbpGlueLogger.__new__(SbpGlueLogger)
        child.logger = self.logger
        child.context = {**self.context, **{key: str(value) if isinstance(value, str) else value for key, value in context.items()}}
        return child

    def log(self, message: str, level: int, elapsed: Optional[float] = None, stacklevel: int = 1) -> None:
        if not self.logger.isEnabledFor(level):
            return
        frame = inspect.currentframe()
        for _ in range(stacklevel):
            frame = frame.f_back
        line = LogLine(
            time=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
            level=logging.getLevelName(level),
            caller_file=frame.f_code.co_filename.split("/")[-1],
            caller_name=frame.f_code.co_name,
            caller_line=frame.f_lineno,
            context=self.context,
            elapsed=elapsed,
            message=message.replace("\n", " "),
        )
        self.logger.log(level=level, msg=line.json(exclude_none=True))

    @contextlib.contextmanager
    def timed(self, stage: str, level: int = logging.INFO) -> Iterator[None]:
        """Logs ``stage`` with its wall time once the block finishes, at ERROR if it raised."""
        start = time.perf_counter()
        # contextmanager adds two frames between the caller and this one
        try:
            yield
        except BaseException as exc:
            self.log(f"{stage} failed: {exc}", logging.ERROR, elapsed=time.perf_counter() - start, stacklevel=3)
            raise
        self.log(f"{stage} done", level, elapsed=time.perf_counter() - start, stacklevel=3)
