from typing import Any, Dict, Optional


class StarError(Exception):
    """Base class for errors surfaced to the CLI as data/numeric failures"""

    exit_code = 2

    def to_record(self) -> Dict[str, Any]:
        return {
            "status": "error",
            "error": type(self).__name__,
            "message": str(self),
        }


class DimsError(StarError, ValueError):
    pass


class ParamError(StarError, ValueError):
    pass


class NumericError(StarError, ArithmeticError):
    def __init__(self, message: str, stage: Optional[int] = None):
        super().__init__(message)
        self.stage = stage

    def to_record(self) -> Dict[str, Any]:
        record = super().to_record()
        if self.stage is not None:
            record["stage"] = self.stage
        return record


class ModeError(StarError):
    pass


class FormatError(StarError):
    pass


class MetricUndefined(StarError):
    pass


class ScheduleParseError(StarError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line

    def to_record(self) -> Dict[str, Any]:
        record = super().to_record()
        if self.line is not None:
            record["line"] = self.line
        return record
