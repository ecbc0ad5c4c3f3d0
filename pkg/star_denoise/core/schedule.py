import json
import logging
import math

from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .config import DEFAULT_PATCH, DEFAULT_STAGES, PARAM_INIT
from .dictionary import DictionarySet
from .errors import FormatError, ParamError, ScheduleParseError

logger = logging.getLogger(__name__)

ModelName = Literal["star", "star_s"]

# Error types pydantic reports for a value that parsed but broke a bound
_BOUND_ERRORS = {"greater_than", "greater_than_equal", "finite_number"}


class DictionaryOverride(BaseModel):
    d1: List[List[float]]
    d2: List[List[float]]
    d3: List[List[float]]

    def to_set(self) -> DictionarySet:
        return DictionarySet.from_lists(self.d1, self.d2, self.d3)


class StageParams(BaseModel):
    """Scalar parameters of one ADMM stage.

    ``beta`` and ``lipschitz`` divide, so they must be strictly positive.
    The regularization weights may be zero, which switches the matching
    prior off.
    """

    lam: float = Field(PARAM_INIT, alias="lambda")
    gamma1: float = PARAM_INIT
    gamma2: float = PARAM_INIT
    beta: float = PARAM_INIT
    mu: float = PARAM_INIT
    lipschitz: float = PARAM_INIT
    dictionaries: Optional[DictionaryOverride] = None

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @field_validator("lam", "gamma1", "gamma2", "mu")
    @classmethod
    def _non_negative(cls, value: float, info) -> float:
        if not math.isfinite(value) or value < 0:
            raise ParamError(f"{info.field_name} must be finite and >= 0, got {value}")
        return value

    @field_validator("beta", "lipschitz")
    @classmethod
    def _positive(cls, value: float, info) -> float:
        if not math.isfinite(value) or value <= 0:
            raise ParamError(f"{info.field_name} must be finite and > 0, got {value}")
        return value

    def dictionary_set(self) -> Optional[DictionarySet]:
        return self.dictionaries.to_set() if self.dictionaries else None

    def to_record(self) -> dict:
        record = {
            "lambda": self.lam,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "beta": self.beta,
            "mu": self.mu,
            "lipschitz": self.lipschitz,
        }
        if self.dictionaries is not None:
            record["dictionaries"] = self.dictionaries.model_dump()
        return record


class Schedule(BaseModel):
    model: ModelName = "star"
    stages: List[StageParams]

    @field_validator("stages")
    @classmethod
    def _not_empty(cls, stages: List[StageParams]) -> List[StageParams]:
        if not stages:
            raise ValueError("a schedule needs at least one stage")
        return stages

    @property
    def k(self) -> int:
        return len(self.stages)

    def to_record(self) -> dict:
        return {"model": self.model, "stages": [s.to_record() for s in self.stages]}


def normalize_model(name: str) -> ModelName:
    """Accept CLI spellings such as ``star-s``."""
    key = name.strip().lower().replace("-", "_")
    if key not in ("star", "star_s"):
        raise ParamError(f"unknown model {name!r}; expected star or star-s")
    return key


def default_schedule(
    model: str = "star",
    k: int = DEFAULT_STAGES,
    patch_dims: Optional[Sequence[int]] = None,
    embed_dictionaries: bool = False,
) -> Schedule:
    """K identical stages with every scalar at the initial value."""
    if k < 1:
        raise ParamError(f"stage count must be >= 1, got {k}")
    override = None
    if embed_dictionaries:
        dims = tuple(patch_dims) if patch_dims else (DEFAULT_PATCH,) * 3
        override = DictionaryOverride(**DictionarySet.dct(dims).to_lists())
    stage = StageParams(dictionaries=override)
    return Schedule(model=normalize_model(model), stages=[stage] * k)


def constant_schedule(model: str, params: StageParams, k: int) -> Schedule:
    return Schedule(model=normalize_model(model), stages=[params] * k)


def parse_schedule(text: str) -> Schedule:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScheduleParseError(f"malformed schedule: {e.msg}", line=e.lineno) from e
    if isinstance(data, dict) and isinstance(data.get("model"), str):
        try:
            data["model"] = normalize_model(data["model"])
        except ParamError as e:
            raise ScheduleParseError(str(e), line=_line_of(text, '"model"')) from e
    try:
        return Schedule.model_validate(data)
    except ValidationError as e:
        for error in e.errors():
            cause = error.get("ctx", {}).get("error")
            if isinstance(cause, ParamError):
                raise ParamError(f"schedule {_location(error)}: {cause}") from e
            if error["type"] in _BOUND_ERRORS:
                raise ParamError(f"schedule {_location(error)}: {error['msg']}") from e
        first = e.errors()[0]
        key = str(first["loc"][-1]) if first["loc"] else None
        raise ScheduleParseError(
            f"invalid schedule at {_location(first)}: {first['msg']}",
            line=_line_of(text, f'"{key}"') if key else None,
        ) from e


def _location(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def _line_of(text: str, needle: str) -> Optional[int]:
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def load_schedule(path: Union[str, Path]) -> Schedule:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScheduleParseError(f"cannot read schedule {path}: {e.strerror}") from e
    schedule = parse_schedule(text)
    logger.info(f"Loaded {schedule.model} schedule with {schedule.k} stages from {path}")
    return schedule


def save_schedule(schedule: Schedule, path: Union[str, Path]):
    try:
        with open(path, "w") as f:
            json.dump(schedule.to_record(), f, indent=2)
    except OSError as e:
        raise FormatError(f"cannot write schedule {path}: {e.strerror or e}") from e
