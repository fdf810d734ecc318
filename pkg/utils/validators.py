import json
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError

RATIONAL_PATTERN = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")

RatLike = Union[int, str]


def validate_rational(value: RatLike) -> bool:
    """Check that a value reads as an exact rational "p" or "p/q".

    Args:
        value: int or string to check

    Returns:
        True if the value parses, False otherwise
    """
    if isinstance(value, bool):
        return False
    if isinstance(value, int):
        return True
    if not isinstance(value, str) or not RATIONAL_PATTERN.match(value):
        return False
    return not value.replace(" ", "").endswith("/0")


def validate_place(value: Union[int, str]) -> bool:
    """Check that a place is "arch" or an integer >= 2 (primality is checked later)."""
    if value == "arch":
        return True
    try:
        return int(value) >= 2
    except (TypeError, ValueError):
        return False


def _check_rationals(values: List[RatLike]) -> List[RatLike]:
    for value in values:
        if not validate_rational(value):
            raise ValueError(f"{value!r} is not a rational of the form p or p/q")
    return values


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class StartSpec(_Model):
    """Start point c = a/b with a, b polynomials in λ (ascending coefficients)."""

    a: List[RatLike] = Field(default_factory=list)
    b: List[RatLike] = Field(default_factory=lambda: [1])

    @field_validator("a", "b")
    @classmethod
    def _rationals(cls, v):
        return _check_rationals(v)


class FamilySpec(_Model):
    """P and Q as lists (one per power of x, ascending) of λ-coefficient lists."""

    P: List[List[RatLike]]
    Q: List[List[RatLike]] = Field(default_factory=lambda: [[1]])
    start: StartSpec = Field(default_factory=StartSpec)

    @field_validator("P", "Q")
    @classmethod
    def _nested_rationals(cls, v):
        if not v:
            raise ValueError("polynomial needs at least one coefficient")
        for row in v:
            _check_rationals(row)
        return v


class MapSpec(_Model):
    """A single map P(x)/Q(x) over Q, ascending coefficients."""

    P: List[RatLike]
    Q: List[RatLike] = Field(default_factory=lambda: [1])

    @field_validator("P", "Q")
    @classmethod
    def _rationals(cls, v):
        return _check_rationals(v)


class Bounds(_Model):
    max_pre: int = Field(2, ge=0)
    max_per: int = Field(2, ge=1)
    n_max: int = Field(8, ge=0)
    sample_size: int = Field(32, ge=1)
    L: Optional[float] = Field(None, gt=0)
    tol: float = Field(1e-9, gt=0)
    alg_tol: float = Field(1e-6, gt=0)
    alg_levels: int = Field(8, ge=1)
    max_degree: int = Field(5000, ge=1)
    max_bits: int = Field(1_000_000, ge=1)
    normalize_cap: int = Field(8, ge=0)


class PlotSpec(_Model):
    center_re: float = 0.0
    center_im: float = 0.0
    width: float = Field(4.0, gt=0)
    resolution: int = Field(64, ge=1)
    levels: int = Field(30, ge=1)


class P2Spec(_Model):
    """The P² family [P(X,Z) + λYZ^(d-1) : Q(Y,Z) + μXZ^(d-1) : Z^d].

    P and Q list integer coefficients of X^i Z^(d-i) (resp. Y^i Z^(d-i)), ascending in i.
    """

    P: List[int]
    Q: List[int]
    lam: RatLike = 0
    mu: RatLike = 0
    a: RatLike = 1
    b: RatLike = 1
    n: int = Field(3, ge=0)
    k: int = Field(1, ge=1)

    @field_validator("lam", "mu", "a", "b")
    @classmethod
    def _rational(cls, v):
        _check_rationals([v])
        return v


class PcfSpec(_Model):
    """Polynomials f, g in z and the parameter curve t -> (x(t), y(t))."""

    f: List[RatLike]
    g: List[RatLike]
    x_of_t: List[RatLike] = Field(default_factory=lambda: [0, 1])
    y_of_t: List[RatLike] = Field(default_factory=lambda: [0, 1])

    @field_validator("f", "g", "x_of_t", "y_of_t")
    @classmethod
    def _rationals(cls, v):
        return _check_rationals(v)


class ExperimentConfig(_Model):
    """Everything a CLI run reads; flags override fields after loading."""

    family: Optional[FamilySpec] = None
    family2: Optional[FamilySpec] = None
    map: Optional[MapSpec] = None
    point: Optional[RatLike] = None
    minpoly: Optional[List[RatLike]] = None
    lam: Optional[RatLike] = None
    place: Union[int, str] = "arch"
    region: Literal["U", "V"] = "U"
    samples: List[RatLike] = Field(default_factory=list)
    k: int = Field(1, ge=0)
    u: List[RatLike] = Field(default_factory=lambda: [1, 0])
    bounds: Bounds = Field(default_factory=Bounds)
    plot: PlotSpec = Field(default_factory=PlotSpec)
    p2: Optional[P2Spec] = None
    pcf: Optional[PcfSpec] = None
    out: str = "out"
    seed: int = Field(0, ge=0)
    threads: int = Field(1, ge=1)

    @field_validator("place")
    @classmethod
    def _place(cls, v):
        if not validate_place(v):
            raise ValueError(f"place must be 'arch' or a prime, got {v!r}")
        return v if v == "arch" else int(v)

    @field_validator("samples", "u")
    @classmethod
    def _rationals(cls, v):
        return _check_rationals(v)

    @field_validator("minpoly")
    @classmethod
    def _optional_rationals(cls, v):
        return v if v is None else _check_rationals(v)

    @field_validator("point", "lam")
    @classmethod
    def _optional_rational(cls, v):
        if v is not None and not (isinstance(v, str) and v.strip().lower() in ("inf", "infinity")):
            _check_rationals([v])
        return v

    @model_validator(mode="after")
    def _section_pair(self):
        if len(self.u) != 2:
            raise ValueError("u must have exactly two entries (u0, u1)")
        return self


def _format_errors(exc: ValidationError) -> List[str]:
    lines = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{where}: {err['msg']}")
    return lines


def validate_config(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate a raw config mapping.

    Args:
        data: Parsed JSON object

    Returns:
        The validated configuration

    Raises:
        ConfigError: with one line per failing field
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(_format_errors(exc))) from exc


def load_config(path: Optional[Union[str, Path]]) -> ExperimentConfig:
    """Read and validate a JSON config file; no path gives the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return validate_config(raw)
