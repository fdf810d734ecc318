import json
import re
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from algebra.polynomials import UniPoly
from algebra.rationals import as_rat
from dynamics.maps import ProjPointP1, RationalMap, as_point
from errors import ConfigError, DynamicsError
from family.map_family import MapFamily, StartPoint
from p2family.p2_map import P2Family, ProjPointP2
from utils.validators import FamilySpec, MapSpec, P2Spec

RatLike = Union[int, str, Fraction]

_SEPARATORS = re.compile(r"[,\s]+")


def parse_rational_list(text: str) -> List[Fraction]:
    """Parse a flag value into rationals.

    Accepts a JSON array ("[1, \"-1/2\"]") or a comma/space separated
    list ("1, -1/2").

    Args:
        text: Raw flag value

    Returns:
        List of rationals, possibly empty
    """
    text = text.strip()
    try:
        if text.startswith("["):
            items = json.loads(text)
        else:
            items = [item for item in _SEPARATORS.split(text) if item]
        return [as_rat(item) for item in items]
    except (ValueError, DynamicsError) as exc:
        raise ConfigError(f"cannot read {text!r} as a list of rationals: {exc}") from exc


def parse_poly(values: Union[str, Sequence[RatLike]]) -> UniPoly:
    """An ascending coefficient list (or its flag spelling) as a polynomial."""
    if isinstance(values, str):
        return UniPoly(parse_rational_list(values))
    return UniPoly([as_rat(v) for v in values])


def parse_point(value: RatLike) -> ProjPointP1:
    try:
        return as_point(value)
    except DynamicsError as exc:
        raise ConfigError(f"cannot read point {value!r}: {exc}") from exc


def parse_samples(values: Sequence[RatLike]) -> List[Fraction]:
    return [as_rat(v) for v in values]


def default_samples(count: int) -> List[Fraction]:
    """±1, ..., ±count in a fixed order."""
    return [Fraction(sign * k) for k in range(1, count + 1) for sign in (1, -1)]


def family_from_spec(spec: Optional[FamilySpec], name: str = "family") -> Tuple[MapFamily, StartPoint]:
    """Build the family and its moving point from a validated config section.

    Raises:
        ConfigError: when the section is missing or does not describe a family
    """
    if spec is None:
        raise ConfigError(f"this command needs a '{name}' section in the config")
    try:
        fam = MapFamily([parse_poly(row) for row in spec.P], [parse_poly(row) for row in spec.Q])
        start = StartPoint(parse_poly(spec.start.a), parse_poly(spec.start.b))
    except DynamicsError as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    return fam, start


def map_from_spec(spec: Optional[MapSpec]) -> RationalMap:
    if spec is None:
        raise ConfigError("this command needs a 'map' section in the config")
    try:
        return RationalMap(parse_poly(spec.P), parse_poly(spec.Q))
    except DynamicsError as exc:
        raise ConfigError(f"map: {exc}") from exc


def p2_family_from_spec(spec: Optional[P2Spec]) -> P2Family:
    if spec is None:
        raise ConfigError("this command needs a 'p2' section in the config")
    try:
        return P2Family(spec.P, spec.Q)
    except DynamicsError as exc:
        raise ConfigError(f"p2: {exc}") from exc


def parse_p2_point(text: Union[str, Sequence[RatLike]]) -> ProjPointP2:
    """Read "[X, Y, Z]", "X,Y,Z" or an affine "x,y" as a point of P²."""
    coords = parse_rational_list(text) if isinstance(text, str) else [as_rat(c) for c in text]
    try:
        return ProjPointP2.from_json(coords)
    except DynamicsError as exc:
        raise ConfigError(f"cannot read P² point {text!r}: {exc}") from exc
