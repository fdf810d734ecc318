"""Escape-rate pictures of the λ-plane for a family and a moving point."""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from errors import InvalidArgumentError
from family.map_family import MapFamily, StartPoint
from utils.reporting import map_ordered, write_json
from utils.validators import PlotSpec

logger = logging.getLogger(__name__)

MAX_GRAY = 255


@dataclass
class PlotGrid:
    """Per-pixel escape estimates; row 0 is the top edge of the window."""

    center: complex
    width: float
    resolution: int
    levels: int
    values: np.ndarray
    seed: int = 0

    def __post_init__(self):
        if self.resolution < 1:
            raise InvalidArgumentError("resolution must be at least 1")
        if self.values.shape != (self.resolution, self.resolution):
            raise InvalidArgumentError(f"grid values must be {self.resolution}x{self.resolution}")

    @property
    def v_max(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def sidecar(self) -> Dict:
        return {
            "window": {"center": [self.center.real, self.center.imag], "width": self.width},
            "resolution": self.resolution,
            "levels": self.levels,
            "v_max": self.v_max,
            "seed": self.seed,
        }


def pixel_centers(center: complex, width: float, resolution: int) -> np.ndarray:
    step = width / resolution
    offsets = (np.arange(resolution) + 0.5) * step - width / 2
    re = center.real + offsets
    im = center.imag - offsets
    return re[np.newaxis, :] + im[:, np.newaxis] * 1j


def _homogeneous(coeffs: Sequence[np.ndarray], X: np.ndarray, Y: np.ndarray, d: int) -> np.ndarray:
    """Σ c_i X^i Y^(d-i) with per-pixel coefficients."""
    total = np.zeros_like(X)
    for i, c in enumerate(coeffs):
        total = total + c * X ** i * Y ** (d - i)
    return total


def _lambda_coeffs(polys) -> List[List[float]]:
    return [[float(c) for c in p.coefficients] or [0.0] for p in polys]


def _escape_rows(job: Tuple[List[List[float]], List[List[float]], List[float], List[float], int,
                            np.ndarray, int]) -> np.ndarray:
    """Escape rate log‖F^n(a, b)‖ / d^n of the homogeneous lift, per pixel."""
    P, Q, a, b, d, lam, levels = job
    polyval = np.polynomial.polynomial.polyval
    p_coeffs = [polyval(lam, c) for c in P] + [np.zeros_like(lam)] * (d + 1 - len(P))
    q_coeffs = [polyval(lam, c) for c in Q] + [np.zeros_like(lam)] * (d + 1 - len(Q))
    X, Y = polyval(lam, a).astype(complex), polyval(lam, b).astype(complex)
    with np.errstate(all="ignore"):
        norm = np.maximum(np.abs(X), np.abs(Y))
        rate = np.log(norm)
        X, Y = X / norm, Y / norm
        for n in range(1, levels + 1):
            X, Y = _homogeneous(p_coeffs, X, Y, d), _homogeneous(q_coeffs, X, Y, d)
            norm = np.maximum(np.abs(X), np.abs(Y))
            rate = rate + np.log(norm) / d ** n
            X, Y = X / norm, Y / norm
    # a pixel where the lift degenerates carries no estimate
    rate = np.where(np.isfinite(rate), rate, 0.0)
    return np.maximum(rate, 0.0)


def compute_plot_grid(fam: MapFamily, start: StartPoint, spec: PlotSpec, seed: int = 0,
                      threads: int = 1) -> PlotGrid:
    """Escape estimate of ĥ_{f_λ}(c(λ)) at the archimedean place over a square window.

    Args:
        fam: Family; λ ranges over complex pixel centers
        start: Moving point
        spec: Window, resolution and number of levels
        seed: Recorded in the sidecar
        threads: Worker processes; rows are split between them

    Returns:
        The grid, values >= 0
    """
    center = complex(spec.center_re, spec.center_im)
    lam = pixel_centers(center, spec.width, spec.resolution)
    P, Q = _lambda_coeffs(fam.P), _lambda_coeffs(fam.Q)
    a = [float(c) for c in start.a.coefficients] or [0.0]
    b = [float(c) for c in start.b.coefficients] or [0.0]
    chunks = np.array_split(lam, min(max(threads, 1), spec.resolution), axis=0)
    jobs = [(P, Q, a, b, fam.d, chunk, spec.levels) for chunk in chunks]
    values = np.vstack(map_ordered(_escape_rows, jobs, threads))
    logger.info("plot grid %dx%d at %s width %g, v_max %.6g", spec.resolution, spec.resolution, center,
                spec.width, float(values.max()))
    return PlotGrid(center, spec.width, spec.resolution, spec.levels, values, seed)


def gray_levels(values: np.ndarray) -> np.ndarray:
    """floor(255·v/v_max) clamped to [0, 255]; an all-zero grid stays black."""
    v_max = float(values.max()) if values.size else 0.0
    if v_max <= 0 or not math.isfinite(v_max):
        return np.zeros(values.shape, dtype=np.uint8)
    scaled = np.floor(MAX_GRAY * (np.clip(values, 0.0, None) / v_max))
    return np.clip(scaled, 0, MAX_GRAY).astype(np.uint8)


def emit_plot(grid: PlotGrid, path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write the grid as an 8-bit binary PGM plus a sidecar JSON.

    Returns:
        Paths of the image and the sidecar
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = gray_levels(grid.values)
    header = f"P5\n{grid.resolution} {grid.resolution}\n{MAX_GRAY}\n".encode("ascii")
    try:
        path.write_bytes(header + pixels.tobytes())
    except OSError as exc:
        logger.error("cannot write %s: %s", path, exc)
        raise
    sidecar = write_json(path.with_suffix(".json"), grid.sidecar())
    return path, sidecar


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """Pixels of a P5 file written by emit_plot."""
    data = Path(path).read_bytes()
    magic, dims, maxval, body = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise InvalidArgumentError(f"{path} is not an 8-bit P5 image")
    width, height = (int(x) for x in dims.split())
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width)
