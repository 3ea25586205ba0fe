"""Domains, midpoint tensor quadrature, compact subsets and zero-set sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Tuple

import numpy as np

if TYPE_CHECKING:
    from .weights import Weight


class EmptyZeroSet(ValueError):
    """Raised when the zero set of a weight does not meet the requested region."""


@dataclass(frozen=True)
class Rect:
    center: complex
    half_width_x: float
    half_width_y: float

    def __post_init__(self):
        if not (self.half_width_x > 0 and self.half_width_y > 0):
            raise ValueError(
                f"half widths must be positive, got ({self.half_width_x}, {self.half_width_y})"
            )
        object.__setattr__(self, "center", complex(self.center))

    @property
    def xmin(self) -> float:
        return self.center.real - self.half_width_x

    @property
    def xmax(self) -> float:
        return self.center.real + self.half_width_x

    @property
    def ymin(self) -> float:
        return self.center.imag - self.half_width_y

    @property
    def ymax(self) -> float:
        return self.center.imag + self.half_width_y

    @property
    def area(self) -> float:
        return 4.0 * self.half_width_x * self.half_width_y

    @property
    def scale(self) -> float:
        return max(self.half_width_x, self.half_width_y)

    def contains(self, z, tol: float = 0.0):
        z = np.asarray(z)
        return (
            (z.real >= self.xmin - tol)
            & (z.real <= self.xmax + tol)
            & (z.imag >= self.ymin - tol)
            & (z.imag <= self.ymax + tol)
        )

    def contains_disk(self, a: complex, r: float) -> bool:
        return (
            a.real - r >= self.xmin
            and a.real + r <= self.xmax
            and a.imag - r >= self.ymin
            and a.imag + r <= self.ymax
        )


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Quadrature on a rectangle, or on a product of rectangles in C^n.

    ``nodes`` has shape ``(N,)`` for n = 1 and ``(N, n)`` for n > 1.
    ``resolution`` and ``rect`` describe one factor; all factors share them.
    """

    nodes: np.ndarray
    weights: np.ndarray
    resolution: Tuple[int, int]
    cell_area: float
    rect: Rect
    dim: int = 1

    @property
    def spacing(self) -> Tuple[float, float]:
        nx, ny = self.resolution
        return 2 * self.rect.half_width_x / nx, 2 * self.rect.half_width_y / ny

    @property
    def h(self) -> float:
        return max(self.spacing)

    def __len__(self):
        return len(self.weights)


def build_grid(rect: Rect, nx: int, ny: int) -> Quadrature:
    """Midpoint rule on ``rect``: cell centers with weight equal to the cell area."""
    if nx < 2 or ny < 2:
        raise ValueError(f"degenerate grid: need nx, ny >= 2, got ({nx}, {ny})")
    hx = 2 * rect.half_width_x / nx
    hy = 2 * rect.half_width_y / ny
    x = rect.xmin + hx * (np.arange(nx) + 0.5)
    y = rect.ymin + hy * (np.arange(ny) + 0.5)
    X, Y = np.meshgrid(x, y, indexing="ij")
    nodes = (X + 1j * Y).ravel()
    weights = np.full(nodes.size, hx * hy)
    return Quadrature(nodes, weights, (nx, ny), hx * hy, rect, 1)


def tensor_grid(rect: Rect, nx: int, ny: int, dim: int = 2) -> Quadrature:
    """Product midpoint rule on ``rect**dim`` inside C^dim."""
    base = build_grid(rect, nx, ny)
    axes = np.meshgrid(*([base.nodes] * dim), indexing="ij")
    nodes = np.stack([a.ravel() for a in axes], axis=-1)
    weights = np.full(nodes.shape[0], base.cell_area**dim)
    return Quadrature(nodes, weights, (nx, ny), base.cell_area, rect, dim)


@dataclass(frozen=True)
class CompactK:
    rect: Rect
    margin: float

    def contains(self, z):
        z = np.asarray(z)
        if z.ndim == 2:
            return np.all(self.rect.contains(z), axis=-1)
        return self.rect.contains(z)


def shrink_to_compact(rect: Rect, margin: float) -> CompactK:
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    if margin >= min(rect.half_width_x, rect.half_width_y):
        raise ValueError(
            f"margin {margin} collapses the rectangle "
            f"(half widths {rect.half_width_x}, {rect.half_width_y})"
        )
    inner = Rect(rect.center, rect.half_width_x - margin, rect.half_width_y - margin)
    return CompactK(inner, float(margin))


@dataclass(frozen=True)
class ZeroSetCurve:
    """Parametric description t -> z(t) of a weight's zero set.

    ``bounds(rect)`` returns the parameter interval worth sampling for that
    rectangle, or None when the curve cannot meet it.
    """

    point: Callable[[np.ndarray], np.ndarray]
    bounds: Callable[[Rect], Optional[Tuple[float, float]]]


@dataclass(frozen=True, eq=False)
class ZeroSetSample:
    points: np.ndarray
    tolerance: float

    def __len__(self):
        return len(self.points)

    def restrict(self, K: CompactK) -> "ZeroSetSample":
        return ZeroSetSample(self.points[K.contains(self.points)], self.tolerance)


def sample_zero_set(w: "Weight", rect: Rect, n_samples: int, tolerance: float = 1e-12) -> ZeroSetSample:
    """Points of E = {phi = 0} inside ``rect``.

    Uses the weight's parametric zero set when it has one.  Otherwise the
    minima of phi along grid lines are bracketed by sign changes of the
    directional derivative, refined by bisection, and kept if phi <= tolerance.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if w.zero_set is not None:
        pts = _sample_curve(w.zero_set, rect, n_samples)
    elif w.dim != 1:
        raise ValueError("grid-line bisection is only available for n = 1 weights")
    else:
        pts = _bisect_grid_lines(w, rect, n_samples)
    if len(pts):
        pts = pts[w(pts) <= tolerance]
    if len(pts) == 0:
        raise EmptyZeroSet(f"zero set of {w.name!r} does not meet {rect}")
    return ZeroSetSample(pts, tolerance)


def _inside(rect: Rect, z: np.ndarray) -> np.ndarray:
    inside = rect.contains(z)
    return np.all(inside, axis=-1) if inside.ndim == 2 else inside


def _sample_curve(curve: ZeroSetCurve, rect: Rect, n: int) -> np.ndarray:
    tb = curve.bounds(rect)
    if tb is None:
        return np.empty(0, dtype=complex)
    t = np.linspace(tb[0], tb[1], 64 * n)
    z = curve.point(t)
    z = z[_inside(rect, z)]
    if len(z) <= n:
        return z
    idx = np.round(np.linspace(0, len(z) - 1, n)).astype(int)
    return z[idx]


def _bisect_grid_lines(w: "Weight", rect: Rect, n: int, iters: int = 200) -> np.ndarray:
    found = []
    for axis in (0, 1):
        lines = np.linspace(rect.ymin, rect.ymax, n) if axis == 0 else np.linspace(rect.xmin, rect.xmax, n)
        lo_s, hi_s = (rect.xmin, rect.xmax) if axis == 0 else (rect.ymin, rect.ymax)
        s = np.linspace(lo_s, hi_s, 2 * n + 1)
        for c in lines:
            z = s + 1j * c if axis == 0 else c + 1j * s
            d = w.grad(z)[axis]
            # a minimum of phi along the line: derivative goes from - to +
            for i in np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]:
                a, b = s[i], s[i + 1]
                for _ in range(iters):
                    m = 0.5 * (a + b)
                    zm = m + 1j * c if axis == 0 else c + 1j * m
                    if w.grad(np.array([zm]))[axis][0] < 0:
                        a = m
                    else:
                        b = m
                    if b - a <= 4 * np.finfo(float).eps * max(1.0, abs(m)):
                        break
                t = 0.5 * (a + b)
                found.append(t + 1j * c if axis == 0 else c + 1j * t)
    pts = np.unique(np.asarray(found, dtype=complex))
    return pts[rect.contains(pts)] if pts.size else pts
