"""Gaussian-convolution approximant on E = R and its comparison with P_k.

With phi = (Im z)^2 the weighted Bergman kernel localizes like a Gaussian of
width 1/sqrt(k); the approximant here convolves the trace of u on R with the
unit-mass kernel (k/pi)^{1/2} e^{-k (z - t)^2}, which is entire in z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .estimates import RateFit, fit_rate

N_CONVOLUTION_POINTS = 4096


@dataclass(frozen=True, eq=False)
class GaussianApproximant:
    k: float
    u_restricted: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    n_points: int = N_CONVOLUTION_POINTS

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        if not self.support[0] < self.support[1]:
            raise ValueError("empty support interval")

    def nodes(self) -> Tuple[np.ndarray, float]:
        lo, hi = self.support
        dt = (hi - lo) / self.n_points
        return lo + dt * (np.arange(self.n_points) + 0.5), dt

    def kernel_mass(self, half_width: float = 50.0) -> float:
        """(k/pi)^{1/2} int e^{-k s^2} ds on [-L, L] by the same midpoint rule."""
        L = half_width / math.sqrt(self.k)
        ds = 2 * L / self.n_points
        s = -L + ds * (np.arange(self.n_points) + 0.5)
        return float(math.sqrt(self.k / math.pi) * np.sum(np.exp(-self.k * s * s)) * ds)

    def __call__(self, z):
        return gaussian_approximant(self, z)


def gaussian_approximant(ga: GaussianApproximant, z):
    """G_k u(z) = (k/pi)^{1/2} int u(t) e^{-k (z - t)^2} dt (midpoint rule)."""
    t, dt = ga.nodes()
    ut = np.asarray(ga.u_restricted(t))
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    pref = math.sqrt(ga.k / math.pi) * dt
    for start in range(0, flat.size, 256):
        zz = flat[start : start + 256, None]
        out[start : start + 256] = pref * (np.exp(-ga.k * (zz - t) ** 2) @ ut)
    out = out.reshape(z.shape)
    return out[()] if out.ndim == 0 else out


def gaussian_sup_error(u: Callable, k: float, support: Tuple[float, float], points) -> float:
    """sup over real ``points`` of |G_k u - u|, with u restricted to R."""
    restricted = lambda t: u(np.asarray(t, dtype=float) + 0j)  # noqa: E731
    ga = GaussianApproximant(k, restricted, support)
    pts = np.asarray(points)
    return float(np.max(np.abs(ga(pts) - u(pts))))


@dataclass
class ModelCaseReport:
    bergman_slope: Optional[float]
    gaussian_slope: Optional[float]
    per_k: List[dict] = field(default_factory=list)
    degenerate: bool = False
    bergman_fit: Optional[RateFit] = None
    gaussian_fit: Optional[RateFit] = None


def compare_model_case(
    k_values: Sequence[float],
    bergman_error: Callable[[float], float],
    gaussian_error: Callable[[float], float],
    degenerate_tol: float = 1e-8,
) -> ModelCaseReport:
    """Run both approximants over the k grid and fit a rate to each.

    When every Bergman error is below ``degenerate_tol`` (u already
    holomorphic and in span) there is nothing to fit; the report is flagged
    degenerate and the Bergman slope is None.
    """
    rows = []
    for k in k_values:
        rows.append({"k": float(k), "bergman_err": float(bergman_error(k)), "gaussian_err": float(gaussian_error(k))})
    b = [r["bergman_err"] for r in rows]
    g = [r["gaussian_err"] for r in rows]
    degenerate = max(b) <= degenerate_tol
    bfit = None if degenerate else fit_rate(k_values, b)
    gfit = fit_rate(k_values, g) if min(g) > 0 else None
    return ModelCaseReport(
        bergman_slope=None if bfit is None else bfit.slope,
        gaussian_slope=None if gfit is None else gfit.slope,
        per_k=rows,
        degenerate=degenerate,
        bergman_fit=bfit,
        gaussian_fit=gfit,
    )
