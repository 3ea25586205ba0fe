"""Functionals of (u, v, f, phi, k) whose k-dependence the estimates predict,
the local Cauchy-Pompeiu reconstruction, and log-log rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import CompactK, EmptyZeroSet, Quadrature, ZeroSetSample
from .weights import Weight, chi_k


class UndefinedRatio(ValueError):
    """The denominator vanishes (f = 0, e.g. u holomorphic)."""


def _abs2(a) -> np.ndarray:
    a = np.asarray(a)
    sq = np.abs(a) ** 2
    # (0,1)-forms in n > 1 come as (N, n): pointwise norm is the component sum
    return sq.sum(axis=-1) if sq.ndim == 2 else sq


def _norm(z) -> np.ndarray:
    z = np.asarray(z)
    return np.linalg.norm(z, axis=-1) if z.ndim == 2 else np.abs(z)


def _ratio(num: float, den: float, what: str) -> float:
    if not den > 0:
        raise UndefinedRatio(f"{what}: f vanishes, ratio undefined")
    return float(num / den)


def sup_error_on_E(u: Callable, p: Callable, E: ZeroSetSample, K: CompactK) -> float:
    """max over E-points inside K of |u - P_k u|."""
    pts = E.points[K.contains(E.points)]
    if len(pts) == 0:
        raise EmptyZeroSet("E does not meet K")
    return float(np.max(np.abs(u(pts) - p(pts))))


def l2_ratio(v, f, q: Quadrature, w: Weight, k: float) -> float:
    e = q.weights * np.exp(-k * w.phi(q.nodes))
    return _ratio(np.sum(_abs2(v) * e), np.sum(_abs2(f) * e), "l2_ratio")


def weighted_sup_on_K(v, f, K: CompactK, q: Quadrature, w: Weight, k: float) -> float:
    """sup_K |v|^2 e^{-k phi} / sup_Omega |f|^2 e^{-k phi}, both over nodes."""
    e = np.exp(-k * w.phi(q.nodes))
    inside = K.contains(q.nodes)
    num = np.max(_abs2(v)[inside] * e[inside]) if inside.any() else 0.0
    return _ratio(num, np.max(_abs2(f) * e), "weighted_sup_on_K")


def agmon_ratio(v, f, q: Quadrature, w: Weight, k: float, a, variant: str = "distance") -> float:
    """Ratio of the L^2(e^{-k phi}) integrals of |v|^2 and |f|^2 with the extra
    factor e^{-sqrt(k)|z - a|} ("distance") or e^{-chi_k(z)} ("chi").

    ``w`` should already be rescaled to curvature 5.
    """
    if variant == "distance":
        extra = math.sqrt(k) * _norm(q.nodes - np.asarray(a))
    elif variant == "chi":
        extra = chi_k(q.nodes, a, k)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    e = q.weights * np.exp(-k * w.phi(q.nodes) - extra)
    return _ratio(np.sum(_abs2(v) * e), np.sum(_abs2(f) * e), "agmon_ratio")


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s**2)


def cutoff_xi(t):
    """C^2 cutoff: 1 for t <= 1/2, 0 for t >= 1, quintic smoothstep between."""
    t = np.asarray(t, dtype=float)
    out = 1.0 - _smoothstep(2.0 * (t - 0.5))
    return out[()] if out.ndim == 0 else out


def cutoff_xi_prime(t):
    t = np.asarray(t, dtype=float)
    s = 2.0 * (t - 0.5)
    inside = (s > 0) & (s < 1)
    out = np.where(inside, -2.0 * 30 * s**2 * (1 - s) ** 2, 0.0)
    return out[()] if out.ndim == 0 else out


def _check_ball(q: Quadrature, a, r: float):
    coords = np.atleast_1d(np.asarray(a, dtype=complex))
    for c in coords:
        if not q.rect.contains_disk(complex(c), r):
            raise ValueError(f"ball of radius {r:.4g} around {a} is not contained in the domain")


LOCAL_CELLS_PER_RADIUS = 64


def local_spacing(q: Quadrature, r: float) -> float:
    """Spacing of the local ball grid: the domain grid's, refined to at least
    LOCAL_CELLS_PER_RADIUS cells per radius (n = 1) so the disk is resolved."""
    if q.dim == 1:
        return min(q.h, r / LOCAL_CELLS_PER_RADIUS)
    return q.h


def local_grid(a, r: float, h: float, dim: int = 1):
    """Midpoint grid of spacing h on the cube of half-width >= r around a,
    with a at a vertex so no node sits on a.  Returns (nodes, cell volume)."""
    m = max(1, int(math.ceil(r / h)))
    s = h * (np.arange(-m, m) + 0.5)
    if dim == 1:
        X, Y = np.meshgrid(s, s, indexing="ij")
        return complex(a) + (X + 1j * Y).ravel(), h * h
    axes = np.meshgrid(*([s] * (2 * dim)), indexing="ij")
    a = np.asarray(a, dtype=complex)
    nodes = np.stack([axes[2 * i].ravel() + 1j * axes[2 * i + 1].ravel() for i in range(dim)], axis=-1) + a
    return nodes, h ** (2 * dim)


def bm_reconstruct(
    v: Callable, k: float, a: complex, q: Quadrature,
    dbar: Optional[Callable] = None, spacing: Optional[float] = None,
) -> complex:
    """Recover v(a) from the Cauchy-Pompeiu formula applied to v * xi(k|z - a|^2):

        v(a) = -(1/pi) int [xi dbar v / (z - a) + k xi' v] dA

    The integral runs on a local midpoint grid (see ``local_spacing``)
    positioned so that a is a grid vertex; the symmetric node layout cancels
    the leading part of the 1/(z - a) singularity.  ``dbar`` defaults to
    ``v.dbar``; ``spacing`` overrides the local grid spacing.
    """
    if q.dim != 1:
        raise ValueError("bm_reconstruct is implemented for n = 1")
    a = complex(a)
    r = 1.0 / math.sqrt(k)
    _check_ball(q, a, r)
    dbar = dbar if dbar is not None else v.dbar
    z, dA = local_grid(a, r, spacing or local_spacing(q, r))
    d = z - a
    t = k * np.abs(d) ** 2
    inside = t < 1.0
    z, d, t = z[inside], d[inside], t[inside]
    integrand = cutoff_xi(t) * dbar(z) / d + k * cutoff_xi_prime(t) * v(z)
    return complex(-np.sum(integrand) * dA / math.pi)


def ball_sup(v: Callable, k: float, a, q: Quadrature) -> float:
    """max |v| over the local-grid nodes in {|z - a|^2 < 1/k}."""
    r = 1.0 / math.sqrt(k)
    z, _ = local_grid(a, r, local_spacing(q, r), q.dim)
    z = z[_norm(z - np.asarray(a)) ** 2 < 1.0 / k]
    return float(np.sqrt(np.max(_abs2(v(z)))))


@dataclass(frozen=True)
class LocalEstimate:
    lhs: float
    rhs_l2: float
    rhs_f: float

    @property
    def ratio(self) -> float:
        den = self.rhs_l2 + self.rhs_f
        return self.lhs / den if den > 0 else math.inf


def local_estimate_check(v: Callable, f: Callable, k: float, a, q: Quadrature) -> LocalEstimate:
    """Both sides of |v(a)|^2 <= C (k^n int_B |v|^2 + sup_B |f|^2 / k) on the
    ball B = {|z - a|^2 < 1/k}."""
    n = q.dim
    r = 1.0 / math.sqrt(k)
    _check_ball(q, a, r)
    z, dV = local_grid(a, r, local_spacing(q, r), n)
    ball = _norm(z - np.asarray(a)) ** 2 < 1.0 / k
    z = z[ball]
    a_pt = np.asarray(a, dtype=complex)[None] if n > 1 else np.array([complex(a)])
    lhs = float(_abs2(v(a_pt))[0])
    rhs_l2 = float(k**n * np.sum(_abs2(v(z))) * dV)
    rhs_f = float(np.max(_abs2(f(z))) / k)
    return LocalEstimate(lhs, rhs_l2, rhs_f)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    k_values: List[float]
    errors: List[float]


def fit_rate(k_values: Sequence[float], errors: Sequence[float]) -> RateFit:
    """Least-squares line through (log k, log error)."""
    k = np.asarray(k_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if k.size != e.size or k.size < 3:
        raise ValueError("need at least 3 (k, error) pairs")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("errors must be positive and finite")
    if np.any(np.diff(k) <= 0) or k[0] <= 0:
        raise ValueError("k values must be positive and strictly increasing")
    x, y = np.log(k), np.log(e)
    dx, dy = x - x.mean(), y - y.mean()
    slope = float(np.dot(dx, dy) / np.dot(dx, dx))
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    ss_tot = float(np.dot(dy, dy))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(slope, intercept, r2, k.tolist(), e.tolist())


def spread(values: Sequence[float]) -> float:
    """max/min of positive values (inf if any is zero)."""
    vals = np.asarray(values, dtype=float)
    lo = vals.min()
    return float(vals.max() / lo) if lo > 0 else math.inf


CSV_COLUMNS = (
    "k", "degree", "cond", "sup_err_E", "k_l2_ratio", "k_sup_ratio",
    "k_agmon_ratio_a1", "k_agmon_ratio_a2", "bm_lhs", "bm_rhs_l2", "bm_rhs_f",
)


@dataclass
class RatioReport:
    """Per-k values of every functional; None where a scenario was disabled."""

    k: float
    basis_degree: Optional[int] = None
    gram_condition: Optional[float] = None
    effective_rank: Optional[int] = None
    sup_err_E: Optional[float] = None
    l2_ratio: Optional[float] = None
    sup_ratio: Optional[float] = None
    agmon_ratios: List[Tuple[complex, float]] = field(default_factory=list)
    agmon_chi_ratios: List[Tuple[complex, float]] = field(default_factory=list)
    agmon_degree: Optional[int] = None
    bm_lhs: Optional[float] = None
    bm_rhs_l2_term: Optional[float] = None
    bm_rhs_f_term: Optional[float] = None
    bm_value: Optional[complex] = None
    v_at_center: Optional[complex] = None
    bm_ball_sup: Optional[float] = None

    def csv_row(self) -> list:
        def scaled(x):
            return None if x is None else self.k * x

        agmon = [self.k * r for _, r in self.agmon_ratios[:2]]
        agmon += [None] * (2 - len(agmon))
        return [
            self.k, self.basis_degree, self.gram_condition, self.sup_err_E,
            scaled(self.l2_ratio), scaled(self.sup_ratio), agmon[0], agmon[1],
            self.bm_lhs, self.bm_rhs_l2_term, self.bm_rhs_f_term,
        ]
