"""Strictly plurisubharmonic model weights and the Agmon weight psi/chi/chi_k.

Convention: in one variable the complex Hessian is phi_{z zbar} = (Laplacian phi)/4,
and a weight is delta-strict when that quantity is >= delta.  In two variables
the 2x2 Hermitian matrix (d^2 phi / dz_i dzbar_j) must dominate delta * I.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import Quadrature, Rect, ZeroSetCurve, build_grid

DEFAULT_DOMAIN = Rect(0j, 1.0, 1.0)
AGMON_CURVATURE = 5.0

# log_growth transition radii
LOG_R0 = 1.5
LOG_R1 = 2.5


@dataclass(frozen=True, eq=False)
class Weight:
    """A nonnegative weight phi with closed-form derivatives.

    ``grad`` returns the tuple of real partials (d/dx_1, d/dy_1, ...);
    ``complex_hessian`` returns phi_{z zbar} with shape ``(N,)`` for n = 1 and
    the Hermitian matrices with shape ``(N, n, n)`` otherwise.
    """

    name: str
    phi: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], tuple]
    complex_hessian: Callable[[np.ndarray], np.ndarray]
    delta: float
    zero_set: Optional[ZeroSetCurve] = None
    params: dict = field(default_factory=dict)
    dim: int = 1

    def __call__(self, z):
        return self.phi(np.asarray(z))

    def min_eigenvalue(self, z) -> np.ndarray:
        H = self.complex_hessian(np.asarray(z))
        if self.dim == 1:
            return np.real(H)
        return np.linalg.eigvalsh(H)[..., 0]


def _real_line() -> ZeroSetCurve:
    def bounds(rect):
        if rect.ymin <= 0.0 <= rect.ymax:
            return rect.xmin, rect.xmax
        return None

    return ZeroSetCurve(lambda t: np.asarray(t, dtype=float) + 0j, bounds)


def _segment(half_length: float) -> ZeroSetCurve:
    def bounds(rect):
        lo, hi = max(rect.xmin, -half_length), min(rect.xmax, half_length)
        if rect.ymin <= 0.0 <= rect.ymax and lo <= hi:
            return lo, hi
        return None

    return ZeroSetCurve(lambda t: np.asarray(t, dtype=float) + 0j, bounds)


def _circle(r: float) -> ZeroSetCurve:
    return ZeroSetCurve(lambda t: r * np.exp(1j * np.asarray(t)), lambda rect: (0.0, 2 * np.pi))


def _flat_line(c: float, name: str) -> Weight:
    return Weight(
        name=name,
        phi=lambda z: c * np.imag(z) ** 2,
        grad=lambda z: (np.zeros(np.shape(z)), 2 * c * np.imag(z)),
        complex_hessian=lambda z: np.full(np.shape(z), c / 2),
        delta=c / 2,
        zero_set=_real_line(),
        params={"c": c} if name == "scaled_line" else {},
    )


def _circle_weight(r: float, domain: Rect) -> Weight:
    if r <= 0:
        raise ValueError(f"circle radius must be positive, got {r}")
    if domain.contains(0j):
        raise ValueError("circle weight degenerates at z = 0; choose a domain that excludes the origin")
    # nearest point of the domain to the origin
    dx = max(domain.xmin, min(0.0, domain.xmax))
    dy = max(domain.ymin, min(0.0, domain.ymax))
    rho_min = abs(complex(dx, dy))
    delta = 1.0 - r / (2.0 * rho_min)
    if delta <= 0:
        raise ValueError(
            f"circle weight is not strictly plurisubharmonic on {domain}: "
            f"need dist(0, domain) > r/2 = {r / 2}, got {rho_min}"
        )

    def grad(z):
        rho = np.abs(z)
        # phi has a cone point at 0; report a zero gradient there
        g = np.where(rho > 0, 2 * (rho - r) / np.where(rho > 0, rho, 1.0), 0.0)
        return g * np.real(z), g * np.imag(z)

    return Weight(
        name="circle",
        phi=lambda z: (np.abs(z) - r) ** 2,
        grad=grad,
        complex_hessian=lambda z: 1.0 - r / (2.0 * np.abs(z)),
        delta=delta,
        zero_set=_circle(r),
        params={"radius": r},
    )


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s**2)


def _smoothstep_d1(s):
    inside = (s > 0) & (s < 1)
    return np.where(inside, 30 * s**2 * (1 - s) ** 2, 0.0)


def _smoothstep_d2(s):
    inside = (s > 0) & (s < 1)
    return np.where(inside, 60 * s * (1 - s) * (1 - 2 * s), 0.0)


class _LogGrowth:
    """phi = y^2 sigma(r) + m log(1 + r^2) (1 - sigma(r)), sigma = 1 - smoothstep."""

    def __init__(self, m: float):
        self.m = m
        self.width = LOG_R1 - LOG_R0

    def _sigma(self, r):
        s = (r - LOG_R0) / self.width
        return (
            1.0 - _smoothstep(s),
            -_smoothstep_d1(s) / self.width,
            -_smoothstep_d2(s) / self.width**2,
        )

    def phi(self, z):
        r = np.abs(z)
        sig = self._sigma(r)[0]
        return np.imag(z) ** 2 * sig + self.m * np.log1p(r**2) * (1.0 - sig)

    def grad(self, z):
        x, y, r = np.real(z), np.imag(z), np.abs(z)
        sig, dsig, _ = self._sigma(r)
        L, dL = np.log1p(r**2), 2 * r / (1 + r**2)
        radial = y**2 * dsig + self.m * (dL * (1 - sig) - L * dsig)
        safe_r = np.where(r > 0, r, 1.0)
        rx = np.where(r > 0, x / safe_r, 0.0)
        ry = np.where(r > 0, y / safe_r, 0.0)
        return radial * rx, 2 * y * sig + radial * ry

    def complex_hessian(self, z):
        y, r = np.imag(z), np.abs(z)
        sig, dsig, d2sig = self._sigma(r)
        safe_r = np.where(r > 0, r, 1.0)
        lap_sig = np.where(r > 0, d2sig + dsig / safe_r, 0.0)
        dsig_over_r = np.where(r > 0, dsig / safe_r, 0.0)
        L, dL = np.log1p(r**2), 2 * r / (1 + r**2)
        lap_L = 4.0 / (1 + r**2) ** 2
        # Laplacian of y^2 sigma: 2 sigma + 4 y d_y sigma + y^2 lap sigma
        lap_a = 2 * sig + 4 * y**2 * dsig_over_r + y**2 * lap_sig
        lap_b = lap_L * (1 - sig) - 2 * dL * dsig - L * lap_sig
        return (lap_a + self.m * lap_b) / 4.0


def _log_growth_weight(m: float, domain: Rect, certify_resolution: int = 512) -> Weight:
    if m <= 0:
        raise ValueError(f"log_growth requires m > 0, got {m}")
    model = _LogGrowth(m)
    q = build_grid(domain, certify_resolution, certify_resolution)
    delta = float(np.min(model.complex_hessian(q.nodes)))
    if delta <= 0:
        raise ValueError(
            f"log_growth weight with m={m} is not strictly plurisubharmonic on {domain} "
            f"(min complex Hessian {delta:.3g})"
        )
    return Weight(
        name="log_growth",
        phi=model.phi,
        grad=model.grad,
        complex_hessian=model.complex_hessian,
        delta=delta,
        zero_set=_segment(LOG_R0),
        params={"m": m},
    )


def _flat_plane(coupling: float) -> Weight:
    """phi(z1, z2) = y1^2 + y2^2 + c |z1 - z2|^2 on C^2; E is the real diagonal when c > 0."""
    if coupling < 0:
        raise ValueError("flat_plane coupling must be >= 0")
    c = coupling

    def phi(z):
        return np.sum(np.imag(z) ** 2, axis=-1) + c * np.abs(z[..., 0] - z[..., 1]) ** 2

    def grad(z):
        d = z[..., 0] - z[..., 1]
        return (
            2 * c * d.real,
            2 * z[..., 0].imag + 2 * c * d.imag,
            -2 * c * d.real,
            2 * z[..., 1].imag - 2 * c * d.imag,
        )

    def hess(z):
        H = np.array([[0.5 + c, -c], [-c, 0.5 + c]], dtype=complex)
        return np.broadcast_to(H, z.shape[:-1] + (2, 2)).copy()

    def diagonal(t):
        t = np.asarray(t, dtype=float) + 0j
        return np.stack([t, t], axis=-1)

    def bounds(rect):
        if rect.ymin <= 0.0 <= rect.ymax:
            return rect.xmin, rect.xmax
        return None

    return Weight(
        name="flat_plane",
        phi=phi,
        grad=grad,
        complex_hessian=hess,
        delta=0.5,
        zero_set=ZeroSetCurve(diagonal, bounds) if c > 0 else None,
        params={"coupling": c},
        dim=2,
    )


MODEL_WEIGHTS = {
    "flat_line": "phi = (Im z)^2, E = real axis, delta = 1/2",
    "scaled_line": "phi = c (Im z)^2, delta = c/2 (param c)",
    "circle": "phi = (|z| - r)^2, E = circle of radius r (param radius; domain must avoid 0)",
    "log_growth": "phi = (Im z)^2 near 0, m log(1+|z|^2) far out (param m)",
    "flat_plane": "phi = |Im z1|^2 + |Im z2|^2 + c |z1 - z2|^2 on C^2 (param coupling)",
}


def make_model_weight(name: str, params: Optional[dict] = None, domain: Rect = DEFAULT_DOMAIN) -> Weight:
    """Build one of the closed-form model weights listed in ``MODEL_WEIGHTS``.

    ``domain`` matters only where delta depends on the region (circle,
    log_growth).
    """
    params = dict(params or {})
    if name == "flat_line":
        return _flat_line(1.0, "flat_line")
    if name == "scaled_line":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise ValueError(f"scaled_line requires c > 0, got {c}")
        return _flat_line(c, "scaled_line")
    if name == "circle":
        return _circle_weight(float(params.get("radius", 1.0)), domain)
    if name == "log_growth":
        return _log_growth_weight(float(params.get("m", 1.0)), domain)
    if name == "flat_plane":
        return _flat_plane(float(params.get("coupling", 1.0)))
    raise ValueError(f"unknown weight {name!r}; choose from {sorted(MODEL_WEIGHTS)}")


def fd_complex_hessian(phi: Callable, z: np.ndarray, h: float) -> np.ndarray:
    """Centered finite-difference complex Hessian of a real function.

    n = 1 gives the 5-point Laplacian / 4.  For n > 1 the real Hessian in
    (x_1, y_1, ..., x_n, y_n) is differenced and assembled into
    (1/4)[d_xi d_xj + d_yi d_yj + i (d_xi d_yj - d_yi d_xj)].
    """
    z = np.asarray(z, dtype=complex)
    if z.ndim == 1:
        f0 = phi(z)
        lap = phi(z + h) + phi(z - h) + phi(z + 1j * h) + phi(z - 1j * h) - 4 * f0
        return lap / (4 * h * h)
    n = z.shape[-1]
    dirs = []
    for i in range(n):
        for unit in (1.0, 1j):
            e = np.zeros(n, dtype=complex)
            e[i] = unit
            dirs.append(e)
    m = 2 * n
    f0 = phi(z)
    R = np.empty(z.shape[:-1] + (m, m))
    for a in range(m):
        ea = dirs[a] * h
        R[..., a, a] = (phi(z + ea) - 2 * f0 + phi(z - ea)) / h**2
        for b in range(a + 1, m):
            eb = dirs[b] * h
            val = (phi(z + ea + eb) - phi(z + ea - eb) - phi(z - ea + eb) + phi(z - ea - eb)) / (4 * h * h)
            R[..., a, b] = R[..., b, a] = val
    H = np.empty(z.shape[:-1] + (n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            xi, yi, xj, yj = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
            H[..., i, j] = 0.25 * (R[..., xi, xj] + R[..., yi, yj] + 1j * (R[..., xi, yj] - R[..., yi, xj]))
    return H


@dataclass(frozen=True)
class PshReport:
    min_eig: float
    ok: bool
    worst_node: complex
    fd_max_rel_err: float
    fd_ok: bool


def verify_plurisubharmonic(w: Weight, q: Quadrature, required_delta: float, fd_rtol: float = 1e-4) -> PshReport:
    """Check the curvature lower bound on every node and cross-check the analytic
    Hessian with centered differences at step equal to the grid spacing."""
    eig = w.min_eigenvalue(q.nodes)
    i = int(np.argmin(eig))
    analytic = w.complex_hessian(q.nodes)
    fd = fd_complex_hessian(w.phi, q.nodes, q.h)
    if w.dim == 1:
        err = np.abs(fd - analytic) / np.maximum(np.abs(analytic), 1e-300)
    else:
        scale = np.maximum(np.linalg.norm(analytic, axis=(-2, -1)), 1e-300)
        err = np.linalg.norm(fd - analytic, axis=(-2, -1)) / scale
    fd_err = float(np.max(err))
    worst = q.nodes[i]
    return PshReport(
        min_eig=float(eig[i]),
        ok=bool(eig[i] >= required_delta),
        worst_node=complex(worst) if w.dim == 1 else tuple(complex(v) for v in worst),
        fd_max_rel_err=fd_err,
        fd_ok=fd_err <= fd_rtol,
    )


def rescale_for_agmon(w: Weight, target: float = AGMON_CURVATURE):
    """Scale phi by target/delta so the curvature bound becomes ``target``.

    The zero set is unchanged.  A weight already at the target comes back as is.
    """
    if not w.delta > 0:
        raise ValueError("weight must have delta > 0")
    scale = target / w.delta
    if scale == 1.0:
        return w, 1.0
    grad = w.grad
    return (
        Weight(
            name=f"{w.name}*{scale:g}",
            phi=lambda z: scale * w.phi(z),
            grad=lambda z: tuple(scale * g for g in grad(z)),
            complex_hessian=lambda z: scale * w.complex_hessian(z),
            delta=target,
            zero_set=w.zero_set,
            params={**w.params, "agmon_scale": scale},
            dim=w.dim,
        ),
        scale,
    )


def psi(t):
    """Convex C^1 majorant of t: t for t >= 1, (t^2 + 1)/2 below."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, t, 0.5 * t * t + 0.5)
    return out[()] if out.ndim == 0 else out


def chi(z):
    z = np.asarray(z)
    r = np.linalg.norm(z, axis=-1) if z.ndim == 2 else np.abs(z)
    return psi(r)


def chi_k(z, a, k: float):
    """psi(sqrt(k) |z - a|)."""
    if k <= 0:
        raise ValueError("k must be positive")
    z = np.asarray(z)
    d = z - np.asarray(a)
    r = np.linalg.norm(d, axis=-1) if z.ndim == 2 else np.abs(d)
    return psi(np.sqrt(k) * r)


@dataclass(frozen=True)
class AgmonWeight:
    center: complex
    k: float

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")

    def __call__(self, z):
        return chi_k(z, self.center, self.k)
