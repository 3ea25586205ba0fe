"""Weighted Bergman projection on a truncated polynomial basis.

Everything here works on sampled functions: a basis is evaluated on the
quadrature nodes, the weighted Gram matrix is assembled from those samples
and orthonormalized by a truncated eigendecomposition.  The same code path
serves n = 1 (nodes of shape ``(N,)``) and n = 2 (nodes of shape ``(N, 2)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .geometry import Quadrature, Rect
from .weights import Weight

DEFAULT_EIGEN_FLOOR = 1e-12
MAX_TENSOR_DEGREE = 12
_CHUNK = 1 << 16


class DegenerateBasis(ValueError):
    """All Gram eigenvalues fall below the floor."""


# --------------------------------------------------------------------------
# test functions


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A function u with closed-form dbar u.

    For n = 2, ``dbar`` returns shape ``(N, 2)`` holding du/dzbar_1 and
    du/dzbar_2.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    u: Callable[[np.ndarray], np.ndarray]
    dbar: Callable[[np.ndarray], np.ndarray]
    support_rect: Rect
    dim: int = 1

    def __call__(self, z):
        return self.u(np.asarray(z))


def _bump_1d(rho: float):
    def g(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        m = np.abs(t) < rho
        s = (t[m] / rho) ** 2
        out[m] = np.exp(1.0 - 1.0 / (1.0 - s))
        return out

    def dg(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        m = np.abs(t) < rho
        s = (t[m] / rho) ** 2
        out[m] = np.exp(1.0 - 1.0 / (1.0 - s)) * (-2.0 * t[m] / rho**2) / (1.0 - s) ** 2
        return out

    return g, dg


def standard_bump(rho: float = 0.7, center: complex = 0j) -> TestFunction:
    """u = g(x) g(y), g(t) = exp(1 - 1/(1 - (t/rho)^2)) on |t| < rho."""
    g, dg = _bump_1d(rho)
    c = complex(center)

    def u(z):
        w = np.asarray(z) - c
        return g(w.real) * g(w.imag) + 0j

    def dbar(z):
        w = np.asarray(z) - c
        return 0.5 * (dg(w.real) * g(w.imag) + 1j * g(w.real) * dg(w.imag))

    return TestFunction("standard_bump", u, dbar, Rect(c, rho, rho))


def product_bump(rho: float = 0.7) -> TestFunction:
    """u(z1, z2) = bump(z1) * bump(z2) on C^2."""
    b = standard_bump(rho)

    def u(z):
        return b.u(z[..., 0]) * b.u(z[..., 1])

    def dbar(z):
        return np.stack([b.dbar(z[..., 0]) * b.u(z[..., 1]), b.u(z[..., 0]) * b.dbar(z[..., 1])], axis=-1)

    return TestFunction("product_bump", u, dbar, Rect(0j, rho, rho), dim=2)


def monomial_function(j: int, rect: Rect, center: Optional[complex] = None) -> TestFunction:
    """The basis element ((z - c)/s)^j, holomorphic on all of ``rect``."""
    c = rect.center if center is None else complex(center)
    s = rect.scale
    return TestFunction(
        f"monomial_{j}",
        lambda z: ((np.asarray(z) - c) / s) ** j + 0j,
        lambda z: np.zeros(np.shape(z), dtype=complex),
        rect,
    )


def conj_z(rect: Rect) -> TestFunction:
    return TestFunction(
        "conj_z",
        lambda z: np.conj(np.asarray(z, dtype=complex)),
        lambda z: np.ones(np.shape(z), dtype=complex),
        rect,
    )


def zero_function(rect: Rect) -> TestFunction:
    zero = lambda z: np.zeros(np.shape(z), dtype=complex)  # noqa: E731
    return TestFunction("zero", zero, zero, rect)


TEST_FUNCTIONS = {
    "standard_bump": "g(x) g(y), g(t) = exp(1 - 1/(1 - (t/0.7)^2)) on |t| < 0.7",
    "monomial_2": "((z - c)/s)^2, holomorphic and inside every basis span of degree >= 2",
    "conj_z": "conj(z), dbar = 1",
    "zero": "u = 0",
}


def make_test_function(name: str, rect: Rect) -> TestFunction:
    if name == "standard_bump":
        return standard_bump()
    if name.startswith("monomial_"):
        return monomial_function(int(name.split("_", 1)[1]), rect)
    if name == "conj_z":
        return conj_z(rect)
    if name == "zero":
        return zero_function(rect)
    raise ValueError(f"unknown test function {name!r}; choose from {sorted(TEST_FUNCTIONS)}")


# --------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class Basis:
    """Scaled monomials b_j(z) = ((z - center)/scale)^j, j = 0..degree.

    ``kind`` is "monomials" (adaptive degree), "polynomials_deg_k" (degree
    tied to k) or "tensor_monomials" (n = 2, degree per variable).
    """

    kind: str
    center: complex
    degree: int
    scale: float
    dim: int = 1

    @property
    def size(self) -> int:
        return (self.degree + 1) ** self.dim

    def evaluate(self, z) -> np.ndarray:
        """Matrix of shape ``(N, size)`` with column j holding b_j(z)."""
        z = np.asarray(z, dtype=complex)
        if self.dim == 1:
            return _powers((z - self.center) / self.scale, self.degree)
        cols = _powers((z[..., 0] - self.center) / self.scale, self.degree)
        for i in range(1, self.dim):
            p = _powers((z[..., i] - self.center) / self.scale, self.degree)
            cols = (cols[..., :, None] * p[..., None, :]).reshape(z.shape[:-1] + (-1,))
        return cols

    def truncated(self, degree: int) -> "Basis":
        return Basis(self.kind, self.center, degree, self.scale, self.dim)


def _powers(w: np.ndarray, degree: int) -> np.ndarray:
    out = np.empty(w.shape + (degree + 1,), dtype=complex)
    out[..., 0] = 1.0
    for j in range(1, degree + 1):
        out[..., j] = out[..., j - 1] * w
    return out


def make_basis(rect: Rect, degree: int, kind: str = "monomials", dim: int = 1) -> Basis:
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if dim > 1:
        if degree > MAX_TENSOR_DEGREE:
            raise ValueError(f"tensor basis is capped at degree {MAX_TENSOR_DEGREE} per variable")
        kind = "tensor_monomials"
    return Basis(kind, rect.center, int(degree), rect.scale, dim)


def initial_degree(k: float, factor: float = 2.0, offset: int = 4) -> int:
    return int(math.ceil(factor * math.sqrt(k))) + offset


# --------------------------------------------------------------------------
# inner products and Gram matrices


def weighted_measure(q: Quadrature, w: Weight, k: float) -> np.ndarray:
    """Quadrature weights times e^{-k phi} at the nodes."""
    return q.weights * np.exp(-k * w.phi(q.nodes))


def inner_product(g1, g2, q: Quadrature, w: Weight, k: float) -> complex:
    """sum g1 conj(g2) e^{-k phi} dA over the nodes."""
    mu = weighted_measure(q, w, k)
    return complex(np.sum(np.asarray(g1) * np.conj(np.asarray(g2)) * mu))


def _gram_from_samples(V: np.ndarray, mu: np.ndarray) -> np.ndarray:
    # G[i, j] = <b_i, b_j> = sum b_i conj(b_j) mu
    return V.T @ (mu[:, None] * V.conj())


def gram_matrix(basis: Basis, q: Quadrature, w: Weight, k: float) -> np.ndarray:
    """Hermitian matrix G[i, j] = <b_i, b_j> in L^2(e^{-k phi})."""
    mu = weighted_measure(q, w, k)
    G = np.zeros((basis.size, basis.size), dtype=complex)
    for start in range(0, len(mu), _CHUNK):
        sl = slice(start, start + _CHUNK)
        G += _gram_from_samples(basis.evaluate(q.nodes[sl]), mu[sl])
    return _hermitize(G)


def _hermitize(G: np.ndarray) -> np.ndarray:
    # keep the upper triangle, mirror it
    U = np.triu(G, 1)
    return U + U.conj().T + np.diag(np.real(np.diag(G)))


@dataclass(frozen=True, eq=False)
class OrthoFactor:
    """Truncated eigen-orthonormalization of a Gram matrix.

    ``transform`` (size x rank) satisfies transform^H G transform = I.  With
    G[i, j] = <b_i, b_j>, the orthonormal functions are
    e_p = sum_j conj(transform[j, p]) b_j.
    """

    transform: np.ndarray
    effective_rank: int
    condition: float
    eigen_floor: float
    discarded: int
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def coefficient_matrix(self) -> np.ndarray:
        """Raw-basis coefficients of the orthonormal functions, one column each."""
        return self.transform.conj()


def orthonormalize(G: np.ndarray, eigen_floor: float = DEFAULT_EIGEN_FLOOR) -> OrthoFactor:
    G = np.asarray(G)
    lam, U = np.linalg.eigh(G)
    top = lam[-1]
    if not top > 0:
        raise DegenerateBasis("Gram matrix has no positive eigenvalue")
    keep = lam >= eigen_floor * top
    if not keep.any():
        raise DegenerateBasis(f"all eigenvalues below floor {eigen_floor}")
    lam_k = lam[keep]
    T = U[:, keep] / np.sqrt(lam_k)
    return OrthoFactor(
        transform=T,
        effective_rank=int(keep.sum()),
        condition=float(top / lam_k[0]),
        eigen_floor=eigen_floor,
        discarded=int((~keep).sum()),
        eigenvalues=lam,
    )


def refine_factor(factor: OrthoFactor, basis: Basis, q: Quadrature, w: Weight, k: float) -> OrthoFactor:
    """One re-orthonormalization pass against the sampled functions.

    With raw condition numbers near 1e11 the eigen-based transform leaves the
    evaluated e_p orthonormal only to about 1e-6.  Their discrete Gram H is
    close to the identity, so H^{-1/2} can be formed accurately and restores
    orthonormality to near machine precision.
    """
    mu = weighted_measure(q, w, k)
    C = factor.coefficient_matrix
    H = np.zeros((C.shape[1], C.shape[1]), dtype=complex)
    for start in range(0, len(mu), _CHUNK):
        sl = slice(start, start + _CHUNK)
        E = basis.evaluate(q.nodes[sl]) @ C
        H += E.T @ (mu[sl, None] * E.conj())
    s, Q = np.linalg.eigh(_hermitize(H))
    R = (Q / np.sqrt(s)) @ Q.conj().T
    return replace(factor, transform=factor.transform @ R)


def orthonormal_factor(
    basis: Basis, q: Quadrature, w: Weight, k: float, eigen_floor: float = DEFAULT_EIGEN_FLOOR
) -> OrthoFactor:
    """Gram assembly, truncated eigen-orthonormalization and one refinement pass."""
    factor = orthonormalize(gram_matrix(basis, q, w, k), eigen_floor)
    return refine_factor(factor, basis, q, w, k)


def orthonormal_values(basis: Basis, factor: OrthoFactor, z) -> np.ndarray:
    return basis.evaluate(z) @ factor.coefficient_matrix


# --------------------------------------------------------------------------
# projection


@dataclass(frozen=True, eq=False)
class Projection:
    """P_k u stored as coefficients on the orthonormal basis."""

    k: float
    coeffs: np.ndarray
    basis: Basis
    factor: OrthoFactor

    @property
    def raw_coeffs(self) -> np.ndarray:
        return self.factor.coefficient_matrix @ self.coeffs

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape[: z.ndim - (self.basis.dim > 1)], dtype=complex)
        flat_in = z.reshape((-1,) + z.shape[out.ndim :])
        flat_out = out.reshape(-1)
        a = self.raw_coeffs
        for start in range(0, len(flat_in), _CHUNK):
            sl = slice(start, start + _CHUNK)
            flat_out[sl] = self.basis.evaluate(flat_in[sl]) @ a
        return out[()] if out.ndim == 0 else out


def _projection_coeffs(samples, basis: Basis, factor: OrthoFactor, q: Quadrature, mu: np.ndarray) -> np.ndarray:
    # c_p = <u, e_p> = sum u conj(e_p) mu = transform^T (V^H (mu u))
    b = np.zeros(basis.size, dtype=complex)
    for start in range(0, len(mu), _CHUNK):
        sl = slice(start, start + _CHUNK)
        b += basis.evaluate(q.nodes[sl]).conj().T @ (mu[sl] * samples[sl])
    return factor.transform.T @ b


def project(u, basis: Basis, factor: OrthoFactor, q: Quadrature, w: Weight, k: float) -> Projection:
    """Orthogonal projection of u onto the span of the retained basis.

    ``u`` is a TestFunction (or any callable) or an array of node samples.
    """
    samples = u(q.nodes) if callable(u) else np.asarray(u)
    mu = weighted_measure(q, w, k)
    return Projection(k, _projection_coeffs(samples, basis, factor, q, mu), basis, factor)


@dataclass(frozen=True, eq=False)
class Residual:
    """v = u - P_k u, evaluable anywhere; dbar v = dbar u."""

    u: TestFunction
    p: Projection

    def __call__(self, z):
        return self.u(z) - self.p(z)

    def dbar(self, z):
        return self.u.dbar(np.asarray(z))


def residual(u: TestFunction, p: Projection) -> Residual:
    return Residual(u, p)


def bergman_kernel(basis: Basis, factor: OrthoFactor, z, w_pt):
    """K(z, w) = sum_p e_p(z) conj(e_p(w)), broadcasting over z and w."""
    Ez = orthonormal_values(basis, factor, np.atleast_1d(np.asarray(z, dtype=complex)))
    Ew = orthonormal_values(basis, factor, np.atleast_1d(np.asarray(w_pt, dtype=complex)))
    K = np.sum(Ez * Ew.conj(), axis=-1)
    return K[()] if np.ndim(z) == 0 and np.ndim(w_pt) == 0 else K


def weighted_norm(samples, q: Quadrature, w: Weight, k: float) -> float:
    return math.sqrt(max(inner_product(samples, samples, q, w, k).real, 0.0))


# --------------------------------------------------------------------------
# adaptive degree


@dataclass(frozen=True)
class DegreeStep:
    degree: int
    effective_rank: int
    condition: float
    probe_error: float


@dataclass(frozen=True, eq=False)
class AdaptiveResult:
    projection: Projection
    history: List[DegreeStep]

    @property
    def degree(self) -> int:
        return self.projection.basis.degree


def project_fixed(
    u, rect: Rect, q: Quadrature, w: Weight, k: float, degree: int,
    kind: str = "monomials", eigen_floor: float = DEFAULT_EIGEN_FLOOR,
) -> Projection:
    basis = make_basis(rect, degree, kind, dim=q.dim)
    return project(u, basis, orthonormal_factor(basis, q, w, k, eigen_floor), q, w, k)


def project_adaptive(
    u: TestFunction,
    rect: Rect,
    q: Quadrature,
    w: Weight,
    k: float,
    probe_points: np.ndarray,
    start_degree: Optional[int] = None,
    threshold: float = 0.02,
    max_degree: int = 160,
    eigen_floor: float = DEFAULT_EIGEN_FLOOR,
) -> AdaptiveResult:
    """Double the basis degree until sup |u - P_k u| over ``probe_points``
    changes by less than ``threshold`` (relative) between successive degrees.

    Stops at ``max_degree`` if the error never settles.
    """
    degree = min(start_degree if start_degree is not None else initial_degree(k), max_degree)
    samples = u(q.nodes)
    u_probe = u(probe_points)
    history: List[DegreeStep] = []
    prev_err = None
    while True:
        proj = project_fixed(samples, rect, q, w, k, degree, eigen_floor=eigen_floor)
        err = float(np.max(np.abs(u_probe - proj(probe_points))))
        history.append(DegreeStep(degree, proj.factor.effective_rank, proj.factor.condition, err))
        if prev_err is not None:
            scale = max(err, prev_err)
            if scale == 0.0 or abs(err - prev_err) < threshold * scale:
                break
        if degree >= max_degree:
            break
        prev_err = err
        degree = min(2 * degree, max_degree)
    return AdaptiveResult(proj, history)
