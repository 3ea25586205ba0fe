import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergapprox import bergman, geometry
from bergapprox.bergman import (
    DegenerateBasis,
    bergman_kernel,
    gram_matrix,
    inner_product,
    make_basis,
    orthonormal_values,
    orthonormal_factor,
    orthonormalize,
    project,
    project_fixed,
    residual,
    weighted_norm,
)
from conftest import cr_residual, fd_dbar


@pytest.fixture(scope="module")
def basis40(square):
    return make_basis(square, 40)


@pytest.fixture(scope="module")
def factor40_k64(basis40, grid256, flat):
    return orthonormal_factor(basis40, grid256, flat, 64.0)


# ---------------------------------------------------------------- test functions


def test_bump_support_and_closed_form_dbar(bump, grid256):
    z = grid256.nodes
    outside = ~bump.support_rect.contains(z)
    assert np.all(bump(z)[outside] == 0)
    interior = z[(np.abs(z.real) < 0.6) & (np.abs(z.imag) < 0.6)][::97]
    errs = [np.max(np.abs(fd_dbar(bump, interior, h) - bump.dbar(interior))) for h in (2e-3, 1e-3)]
    assert errs[1] < errs[0] / 3.5  # O(h^2)
    assert errs[1] < 1e-4 * np.max(np.abs(bump.dbar(interior)))


def test_basis_is_holomorphic(square):
    b = make_basis(square, 8)
    z = np.array([0.3 + 0.1j, -0.5 - 0.2j, 0.01j])
    for j in range(b.size):
        g = lambda w, j=j: b.evaluate(w)[..., j]  # noqa: E731
        assert np.max(cr_residual(g, z, 1e-5)) <= 1e-9


def test_basis_columns_are_scaled_powers():
    rect = geometry.Rect(1 + 1j, 2.0, 0.5)
    b = make_basis(rect, 3)
    z = np.array([2.0 + 0.5j])
    np.testing.assert_allclose(b.evaluate(z)[0], [((z[0] - (1 + 1j)) / 2.0) ** j for j in range(4)])


# ---------------------------------------------------------------- inner product


def test_inner_product_area(square, grid256, flat):
    one = np.ones(len(grid256))
    assert inner_product(one, one, grid256, flat, 0.0) == pytest.approx(4.0, rel=1e-14)


def test_inner_product_odd_symmetry(grid256, flat):
    one = np.ones(len(grid256))
    assert abs(inner_product(one, grid256.nodes, grid256, flat, 0.0)) <= 1e-13


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 50))
def test_inner_product_conjugate_symmetric(seed, k):
    q = geometry.build_grid(geometry.Rect(0j, 1, 1), 16, 16)
    w = bergman_flat()
    rng = np.random.default_rng(seed)
    g1 = rng.normal(size=len(q)) + 1j * rng.normal(size=len(q))
    g2 = rng.normal(size=len(q)) + 1j * rng.normal(size=len(q))
    a, b = inner_product(g1, g2, q, w, k), inner_product(g2, g1, q, w, k)
    assert abs(a - b.conjugate()) <= 1e-12 * max(1.0, abs(a))


def bergman_flat():
    from bergapprox.weights import make_model_weight

    return make_model_weight("flat_line")


def test_inner_product_gaussian_oracle(square, flat):
    q = geometry.build_grid(square, 512, 512)
    one = np.ones(len(q))
    exact = 2 * math.sqrt(math.pi / 100) * math.erf(10.0)
    assert abs(inner_product(one, one, q, flat, 100.0) - exact) / exact <= 1e-6


# ---------------------------------------------------------------- Gram


def test_gram_constant_basis(square, grid256, flat):
    G = gram_matrix(make_basis(square, 0), grid256, flat, 0.0)
    np.testing.assert_allclose(G, [[4.0]], rtol=1e-14)


def test_gram_parity_zeros(square, grid256, flat):
    G = gram_matrix(make_basis(square, 6), grid256, flat, 5.0)
    for i in range(7):
        for j in range(7):
            if (i - j) % 2:
                assert abs(G[i, j]) <= 1e-12 * abs(G[0, 0])
    np.testing.assert_array_equal(G, G.conj().T)


def _gram_rel_change(square, flat, n_coarse, n_fine, k=25.0, degree=6):
    b = make_basis(square, degree)
    G1 = gram_matrix(b, geometry.build_grid(square, n_coarse, n_coarse), flat, k)
    G2 = gram_matrix(b, geometry.build_grid(square, n_fine, n_fine), flat, k)
    big = np.abs(G2) > 1e-12 * np.abs(G2).max()
    return np.max(np.abs(G1 - G2)[big] / np.abs(G2)[big]), np.max(np.abs(G1 - G2)[~big])


def test_gram_grid_refinement_is_second_order(square, flat):
    r256, _ = _gram_rel_change(square, flat, 256, 2048)
    r512, _ = _gram_rel_change(square, flat, 512, 2048)
    r1024, tiny = _gram_rel_change(square, flat, 1024, 2048)
    # midpoint rule: halving h divides the error by about four
    assert 3.5 <= r256 / r512 <= 4.5
    assert r512 / r1024 >= 2.5
    assert r256 <= 1e-3
    assert tiny <= 1e-12


@pytest.mark.xfail(strict=True, reason="midpoint error on the x^12 moment is ~3e-4 at 256 cells; see decisions ledger")
def test_gram_grid_refinement_to_1e5(square, flat):
    rel, _ = _gram_rel_change(square, flat, 256, 1024)
    assert rel <= 1e-5


# ---------------------------------------------------------------- orthonormalize


def test_orthonormalize_identity():
    f = orthonormalize(np.eye(5))
    np.testing.assert_allclose(f.transform, np.eye(5))
    assert f.effective_rank == 5 and f.condition == 1.0 and f.discarded == 0


def test_orthonormalize_diagonal():
    f = orthonormalize(np.diag([4.0, 1.0]), 1e-12)
    # eigh orders ascending: columns are (e_1 / 1, e_0 / 2)
    np.testing.assert_allclose(np.abs(f.transform), [[0.0, 0.5], [1.0, 0.0]])
    assert f.condition == 4.0


def test_orthonormalize_random_spd():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    G = A @ A.conj().T + 0.1 * np.eye(10)
    f = orthonormalize(G)
    np.testing.assert_allclose(f.transform.conj().T @ G @ f.transform, np.eye(10), atol=1e-10)


def test_orthonormalize_floor_and_degenerate():
    f = orthonormalize(np.diag([1.0, 1e-14, 1e-3]), 1e-12)
    assert f.effective_rank == 2 and f.discarded == 1
    with pytest.raises(DegenerateBasis):
        orthonormalize(np.zeros((3, 3)))


def test_gram_invariant_explicit_product(square, grid256, flat):
    b = make_basis(square, 12)
    G = gram_matrix(b, grid256, flat, 64.0)
    T = orthonormal_factor(b, grid256, flat, 64.0).transform
    np.testing.assert_allclose(T.conj().T @ G @ T, np.eye(T.shape[1]), atol=1e-8)


def test_refinement_improves_orthonormality(basis40, grid256, flat):
    raw = orthonormalize(gram_matrix(basis40, grid256, flat, 64.0))
    mu = bergman.weighted_measure(grid256, flat, 64.0)

    def defect(f):
        E = orthonormal_values(basis40, f, grid256.nodes)
        return np.max(np.abs(E.T @ (mu[:, None] * E.conj()) - np.eye(E.shape[1])))

    refined = bergman.refine_factor(raw, basis40, grid256, flat, 64.0)
    assert defect(refined) <= 1e-10 < defect(raw)
    assert refined.effective_rank == raw.effective_rank
    assert raw.discarded > 0  # raw monomials of degree 40 are far beyond the floor


def test_orthonormal_functions_are_discretely_orthonormal(factor40_k64, basis40, grid256, flat):
    E = orthonormal_values(basis40, factor40_k64, grid256.nodes)
    mu = bergman.weighted_measure(grid256, flat, 64.0)
    M = (E * mu[:, None]).T @ E.conj()
    np.testing.assert_allclose(M, np.eye(E.shape[1]), atol=1e-8)


# ---------------------------------------------------------------- projection


def test_projection_reproduces_retained_span(grid256, flat, basis40, factor40_k64):
    z = grid256.nodes
    rng = np.random.default_rng(5)
    c = rng.normal(size=factor40_k64.effective_rank) + 1j * rng.normal(size=factor40_k64.effective_rank)
    u = orthonormal_values(basis40, factor40_k64, z) @ c
    p = project(u, basis40, factor40_k64, grid256, flat, 64.0)
    np.testing.assert_allclose(p.coeffs, c, atol=1e-9 * np.max(np.abs(c)))
    assert np.max(np.abs(p(z) - u)) <= 1e-8 * np.max(np.abs(u))


def test_projection_reproduces_low_monomial(square, grid256, flat):
    u = bergman.monomial_function(2, square)
    z = grid256.nodes
    p = project_fixed(u, square, grid256, flat, 64.0, 8)
    assert np.max(np.abs(p(z) - u(z))) <= 1e-8 * np.max(np.abs(u(z)))


def test_high_degree_reproduction_holds_where_weight_lives(square, grid256, flat):
    # at degree 40 the floor discards directions invisible to e^{-64 y^2};
    # reproduction of z^2 then holds near E and in weighted norm
    u = bergman.monomial_function(2, square)
    z = grid256.nodes
    p = project_fixed(u, square, grid256, flat, 64.0, 40)
    near = np.abs(z.imag) <= 0.25
    assert np.max(np.abs(p(z) - u(z))[near]) <= 1e-8 * np.max(np.abs(u(z)))
    rel = weighted_norm(p(z) - u(z), grid256, flat, 64.0) / weighted_norm(u(z), grid256, flat, 64.0)
    assert rel <= 1e-8


def test_conj_z_projects_to_zero(square, grid256, flat):
    b = make_basis(square, 2)
    z = grid256.nodes
    # the moments <conj z, z^j> vanish on the symmetric square for j <= 2
    for j in range(3):
        assert abs(inner_product(np.conj(z), z**j, grid256, flat, 0.0)) <= 1e-12
    p = project(bergman.conj_z(square), b, orthonormal_factor(b, grid256, flat, 0.0), grid256, flat, 0.0)
    assert np.max(np.abs(p.coeffs)) <= 1e-12
    assert np.max(np.abs(p(z))) <= 1e-12


def test_residual_orthogonal_to_basis(bump, bump_k64, grid256, flat):
    p = bump_k64.projection
    z = grid256.nodes
    v = residual(bump, p)(z)
    E = orthonormal_values(p.basis, p.factor, z)
    mu = bergman.weighted_measure(grid256, flat, 64.0)
    overlaps = (v * mu) @ E.conj()
    assert np.max(np.abs(overlaps)) <= 1e-8 * weighted_norm(bump(z), grid256, flat, 64.0)


def test_pythagoras(bump, bump_k64, grid256, flat):
    p = bump_k64.projection
    z = grid256.nodes
    u, pu = bump(z), p(z)
    nu, npu, nv = (weighted_norm(g, grid256, flat, 64.0) for g in (u, pu, u - pu))
    assert abs(nv**2 + npu**2 - nu**2) <= 1e-8 * nu**2


def test_projection_is_holomorphic(bump_k64):
    p = bump_k64.projection
    z = np.array([0.1 + 0.05j, -0.4 + 0.2j, 0.6 - 0.3j])
    scale = np.max(np.abs(p(z)))
    # centered differences of a holomorphic function leave only the O(h^2) truncation term
    r1, r2 = np.max(cr_residual(p, z, 2e-5)), np.max(cr_residual(p, z, 1e-5))
    assert r2 <= 1e-7 * scale
    assert r2 < r1 / 3.0


def test_residual_dbar_matches_u_dbar(bump, bump_k64):
    v = residual(bump, bump_k64.projection)
    z = np.array([0.1 + 0.05j, -0.3 + 0.1j, 0.45 - 0.2j, 0.2j])
    errs = [np.max(np.abs(fd_dbar(v, z, h) - bump.dbar(z))) for h in (4e-3, 2e-3)]
    assert errs[1] < errs[0] / 3.0
    assert errs[1] < 1e-3 * np.max(np.abs(bump.dbar(z)))


def test_idempotence(bump_k64, grid256, flat):
    p = bump_k64.projection
    pp = project(p(grid256.nodes), p.basis, p.factor, grid256, flat, 64.0)
    assert np.max(np.abs(pp.coeffs - p.coeffs)) <= 1e-10


def test_self_adjoint(bump, bump_k64, grid256, flat):
    p = bump_k64.projection
    z = grid256.nodes
    rng = np.random.default_rng(3)
    g = rng.normal(size=len(z)) + 1j * rng.normal(size=len(z))
    pg = project(g, p.basis, p.factor, grid256, flat, 64.0)
    lhs = inner_product(p(z), g, grid256, flat, 64.0)
    rhs = inner_product(bump(z), pg(z), grid256, flat, 64.0)
    assert abs(lhs - rhs) <= 1e-8 * abs(lhs)


def test_minimality_under_perturbation(bump, bump_k64, grid256, flat):
    p = bump_k64.projection
    z = grid256.nodes
    v = bump(z) - p(z)
    nv2 = weighted_norm(v, grid256, flat, 64.0) ** 2
    E = orthonormal_values(p.basis, p.factor, z)
    eps = 1e-3
    for i in range(E.shape[1]):
        for phase in (1.0, 1j):
            grown = weighted_norm(v - eps * phase * E[:, i], grid256, flat, 64.0) ** 2 - nv2
            assert grown > 0
            assert grown == pytest.approx(eps**2, rel=1e-3)


def test_monotone_in_degree(bump, square, grid256, flat):
    z = grid256.nodes
    norms = []
    for d in (4, 8, 16, 32):
        p = project_fixed(bump, square, grid256, flat, 64.0, d)
        norms.append(weighted_norm(bump(z) - p(z), grid256, flat, 64.0))
    assert all(b <= a * (1 + 1e-9) for a, b in zip(norms, norms[1:]))


def test_grid_stability_of_residual_norm(bump, square, flat, E_flat):
    vals = []
    for n in (256, 512):
        q = geometry.build_grid(square, n, n)
        p = project_fixed(bump, square, q, flat, 64.0, 40)
        vals.append(weighted_norm(bump(q.nodes) - p(q.nodes), q, flat, 64.0))
    assert abs(vals[0] - vals[1]) <= 1e-4 * vals[1]


def test_adaptive_degree_history(bump_k64):
    hist = bump_k64.history
    assert hist[0].degree == bergman.initial_degree(64.0) == 20
    assert all(b.degree == 2 * a.degree for a, b in zip(hist, hist[1:]))
    last, prev = hist[-1].probe_error, hist[-2].probe_error
    assert abs(last - prev) < 0.02 * max(last, prev)


def test_adaptive_respects_max_degree(bump, square, grid256, flat, E_flat):
    res = bergman.project_adaptive(bump, square, grid256, flat, 64.0, E_flat.points, threshold=1e-12, max_degree=30)
    assert res.degree == 30
    assert [s.degree for s in res.history] == [20, 30]


# ---------------------------------------------------------------- kernel


def test_kernel_hermitian_and_positive(basis40, factor40_k64):
    rng = np.random.default_rng(11)
    z = rng.uniform(-0.9, 0.9, 20) + 1j * rng.uniform(-0.3, 0.3, 20)
    w = rng.uniform(-0.9, 0.9, 20) + 1j * rng.uniform(-0.3, 0.3, 20)
    K1 = bergman_kernel(basis40, factor40_k64, z, w)
    K2 = bergman_kernel(basis40, factor40_k64, w, z)
    np.testing.assert_allclose(K1, K2.conj(), rtol=1e-12)
    diag = bergman_kernel(basis40, factor40_k64, z, z)
    assert np.all(diag.real >= 0)
    assert np.max(np.abs(diag.imag)) <= 1e-12 * np.max(diag.real)


def test_kernel_reproduces_b1(basis40, factor40_k64, grid256, flat):
    z = grid256.nodes
    b1 = basis40.evaluate(z)[:, 1]
    for wpt in (0.2 + 0.1j, -0.5 + 0.05j):
        Kz = bergman_kernel(basis40, factor40_k64, z, np.full(z.shape, wpt))
        val = inner_product(b1, Kz, grid256, flat, 64.0)
        expected = basis40.evaluate(np.array([wpt]))[0, 1]
        assert abs(val - expected) <= 1e-6 * abs(expected)
