import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergapprox import geometry, weights
from bergapprox.geometry import EmptyZeroSet, Rect, build_grid, sample_zero_set, shrink_to_compact


def test_two_by_two_grid_on_unit_square(square):
    q = build_grid(square, 2, 2)
    assert len(q) == 4
    np.testing.assert_array_equal(q.weights, [1.0, 1.0, 1.0, 1.0])
    assert q.weights.sum() == 4.0
    assert sorted(q.nodes, key=lambda z: (z.real, z.imag)) == [-0.5 - 0.5j, -0.5 + 0.5j, 0.5 - 0.5j, 0.5 + 0.5j]


@settings(max_examples=50, deadline=None)
@given(
    cx=st.floats(-5, 5), cy=st.floats(-5, 5),
    hx=st.floats(0.01, 10), hy=st.floats(0.01, 10),
    nx=st.integers(2, 60), ny=st.integers(2, 60),
)
def test_weights_partition_the_rectangle(cx, cy, hx, hy, nx, ny):
    rect = Rect(complex(cx, cy), hx, hy)
    q = build_grid(rect, nx, ny)
    assert len(q.nodes) == len(q.weights) == nx * ny
    assert np.all(q.weights > 0)
    assert math.isclose(q.weights.sum(), rect.area, rel_tol=1e-12)
    assert np.all(rect.contains(q.nodes))


def test_degenerate_grid_rejected(square):
    with pytest.raises(ValueError, match="degenerate"):
        build_grid(square, 1, 8)


def test_rect_rejects_nonpositive_widths():
    with pytest.raises(ValueError):
        Rect(0j, 0.0, 1.0)


def test_x_squared_integral(square):
    q = build_grid(square, 256, 256)
    approx = np.sum(q.nodes.real**2 * q.weights)
    assert abs(approx - 4 / 3) / (4 / 3) <= 1e-4


def test_midpoint_rule_is_second_order(square):
    exact = (2 * math.sin(1.0)) * (2 * math.sinh(1.0))
    errs = []
    for n in (16, 32, 64, 128):
        q = build_grid(square, n, n)
        g = np.cos(q.nodes.real) * np.exp(q.nodes.imag)
        errs.append(abs(np.sum(g * q.weights) - exact))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.8, orders


def test_shrink_to_compact(square):
    assert shrink_to_compact(square, 0.0).rect == square
    K = shrink_to_compact(square, 0.5)
    assert K.rect == Rect(0j, 0.5, 0.5)
    assert K.margin == 0.5
    with pytest.raises(ValueError, match="collapses"):
        shrink_to_compact(square, 1.0)
    with pytest.raises(ValueError):
        shrink_to_compact(square, -0.1)


def test_zero_set_of_flat_line(square):
    w = weights.make_model_weight("flat_line")
    E = sample_zero_set(w, square, 101)
    assert len(E) == 101
    assert np.max(np.abs(E.points.imag)) <= 1e-10
    assert np.all(w(E.points) <= E.tolerance)


def test_zero_set_of_circle_parametric():
    w = weights.make_model_weight("circle", {"radius": 1.0}, Rect(1.2, 0.5, 0.5))
    E = sample_zero_set(w, Rect(0j, 2.0, 2.0), 200)
    assert len(E) == 200
    assert np.max(np.abs(np.abs(E.points) - 1.0)) <= 1e-10


def _strip_only(w):
    """The same weight without its parametric zero set."""
    return weights.Weight(w.name, w.phi, w.grad, w.complex_hessian, w.delta)


def test_zero_set_bisection_fallback_line(square):
    w = _strip_only(weights.make_model_weight("flat_line"))
    E = sample_zero_set(w, square, 41)
    assert len(E) > 0
    assert np.max(np.abs(E.points.imag)) <= 1e-10
    assert np.all(w(E.points) <= 1e-12)


def test_zero_set_bisection_fallback_circle():
    w = _strip_only(weights.make_model_weight("circle", {"radius": 1.0}, Rect(1.2, 0.5, 0.5)))
    E = sample_zero_set(w, Rect(0j, 2.0, 2.0), 41, tolerance=1e-20)
    assert len(E) > 20
    assert np.max(np.abs(np.abs(E.points) - 1.0)) <= 1e-10


def test_positive_weight_signals_empty_zero_set(square):
    base = weights.make_model_weight("flat_line")
    lifted = weights.Weight("lifted", lambda z: base.phi(z) + 1.0, base.grad, base.complex_hessian, 0.5)
    with pytest.raises(EmptyZeroSet):
        sample_zero_set(lifted, square, 21)
    with pytest.raises(EmptyZeroSet):
        sample_zero_set(base, Rect(2j, 1.0, 0.5), 21)


def test_zero_set_restricted_to_compact(square):
    w = weights.make_model_weight("flat_line")
    K = shrink_to_compact(square, 0.25)
    E = sample_zero_set(w, square, 201).restrict(K)
    assert np.all(np.abs(E.points.real) <= 0.75)
    assert len(E) > 100


def test_tensor_grid_in_two_variables(square):
    q = geometry.tensor_grid(square, 4, 4)
    assert q.nodes.shape == (256, 2)
    assert math.isclose(q.weights.sum(), square.area**2, rel_tol=1e-12)
