import numpy as np
import pytest
from hypothesis import given, strategies as st

from goursat_spde.grid import (
    BoundaryData,
    InconsistentCornerError,
    InvalidSpecError,
    ScalarField,
    build_grid,
    constant_boundary,
    sample_boundary,
)


@pytest.mark.parametrize(
    "args, dx, dt",
    [
        ((2, 2, 100, 100), 0.02, 0.02),
        ((1, 1, 1, 1), 1.0, 1.0),
        ((2, 3, 1000, 1200), 0.002, 0.0025),
    ],
)
def test_build_grid_steps(args, dx, dt):
    spec = build_grid(*args)
    assert spec.dx == pytest.approx(dx, rel=1e-12)
    assert spec.dt == pytest.approx(dt, rel=1e-12)
    assert spec.dx * spec.n_x == pytest.approx(spec.x_f, rel=1e-12)
    assert spec.dt * spec.n_t == pytest.approx(spec.t_f, rel=1e-12)


def test_minimal_grid_has_four_points():
    spec = build_grid(1, 1, 1, 1)
    assert spec.n_points == 4
    assert spec.shape == (2, 2)


@pytest.mark.parametrize(
    "args",
    [(0, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0), (1, 1, 1.5, 2), (float("nan"), 1, 1, 1)],
)
def test_build_grid_rejects_bad_input(args):
    with pytest.raises(InvalidSpecError):
        build_grid(*args)


@given(
    st.floats(0.1, 100), st.floats(0.1, 100), st.integers(1, 400), st.integers(1, 400), st.data()
)
def test_index_coordinate_round_trip(x_f, t_f, n_x, n_t, data):
    spec = build_grid(x_f, t_f, n_x, n_t)
    i = data.draw(st.integers(0, n_x))
    j = data.draw(st.integers(0, n_t))
    assert spec.index(*spec.coord(i, j)) == (i, j)


def test_build_grid_is_deterministic():
    assert build_grid(2, 3, 7, 9) == build_grid(2, 3, 7, 9)


def test_sample_boundary_constant():
    spec = build_grid(2, 2, 10, 10)
    bc = sample_boundary(spec, lambda x: 1.0, lambda t: 1.0)
    assert np.all(bc.f == 1) and np.all(bc.g == 1)
    assert bc.c == 1.0


def test_sample_boundary_exponential():
    spec = build_grid(2, 2, 10, 10)
    bc = sample_boundary(spec, np.exp, np.exp)
    assert bc.f[0] == bc.g[0] == 1.0
    np.testing.assert_allclose(bc.f, np.exp(spec.x))


def test_inconsistent_corner():
    spec = build_grid(1, 1, 4, 4)
    with pytest.raises(InconsistentCornerError):
        sample_boundary(spec, lambda x: 0.0 * x, lambda t: 0.5 + 0.0 * t)


def test_corner_tolerance_is_relative():
    BoundaryData([1e6, 1.0], [1e6 * (1 + 5e-13), 2.0])
    with pytest.raises(InconsistentCornerError):
        BoundaryData([1e6, 1.0], [1e6 * (1 + 5e-12), 2.0])


def test_boundary_length_checked_against_grid():
    spec = build_grid(1, 1, 4, 4)
    with pytest.raises(ValueError):
        constant_boundary(build_grid(1, 1, 5, 4), 0.0).check(spec)


def test_field_shape_enforced_and_immutable():
    spec = build_grid(1, 1, 2, 3)
    with pytest.raises(ValueError):
        ScalarField(spec, np.zeros((3, 3)))
    f = ScalarField(spec, np.zeros((3, 4)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
