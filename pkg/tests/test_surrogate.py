from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgbspline.exceptions import DomainError
from sgbspline.grid import regular_grid
from sgbspline.io import load_interpolant, save_interpolant
from sgbspline.surrogate import (
    EntrywiseMatrixSurrogate,
    Interpolant,
    build_spd_surrogate,
    cholesky_upper,
    extrapolated_evaluate,
)
from sgbspline.testfns import spd_field


def f(x):
    x = np.atleast_2d(x)
    return np.sin(2 * x[:, 0]) * np.exp(x[:, 1]) + x[:, 0] * x[:, 1] ** 2


@pytest.fixture(scope="module")
def interp():
    g = regular_grid(5, 2)
    return Interpolant.from_values(g, "not-a-knot:3", lambda x: f(x)[0])


def test_reproduces_grid_values(interp):
    pts = interp.points()
    np.testing.assert_allclose(interp.evaluate(pts), f(pts), atol=1e-10)


def test_single_point_and_batch_agree(interp):
    x = np.array([[0.3, 0.7], [0.9, 0.1]])
    batch = interp.evaluate(x)
    assert interp.evaluate(x[0]) == pytest.approx(batch[0], abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_gradient_matches_finite_differences(interp, a, b):
    x = np.array([a, b])
    h = 1e-6
    fd = [(interp.evaluate(x + h * e) - interp.evaluate(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(interp.gradient(x), fd, atol=1e-5)


def test_hessian_symmetric_and_consistent(interp):
    rng = np.random.default_rng(0)
    h = 1e-5
    for x in rng.uniform(0.05, 0.95, (10, 2)):
        H = interp.hessian(x)
        np.testing.assert_allclose(H, H.T, atol=1e-10)
        fd = np.array([(interp.gradient(x + h * e) - interp.gradient(x - h * e)) / (2 * h) for e in np.eye(2)])
        np.testing.assert_allclose(H, fd, atol=1e-4)


def test_cubic_is_reproduced_exactly():
    g = regular_grid(4, 2)
    cubic = lambda x: x[0] ** 3 - 2 * x[0] * x[1] ** 2 + 0.5
    s = Interpolant.from_values(g, "not-a-knot:3", cubic)
    x = np.random.default_rng(1).uniform(size=(50, 2))
    np.testing.assert_allclose(s.evaluate(x), [cubic(v) for v in x], atol=1e-12)


def test_outside_domain_raises(interp):
    with pytest.raises(DomainError):
        interp.evaluate([1.2, 0.5])


def test_extrapolation_modes(interp):
    x_in = np.array([1.0, 0.4])
    x = np.array([1.1, 0.4])
    delta = x - x_in
    v, g, H = interp.evaluate(x_in), interp.gradient(x_in), interp.hessian(x_in)
    assert extrapolated_evaluate(interp, x, "constant") == pytest.approx(v)
    assert extrapolated_evaluate(interp, x, "linear") == pytest.approx(v + g @ delta)
    # quadratic term enters without a factor 1/2
    assert extrapolated_evaluate(interp, x, "quadratic") == pytest.approx(v + g @ delta + delta @ H @ delta)
    inside = np.array([0.3, 0.6])
    for mode in ("constant", "linear", "quadratic"):
        assert extrapolated_evaluate(interp, inside, mode) == pytest.approx(interp.evaluate(inside))
    with pytest.raises(DomainError):
        extrapolated_evaluate(interp, x, "cubic")


def test_linearity():
    g = regular_grid(3, 2)
    rng = np.random.default_rng(2)
    u, v = rng.normal(size=len(g)), rng.normal(size=len(g))
    fu = Interpolant.from_values(g, "uniform:3", u)
    fv = Interpolant.from_values(g, "uniform:3", v)
    combo = Interpolant.from_values(g, "uniform:3", 2 * u - 3 * v)
    np.testing.assert_allclose(fu.scaled(2.0, fv, -3.0).surpluses, combo.surpluses, atol=1e-10)


def test_vector_valued_interpolant():
    g = regular_grid(3, 2)
    vals = np.stack([f(g.coordinates()), -f(g.coordinates())], axis=1)
    s = Interpolant.from_values(g, "not-a-knot:3", vals)
    x = np.array([0.2, 0.8])
    out = s.evaluate(x)
    assert out.shape == (2,) and out[0] == pytest.approx(-out[1])
    assert s.gradient(x).shape == (2, 2)


def test_save_load_roundtrip(tmp_path, interp):
    save_interpolant(interp, tmp_path / "s")
    back = load_interpolant(tmp_path / "s")
    x = np.random.default_rng(3).uniform(size=(20, 2))
    np.testing.assert_allclose(back.evaluate(x), interp.evaluate(x), atol=0)


def test_cholesky_upper():
    e = np.array([[4.0, 2.0], [2.0, 3.0]])
    r = cholesky_upper(e)
    np.testing.assert_allclose(r.T @ r, e)
    assert np.all(np.diag(r) > 0) and r[1, 0] == 0
    with pytest.raises(DomainError):
        cholesky_upper(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_identity_field_gives_identity():
    g = regular_grid(3, 2)
    s = build_spd_surrogate(g, "not-a-knot:3", lambda x: np.eye(3))
    x = np.random.default_rng(4).uniform(size=(10, 2))
    np.testing.assert_allclose(s.evaluate(x), np.broadcast_to(np.eye(3), (10, 3, 3)), atol=1e-12)


@pytest.fixture(scope="module")
def spd():
    field = spd_field()
    g = regular_grid(5, 2)
    return field, g, build_spd_surrogate(g, "not-a-knot:3", field)


def test_spd_reproduces_samples_and_is_definite(spd):
    field, g, s = spd
    for x in g.coordinates()[::7]:
        np.testing.assert_allclose(s.evaluate(x), field(x), atol=1e-9)
    x = np.random.default_rng(5).uniform(size=(500, 2))
    vals = s.evaluate(x)
    np.testing.assert_allclose(vals, np.swapaxes(vals, -1, -2), atol=1e-12)
    assert np.min(np.linalg.eigvalsh(vals)) >= 0.0


def test_spd_derivative_matches_finite_differences(spd):
    _, _, s = spd
    h = 1e-6
    for x in np.random.default_rng(6).uniform(0.05, 0.95, (5, 2)):
        for t in range(2):
            e = np.eye(2)[t]
            fd = (s.evaluate(x + h * e) - s.evaluate(x - h * e)) / (2 * h)
            np.testing.assert_allclose(s.derivative(x, t), fd, atol=1e-5 * max(1.0, np.abs(fd).max()))


def test_non_spd_samples_rejected():
    g = regular_grid(2, 1)
    with pytest.raises(DomainError, match="positive definite"):
        build_spd_surrogate(g, "uniform:1", lambda x: np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(DomainError, match="symmetric"):
        build_spd_surrogate(g, "uniform:1", lambda x: np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_entrywise_matches_samples(spd):
    field, g, _ = spd
    ent = EntrywiseMatrixSurrogate(g, "not-a-knot:3", field)
    x = g.coordinates()[5]
    np.testing.assert_allclose(ent.evaluate(x), field(x), atol=1e-9)
