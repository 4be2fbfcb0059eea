import numpy as np
import pytest

from greenlab.geometry import Ball, Ellipsoid, PerturbedBall
from greenlab.kernels import DIRICHLET, NEUMANN, KelvinBallGreen, ball_dirichlet_green, multi_index
from greenlab.solver import (
    GreenFunction,
    SolverSettings,
    build_correction,
    test_function,
    uniqueness_probe,
    verify_representation,
)


def _ball_samples(rng, m, radius=0.9):
    v = rng.standard_normal((m, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * radius * rng.uniform(0, 1, (m, 1)) ** (1 / 3)


@pytest.fixture(scope="module")
def ball():
    return Ball(3)


@pytest.fixture(scope="module")
def gd(ball):
    return GreenFunction(ball, DIRICHLET)


@pytest.fixture(scope="module")
def gn(ball):
    return GreenFunction(ball, NEUMANN)


def test_settings_roundtrip():
    s = SolverSettings.from_dict({"m": 300, "dilation": 1.3})
    assert s.m == 300 and SolverSettings.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError, match="bogus"):
        SolverSettings.from_dict({"bogus": 1})


def test_centre_correction_constant(gd):
    rng = np.random.default_rng(0)
    y = _ball_samples(rng, 100)
    assert np.max(np.abs(gd.h(np.zeros(3), y) - 1 / (4 * np.pi))) <= 1e-6


@pytest.mark.parametrize("x", [(0.5, 0, 0), (0.2, -0.3, 0.4), (0.0, 0.0, 0.9)])
def test_kelvin_match(gd, x):
    rng = np.random.default_rng(1)
    x = np.array(x)
    y = _ball_samples(rng, 100)
    y = y[np.linalg.norm(y - x, axis=1) > 1e-2]
    exact = ball_dirichlet_green(x, y)
    assert np.max(np.abs(gd.green(x, y) - exact)) <= 1e-6


def test_kelvin_x_derivatives(gd):
    kb = KelvinBallGreen()
    x = np.array([0.3, 0.1, -0.2])
    y = np.array([[-0.4, 0.2, 0.1], [0.1, -0.5, 0.3]])
    for i in range(3):
        e = multi_index(3, i)
        assert np.allclose(gd.h(x, y, alpha=e), kb.correction(x, y, alpha=e), atol=1e-6)


def _held_out(ball, rng, m=300):
    om = rng.standard_normal((m, 3))
    om /= np.linalg.norm(om, axis=1)[:, None]
    return ball.boundary_point(om)


@pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
def test_boundary_residual_held_out(ball, gd, gn, kind):
    g = gd if kind == DIRICHLET else gn
    res = g.boundary_data_residual(np.array([0.5, 0, 0]), _held_out(ball, np.random.default_rng(2)))
    assert np.max(np.abs(res)) <= 1e-6


@pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
def test_near_pole_residual_within_fit_residual(ball, gd, gn, kind):
    # near the boundary the data peak like d^(1-n); compare against the fit residual
    g = gd if kind == DIRICHLET else gn
    x = np.array([0.0, 0.3, 0.85])
    corr = g.correction(x)
    assert corr.ok and corr.near
    res = g.boundary_data_residual(x, _held_out(ball, np.random.default_rng(2)))
    assert np.max(np.abs(res)) <= 10 * corr.residual


@pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
def test_symmetry(gd, gn, kind):
    g = gd if kind == DIRICHLET else gn
    rng = np.random.default_rng(3)
    pool = _ball_samples(rng, 10, 0.8)
    worst = 0.0
    for i in range(10):
        for j in range(i + 1, 10):
            worst = max(worst, abs(g.green(pool[i], pool[j]) - g.green(pool[j], pool[i])))
    assert worst <= 1e-5


def test_neumann_mean_zero_and_compatibility(gn):
    x = np.array([0.5, 0.0, 0.0])
    assert abs(gn.compatibility(x)) <= 1e-8
    vq = gn.volume_rule_at(x, 32)
    assert abs(vq.integrate(gn.green(x, vq.nodes))) <= 1e-8


def test_harmonicity(gd, gn, ball):
    x = np.array([0.2, 0.3, -0.1])
    y = np.array([[0.5, -0.2, 0.1], [-0.3, 0.1, 0.6]])
    for g, target in ((gd, 0.0), (gn, -1.0 / ball.volume)):
        lap = sum(g.h(x, y, beta=2 * np.eye(3, dtype=int)[i]) for i in range(3))
        assert np.allclose(lap, target, atol=1e-8)


def test_mixed_derivative_fd(gd):
    x = np.array([0.2, 0.1, -0.3])
    y = np.array([-0.3, 0.4, 0.2])
    du = 1e-4
    e1, e2, _ = np.eye(3)
    fd = (
        gd.green(x + du * e1, y + du * e2)
        - gd.green(x + du * e1, y - du * e2)
        - gd.green(x - du * e1, y + du * e2)
        + gd.green(x - du * e1, y - du * e2)
    ) / (4 * du * du)
    exact = gd.green(x, y, alpha=(1, 0, 0), beta=(0, 1, 0))
    assert abs(exact - fd) <= 1e-4 * abs(exact)


def test_unsupported_orders(gd):
    with pytest.raises(ValueError):
        gd.green(np.zeros(3) + 0.1, np.array([0.2, 0, 0]), alpha=(3, 0, 0))


def test_pole_outside_rejected(ball):
    with pytest.raises(ValueError):
        build_correction(ball, DIRICHLET, np.array([1.1, 0, 0]))


class TestRepresentation:
    @pytest.mark.parametrize("name", ["constant", "coordinate", "squared_norm", "exponential"])
    @pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
    def test_family(self, gd, gn, kind, name):
        g = gd if kind == DIRICHLET else gn
        u = test_function(name)
        r = verify_representation(g, u, np.array([0.1, -0.2, 0.3]))
        assert r.relative <= 1e-4

    def test_neumann_constant_exact(self, gn):
        r = verify_representation(gn, test_function("constant"), np.array([0.3, 0.0, 0.1]))
        assert abs(r.lhs) <= 1e-14
        assert r.rhs == 0.0

    def test_dirichlet_squared_norm_terms(self, gd):
        r = verify_representation(gd, test_function("squared_norm"), np.zeros(3))
        assert r.surface == pytest.approx(1.0, abs=1e-6)
        assert r.volume == pytest.approx(-1.0, abs=1e-6)

    def test_neumann_squared_norm_mean(self, gn):
        r = verify_representation(gn, test_function("squared_norm"), np.zeros(3))
        assert r.lhs == pytest.approx(-3 / 5, abs=1e-10)
        assert r.rhs == pytest.approx(-3 / 5, abs=1e-4)

    def test_missing_mean_breaks_neumann(self, gn):
        # negative control: without the mean the constant function is not represented
        r = verify_representation(gn, test_function("constant"), np.zeros(3))
        assert abs((r.lhs + r.mean) - r.rhs) > 0.5


class TestUniqueness:
    def test_ball_dirichlet_m(self, ball):
        x = np.array([0.3, 0.2, -0.1])
        d = uniqueness_probe(ball, DIRICHLET, x, SolverSettings(m=300), SolverSettings(m=500))
        assert d <= 1e-5

    def test_ball_neumann_dilation(self, ball):
        x = np.array([0.3, 0.2, -0.1])
        d = uniqueness_probe(ball, NEUMANN, x, SolverSettings(dilation=1.3), SolverSettings(dilation=1.6))
        assert d <= 1e-5

    def test_ellipsoid_dirichlet(self):
        dom = Ellipsoid((1.0, 1.0, 1.2))
        d = uniqueness_probe(dom, DIRICHLET, np.array([0.2, 0.0, 0.3]), SolverSettings(m=300), SolverSettings(m=500))
        assert d <= 1e-4


@pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
def test_lp_norm_bounded_near_boundary(kind):
    dom = PerturbedBall(3, 0.1, 2)
    g = GreenFunction(dom, kind)
    z = dom.boundary_point(np.array([0.0, 0.6, 0.8]))
    nu = dom.normal(z)
    norms = np.array([g.lp_norm(z - t * nu, 1.2) for t in (0.2, 0.1, 0.05, 0.025)])
    assert np.all(np.isfinite(norms))
    # no growth as the pole approaches the boundary
    assert np.all(norms[1:] <= 1.1 * norms[:-1])
