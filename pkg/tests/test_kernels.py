import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenlab.kernels import (
    DIRICHLET,
    NEUMANN,
    HalfSpaceGreen,
    KelvinBallGreen,
    ball_dirichlet_green,
    gamma,
    gamma_deriv,
    halfspace_green,
    indices_up_to,
    kernel,
    multi_index,
    normalize_kind,
    sphere_area,
    zero_index,
)

Z3 = zero_index(3)


def _fd(f, x, axis, h=1e-5):
    e = np.zeros_like(x)
    e[axis] = h
    return (f(x + e) - f(x - e)) / (2 * h)


def _rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    return q * np.sign(np.diag(r))


def test_sphere_area():
    assert sphere_area(3) == pytest.approx(4 * np.pi, abs=1e-12)
    assert sphere_area(4) == pytest.approx(2 * np.pi**2, rel=1e-12)
    assert kernel(3).c_n == pytest.approx(4 * np.pi, abs=1e-12)


@pytest.mark.parametrize(
    "x, y, expected",
    [
        ((0, 0, 0), (1, 0, 0), -1 / (4 * np.pi)),
        ((0, 0, 0), (0, 0, 2), -1 / (8 * np.pi)),
        ((0.2, -0.1, 0.3), (0.2, -0.1, 0.8), -1 / (2 * np.pi)),
    ],
)
def test_gamma_values(x, y, expected):
    assert gamma(np.array(x, float), np.array(y, float)) == pytest.approx(expected, rel=1e-14)


def test_gamma_n4():
    k = kernel(4)
    val = k.gamma(np.zeros(4), np.array([0.0, 0.0, 0.0, 2.0]))
    assert val == pytest.approx(-1 / (2 * np.pi**2 * 4), rel=1e-14)


def test_translation_identity():
    rng = np.random.default_rng(3)
    x, y = rng.standard_normal((2, 200, 3))
    for i in range(3):
        e = multi_index(3, i)
        s = gamma_deriv(e, Z3, x, y) + gamma_deriv(Z3, e, x, y)
        assert np.max(np.abs(s)) < 1e-15 * np.max(np.abs(gamma_deriv(e, Z3, x, y)))


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivatives_match_finite_differences(order):
    rng = np.random.default_rng(order)
    k = kernel(3)
    x = rng.standard_normal(3)
    y = x + 0.7 * rng.standard_normal(3) + 0.5
    for total in indices_up_to(3, order):
        if sum(total) != order:
            continue
        # move the last differentiated axis to a finite difference in y
        ax = int(np.nonzero(total)[0][-1])
        lower = list(total)
        lower[ax] -= 1
        lower = tuple(lower)
        exact = k.gamma_deriv(lower, multi_index(3, ax), x, y)
        approx = _fd(lambda yy: k.gamma_deriv(lower, Z3, x, yy), y, ax)
        assert abs(exact - approx) <= 1e-6 * max(abs(exact), 1e-3)


def test_order_limit_and_coincidence():
    k = kernel(3)
    with pytest.raises(ValueError):
        k.gamma_deriv((2, 2, 0), Z3, np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        k.gamma(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        kernel(2)


vec = st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3).map(np.array)


@settings(max_examples=60, deadline=None)
@given(vec, vec, st.floats(0.1, 10))
def test_homogeneity(x, y, lam):
    if np.linalg.norm(x - y) < 1e-2:
        return
    k = kernel(3)
    for a in indices_up_to(3, 2):
        if sum(a) == 0:
            continue
        p = sum(a)
        lhs = k.gamma_deriv(a, Z3, lam * x, lam * y)
        rhs = lam ** (2 - 3 - p) * k.gamma_deriv(a, Z3, x, y)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_normalize_kind():
    assert normalize_kind("D") == DIRICHLET
    assert normalize_kind("neumann") == NEUMANN
    with pytest.raises(ValueError):
        normalize_kind("robin")


class TestHalfSpace:
    def test_dirichlet_value(self):
        val = halfspace_green("dirichlet", np.array([0, 0, -1.0]), np.array([0, 0, -2.0]))
        assert val == pytest.approx(-1 / (6 * np.pi), rel=1e-14)

    def test_rejects_upper_points(self):
        with pytest.raises(ValueError):
            halfspace_green("dirichlet", np.array([0, 0, 1.0]), np.array([0, 0, -2.0]))

    @pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
    def test_tangential_cancellation_is_exact(self, kind):
        g = HalfSpaceGreen(kind)
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, (50, 3))
        x[:, 2] = -np.abs(x[:, 2]) - 0.1
        y = rng.uniform(-1, 1, (50, 3))
        y[:, 2] = -np.abs(y[:, 2]) - 0.1
        for i in range(2):
            e = multi_index(3, i)
            s = g.green(x, y, alpha=e) + g.green(x, y, beta=e)
            assert np.max(np.abs(s)) < 1e-14

    def test_normal_combination_nonzero(self):
        g = HalfSpaceGreen(DIRICHLET)
        x, y = np.array([0, 0, -1.0]), np.array([0, 0, -2.0])
        e = multi_index(3, 2)
        s = g.green(x, y, alpha=e) + g.green(x, y, beta=e)
        # only the image term 1/(4 pi |x - ybar|) survives, with |x - ybar| = -x_3 - y_3 = 3
        assert s == pytest.approx(2 / (4 * np.pi * 9), rel=1e-13)
        h = 1e-5
        diag = (g.green(x + h * np.eye(3)[2], y + h * np.eye(3)[2]) - g.green(x - h * np.eye(3)[2], y - h * np.eye(3)[2])) / (2 * h)
        assert s == pytest.approx(diag, rel=1e-7)

    @pytest.mark.parametrize("kind", [DIRICHLET, NEUMANN])
    def test_boundary_condition_rate(self, kind):
        g = HalfSpaceGreen(kind)
        x = np.array([0.1, 0.2, -0.5])
        vals = []
        for eps in (1e-2, 1e-3, 1e-4):
            y = np.array([0.3, -0.1, -eps])
            v = g.green(x, y) if kind == DIRICHLET else g.green(x, y, beta=multi_index(3, 2))
            vals.append(abs(v))
        # Dirichlet value is O(eps); Neumann normal derivative is O(eps)
        assert vals[1] / vals[0] == pytest.approx(0.1, rel=1e-2)
        assert vals[2] / vals[1] == pytest.approx(0.1, rel=1e-2)


class TestKelvinBall:
    def test_centre_correction_constant(self):
        rng = np.random.default_rng(1)
        y = rng.uniform(-0.5, 0.5, (20, 3))
        h = KelvinBallGreen().correction(np.zeros(3), y)
        assert np.allclose(h, 1 / (4 * np.pi), atol=1e-14)

    def test_boundary_limit(self):
        x = np.array([0.3, -0.2, 0.1])
        w = np.array([0.6, 0.0, 0.8])
        assert abs(ball_dirichlet_green(x, (1 - 1e-12) * w)) < 1e-10

    def test_symmetry(self):
        x, y = np.array([0.3, 0, 0]), np.array([0, 0.4, 0])
        assert ball_dirichlet_green(x, y) == pytest.approx(ball_dirichlet_green(y, x), abs=1e-12)

    def test_rotational_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            Q = _rotation(rng)
            x, y = 0.5 * rng.uniform(-1, 1, (2, 3))
            assert ball_dirichlet_green(Q @ x, Q @ y) == pytest.approx(ball_dirichlet_green(x, y), abs=1e-12)

    def test_correction_derivatives_fd(self):
        kb = KelvinBallGreen()
        x, y = np.array([0.2, -0.3, 0.4]), np.array([-0.1, 0.5, 0.2])
        for i in range(3):
            e = multi_index(3, i)
            assert kb.correction(x, y, alpha=e) == pytest.approx(_fd(lambda xx: kb.correction(xx, y), x, i), rel=1e-7)
            assert kb.correction(x, y, beta=e) == pytest.approx(_fd(lambda yy: kb.correction(x, yy), y, i), rel=1e-7)

    def test_outside_rejected(self):
        with pytest.raises(ValueError):
            ball_dirichlet_green(np.array([1.2, 0, 0]), np.zeros(3) + 0.1)
