import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenlab.geometry import (
    Ball,
    Ellipsoid,
    HalfSpace,
    PerturbedBall,
    make_domain,
    sphere_rule,
    uniform_directions,
)


@pytest.fixture(scope="module")
def ball():
    return Ball(3)


@pytest.fixture(scope="module")
def pball():
    return PerturbedBall(3, 0.1, 2)


def test_make_domain_kinds():
    assert isinstance(make_domain({"kind": "ball"}), Ball)
    assert isinstance(make_domain({"kind": "ellipsoid", "axes": [1, 1, 1.2]}), Ellipsoid)
    assert isinstance(make_domain({"kind": "perturbed_ball", "eps": 0.1, "index": 2}), PerturbedBall)
    with pytest.raises(ValueError):
        make_domain({"kind": "torus"})


def test_domain_invariants(pball):
    assert pball.kappa0 < pball.R0
    for z in pball.boundary_point(uniform_directions(3, 12)):
        fr = pball.frame_at(z)
        assert abs(fr.psi(np.zeros((1, 2)))[0]) < 1e-10
        assert np.max(np.abs(fr.psi_grad(np.zeros((1, 2))))) < 1e-10


def test_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        Ball(3, radius=-1.0)


class TestNearestPoint:
    def test_axis(self, ball):
        np_ = ball.nearest_boundary_point(np.array([0, 0, 0.5]))
        assert np.allclose(np_.point, [0, 0, 1], atol=1e-12)
        assert np_.distance == pytest.approx(0.5)
        assert np_.unique

    def test_centre_nonunique(self, ball):
        np_ = ball.nearest_boundary_point(np.zeros(3))
        assert np_.distance == pytest.approx(1.0)
        assert not np_.unique

    def test_outside_rejected(self, ball):
        with pytest.raises(ValueError):
            ball.nearest_boundary_point(np.array([0, 0, 1.5]))

    def test_perturbed_matches_brute_force(self, pball):
        y = np.array([0.0, 0.0, 0.9])
        got = pball.nearest_boundary_point(y)
        th, ph = np.meshgrid(np.linspace(0, 0.5, 2001), np.linspace(0, 2 * np.pi, 64))
        om = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1).reshape(-1, 3)
        brute = np.min(np.linalg.norm(pball.boundary_point(om) - y, axis=1))
        assert got.distance == pytest.approx(brute, abs=1e-6)
        assert got.distance <= brute + 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_normal_alignment(self, pball, seed):
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        z = pball.boundary_point(w)
        y = z - 0.05 * pball.normal(z)
        got = pball.nearest_boundary_point(y)
        d = (got.point - y) / got.distance
        assert np.allclose(d, pball.normal(got.point), atol=1e-8)


class TestReflection:
    def test_flat_chart(self):
        hs = HalfSpace(3)
        assert np.allclose(hs.reflect(np.array([0.3, -0.2, -0.4]), np.zeros(3)), [0.3, -0.2, 0.4])

    def test_ball_axis(self, ball):
        t = 0.1
        out = ball.reflect(np.array([0, 0, 1 - t]), np.array([0, 0, 1.0]))
        assert np.allclose(out, [0, 0, 1 + t], atol=1e-14)

    def test_isometry_and_involution(self, ball):
        z = np.array([0, 0, 1.0])
        y = np.array([0.05, 0, 0.95])
        yb = ball.reflect(y, z)
        assert np.linalg.norm(yb - z) == pytest.approx(np.linalg.norm(y - z), abs=1e-10)
        assert not ball.contains(yb, closed=True)
        assert np.allclose(ball.frame_at(z).reflect(yb), y, atol=1e-12)

    def test_outside_cylinder(self, ball):
        with pytest.raises(ValueError):
            ball.reflect(np.array([0.0, 0.0, -0.9]), np.array([0, 0, 1.0]))


class TestQuadrature:
    def test_ball_area_volume(self, ball):
        assert ball.surface_quadrature(16).total == pytest.approx(4 * np.pi, abs=1e-10)
        assert ball.volume_quadrature(16).total == pytest.approx(4 * np.pi / 3, abs=1e-10)
        assert ball.volume == pytest.approx(4 * np.pi / 3, abs=1e-12)

    def test_weights_positive(self, pball):
        for q in (pball.surface_quadrature(12), pball.volume_quadrature(8)):
            assert np.all(q.weights > 0)

    def test_perturbed_area_self_convergence(self, pball):
        a = [pball.surface_quadrature(m).total for m in (12, 24, 48)]
        assert abs(a[2] - a[1]) < 1e-8
        assert abs(a[2] - a[1]) < abs(a[1] - a[0]) or abs(a[1] - a[0]) < 1e-12

    def test_divergence_theorem(self, pball):
        # flux of y through the boundary equals n |Omega|
        q = pball.surface_quadrature(32)
        flux = q.integrate(np.einsum("ij,ij->i", q.nodes, q.normals))
        assert flux == pytest.approx(3 * pball.volume, rel=1e-10)

    def test_graded_rule_integrates_area(self, pball):
        q = pball.graded_surface_quadrature(np.array([0.0, 0.6, 0.8]), 0.05, order=12, azimuth=24)
        assert q.total == pytest.approx(pball.area, rel=1e-9)

    def test_order_too_low(self):
        with pytest.raises(ValueError):
            sphere_rule(3, 1)


class TestFrames:
    def test_ball_north_pole(self, ball):
        fr = ball.frame_at(np.array([0, 0, 1.0]))
        assert np.allclose(fr.normal, [0, 0, 1])
        t = fr.tangent(0, np.array([0, 0, 1.0]))
        assert abs(t @ fr.normal) < 1e-12
        assert np.linalg.norm(t) == pytest.approx(1.0)

    def test_tangent_on_boundary(self, ball):
        fr = ball.frame_at(np.array([0, 0, 1.0]))
        y = np.array([0.1, 0, np.sqrt(1 - 0.01)])
        for i in range(2):
            assert abs(fr.tangent(i, y) @ y) < 1e-8

    def test_tangent_outside_cylinder(self, ball):
        fr = ball.frame_at(np.array([0, 0, 1.0]))
        with pytest.raises(ValueError):
            fr.tangent(0, np.array([0, 0, -1.0]))

    def test_frame_rejects_interior_base(self, ball):
        with pytest.raises(ValueError):
            ball.frame_at(np.array([0, 0, 0.5]))


unit = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1)


@settings(max_examples=40, deadline=None)
@given(unit, unit, st.floats(0.0, 0.8))
def test_tangency_property(base, offset, scale):
    dom = PerturbedBall(3, 0.1, 2)
    w = np.asarray(base) / np.linalg.norm(base)
    z = dom.boundary_point(w)
    fr = dom.frame_at(z)
    wt = scale * 0.5 * dom.R0 * np.asarray(offset[:2]) / max(np.linalg.norm(offset[:2]), 1e-12)
    y = fr.from_chart(np.r_[wt, fr.psi(wt[None])[0]])
    assert abs(float(dom.level(y))) < 1e-10
    nu = dom.normal(y)
    for i in range(2):
        assert abs(fr.tangent(i, y) @ nu) < 1e-8
    big = fr.big_normal(y)
    assert np.allclose(big / np.linalg.norm(big), nu, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(unit, st.floats(0.01, 0.2), st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_reflection_involution_property(base, depth, a, b):
    dom = PerturbedBall(3, 0.1, 2)
    z = dom.boundary_point(np.asarray(base) / np.linalg.norm(base))
    fr = dom.frame_at(z)
    y = fr.from_chart(np.array([a, b, -depth]))
    assert np.allclose(fr.reflect(fr.reflect(y)), y, atol=1e-12)
