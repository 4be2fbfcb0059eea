import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenlab import appendix as ap


@pytest.fixture(scope="module", params=ap.CASES)
def case(request):
    return ap.make_case(request.param)


@given(st.floats(-0.5, 1.5))
def test_smoothstep_range(t):
    v = ap.smoothstep7(t)
    assert 0.0 <= v <= 1.0
    if t <= 0:
        assert v == 0.0
    if t >= 1:
        assert v == 1.0


@settings(max_examples=50)
@given(st.floats(0.01, 0.99))
def test_smoothstep_derivative(t):
    h = 1e-6
    fd = (ap.smoothstep7(t + h) - ap.smoothstep7(t - h)) / (2 * h)
    assert ap.smoothstep7_d1(t) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_unknown_case():
    with pytest.raises(ValueError):
        ap.make_case("saddle-surface")


def test_ellipticity(case):
    assert case.ellipticity() > 0.1


def test_dF_matches_finite_differences(case):
    rng = np.random.default_rng(0)
    wt = rng.uniform(-0.1, 0.1, (5, 2))
    s = rng.uniform(-0.05, 0.05, 5)
    J = case.dF(wt, s)
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (case.F(wt + e, s) - case.F(wt - e, s)) / (2 * h)
        assert np.allclose(J[:, :, i], fd, atol=1e-8)
    fd = (case.F(wt, s + h) - case.F(wt, s - h)) / (2 * h)
    assert np.allclose(J[:, :, -1], fd, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.15, 0.15), st.floats(-0.15, 0.15), st.floats(-0.02, 0.02))
def test_inversion_roundtrip(a, b, zn):
    hc = ap.make_case("oblique")
    cut = ap.build_cutoff(hc, 0.2, 0.1, 0.5)
    z = np.array([[a, b, zn]])
    wt, s = cut.invert(z)
    assert np.allclose(hc.F(wt, s), z, atol=1e-12)


class TestCutoff:
    @pytest.mark.parametrize("name, delta0", [("flat", 0.4), ("bump", 0.2), ("anisotropic", 0.4), ("oblique", 0.2)])
    def test_delta0(self, name, delta0):
        assert ap.find_delta0(ap.make_case(name), 0.5) == pytest.approx(delta0)

    def test_properties(self, case):
        d = ap.find_delta0(case, 0.5)
        rep = ap.verify_cutoff(ap.build_cutoff(case, d, 0.5 * d, 0.5))
        assert rep.range_ok and rep.support_ok
        assert rep.orthogonality <= 1e-8
        assert rep.fd_gradient_error <= 1e-3 * rep.grad_const

    def test_constants_stable_under_halving(self, case):
        d = ap.find_delta0(case, 0.5)
        reps = [ap.verify_cutoff(ap.build_cutoff(case, t, 0.5 * t, 0.5)) for t in (d, d / 2)]
        g = [r.grad_const for r in reps]
        h = [r.hess_const for r in reps]
        assert max(g) / min(g) <= 2.0
        assert max(h) / min(h) <= 2.0

    def test_unpulled_cutoff_violates_orthogonality(self):
        # negative control: the radial cutoff chi_2 alone is not constant along A N
        hc = ap.make_case("oblique")
        cut = ap.build_cutoff(hc, 0.2, 0.1, 0.5)
        top = ap.top_grid(cut)
        _, (c2, g2), _, _ = cut.components(top)
        orth = np.abs(np.einsum("ij,ij->i", g2, hc.AN(top[:, :-1]))).max()
        assert orth > 1e-2

    @pytest.mark.parametrize(
        "delta, delta_p, theta",
        [(0.2, 0.15, 0.5), (0.2, 0.1, 1.0), (0.8, 0.4, 0.5)],
    )
    def test_invalid_scales(self, delta, delta_p, theta):
        with pytest.raises(ValueError):
            ap.build_cutoff(ap.make_case("flat"), delta, delta_p, theta)

    def test_top_above_band(self):
        with pytest.raises(ap.CutoffError):
            ap.build_cutoff(ap.make_case("bump"), 0.4, 0.2, 0.5)


class TestCaccioppoli:
    @pytest.mark.parametrize(
        "name, expected",
        [
            ("constant", 0.0),
            ("coordinate", 1 / 8),
            ("saddle", 21 / 384),
            ("parabola", (1 / 96) / (1 / 5 + 1 / np.sqrt(20))),
        ],
    )
    def test_flat_constants_match_hand_integration(self, name, expected):
        hc = ap.make_case("flat")
        sol = next(s for s in ap.caccioppoli_solutions() if s.name == name)
        rep = ap.caccioppoli_check(hc, sol)
        assert np.allclose(rep.constants, expected, rtol=1e-10, atol=1e-14)
        assert rep.passed

    def test_region_rule_volume(self):
        hc = ap.make_case("bump")
        d = 0.2
        rule = ap.region_rule(hc, d)
        # volume of the disc cylinder plus the paraboloid cap kappa r^2 / 2
        expected = np.pi * d**2 * d + 0.1 / 2 * np.pi * d**4 / 2
        assert rule.integrate(np.ones(len(rule.weights))) == pytest.approx(expected, rel=1e-12)


class TestEmbedding:
    def test_constant_function_closed_form(self):
        hc = ap.make_case("flat")
        f = ap.embedding_functions()[0]
        for d in (0.4, 0.1):
            r = ap.embedding_ratios(hc, f, d)
            assert r["sup"] == pytest.approx(np.pi**-0.5, rel=1e-10)
            assert r["lq"] == pytest.approx(np.pi ** (-1 / 3), rel=1e-10)
            assert r["holder"] == 0.0

    @pytest.mark.parametrize("name", ["flat", "bump"])
    def test_scale_flat(self, name):
        hc = ap.make_case(name)
        for f in ap.embedding_functions():
            for rep in ap.scaled_embedding_check(hc, f).values():
                assert rep.passed, rep.summary()

    def test_holder_seminorm_linear(self):
        pts = np.array([[0.0, 0, 0], [0.1, 0, 0], [0.3, 0, 0]])
        vals = pts[:, 0] * 2.0
        assert ap.holder_seminorm(vals, pts, 1.0) == pytest.approx(2.0)
