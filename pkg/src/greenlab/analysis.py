"""Empirical verification of derivative bounds for Green's functions.

A bound ``|Q(x, y)| <= C |x - y|^e`` cannot be proven numerically, but it
can be refuted.  Pairs are sampled on a geometric ladder of separations
``t`` with ``x`` at depth proportional to ``t`` below the boundary, which is
the regime where such bounds are sharp.  For each rung the sup of ``|Q|``
is recorded; a log-log slope below ``e`` or a growing scaled sup
``sup |Q| * t^-e`` counts as a failure.

Evaluators are anything with ``green(x, y, alpha, beta)``,
``h(x, y, alpha, beta)`` and ``domain``: the collocation solver or the
closed-form adapters defined here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .geometry import Ball, HalfSpace, rotation_to_pole, sphere_rule, uniform_directions
from .kernels import (
    DIRICHLET,
    NEUMANN,
    HalfSpaceGreen,
    KelvinBallGreen,
    add_index,
    indices_of_order,
    kernel,
    multi_index,
    normalize_kind,
    zero_index,
)
from .solver import GreenFunction, newton_potential

SLOPE_TOL = 0.1
DIVERGENCE_TOL = 1.5


def holder_exponent(n: int, odd_choice: float = 0.9) -> float:
    """Hölder exponent used with the highest Sobolev order: 1/2 for even n."""
    if n % 2 == 0:
        return 0.5
    if not 0.0 < odd_choice < 1.0:
        raise ValueError("the odd-dimension exponent must lie in (0, 1)")
    return odd_choice


def sobolev_order(n: int) -> int:
    """Smallest derivative order that controls sup norms: n/2+1 (even n) or (n+1)/2 (odd n)."""
    return n // 2 + 1 if n % 2 == 0 else (n + 1) // 2


# ---------------------------------------------------------------------------
# evaluators


class ClosedForm:
    """Adapter giving a closed-form Green's function the evaluator interface."""

    def __init__(self, function, domain):
        self.function = function
        self.domain = domain
        self.kind = function.kind
        self.n = domain.n

    def __repr__(self):
        return f"ClosedForm({type(self.function).__name__}, {self.kind})"

    def green(self, x, y, alpha=None, beta=None):
        return self.function.green(x, y, alpha, beta)

    def h(self, x, y, alpha=None, beta=None):
        return self.function.correction(x, y, alpha, beta)


def kelvin_ball(n: int = 3) -> ClosedForm:
    return ClosedForm(KelvinBallGreen(n), Ball(n))


def halfspace(kind: str, n: int = 3, length: float = 2.0) -> ClosedForm:
    return ClosedForm(HalfSpaceGreen(kind, n), HalfSpace(n, length))


def pole_valid(ev, x) -> bool:
    """Whether the solver residual at pole ``x`` is within tolerance (closed forms always are)."""
    if isinstance(ev, GreenFunction):
        return ev.correction(x).ok
    return True


def pole_residual(ev, x) -> float:
    if isinstance(ev, GreenFunction):
        return ev.correction(x).residual
    return 0.0


def _index_set(n, index):
    """Multi-indices for ``index``: an order (int) or one explicit multi-index."""
    if isinstance(index, (int, np.integer)):
        return indices_of_order(n, int(index))
    index = tuple(int(k) for k in index)
    if len(index) != n:
        raise ValueError(f"multi-index {index} has the wrong length")
    return [index]


def _order(index):
    return int(index) if isinstance(index, (int, np.integer)) else sum(index)


def _evaluate(ev, x, ys, alpha, beta, which):
    return ev.green(x, ys, alpha, beta) if which == "G" else ev.h(x, ys, alpha, beta)


def _sup_abs(ev, x, ys, alphas, betas, which):
    best = np.zeros(len(ys))
    for a in alphas:
        for b in betas:
            best = np.maximum(best, np.abs(_evaluate(ev, x, ys, a, b, which)))
    return best


# ---------------------------------------------------------------------------
# reports


@dataclass
class SlopeReport:
    """Scaled sups of a kernel quantity along a ladder.

    ``ladder`` holds the separation (or other ladder variable) per rung in
    decreasing order.  ``scaled = sups * ladder**(-exponent)``.  The
    divergence ratio is the largest increase ``scaled[j] / scaled[i]``
    with ``i < j`` among the last three rungs.  The slope is fitted over
    the same window (``fit_window`` rungs), so a coarse leading rung acts as
    a warm-up that is reported but not fitted.  Reports with
    ``fit_slope=False`` test boundedness only.
    """

    bound: str
    exponent: float
    ladder: np.ndarray
    sups: np.ndarray
    slope_tol: float = SLOPE_TOL
    divergence_tol: float = DIVERGENCE_TOL
    fit_slope: bool = True
    fit_window: int = 3
    valid: np.ndarray | None = None
    depth_lo: np.ndarray | None = None
    depth_hi: np.ndarray | None = None
    extra: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ladder = np.asarray(self.ladder, dtype=float)
        self.sups = np.asarray(self.sups, dtype=float)
        if self.valid is None:
            self.valid = np.ones(self.ladder.shape, dtype=bool)
        if np.any(np.diff(self.ladder) >= 0):
            raise ValueError("ladder must be strictly decreasing")

    @property
    def scaled(self) -> np.ndarray:
        return self.sups * self.ladder ** (-self.exponent)

    @property
    def slope(self) -> float:
        if np.all(self.sups[-self.fit_window :] <= 1e-300):
            return float("inf")
        k = self.fit_window
        s = np.maximum(self.sups[-k:], 1e-300)
        return float(np.polyfit(np.log(self.ladder[-k:]), np.log(s), 1)[0])

    @property
    def C_hat(self) -> float:
        return float(np.max(self.scaled))

    @property
    def divergence(self) -> float:
        tail = self.scaled[-3:]
        worst = 1.0
        for i, j in combinations(range(tail.size), 2):
            if tail[j] <= 0:
                continue
            worst = max(worst, tail[j] / tail[i] if tail[i] > 0 else np.inf)
        return float(worst)

    @property
    def passed(self) -> bool:
        ok = bool(np.all(self.valid)) and self.divergence <= self.divergence_tol
        if self.fit_slope:
            ok = ok and self.slope >= self.exponent - self.slope_tol
        for key in ("depth_ratio",):
            if key in self.extra:
                ok = ok and self.extra[key] <= self.divergence_tol
        return ok

    def rows(self) -> list[dict]:
        out = []
        for i in range(self.ladder.size):
            out.append(
                {
                    "bound": self.bound,
                    "rung": i,
                    "separation": float(self.ladder[i]),
                    "depth_lo": float(self.depth_lo[i]) if self.depth_lo is not None else float("nan"),
                    "depth_hi": float(self.depth_hi[i]) if self.depth_hi is not None else float("nan"),
                    "sup": float(self.sups[i]),
                    "scaled_sup": float(self.scaled[i]),
                    "valid": bool(self.valid[i]),
                }
            )
        return out

    def summary(self) -> dict:
        return {
            "check": self.bound,
            "params": dict(self.params),
            "exponent": self.exponent,
            "slope": self.slope,
            "C_hat": self.C_hat,
            "divergence": self.divergence,
            **{k: v for k, v in self.extra.items() if np.isscalar(v)},
            "pass": self.passed,
        }


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class PairGroup:
    """Points ``ys`` paired with a single pole ``x`` inside the chart ``frame``."""

    x: np.ndarray
    ys: np.ndarray
    frame: object
    separation: float
    depth: float


def _chart_directions(n, m=48):
    """Unit directions in chart coordinates: a quasi-uniform set plus the tangent axes."""
    return np.concatenate([uniform_directions(n, m), np.eye(n)[: n - 1]])


@dataclass
class PairSampler:
    """Near-boundary, near-diagonal pair families.

    For each anchor boundary point ``z`` and separation ``t`` the pole is
    ``x = z - a t nu(z)`` for each depth factor ``a`` and the partners are
    ``y = x + t u`` with ``u`` running over fixed chart directions.
    Poles below ``floor * diameter`` are dropped, and partners must satisfy
    ``d(y) >= max(floor * diameter, partner_depth * t)``.  The second
    condition keeps the admissible configuration the same at every rung,
    so the ladder measures scaling rather than the floor.
    """

    domain: object
    anchors: np.ndarray
    fractions: tuple = (0.16, 0.08, 0.04, 0.02)
    depth_factors: tuple = (0.5, 1.0)
    floor: float = 0.01
    partner_depth: float = 0.5
    directions: np.ndarray | None = None

    def __post_init__(self):
        self.anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        if self.directions is None:
            self.directions = _chart_directions(self.domain.n)
        if np.any(np.diff(self.fractions) >= 0):
            raise ValueError("separation ladder must be strictly decreasing")

    @classmethod
    def default(cls, domain, n_anchors: int = 2, **kw) -> "PairSampler":
        n = domain.n
        if isinstance(domain, HalfSpace):
            anchors = np.zeros((1, n))
        else:
            if n == 3:
                dirs = np.array([[0.36, 0.48, 0.8], [-0.6, 0.3, -0.742]])
            else:
                dirs = uniform_directions(n, max(n_anchors, 2))
            dirs = dirs[:n_anchors] / np.linalg.norm(dirs[:n_anchors], axis=1)[:, None]
            anchors = domain.boundary_point(dirs)
        return cls(domain, anchors, **kw)

    @property
    def separations(self) -> np.ndarray:
        return np.asarray(self.fractions) * self.domain.diameter

    @property
    def floor_length(self) -> float:
        return self.floor * self.domain.diameter

    def _depth_ok(self, p, minimum=0.0):
        dom = self.domain
        if not dom.contains(p):
            return False
        need = max(self.floor_length, minimum)
        return dom.nearest_boundary_point(p).distance >= need * (1 - 1e-9)

    def group(self, anchor, t, depth, chart=False) -> PairGroup | None:
        """Pairs at one pole; ``chart=True`` also keeps partners inside the chart cylinder."""
        fr = self.domain.frame_at(anchor)
        x = fr.from_chart(np.r_[np.zeros(self.domain.n - 1), -depth])
        if not self._depth_ok(x):
            return None
        ys = [x + t * (u @ fr.Q) for u in self.directions]
        ys = [
            y for y in ys
            if self._depth_ok(y, self.partner_depth * t) and (not chart or np.all(fr.in_cylinder(y)))
        ]
        if not ys:
            return None
        return PairGroup(x, np.array(ys), fr, float(t), float(depth))

    def rung(self, i: int, chart: bool = False) -> list[PairGroup]:
        t = self.separations[i]
        out = []
        for z in self.anchors:
            for a in self.depth_factors:
                g = self.group(z, t, a * t, chart)
                if g is not None:
                    out.append(g)
        return out

    def depth_ladder(self, rung: int = 0) -> tuple[float, list[tuple[float, list[PairGroup]]]]:
        """Fixed separation, pole depth halving from ``t`` down to the floor."""
        t = self.separations[rung]
        out = []
        d = t
        while d >= self.floor_length * (1 - 1e-9):
            gs = [g for g in (self.group(z, t, d) for z in self.anchors) if g is not None]
            if gs:
                out.append((d, gs))
            d /= 2.0
        return t, out


def _ladder_report(bound, exponent, sampler, per_rung, **kw):
    """Assemble a SlopeReport from ``per_rung`` callables returning (sup, valid)."""
    seps, sups, valid, lo, hi = [], [], [], [], []
    for i in range(len(sampler.fractions)):
        groups = sampler.rung(i)
        if not groups:
            raise ValueError(f"no admissible pairs at rung {i}")
        sup, ok = per_rung(groups)
        seps.append(sampler.separations[i])
        sups.append(sup)
        valid.append(ok)
        lo.append(min(g.depth for g in groups))
        hi.append(max(g.depth for g in groups))
    return SlopeReport(
        bound, exponent, np.array(seps), np.array(sups), valid=np.array(valid),
        depth_lo=np.array(lo), depth_hi=np.array(hi), **kw
    )


# ---------------------------------------------------------------------------
# pointwise and Hölder bounds


def check_pointwise_bound(
    ev, alpha, beta, sampler: PairSampler, which: str = "G", depth_rung: int | None = 0,
    slope_tol: float = SLOPE_TOL, divergence_tol: float = DIVERGENCE_TOL,
) -> SlopeReport:
    """Ladder test of ``|D^alpha_x D^beta_y G| <= C |x-y|^(2-n-|alpha|-|beta|)``.

    ``alpha`` and ``beta`` are orders (all multi-indices of that order) or
    explicit multi-indices.  With ``depth_rung`` set, the scaled sup is also
    tracked at fixed separation while the pole depth halves to the floor.
    Its growth over the three shallowest depths is ``depth_ratio``; for
    ``which="G"`` it enters the pass flag.  For ``h`` alone the sampled sup
    is sensitive to which partners survive the floor, so it is reported only.
    """
    n = sampler.domain.n
    A, B = _index_set(n, alpha), _index_set(n, beta)
    e = (2 - n) - (_order(alpha) + _order(beta))

    def per_rung(groups):
        sup, ok = 0.0, True
        for g in groups:
            ok &= pole_valid(ev, g.x)
            sup = max(sup, float(_sup_abs(ev, g.x, g.ys, A, B, which).max()))
        return sup, ok

    rep = _ladder_report(
        f"pointwise[{which}]", e, sampler, per_rung, slope_tol=slope_tol, divergence_tol=divergence_tol,
        params={"alpha": _order(alpha), "beta": _order(beta), "which": which},
    )
    if depth_rung is not None:
        t, ladder = sampler.depth_ladder(depth_rung)
        scaled = []
        for d, groups in ladder:
            sup = max(float(_sup_abs(ev, g.x, g.ys, A, B, which).max()) for g in groups)
            scaled.append(sup * t ** (-e))
        scaled = np.array(scaled)
        rep.extra["depth_ladder"] = [d for d, _ in ladder]
        rep.extra["depth_scaled"] = scaled.tolist()
        tail = scaled[-3:]
        ratio = float(max([1.0] + [tail[j] / tail[i] for i, j in combinations(range(tail.size), 2)]))
        rep.extra["depth_ratio" if which == "G" else "depth_ratio_h"] = ratio
    return rep


def holder_quotient(ev, x, y, alpha, beta, v, rho, lam, which="G"):
    """``|Q(x, y + rho v) - Q(x, y)| / rho^lam`` for ``Q = D^alpha_x D^beta_y G``."""
    y = np.atleast_2d(y)
    a = _evaluate(ev, x, y + rho * np.asarray(v), alpha, beta, which)
    b = _evaluate(ev, x, y, alpha, beta, which)
    return np.abs(a - b) / rho**lam


def check_holder_seminorm(
    ev, alpha, beta, sampler: PairSampler, lam: float | None = None, radius_constant: float = 1.0,
    which: str = "G", slope_tol: float = SLOPE_TOL, divergence_tol: float = DIVERGENCE_TOL,
) -> SlopeReport:
    """Ladder test of the local Hölder seminorm with exponent ``lam``.

    Perturbations of ``y`` have length ``r/4`` and ``r/16`` with
    ``r = min(|x - y|, 1) / radius_constant``, along the coordinate axes.
    """
    dom = sampler.domain
    n = dom.n
    lam = holder_exponent(n) if lam is None else lam
    A, B = _index_set(n, alpha), _index_set(n, beta)
    e = (2 - n) - (_order(alpha) + _order(beta)) - lam
    axes = np.concatenate([np.eye(n), -np.eye(n)])

    def per_rung(groups):
        sup, ok = 0.0, True
        for g in groups:
            ok &= pole_valid(ev, g.x)
            r = min(g.separation, 1.0) / radius_constant
            for rho in (r / 4, r / 16):
                for v in axes:
                    yp = g.ys + rho * v
                    keep = np.array([dom.contains(p) and np.linalg.norm(p - g.x) > 0 for p in yp])
                    if not np.any(keep):
                        continue
                    for a in A:
                        for b in B:
                            q = holder_quotient(ev, g.x, g.ys[keep], a, b, v, rho, lam, which)
                            sup = max(sup, float(q.max()))
        return sup, ok

    return _ladder_report(
        f"holder[{which}]", e, sampler, per_rung, slope_tol=slope_tol, divergence_tol=divergence_tol,
        params={"alpha": _order(alpha), "beta": _order(beta), "lambda": lam},
    )


def check_interior_bound(
    ev, alpha, beta, s: float, sampler: PairSampler, fractions=(0.2, 0.1, 0.05, 0.025, 0.0125),
    divergence_tol: float = DIVERGENCE_TOL,
) -> SlopeReport:
    """Boundedness of ``|D^alpha D^beta h| / ([d(x)^s d(y)^(1-s)]^(2-n) d(x)^-|alpha| d(y)^-|beta|)``.

    Rungs are pole depths ``D = fraction * diameter``; partners sit at
    depths ``D, 2D, 4D`` with tangential offsets ``0`` and ``D``.
    """
    dom = sampler.domain
    n = dom.n
    A, B = _index_set(n, alpha), _index_set(n, beta)
    ka, kb = _order(alpha), _order(beta)
    depths, sups, valid = [], [], []
    for f in fractions:
        D = f * dom.diameter
        sup, ok = 0.0, True
        for z in sampler.anchors:
            fr = dom.frame_at(z)
            x = fr.from_chart(np.r_[np.zeros(n - 1), -D])
            if not dom.contains(x):
                continue
            ok &= pole_valid(ev, x)
            dx = dom.nearest_boundary_point(x).distance
            ys = []
            for dy in (D, 2 * D, 4 * D):
                for off in (0.0, D):
                    w = np.zeros(n - 1)
                    w[0] = off
                    top = fr.psi(w[None])[0]
                    y = fr.from_chart(np.r_[w, top - dy])
                    if dom.contains(y) and np.all(fr.in_cylinder(y)):
                        ys.append(y)
            ys = np.array(ys)
            dys = np.array([dom.nearest_boundary_point(y).distance for y in ys])
            bound = (dx**s * dys ** (1 - s)) ** (2 - n) * dx ** (-ka) * dys ** (-kb)
            q = _sup_abs(ev, x, ys, A, B, "h") / bound
            sup = max(sup, float(q.max()))
        depths.append(D)
        sups.append(sup)
        valid.append(ok)
    return SlopeReport(
        "interior[h]", 0.0, np.array(depths), np.array(sups), valid=np.array(valid), fit_slope=False,
        divergence_tol=divergence_tol, params={"alpha": ka, "beta": kb, "s": s},
    )


# ---------------------------------------------------------------------------
# tangential cancellation


@dataclass
class CancellationReport:
    mode: str
    combined: SlopeReport
    single: SlopeReport
    min_separation: float = 0.8
    shift_tol: float = 0.15

    @property
    def separation(self) -> float:
        return self.combined.slope - self.single.slope

    @property
    def passed(self) -> bool:
        if self.mode == "holder":
            return (
                abs(self.combined.slope - self.combined.exponent) <= self.shift_tol
                and self.combined.divergence <= self.combined.divergence_tol
                and bool(np.all(self.combined.valid))
            )
        return self.combined.passed and self.separation >= self.min_separation

    def summary(self) -> dict:
        out = self.combined.summary()
        out.update(
            {
                "check": f"cancellation[{self.mode}]",
                "single_slope": self.single.slope,
                "separation": self.separation,
                "pass": self.passed,
            }
        )
        return out

    def rows(self) -> list[dict]:
        return self.combined.rows() + self.single.rows()


def _field(mode, frame, p, i, s):
    if mode == "tangent":
        return frame.tangent(i, p)
    if mode == "holder":
        w = frame.to_chart(p)
        return (np.abs(w[..., 0]) ** s)[..., None] * frame.tangent(0, p)
    if mode == "frozen":
        return np.broadcast_to(frame.Q[i], np.shape(p)).copy()
    if mode == "rotation":
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape)
        out[..., 0] = -p[..., 1]
        out[..., 1] = p[..., 0]
        return out
    raise ValueError(f"unknown cancellation mode {mode!r}")


def combined_derivative(ev, x, ys, alpha, beta, sx, sy, which="G"):
    """``(sx . grad_x + sy . grad_y) D^alpha_x D^beta_y G`` with ``sy`` given per point."""
    n = len(alpha)
    out = np.zeros(len(ys))
    for k in range(n):
        e = multi_index(n, k)
        out = out + sx[k] * _evaluate(ev, x, ys, add_index(alpha, e), beta, which)
        out = out + sy[:, k] * _evaluate(ev, x, ys, alpha, add_index(beta, e), which)
    return out


def single_derivative(ev, x, ys, alpha, beta, sy, which="G"):
    n = len(alpha)
    out = np.zeros(len(ys))
    for k in range(n):
        out = out + sy[:, k] * _evaluate(ev, x, ys, alpha, add_index(beta, multi_index(n, k)), which)
    return out


def check_cancellation(
    ev, alpha, beta, sampler: PairSampler, mode: str = "tangent", s: float = 0.5, which: str = "G",
    slope_tol: float = SLOPE_TOL, divergence_tol: float = DIVERGENCE_TOL, min_separation: float = 0.8,
    shift_tol: float = 0.15,
) -> CancellationReport:
    """Combined tangential derivative against a single gradient on the pair ladder.

    Modes: ``tangent`` uses the chart tangent fields ``tau_i``; ``holder``
    uses ``|w_1|^s tau_1`` (Hölder-``s``, vanishing on the chart plane
    through the pole); ``frozen`` uses the constant vectors ``Q^T e_i``,
    which are orthogonal to the normal at the pole's nearest point.
    """
    n = sampler.domain.n
    if _order(alpha) + _order(beta) > 1:
        raise ValueError("cancellation checks need |alpha| + |beta| <= 1")
    A, B = _index_set(n, alpha), _index_set(n, beta)
    k = _order(alpha) + _order(beta)
    e_comb = (2 - n) - k + ((s - 1.0) if mode == "holder" else 0.0)
    e_single = (1 - n) - k
    fields = [0] if mode == "holder" else list(range(n - 1))
    comb_sup, single_sup = {}, {}

    def per_rung_pair(groups):
        cs, ss, ok = 0.0, 0.0, True
        for g in groups:
            ok &= pole_valid(ev, g.x)
            for i in fields:
                sx = _field(mode, g.frame, g.x, i, s)
                sy = np.atleast_2d(_field(mode, g.frame, g.ys, i, s))
                ty = np.atleast_2d(g.frame.tangent(i, g.ys))
                for a in A:
                    for b in B:
                        c = combined_derivative(ev, g.x, g.ys, a, b, sx, sy, which)
                        cs = max(cs, float(np.abs(c).max()))
                        sg = single_derivative(ev, g.x, g.ys, a, b, ty, which)
                        ss = max(ss, float(np.abs(sg).max()))
        return cs, ss, ok

    results = [per_rung_pair(sampler.rung(i, chart=True)) for i in range(len(sampler.fractions))]
    seps = sampler.separations
    valid = np.array([r[2] for r in results])
    params = {"alpha": _order(alpha), "beta": _order(beta), "mode": mode}
    if mode == "holder":
        params["s"] = s
    comb = SlopeReport(
        f"cancellation[{mode}]", e_comb, seps, np.array([r[0] for r in results]), slope_tol, divergence_tol,
        valid=valid, params=params,
    )
    single = SlopeReport(
        f"single[{mode}]", e_single, seps, np.array([r[1] for r in results]), slope_tol, divergence_tol,
        valid=valid, params=params,
    )
    return CancellationReport(mode, comb, single, min_separation, shift_tol)


def rotational_cancellation(ev, pairs, which="G") -> tuple[float, float]:
    """Max of ``|(x^perp . grad_x + y^perp . grad_y) G|`` over pairs, and the max single term.

    ``x^perp = e_3 x p`` generates rotations about the last-but-one axis pair;
    Green's functions of rotation-invariant domains annihilate it.
    """
    n = ev.domain.n
    zero = zero_index(n)
    comb, single = 0.0, 0.0
    for x, y in pairs:
        y = np.atleast_2d(y)
        sx = _field("rotation", None, x, 0, 0)
        sy = _field("rotation", None, y, 0, 0)
        c = combined_derivative(ev, x, y, zero, zero, sx, sy, which)
        sg = single_derivative(ev, x, y, zero, zero, sy, which)
        comb = max(comb, float(np.abs(c).max()))
        single = max(single, float(np.abs(sg).max()))
    return comb, single


# ---------------------------------------------------------------------------
# reflection representations


@dataclass(frozen=True)
class ReflectionResult:
    lhs: float
    rhs: float
    nodes: int

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.residual / abs(self.lhs) if self.lhs != 0 else self.residual


def reflection_quadrature(domain, y, level: int = 0):
    """Surface rule graded toward the nearest boundary point of ``y``; ``level`` doubles the orders."""
    near = domain.nearest_boundary_point(y)
    zp = near.point
    o = 6 * 2**level
    return domain.graded_surface_quadrature(zp / np.linalg.norm(zp), near.distance, order=o, azimuth=o), near


def reflection_pairs(domain, anchors, count: int, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pole/partner pairs for the reflected representations, ``count`` per anchor.

    The partner sits at depth ``0.025 diam`` under the anchor; the pole is
    shallow (``0.05-0.06 diam``) and offset tangentially by ``0.04-0.05 diam``.
    That keeps the boundary peak of ``Gamma(x, .)`` away from the grading
    point, so the default quadrature error sits above the solver floor and
    refinement is observable.
    """
    n = domain.n
    diam = domain.diameter
    out = []
    for z in np.atleast_2d(anchors):
        fr = domain.frame_at(z)
        y = fr.from_chart(np.r_[np.zeros(n - 1), -0.025 * diam])
        for _ in range(count):
            u = rng.standard_normal(n - 1)
            off = rng.uniform(0.04, 0.05) * diam * u / np.linalg.norm(u)
            x = fr.from_chart(np.r_[off, -rng.uniform(0.05, 0.06) * diam])
            out.append((x, y))
    return out


def verify_reflection_representation(ev: GreenFunction, x, y, level: int = 0, mean_sign: float = -1.0):
    """Both sides of the reflected-kernel representation of the correction at ``(x, y)``.

    Dirichlet: ``h(x,y) = -int D_nu[G(y,.) - G(ybar,.)] Gamma(x,.) dS
    - int [G(y,.) - G(ybar,.)] D_nu h(x,.) dS`` with ``G`` here the
    Newtonian potential and ``ybar`` the reflection of ``y`` in the chart of
    its nearest boundary point.

    Neumann, with ``Gt = Gamma + h``:
    ``Gt(x,y) = Gamma(x,y) + Gamma(x,ybar) - mean Gamma(.,y)
    + mean_sign * mean Gamma(.,ybar) + int D_nu[Gamma(y,.) + Gamma(ybar,.)] Gt(x,.) dS``.
    Green's second identity gives ``mean_sign = -1``.
    """
    dom = ev.domain
    n = dom.n
    k = kernel(n)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    quad, near = reflection_quadrature(dom, y, level)
    yb = dom.reflect(y, near.point)
    z, w, nu = quad.nodes, quad.weights, quad.normals

    def dnu(p):
        return sum(nu[:, i] * k.gamma_deriv(zero_index(n), multi_index(n, i), p, z) for i in range(n))

    if ev.kind == DIRICHLET:
        diff = k.gamma(y, z) - k.gamma(yb, z)
        ddiff = dnu(y) - dnu(yb)
        dh = sum(nu[:, i] * ev.h(x, z, beta=multi_index(n, i)) for i in range(n))
        rhs = -float(w @ (ddiff * k.gamma(x, z))) - float(w @ (diff * dh))
        return ReflectionResult(float(ev.h(x, y[None])[0]), rhs, len(w))
    gt = k.gamma(x, z) + ev.h(x, z)
    vol = ev.volume
    mean_y = newton_potential(dom, y, quad=quad) / vol
    mean_yb = newton_potential(dom, yb, quad=quad) / vol
    rhs = (
        float(k.gamma(x, y) + k.gamma(x, yb))
        - mean_y
        + mean_sign * mean_yb
        + float(w @ ((dnu(y) + dnu(yb)) * gt))
    )
    lhs = float(k.gamma(x, y) + ev.h(x, y[None])[0])
    return ReflectionResult(lhs, rhs, len(w))


def plane_quadrature(n, center, scale, radius, order=8, azimuth=16):
    """Polar rule on the plane ``{x_n = 0}`` about ``center`` out to ``radius``, graded near ``center``."""
    edges = [0.0, scale / 4, scale / 2]
    t = scale
    while t < radius:
        edges.append(t)
        t *= 2.0
    edges.append(radius)
    edges = np.unique(edges)
    g, wg = np.polynomial.legendre.leggauss(order)
    r, wr = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r.append(0.5 * (b - a) * g + 0.5 * (a + b))
        wr.append(0.5 * (b - a) * wg)
    r = np.concatenate(r)
    wr = np.concatenate(wr) * r ** (n - 2)
    sub, wsub = sphere_rule(n - 1, azimuth)
    pts = (r[:, None, None] * sub[None]).reshape(-1, n - 1)
    w = (wr[:, None] * wsub[None]).reshape(-1)
    nodes = np.concatenate([pts + np.asarray(center)[: n - 1], np.zeros((pts.shape[0], 1))], axis=1)
    return nodes, w


def _just_inside(z):
    """Plane points nudged into the open half-space, where the closed forms are defined."""
    z = np.array(z, dtype=float)
    z[..., -1] = -1e-300
    return z


def verify_halfspace_reflection(kind, x, y, radius: float = 50.0, level: int = 0):
    """Dirichlet reflection identity for the half-space with closed forms on both sides.

    The surface integral is truncated to a disc of ``radius``; the truncation
    error decays like ``d(y) / radius^2``.
    """
    kind = normalize_kind(kind)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    k = kernel(n)
    H = HalfSpaceGreen(kind, n)
    yb = H.reflect(y)
    z, w = plane_quadrature(n, y, abs(y[-1]), radius, order=8 * 2**level, azimuth=16 * 2**level)
    en = multi_index(n, n - 1)
    zero = zero_index(n)
    if kind == DIRICHLET:
        ddiff = k.gamma_deriv(zero, en, y, z) - k.gamma_deriv(zero, en, yb, z)
        diff = k.gamma(y, z) - k.gamma(yb, z)
        dh = H.correction(x, _just_inside(z), beta=en)
        rhs = -float(w @ (ddiff * k.gamma(x, z))) - float(w @ (diff * dh))
        return ReflectionResult(float(H.correction(x, y)), rhs, len(w))
    gt = H.green(x, _just_inside(z))
    dsum = k.gamma_deriv(zero, en, y, z) + k.gamma_deriv(zero, en, yb, z)
    rhs = float(k.gamma(x, y) + k.gamma(x, yb)) + float(w @ (dsum * gt))
    return ReflectionResult(float(H.green(x, y)), rhs, len(w))


KERNEL_BOUNDS = ("difference", "neumann_sum", "tangential", "normal")


def flat_kernel_constants(n: int) -> dict:
    """Exact scaled kernel values on a flat boundary."""
    c = kernel(n).c_n
    return {"difference": 0.0, "neumann_sum": 0.0, "tangential": 0.0, "normal": 2.0 * (n - 2) / c}


def check_reflection_kernel_bounds(
    domain, anchor, fractions=(0.05, 0.025, 0.0125, 0.00625), rings: int = 24, angles: int = 12,
    divergence_tol: float = DIVERGENCE_TOL,
) -> dict[str, SlopeReport]:
    """Scaled sups of the reflected difference/sum kernels over the chart of ``anchor``.

    For ``y0 = anchor - d nu`` and boundary points ``z`` in the chart:

    * ``difference``: ``|G(y0,z) - G(y0bar,z)| / (d |z-y0|^(2-n))``
    * ``neumann_sum``: ``|D_nu (G(y0,z) + G(y0bar,z))| / |z-y0|^(2-n)``
    * ``tangential``: ``|tau . grad_z (G(y0,z) - G(y0bar,z))| / (d |z-y0|^(1-n))``
    * ``normal``: ``|D_nu (G(y0,z) - G(y0bar,z))| / (d |z-y0|^(-n))``

    where ``G`` is the Newtonian potential.  Rungs are ``d = fraction * diameter``.
    """
    n = domain.n
    k = kernel(n)
    fr = domain.frame_at(anchor)
    zero = zero_index(n)
    out = {b: [] for b in KERNEL_BOUNDS}
    ds = []
    for f in fractions:
        d = f * domain.diameter
        y0 = fr.from_chart(np.r_[np.zeros(n - 1), -d])
        y0b = domain.reflect(y0, fr.base)
        radii = np.geomspace(0.01 * d, 0.9 * domain.R0, rings)
        sub = uniform_directions(n - 1, angles) if n > 3 else None
        if sub is None:
            ph = np.linspace(0, 2 * np.pi, angles, endpoint=False)
            sub = np.stack([np.cos(ph), np.sin(ph)], axis=-1)
        wt = np.concatenate([np.zeros((1, n - 1)), (radii[:, None, None] * sub[None]).reshape(-1, n - 1)])
        z = fr.from_chart(np.concatenate([wt, fr.psi(wt)[:, None]], axis=1))
        nu = domain.normal(z)
        grad = lambda p: np.stack([k.gamma_deriv(zero, multi_index(n, i), p, z) for i in range(n)], -1)  # noqa: E731
        g_diff = grad(y0) - grad(y0b)
        g_sum = grad(y0) + grad(y0b)
        r = np.linalg.norm(z - y0, axis=1)
        tang = np.max(
            [np.abs(np.einsum("ij,ij->i", fr.tangent(i, z), g_diff)) for i in range(n - 1)], axis=0
        )
        out["difference"].append(np.max(np.abs(k.gamma(y0, z) - k.gamma(y0b, z)) / (d * r ** (2 - n))))
        out["neumann_sum"].append(np.max(np.abs(np.einsum("ij,ij->i", nu, g_sum)) / r ** (2 - n)))
        out["tangential"].append(np.max(tang / (d * r ** (1 - n))))
        out["normal"].append(np.max(np.abs(np.einsum("ij,ij->i", nu, g_diff)) / (d * r ** (-n))))
        ds.append(d)
    return {
        b: SlopeReport(
            f"kernel[{b}]", 0.0, np.array(ds), np.array(v), fit_slope=False, divergence_tol=divergence_tol,
            params={"kernel": b},
        )
        for b, v in out.items()
    }


# ---------------------------------------------------------------------------
# integrability of the combined second-derivative bracket


def holder_rotation_field(s: float = 0.5, plane: float = -0.5):
    """Tangential field ``(1 + |p_1 - plane|^s) e_3 x p``; Hölder-``s`` across ``p_1 = plane``."""

    def u(p):
        p = np.asarray(p, dtype=float)
        rot = _field("rotation", None, p, 0, 0)
        return (1.0 + np.abs(p[..., 0] - plane) ** s)[..., None] * rot

    return u


@dataclass
class IntegrabilityResult:
    eps: np.ndarray
    combined: np.ndarray
    single: np.ndarray
    q: float
    s: float

    @property
    def combined_changes(self) -> np.ndarray:
        """Relative change of the combined integral between successive refinements."""
        c = self.combined
        return np.abs(np.diff(c)) / np.abs(c[1:])

    @property
    def single_growth(self) -> np.ndarray:
        return self.single[1:] / self.single[:-1]

    def passed(self, tol: float = 0.05, growth: float = 2.0) -> bool:
        return bool(np.all(self.combined_changes <= tol) and np.all(self.single_growth >= growth))

    def rows(self) -> list[dict]:
        return [
            {"level": i, "eps": float(e), "combined": float(c), "single": float(s)}
            for i, (e, c, s) in enumerate(zip(self.eps, self.combined, self.single))
        ]


def kernel_integrability_demo(
    ev, s: float = 0.5, q: float = 8.0, u=None, x=None, levels: int = 3, eps0: float | None = None,
    factor: float = 8.0, order: int = 12, radial_order: int = 6, chunk: int = 4000,
):
    """``q'``-integrals of the combined and single second-derivative brackets over ``Omega \\ B(x, eps)``.

    The combined bracket is ``sum_k G_{x_k y_j}(x,y) u^k(x) + G_{y_k y_j}(x,y) u^k(y)``
    and the single one keeps only the second term; both are measured in
    the Euclidean norm over ``j``.  ``eps`` shrinks by ``factor`` per level.
    """
    dom = ev.domain
    n = dom.n
    if n != 3:
        raise ValueError("the integrability demo is set up for n = 3")
    qp = q / (q - 1.0)
    u = holder_rotation_field(s) if u is None else u
    if x is None:
        x = 0.9 * dom.boundary_point(np.array([0.0, 0.6, 0.8]))
    x = np.asarray(x, dtype=float)
    d = dom.nearest_boundary_point(x).distance
    eps0 = d / 40.0 if eps0 is None else eps0
    eps = eps0 / factor ** np.arange(levels)

    om, wom = sphere_rule(n, order)
    R = dom.ray_exit(x, om)
    g, wg = np.polynomial.legendre.leggauss(radial_order)

    def shell(r0, r1):
        """Nodes and weights for the radial range ``[r0, min(r1, R)]`` with geometric panels."""
        pts, wts = [], []
        edges = [r0]
        while edges[-1] * 2.0 < r1:
            edges.append(edges[-1] * 2.0)
        edges.append(r1)
        for a, b in zip(edges[:-1], edges[1:]):
            aa = np.minimum(a, R)
            bb = np.minimum(b, R)
            rr = 0.5 * (bb - aa)[:, None] * g[None, :] + 0.5 * (aa + bb)[:, None]
            ww = 0.5 * (bb - aa)[:, None] * wg[None, :] * rr ** (n - 1) * wom[:, None]
            pts.append(x + rr[..., None] * om[:, None, :])
            wts.append(ww)
        return np.concatenate([p.reshape(-1, n) for p in pts]), np.concatenate([w.reshape(-1) for w in wts])

    ux = u(x)

    def integrals(pts, wts):
        keep = wts > 0
        pts, wts = pts[keep], wts[keep]
        ic, is_ = 0.0, 0.0
        for lo in range(0, len(wts), chunk):
            p = pts[lo : lo + chunk]
            w = wts[lo : lo + chunk]
            up = u(p)
            comb = np.zeros((len(p), n))
            sing = np.zeros((len(p), n))
            for j in range(n):
                ej = multi_index(n, j)
                for kk in range(n):
                    ek = multi_index(n, kk)
                    gyy = ev.green(x, p, zero_index(n), add_index(ek, ej))
                    gxy = ev.green(x, p, ek, ej)
                    sing[:, j] += gyy * up[:, kk]
                    comb[:, j] += gxy * ux[kk] + gyy * up[:, kk]
            ic += float(w @ np.linalg.norm(comb, axis=1) ** qp)
            is_ += float(w @ np.linalg.norm(sing, axis=1) ** qp)
        return ic, is_

    outer = integrals(*shell(eps[0], float(R.max())))
    comb, single = [outer[0]], [outer[1]]
    for i in range(1, levels):
        add = integrals(*shell(eps[i], eps[i - 1]))
        comb.append(comb[-1] + add[0])
        single.append(single[-1] + add[1])
    return IntegrabilityResult(eps, np.array(comb), np.array(single), q, s)
