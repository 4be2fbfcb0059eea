"""Boundary-respecting cutoffs and scale checks on half-cylinders.

The region is ``W_delta = {(z~, z_n) : |z~| < delta, -delta < z_n < psi(z~)}``
with top ``{z_n = psi(z~)}`` and ``N = (-grad psi, 1)``.  The cutoff is
built from the map ``F(w~, s) = (w~, psi(w~)) - s (A N)(w~, psi(w~))``:
functions of ``|w~|`` pulled back by ``F`` are constant along ``A N``
through the top, which gives the natural-boundary-condition property.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .analysis import holder_exponent, sobolev_order

DEFAULT_C1 = 4.0


def smoothstep7(t):
    """Degree-7 smoothstep: 0 for t <= 0, 1 for t >= 1, C^3 across both ends."""
    t = np.clip(t, 0.0, 1.0)
    # clip again: the polynomial overshoots 1 by roundoff near t = 1
    return np.clip(t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3), 0.0, 1.0)


def smoothstep7_d1(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 140.0 * t**3 * (1.0 - t) ** 3, 0.0)


def _drop(r, a, b):
    """Decreasing profile: 1 for ``r <= a``, 0 for ``r >= b``; returns value and d/dr."""
    t = (r - a) / (b - a)
    return 1.0 - smoothstep7(t), -smoothstep7_d1(t) / (b - a)


# ---------------------------------------------------------------------------
# region and coefficient field


@dataclass(frozen=True)
class HalfCylinderDomain:
    """Graph region under ``psi`` with an SPD coefficient field ``A``.

    ``psi``, ``psi_grad``, ``psi_hess`` act on arrays of tangential points
    ``(..., n-1)``.  ``A`` maps points ``(..., n)`` to ``(..., n, n)`` and
    ``A_grad`` to ``(..., n, n, n)`` with the derivative index last.
    """

    name: str
    n: int
    R0: float
    psi: object = field(repr=False)
    psi_grad: object = field(repr=False)
    psi_hess: object = field(repr=False)
    A: object = field(repr=False)
    A_grad: object = field(repr=False)

    def N(self, wt):
        g = self.psi_grad(wt)
        return np.concatenate([-g, np.ones(g.shape[:-1] + (1,))], axis=-1)

    def graph(self, wt):
        wt = np.asarray(wt, dtype=float)
        return np.concatenate([wt, self.psi(wt)[..., None]], axis=-1)

    def AN(self, wt):
        return np.einsum("...ij,...j->...i", self.A(self.graph(wt)), self.N(wt))

    def ellipticity(self, samples: int = 2000, seed: int = 0) -> float:
        """Smallest sampled ``(A x xi).xi / |xi|^2`` over the chart cylinder."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(-self.R0, self.R0, size=(samples, self.n))
        xi = rng.standard_normal((samples, self.n))
        q = np.einsum("ki,kij,kj->k", xi, self.A(x), xi) / np.einsum("ki,ki->k", xi, xi)
        return float(q.min())

    def top_ok(self, R: float, samples: int = 400) -> bool:
        """``psi(B_R)`` lies in ``(-R/2, R/2)``."""
        wt = _disc_points(self.n, R, samples)
        return bool(np.all(np.abs(self.psi(wt)) < R / 2))

    def F(self, wt, s):
        return self.graph(wt) - np.asarray(s)[..., None] * self.AN(wt)

    def dF(self, wt, s):
        """Jacobian of ``F`` with columns ``d/dw~_i`` then ``d/ds``; shape ``(..., n, n)``."""
        n = self.n
        wt = np.asarray(wt, dtype=float)
        s = np.asarray(s, dtype=float)
        g = self.graph(wt)
        Nv = self.N(wt)
        A = self.A(g)
        dA = self.A_grad(g)
        dpsi = self.psi_grad(wt)
        H = self.psi_hess(wt)
        J = np.zeros(wt.shape[:-1] + (n, n))
        for i in range(n - 1):
            dg = np.zeros(g.shape)
            dg[..., i] = 1.0
            dg[..., -1] = dpsi[..., i]
            dN = np.zeros(g.shape)
            dN[..., :-1] = -H[..., :, i]
            dAN = np.einsum("...ijk,...k,...j->...i", dA, dg, Nv) + np.einsum("...ij,...j->...i", A, dN)
            J[..., :, i] = dg - s[..., None] * dAN
        J[..., :, -1] = -np.einsum("...ij,...j->...i", A, Nv)
        return J


def _disc_points(n, R, m):
    if n == 2:
        return np.linspace(-R, R, m)[:, None]
    k = int(np.ceil(np.sqrt(m)))
    g = np.linspace(-R, R, k)
    pts = np.stack(np.meshgrid(*([g] * (n - 1)), indexing="ij"), -1).reshape(-1, n - 1)
    return pts[np.linalg.norm(pts, axis=1) < R]


def _const_A(M):
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    return (
        lambda x: np.broadcast_to(M, np.shape(x)[:-1] + (n, n)),
        lambda x: np.zeros(np.shape(x)[:-1] + (n, n, n)),
    )


def _flat(n):
    return (
        lambda wt: np.zeros(np.shape(wt)[:-1]),
        lambda wt: np.zeros(np.shape(wt)),
        lambda wt: np.zeros(np.shape(wt) + (np.shape(wt)[-1],)),
    )


def _bump(n, kappa):
    return (
        lambda wt: 0.5 * kappa * np.einsum("...i,...i->...", wt, wt),
        lambda wt: kappa * np.asarray(wt, dtype=float),
        lambda wt: kappa * np.broadcast_to(np.eye(n - 1), np.shape(wt) + (n - 1,)),
    )


def _oblique_A(n, base, slope):
    """``A(x) = base + slope * x_1 * E`` with a fixed symmetric ``E``."""
    base = np.asarray(base, dtype=float)
    E = np.zeros((n, n))
    E[0, 0] = 1.0
    E[0, -1] = E[-1, 0] = 0.5

    def A(x):
        x = np.asarray(x, dtype=float)
        return base + slope * x[..., 0][..., None, None] * E

    def dA(x):
        out = np.zeros(np.shape(x)[:-1] + (n, n, n))
        out[..., 0] = slope * E
        return out

    return A, dA


def make_case(name: str, n: int = 3, R0: float = 0.4) -> HalfCylinderDomain:
    """Named test cases: ``flat``, ``bump``, ``anisotropic`` and ``oblique``."""
    if name == "flat":
        psi = _flat(n)
        A = _const_A(np.eye(n))
    elif name == "bump":
        psi = _bump(n, 0.1)
        A = _const_A(np.eye(n))
    elif name == "anisotropic":
        psi = _flat(n)
        A = _const_A(np.diag([2.0] + [1.0] * (n - 1)))
    elif name == "oblique":
        psi = _bump(n, 0.1)
        base = np.eye(n) * 1.5
        base[0, -1] = base[-1, 0] = 0.4
        base[1, -1] = base[-1, 1] = 0.2
        A = _oblique_A(n, base, 0.5)
    else:
        raise ValueError(f"unknown half-cylinder case {name!r}")
    return HalfCylinderDomain(name, n, R0, *psi, *A)


CASES = ("flat", "bump", "anisotropic", "oblique")


# ---------------------------------------------------------------------------
# cutoff


class CutoffError(RuntimeError):
    """Raised when the cutoff cannot be assembled for the requested scales."""


@dataclass(frozen=True)
class Cutoff:
    """``chi = zeta(z_n) [phi(z_n) chi_1 + (1 - phi(z_n)) chi_2]`` with ``chi_1 = chi~_1 o F^-1``."""

    hc: HalfCylinderDomain
    delta: float
    delta_p: float
    theta: float
    C1: float = DEFAULT_C1

    @property
    def eps(self):
        return self.delta - self.delta_p

    @property
    def radii(self):
        """Transition radii ``eps_1, eps_2`` of ``chi~_1``."""
        return self.delta_p + self.eps / 3, self.delta_p + 2 * self.eps / 3

    @property
    def band(self):
        """``|z_n|`` range over which ``phi`` drops from one to zero."""
        return self.eps / (12 * self.C1), self.eps / (6 * self.C1)

    def invert(self, z, tol: float = 1e-14, maxiter: int = 50):
        """``(w~, s) = F^-1(z)`` by Newton iteration; raises ``CutoffError`` on failure."""
        hc = self.hc
        z = np.asarray(z, dtype=float)
        wt = z[..., :-1].copy()
        an = hc.AN(wt)
        s = (hc.psi(wt) - z[..., -1]) / an[..., -1]
        for _ in range(maxiter):
            r = hc.F(wt, s) - z
            J = hc.dF(wt, s)
            step = np.linalg.solve(J, r[..., None])[..., 0]
            wt = wt - step[..., :-1]
            s = s - step[..., -1]
            if np.all(np.abs(step) < tol):
                break
        else:
            raise CutoffError("Newton inversion of F did not converge; shrink delta")
        resid = np.abs(hc.F(wt, s) - z).max() if z.size else 0.0
        if resid > 1e-10:
            raise CutoffError("Newton inversion of F did not converge; shrink delta")
        return wt, s

    def components(self, z):
        """Values and gradients of ``chi_1, chi_2, phi, zeta`` at ``z``."""
        z = np.asarray(z, dtype=float)
        n = self.hc.n
        zt, zn = z[..., :-1], z[..., -1]
        shape = z.shape[:-1]
        lo, hi = self.band
        phi, dphi = _drop(np.abs(zn), lo, hi)
        zeta, dzeta = _drop(np.abs(zn), self.delta_p, self.delta)
        rz = np.linalg.norm(zt, axis=-1)
        c2, dc2 = _drop(rz, self.delta_p, self.delta)
        c1 = np.zeros(shape)
        g1 = np.zeros(z.shape)
        need = phi > 0
        if np.any(need):
            wt, s = self.invert(z[need])
            rw = np.linalg.norm(wt, axis=-1)
            e1, e2 = self.radii
            v, dv = _drop(rw, e1, e2)
            gw = np.zeros(wt.shape[:-1] + (n,))
            safe = np.where(rw > 0, rw, 1.0)
            gw[..., :-1] = (dv / safe)[..., None] * wt
            J = self.hc.dF(wt, s)
            # grad_z chi_1 = DF^{-T} grad_(w,s) chi~_1
            g1[need] = np.linalg.solve(np.swapaxes(J, -1, -2), gw[..., None])[..., 0]
            c1[need] = v
        sgn = np.sign(zn)
        g2 = np.zeros(z.shape)
        g2[..., :-1] = (dc2 / np.where(rz > 0, rz, 1.0))[..., None] * zt
        gphi = np.zeros(z.shape)
        gphi[..., -1] = dphi * sgn
        gzeta = np.zeros(z.shape)
        gzeta[..., -1] = dzeta * sgn
        return (c1, g1), (c2, g2), (phi, gphi), (zeta, gzeta)

    def __call__(self, z):
        (c1, _), (c2, _), (phi, _), (zeta, _) = self.components(z)
        return zeta * (phi * c1 + (1 - phi) * c2)

    def gradient(self, z):
        (c1, g1), (c2, g2), (phi, gp), (zeta, gz) = self.components(z)
        inner = phi * c1 + (1 - phi) * c2
        ginner = phi[..., None] * g1 + (1 - phi)[..., None] * g2 + (c1 - c2)[..., None] * gp
        return gz * inner[..., None] + zeta[..., None] * ginner

    def hessian(self, z, h: float | None = None):
        """Central differences of the analytic gradient."""
        z = np.asarray(z, dtype=float)
        n = self.hc.n
        h = 1e-4 * self.eps if h is None else h
        out = np.zeros(z.shape + (n,))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            out[..., k] = (self.gradient(z + e) - self.gradient(z - e)) / (2 * h)
        return out


def top_condition(hc: HalfCylinderDomain, delta: float, theta: float, C1: float = DEFAULT_C1) -> bool:
    """Whether ``phi = zeta = 1`` on the whole top over ``B_delta``."""
    wt = _disc_points(hc.n, delta, 900)
    eps = delta - theta * delta
    top = np.abs(hc.psi(wt)).max() if wt.size else 0.0
    return bool(top <= min(eps / (12 * C1), theta * delta))


def find_delta0(hc: HalfCylinderDomain, theta: float, C1: float = DEFAULT_C1, max_halvings: int = 30) -> float:
    """Largest ``R0 / 2^k`` at which ``F`` inverts on the verification grid and the top stays in the ``phi = 1`` band."""
    d = hc.R0
    for _ in range(max_halvings):
        try:
            if top_condition(hc, d, theta, C1) and hc.top_ok(d):
                cut = Cutoff(hc, d, theta * d, theta, C1)
                cut(verification_grid(cut))
                return d
        except (CutoffError, np.linalg.LinAlgError):
            pass
        d /= 2.0
    raise CutoffError("no admissible delta0 found")


def build_cutoff(hc: HalfCylinderDomain, delta: float, delta_p: float, theta: float, C1: float = DEFAULT_C1) -> Cutoff:
    """Assemble the cutoff; requires ``delta_p <= theta delta`` and ``delta`` small enough for the top band."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if not 0 < delta_p <= theta * delta * (1 + 1e-12):
        raise ValueError("need 0 < delta' <= theta * delta")
    if delta > hc.R0:
        raise ValueError("delta exceeds the chart radius")
    wt = _disc_points(hc.n, delta, 900)
    eps = delta - delta_p
    if wt.size and np.abs(hc.psi(wt)).max() > min(eps / (12 * C1), delta_p):
        raise CutoffError("top leaves the phi = 1 band; delta is above delta0")
    return Cutoff(hc, float(delta), float(delta_p), float(theta), float(C1))


def verification_grid(cut: Cutoff, k: int = 25) -> np.ndarray:
    """Points of a neighbourhood of the closed cylinder, refined in the ``phi`` band."""
    n = cut.hc.n
    d = cut.delta
    g = np.linspace(-1.1 * d, 1.1 * d, k)
    lo, hi = cut.band
    band = np.concatenate([np.linspace(-1.3 * hi, 1.3 * hi, k), g])
    axes = [g] * (n - 1) + [np.unique(band)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)


def top_grid(cut: Cutoff, m: int = 400) -> np.ndarray:
    return cut.hc.graph(_disc_points(cut.hc.n, cut.delta, m))


@dataclass(frozen=True)
class CutoffReport:
    delta: float
    delta_p: float
    theta: float
    range_ok: bool
    support_ok: bool
    grad_const: float
    hess_const: float
    orthogonality: float
    fd_gradient_error: float

    def row(self) -> dict:
        return dict(self.__dict__)


def verify_cutoff(cut: Cutoff, k: int = 25) -> CutoffReport:
    """Measure the three cutoff properties on the verification grid.

    Derivative constants are ``max |D^j chi| * (delta - delta')^j``.  The
    analytic gradient is cross-checked against central differences of
    ``chi`` itself.
    """
    z = verification_grid(cut, k)
    chi = cut(z)
    zt, zn = z[:, :-1], z[:, -1]
    rz = np.linalg.norm(zt, axis=1)
    outside = (rz >= cut.delta) | (np.abs(zn) >= cut.delta)
    inside = (rz < cut.delta_p) & (np.abs(zn) < cut.delta_p)
    range_ok = bool(np.all((chi >= -1e-14) & (chi <= 1 + 1e-14)))
    support_ok = bool(np.all(np.abs(chi[outside]) <= 1e-14) and np.all(np.abs(chi[inside] - 1) <= 1e-12))
    g = cut.gradient(z)
    H = cut.hessian(z)
    grad_const = float(np.linalg.norm(g, axis=1).max() * cut.eps)
    hess_const = float(np.abs(H).max() * cut.eps**2)

    top = top_grid(cut)
    an = cut.hc.AN(top[:, :-1])
    orth = float(np.abs(np.einsum("ij,ij->i", cut.gradient(top), an)).max())

    rng = np.random.default_rng(7)
    probe = z[rng.choice(len(z), size=min(200, len(z)), replace=False)]
    h = 1e-5 * cut.eps
    fd = np.stack(
        [(cut(probe + h * e) - cut(probe - h * e)) / (2 * h) for e in np.eye(cut.hc.n)], axis=-1
    )
    fd_err = float(np.abs(fd - cut.gradient(probe)).max() * cut.eps)
    return CutoffReport(
        cut.delta, cut.delta_p, cut.theta, range_ok, support_ok, grad_const, hess_const, orth, fd_err
    )


# ---------------------------------------------------------------------------
# quadrature on W_delta


@dataclass(frozen=True)
class RegionRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        return float(self.weights @ np.asarray(f))

    def l2(self, f):
        return float(np.sqrt(self.weights @ (np.asarray(f) ** 2)))

    def lp(self, f, p):
        return float((self.weights @ np.abs(np.asarray(f)) ** p) ** (1.0 / p))


def region_rule(hc: HalfCylinderDomain, delta: float, order: int = 16) -> RegionRule:
    """Gauss rule on ``W_delta``: polar in ``z~`` (n=3) and Gauss in ``z_n`` up to the graph."""
    if hc.n != 3:
        raise ValueError("region rules are implemented for n = 3")
    x, w = special.roots_legendre(order)
    r = 0.5 * delta * (x + 1)
    wr = 0.5 * delta * w * r
    m = 2 * order
    th = 2 * np.pi * np.arange(m) / m
    wth = np.full(m, 2 * np.pi / m)
    R, T = np.meshgrid(r, th, indexing="ij")
    WT = np.outer(wr, wth)
    wt = np.stack([R * np.cos(T), R * np.sin(T)], -1).reshape(-1, 2)
    wtw = WT.reshape(-1)
    top = hc.psi(wt)
    lo = -delta
    zn = 0.5 * (top - lo)[:, None] * (x[None] + 1) + lo
    wn = 0.5 * (top - lo)[:, None] * w[None]
    nodes = np.concatenate(
        [np.repeat(wt[:, None, :], order, axis=1), zn[..., None]], axis=-1
    ).reshape(-1, 3)
    weights = (wtw[:, None] * wn).reshape(-1)
    return RegionRule(nodes, weights)


# ---------------------------------------------------------------------------
# Caccioppoli-type estimate


@dataclass(frozen=True)
class AnalyticSolution:
    """Weak solution of ``div(A grad u) = -phi`` with ``F.v = int phi v``."""

    name: str
    u: object
    grad: object
    phi: object
    case: str  # "D" (u = 0 on top) or "N" (conormal derivative zero on top)


def caccioppoli_solutions() -> list[AnalyticSolution]:
    """Solutions on the flat half-cylinder with ``A = I``."""
    zero = lambda z: np.zeros(np.shape(z)[:-1])  # noqa: E731
    return [
        AnalyticSolution("constant", lambda z: np.ones(np.shape(z)[:-1]), lambda z: np.zeros(np.shape(z)), zero, "N"),
        AnalyticSolution("coordinate", lambda z: z[..., 0], lambda z: np.eye(3)[0] * np.ones(np.shape(z)), zero, "N"),
        AnalyticSolution(
            "saddle",
            lambda z: z[..., 0] * z[..., 2],
            lambda z: np.stack([z[..., 2], np.zeros(np.shape(z)[:-1]), z[..., 0]], -1),
            zero,
            "D",
        ),
        AnalyticSolution(
            "parabola",
            lambda z: -0.5 * z[..., 2] ** 2,
            lambda z: np.stack([np.zeros(np.shape(z)[:-1])] * 2 + [-z[..., 2]], -1),
            lambda z: np.ones(np.shape(z)[:-1]),
            "N",
        ),
    ]


def caccioppoli_ratio(hc, sol: AnalyticSolution, delta, delta_p, order: int = 16) -> float:
    """``|grad u|^2_{W_delta'} / [eps^-2 |u|^2_{W_delta} + a |u|_{W_delta} + b^2]`` with ``b = 0``."""
    big = region_rule(hc, delta, order)
    small = region_rule(hc, delta_p, order)
    g = sol.grad(small.nodes)
    num = small.integrate(np.einsum("ij,ij->i", g, g))
    u = sol.u(big.nodes)
    a = big.l2(sol.phi(big.nodes))
    den = (delta - delta_p) ** -2 * big.l2(u) ** 2 + a * big.l2(u)
    return num / den


@dataclass(frozen=True)
class ScaleReport:
    check: str
    deltas: np.ndarray
    constants: np.ndarray
    theta: float
    limit: float = 2.0

    @property
    def variation(self) -> float:
        c = np.asarray(self.constants)
        if np.all(c == 0):
            return 1.0
        return float(c.max() / c.min()) if c.min() > 0 else float("inf")

    @property
    def passed(self) -> bool:
        return self.variation <= self.limit

    def rows(self) -> list[dict]:
        return [
            {"check": self.check, "delta": float(d), "delta_p": float(self.theta * d), "theta": self.theta, "C_hat": float(c)}
            for d, c in zip(self.deltas, self.constants)
        ]

    def summary(self) -> dict:
        return {
            "check": self.check,
            "params": {"theta": self.theta},
            "C_hat": float(np.max(self.constants)),
            "variation": self.variation,
            "pass": self.passed,
        }


def caccioppoli_check(hc, sol: AnalyticSolution, deltas=(0.4, 0.2, 0.1, 0.05), theta: float = 0.5, order: int = 16):
    """Scale ladder of the empirical Caccioppoli constant at fixed ``theta``."""
    c = [caccioppoli_ratio(hc, sol, d, theta * d, order) for d in deltas]
    return ScaleReport(f"caccioppoli[{sol.name}]", np.asarray(deltas), np.asarray(c), theta)


# ---------------------------------------------------------------------------
# scaled embeddings


@dataclass(frozen=True)
class EmbeddingFunction:
    """Test function with derivatives up to second order; may depend on the scale ``delta``."""

    name: str
    v: object
    grad: object
    hess: object


def embedding_functions() -> list[EmbeddingFunction]:
    def sq_norm(z, z0, c):
        d = z - z0
        return np.sqrt(np.einsum("...i,...i->...", d, d) + c**2)

    def smooth_dist(delta):
        z0 = np.array([0.0, 0.0, -0.5 * delta])
        c = 0.1 * delta
        v = lambda z: sq_norm(z, z0, c)  # noqa: E731
        g = lambda z: (z - z0) / sq_norm(z, z0, c)[..., None]  # noqa: E731

        def h(z):
            r = sq_norm(z, z0, c)[..., None, None]
            d = (z - z0)[..., :, None]
            return np.eye(3) / r - d * np.swapaxes(d, -1, -2) / r**3

        return v, g, h

    one = EmbeddingFunction(
        "constant",
        lambda d: lambda z: np.ones(np.shape(z)[:-1]),
        lambda d: lambda z: np.zeros(np.shape(z)),
        lambda d: lambda z: np.zeros(np.shape(z) + (3,)),
    )

    def sin_h(z):
        out = np.zeros(np.shape(z) + (3,))
        out[..., 0, 0] = -np.sin(z[..., 0])
        return out

    sine = EmbeddingFunction(
        "sine",
        lambda d: lambda z: np.sin(z[..., 0]),
        lambda d: lambda z: np.stack([np.cos(z[..., 0])] + [np.zeros(np.shape(z)[:-1])] * 2, -1),
        lambda d: sin_h,
    )
    dist = EmbeddingFunction(
        "smoothed_distance",
        lambda d: smooth_dist(d)[0],
        lambda d: smooth_dist(d)[1],
        lambda d: smooth_dist(d)[2],
    )
    return [one, sine, dist]


def _sobolev_sum(rule, f, delta, n, shift=0.0):
    """``sum_j sum_|alpha|=j delta^(j - n/2 - shift) |D^alpha v|_L2`` for ``j <= 2``."""
    z = rule.nodes
    k0 = sobolev_order(n)
    if k0 > 2:
        raise ValueError("embedding checks use derivatives up to order two")
    total = delta ** (-n / 2 - shift) * rule.l2(f.v(delta)(z))
    g = f.grad(delta)(z)
    total += sum(delta ** (1 - n / 2 - shift) * rule.l2(g[:, i]) for i in range(n))
    if k0 >= 2:
        H = f.hess(delta)(z)
        for i in range(n):
            for j in range(i, n):
                total += delta ** (2 - n / 2 - shift) * rule.l2(H[:, i, j])
    return total


def holder_seminorm(values, points, lam):
    """Sampled ``sup |v(x) - v(y)| / |x - y|^lam`` over all point pairs."""
    dv = np.abs(values[:, None] - values[None, :])
    dx = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    mask = dx > 0
    return float((dv[mask] / dx[mask] ** lam).max())


def embedding_ratios(hc, f: EmbeddingFunction, delta, order: int = 12, samples: int = 300, lam=None, seed: int = 0):
    """Empirical constants for the sup bound, the Hölder bound and the ``L^(2n/(n-2))`` bound."""
    n = hc.n
    lam = holder_exponent(n) if lam is None else lam
    rule = region_rule(hc, delta, order)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(rule.nodes), size=min(samples, len(rule.nodes)), replace=False)
    pts = rule.nodes[idx]
    vals = f.v(delta)(rule.nodes)
    sup = float(np.abs(vals).max())
    sup_c = sup / _sobolev_sum(rule, f, delta, n)
    hold = holder_seminorm(vals[idx], pts, lam)
    hold_c = hold / _sobolev_sum(rule, f, delta, n, shift=lam)
    q = 2 * n / (n - 2)
    g = f.grad(delta)(rule.nodes)
    rhs = rule.l2(vals) / delta + rule.l2(np.linalg.norm(g, axis=1))
    lq_c = rule.lp(vals, q) / rhs
    return {"sup": sup_c, "holder": hold_c, "lq": lq_c}


def scaled_embedding_check(hc, f: EmbeddingFunction, deltas=(0.4, 0.2, 0.1, 0.05), order: int = 12) -> dict:
    """Scale ladders of the three embedding constants; each is one ``ScaleReport``."""
    per = [embedding_ratios(hc, f, d, order) for d in deltas]
    out = {}
    for key in ("sup", "holder", "lq"):
        c = np.array([p[key] for p in per])
        out[key] = ScaleReport(f"embedding[{key}:{f.name}]", np.asarray(deltas), c, theta=float("nan"))
    return out
