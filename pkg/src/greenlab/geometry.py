"""Star-shaped domains: charts, normals, distances, reflections and quadrature.

A domain is ``{rho * omega : 0 <= rho < r(omega)}`` for a smooth positive
radial map ``r`` on the unit sphere.  The level function
``phi(x) = |x| - r(x / |x|)`` is negative inside, and its normalized
gradient is the outer normal on the boundary.

Charts follow the usual convention: at a boundary point ``z`` the rigid
motion ``w = Q (y - z)`` sends the outer normal to ``e_n`` so that near
``z`` the domain is ``{w_n < psi(w_tilde)}`` with ``psi(0) = 0`` and
``grad psi(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import special


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _norm(a):
    return np.sqrt(_dot(a, a))


def rotation_to_pole(v) -> np.ndarray:
    """Proper rotation ``Q`` with ``Q @ v = e_n`` for a unit vector ``v``.

    Built from the Householder reflection exchanging ``v`` and ``e_n``, with
    the first row negated to make the determinant +1.  ``Q`` is the identity
    when ``v = e_n``.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    e = np.zeros(n)
    e[-1] = 1.0
    u = v - e
    uu = u @ u
    if uu < 1e-30:
        return np.eye(n)
    H = np.eye(n) - 2.0 * np.outer(u, u) / uu
    H[0] *= -1.0
    return H


# ---------------------------------------------------------------------------
# quadrature on the unit sphere


@dataclass(frozen=True)
class Quadrature:
    """Nodes and positive weights; surface rules also carry unit normals."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    normals: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.normals):
            if arr is not None:
                arr.setflags(write=False)

    def __len__(self):
        return self.weights.shape[0]

    def integrate(self, values) -> float | np.ndarray:
        """Apply the rule to sampled values (quadrature axis first)."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))

    @property
    def total(self) -> float:
        return float(self.weights.sum())


@lru_cache(maxsize=64)
def _sphere_rule_cached(n: int, order: int):
    if n == 2:
        m = 2 * order
        theta = 2.0 * np.pi * np.arange(m) / m
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return pts, np.full(m, 2.0 * np.pi / m)
    a = (n - 3) / 2.0
    if a == 0.0:
        t, wt = special.roots_legendre(order)
    else:
        t, wt = special.roots_jacobi(order, a, a)
    sub, wsub = _sphere_rule_cached(n - 1, order)
    s = np.sqrt(1.0 - t * t)
    pts = np.concatenate(
        [s[:, None, None] * sub[None, :, :], np.broadcast_to(t[:, None, None], (order, sub.shape[0], 1))],
        axis=-1,
    ).reshape(-1, n)
    w = (wt[:, None] * wsub[None, :]).reshape(-1)
    return pts, w


def sphere_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss rule on the unit sphere in R^n.

    The polar variable ``cos(theta)`` uses Gauss-Jacobi nodes and the
    remaining directions recurse down to a trapezoid rule on the circle, so
    the rule is exact for polynomials of degree ``< 2 * order`` in the last
    coordinate and trigonometric degree ``< 2 * order`` in the azimuth.
    """
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    pts, w = _sphere_rule_cached(int(n), int(order))
    return pts.copy(), w.copy()


def fibonacci_sphere(m: int) -> np.ndarray:
    """Nearly uniform points on the unit sphere in R^3."""
    i = np.arange(m) + 0.5
    z = 1.0 - 2.0 * i / m
    phi = np.pi * (1.0 + 5.0**0.5) * i
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=-1)


def uniform_directions(n: int, m: int) -> np.ndarray:
    """Deterministic, roughly uniform set of ``m`` unit vectors in R^n."""
    if n == 3:
        return fibonacci_sphere(m)
    # Halton-like low-discrepancy points pushed through a Gaussian map
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]
    u = np.empty((m, n))
    for j in range(n):
        b = primes[j]
        seq = np.zeros(m)
        for k in range(m):
            f, i, r = 1.0, k + 1, 0.0
            while i > 0:
                f /= b
                r += f * (i % b)
                i //= b
            seq[k] = r
        u[:, j] = seq
    g = special.ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return g / _norm(g)[:, None]


# ---------------------------------------------------------------------------
# nearest points and frames


@dataclass(frozen=True)
class NearestPoint:
    point: np.ndarray
    distance: float
    unique: bool
    converged: bool = True


@dataclass(frozen=True)
class BoundaryFrame:
    """Chart of the boundary at a base point ``z``.

    ``to_chart`` and ``from_chart`` are the rigid motion and its inverse;
    ``psi`` is the local graph.  Fields evaluated at a query point ``y``
    depend only on its tangential chart coordinates.
    """

    domain: "StarDomain" = field(repr=False)
    base: np.ndarray
    normal: np.ndarray
    Q: np.ndarray

    @property
    def n(self):
        return self.base.shape[0]

    def to_chart(self, y):
        return (np.asarray(y, dtype=float) - self.base) @ self.Q.T

    def from_chart(self, w):
        return self.base + np.asarray(w, dtype=float) @ self.Q

    def in_cylinder(self, y, radius=None) -> np.ndarray:
        R = self.domain.R0 if radius is None else radius
        w = self.to_chart(y)
        return (_norm(w[..., :-1]) < R) & (np.abs(w[..., -1]) < R)

    def _require_cylinder(self, y):
        if not np.all(self.in_cylinder(y)):
            raise ValueError("point lies outside the chart cylinder")

    def psi(self, wt) -> np.ndarray:
        """Height of the boundary above the tangent plane at chart coordinates ``wt``."""
        t, _ = self._solve_graph(wt)
        return t

    def psi_grad(self, wt) -> np.ndarray:
        _, g = self._solve_graph(wt)
        return -g[..., :-1] / g[..., -1:]

    def _solve_graph(self, wt):
        wt = np.asarray(wt, dtype=float)
        t = np.zeros(wt.shape[:-1])
        dom = self.domain
        for _ in range(60):
            w = np.concatenate([wt, t[..., None]], axis=-1)
            p = self.from_chart(w)
            g = dom.level_gradient(p) @ self.Q.T
            step = dom.level(p) / g[..., -1]
            t = t - step
            if np.all(np.abs(step) < 1e-13):
                break
        else:
            raise RuntimeError("chart graph Newton iteration did not converge")
        w = np.concatenate([wt, t[..., None]], axis=-1)
        g = dom.level_gradient(self.from_chart(w)) @ self.Q.T
        return t, g

    def tangent(self, i: int, y) -> np.ndarray:
        """Tangent field ``Q^T (e_i + psi_{w_i} e_n)`` at ``y`` (``i`` is zero-based)."""
        self._require_cylinder(y)
        w = self.to_chart(y)
        dpsi = self.psi_grad(w[..., :-1])
        v = np.zeros(w.shape)
        v[..., i] = 1.0
        v[..., -1] = dpsi[..., i]
        return v @ self.Q

    def big_normal(self, y) -> np.ndarray:
        """Unnormalized normal ``Q^T (-grad psi, 1)`` at ``y``."""
        self._require_cylinder(y)
        w = self.to_chart(y)
        dpsi = self.psi_grad(w[..., :-1])
        v = np.concatenate([-dpsi, np.ones(w.shape[:-1] + (1,))], axis=-1)
        return v @ self.Q

    def reflect(self, y) -> np.ndarray:
        """Mirror ``y`` through the tangent plane: negate the normal chart coordinate."""
        self._require_cylinder(y)
        w = self.to_chart(y)
        w[..., -1] *= -1.0
        return self.from_chart(w)


# ---------------------------------------------------------------------------
# domains


class StarDomain:
    """Bounded domain star-shaped about the origin.

    Subclasses supply ``radius(omega)`` and its tangential gradient
    ``radius_gradient(omega)`` on the unit sphere.  ``R0`` and ``kappa0`` are
    estimated from sampled curvature unless given.
    """

    name = "star"

    def __init__(self, n: int, R0: float | None = None, kappa0: float | None = None):
        if n < 3:
            raise ValueError("domains are supported for n >= 3")
        self.n = int(n)
        self._R0 = R0
        self._kappa0 = kappa0
        om = uniform_directions(self.n, 400)
        r = self.radius(om)
        if np.any(~np.isfinite(r)) or np.any(r <= 0.0):
            raise ValueError("radial map must be positive on the sphere")
        if self.R0 <= self.kappa0:
            raise ValueError("nearest-point radius must be below the chart radius")

    # subclass interface -------------------------------------------------
    def radius(self, omega) -> np.ndarray:
        raise NotImplementedError

    def radius_gradient(self, omega) -> np.ndarray:
        """Tangential gradient of ``r`` on the sphere (default: finite differences)."""
        omega = np.asarray(omega, dtype=float)
        h = 1e-6
        g = np.empty(omega.shape)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h
            up = omega + e
            dn = omega - e
            g[..., i] = (
                self.radius(up / _norm(up)[..., None]) - self.radius(dn / _norm(dn)[..., None])
            ) / (2 * h)
        return g - _dot(g, omega)[..., None] * omega

    def params(self) -> dict:
        return {"kind": self.name, "n": self.n}

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params().items() if k != "kind")
        return f"{type(self).__name__}({args})"

    # basic geometry -----------------------------------------------------
    def level(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = _norm(x)
        return rho - self.radius(x / rho[..., None])

    def level_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = _norm(x)[..., None]
        om = x / rho
        return om - self.radius_gradient(om) / rho

    def normal(self, x) -> np.ndarray:
        """Unit outer normal of the level set through ``x``."""
        g = self.level_gradient(x)
        return g / _norm(g)[..., None]

    def boundary_point(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return self.radius(omega)[..., None] * omega

    def contains(self, x, closed=False) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = _norm(x)
        safe = np.where(rho > 0, rho, 1.0)[..., None]
        phi = np.where(rho > 0, rho - self.radius(x / safe), -1.0)
        return phi <= 0 if closed else phi < 0

    @cached_property
    def max_radius(self) -> float:
        om = uniform_directions(self.n, 4000)
        return float(self.radius(om).max())

    @cached_property
    def diameter(self) -> float:
        """Diameter estimated from dense boundary samples (exact for centrally symmetric shapes)."""
        om = uniform_directions(self.n, 2000)
        b = self.boundary_point(om)
        return float(np.max(_norm(b[:, None, :] - b[None, :, :])))

    @cached_property
    def max_curvature(self) -> float:
        om = uniform_directions(self.n, 400)
        b = self.boundary_point(om)
        h = 1e-4
        n = self.n
        H = np.empty(b.shape[:1] + (n, n))
        for i in range(n):
            for j in range(i, n):
                ei = np.zeros(n)
                ej = np.zeros(n)
                ei[i] = h
                ej[j] = h
                v = (
                    self.level(b + ei + ej)
                    - self.level(b + ei - ej)
                    - self.level(b - ei + ej)
                    + self.level(b - ei - ej)
                ) / (4 * h * h)
                H[:, i, j] = H[:, j, i] = v
        g = self.level_gradient(b)
        gn = _norm(g)
        nu = g / gn[:, None]
        P = np.eye(n)[None] - nu[:, :, None] * nu[:, None, :]
        S = P @ H @ P / gn[:, None, None]
        return float(np.max(np.abs(np.linalg.eigvalsh(S))))

    @property
    def R0(self) -> float:
        if self._R0 is None:
            self._R0 = min(0.6 / self.max_curvature, 0.3 * self.diameter)
        return self._R0

    @property
    def kappa0(self) -> float:
        if self._kappa0 is None:
            self._kappa0 = 0.5 / self.max_curvature
        return self._kappa0

    @cached_property
    def derivative_bound(self) -> float:
        """Sampled bound on first and second derivatives of chart graphs within ``R0 / 2``."""
        om = uniform_directions(self.n, 40)
        ring = np.array([[0.0] * (self.n - 1)] + [list(v) for v in 0.5 * self.R0 * np.eye(self.n - 1)])
        h = 1e-4
        best = 0.0
        for z in self.boundary_point(om):
            fr = self.frame_at(z)
            g = fr.psi_grad(ring)
            best = max(best, float(np.max(np.abs(g))))
            for i in range(self.n - 1):
                e = np.zeros(self.n - 1)
                e[i] = h
                d2 = (fr.psi_grad(ring + e) - fr.psi_grad(ring - e)) / (2 * h)
                best = max(best, float(np.max(np.abs(d2))))
        return best

    # charts ---------------------------------------------------------------
    def frame_at(self, z) -> BoundaryFrame:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError("frame_at expects a single boundary point")
        if abs(float(self.level(z))) > 1e-9:
            raise ValueError("frame base point is not on the boundary")
        nu = self.normal(z)
        return BoundaryFrame(self, z.copy(), nu, rotation_to_pole(nu))

    def tangent_field(self, z, i: int, y) -> np.ndarray:
        return self.frame_at(z).tangent(i, y)

    def nearest_boundary_point(self, y, coarse: int = 2000) -> NearestPoint:
        """Closest boundary point to ``y`` by coarse search plus chart-based refinement."""
        y = np.asarray(y, dtype=float)
        if not self.contains(y, closed=True) and float(self.level(y)) > 1e-12:
            raise ValueError("point lies outside the closed domain")
        om = uniform_directions(self.n, coarse)
        b = self.boundary_point(om)
        dist = _norm(b - y)
        k = int(np.argmin(dist))
        dmin = dist[k]
        near = np.flatnonzero(dist <= dmin + 1e-6)
        spread = float(np.max(_norm(b[near] - b[k]))) if near.size > 1 else 0.0
        unique = spread < 0.1 * self.diameter

        fr = self.frame_at(b[k])
        w = fr.to_chart(y)

        def resid(wt):
            return w - np.concatenate([wt, [fr.psi(wt[None])[0]]])

        def jac(wt):
            J = np.zeros((self.n, self.n - 1))
            J[:-1] = -np.eye(self.n - 1)
            J[-1] = -fr.psi_grad(wt[None])[0]
            return J

        # Gauss-Newton on the chart parametrization; the rate is d * curvature
        wt = np.zeros(self.n - 1)
        converged = False
        try:
            for _ in range(200):
                step = np.linalg.lstsq(jac(wt), -resid(wt), rcond=None)[0]
                wt = wt + step
                if np.linalg.norm(step) < 1e-14:
                    converged = True
                    break
        except RuntimeError:
            wt = np.zeros(self.n - 1)
        if np.linalg.norm(wt) >= self.R0:
            converged = False
        p = fr.from_chart(np.concatenate([wt, [fr.psi(wt[None])[0]]]))
        d = float(_norm(p - y))
        if d > dmin + 1e-12:
            p, d, converged = b[k], float(dmin), False
        if d > self.kappa0:
            unique = False
        return NearestPoint(point=p, distance=d, unique=unique, converged=converged)

    def distance_to_boundary(self, y) -> float:
        return self.nearest_boundary_point(y).distance

    def reflect(self, y, anchor) -> np.ndarray:
        """Reflect ``y`` through the tangent plane in the chart at ``anchor``."""
        fr = self.frame_at(anchor)
        out = fr.reflect(y)
        y = np.asarray(y, dtype=float)
        inside = self.contains(y)
        if np.any(inside & self.contains(out, closed=True)):
            raise ValueError("reflected point is not exterior; point too far from the boundary")
        return out

    # quadrature -------------------------------------------------------------
    def surface_quadrature(self, order: int) -> Quadrature:
        """Sphere rule pushed to the boundary with the radial-map surface Jacobian."""
        om, w = sphere_rule(self.n, order)
        return self._push_to_boundary(om, w)

    def _push_to_boundary(self, om, w) -> Quadrature:
        r = self.radius(om)
        b = r[:, None] * om
        nu = self.normal(b)
        jac = r ** (self.n - 1) / _dot(om, nu)
        return Quadrature(b, w * jac, "surface", nu)

    def graded_surface_quadrature(
        self, direction, scale: float, order: int = 12, azimuth: int = 12, ratio: float = 2.0
    ) -> Quadrature:
        """Surface rule refined toward the boundary point in ``direction``.

        Polar panels in the angle from ``direction`` have edges
        ``0, scale/4, scale/2, scale, ratio*scale, ...`` up to ``pi``; each
        panel uses ``order`` Gauss points.
        """
        n = self.n
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        edges = [0.0, scale / 4, scale / 2]
        t = scale
        while t < np.pi:
            edges.append(t)
            t *= ratio
        edges.append(np.pi)
        edges = np.unique(np.clip(edges, 0.0, np.pi))
        x, wx = special.roots_legendre(order)
        th, wth = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            th.append(0.5 * (b - a) * x + 0.5 * (a + b))
            wth.append(0.5 * (b - a) * wx)
        th = np.concatenate(th)
        wth = np.concatenate(wth) * np.sin(th) ** (n - 2)
        sub, wsub = sphere_rule(n - 1, azimuth)
        local = np.concatenate(
            [
                np.sin(th)[:, None, None] * sub[None],
                np.broadcast_to(np.cos(th)[:, None, None], (th.size, sub.shape[0], 1)),
            ],
            axis=-1,
        ).reshape(-1, n)
        w = (wth[:, None] * wsub[None]).reshape(-1)
        om = local @ rotation_to_pole(d)
        return self._push_to_boundary(om, w)

    def ray_exit(self, center, omega) -> np.ndarray:
        """Distance from ``center`` to the boundary along each direction.

        Assumes each ray from ``center`` meets the boundary once (true for
        the convex shapes used here and for all rays from the origin).
        """
        c = np.asarray(center, dtype=float)
        om = np.asarray(omega, dtype=float)
        if np.allclose(c, 0.0):
            return self.radius(om)
        lo = np.zeros(om.shape[0])
        hi = np.full(om.shape[0], 2.0 * self.max_radius + _norm(c))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            inside = self.level(c + mid[:, None] * om) < 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        t = 0.5 * (lo + hi)
        for _ in range(3):
            p = c + t[:, None] * om
            t = t - self.level(p) / _dot(self.level_gradient(p), om)
        return t

    def volume_quadrature(
        self, order: int, center=None, radial_order: int | None = None, radial_edges=None
    ) -> Quadrature:
        """Polar rule about ``center`` (default the origin).

        Radial Gauss-Legendre panels with relative edges ``radial_edges``
        (default a single panel ``[0, 1]``) are scaled to each ray's exit
        distance.  Centering at a singularity of strength ``|x-y|^(2-n)``
        makes the integrand smooth in polar coordinates.
        """
        n = self.n
        om, wom = sphere_rule(n, order)
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        R = self.ray_exit(c, om)
        q = order if radial_order is None else radial_order
        x, wx = special.roots_legendre(q)
        edges = [0.0, 1.0] if radial_edges is None else list(radial_edges)
        s, ws = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            s.append(0.5 * (b - a) * x + 0.5 * (a + b))
            ws.append(0.5 * (b - a) * wx)
        s = np.concatenate(s)
        ws = np.concatenate(ws)
        rho = R[:, None] * s[None, :]
        pts = c + rho[..., None] * om[:, None, :]
        w = wom[:, None] * ws[None, :] * R[:, None] * rho ** (n - 1)
        return Quadrature(pts.reshape(-1, n), w.reshape(-1), "volume")

    @cached_property
    def volume(self) -> float:
        om, w = sphere_rule(self.n, 48)
        return float(w @ self.radius(om) ** self.n / self.n)

    @cached_property
    def area(self) -> float:
        return self.surface_quadrature(48).total

    def mean(self, f, quad: Quadrature | None = None) -> float:
        quad = self.volume_quadrature(24) if quad is None else quad
        return float(quad.integrate(f(quad.nodes)) / quad.total)


class Ball(StarDomain):
    name = "ball"

    def __init__(self, n: int = 3, radius: float = 1.0, **kw):
        self.R = float(radius)
        if self.R <= 0:
            raise ValueError("radius must be positive")
        super().__init__(n, **kw)

    def params(self):
        return {"kind": self.name, "n": self.n, "radius": self.R}

    def radius(self, omega):
        return np.full(np.shape(omega)[:-1], self.R)

    def radius_gradient(self, omega):
        return np.zeros(np.shape(omega))

    @cached_property
    def max_curvature(self):
        return 1.0 / self.R

    @cached_property
    def diameter(self):
        return 2.0 * self.R

    @cached_property
    def volume(self):
        return math.pi ** (self.n / 2) / math.gamma(self.n / 2 + 1) * self.R**self.n

    def nearest_boundary_point(self, y, coarse: int = 2000) -> NearestPoint:
        y = np.asarray(y, dtype=float)
        rho = float(np.linalg.norm(y))
        if rho > self.R * (1 + 1e-12):
            raise ValueError("point lies outside the closed domain")
        if rho < 1e-14:
            e = np.zeros(self.n)
            e[-1] = self.R
            return NearestPoint(e, self.R, unique=False)
        d = self.R - rho
        return NearestPoint(y * (self.R / rho), d, unique=d <= self.kappa0)


class Ellipsoid(StarDomain):
    name = "ellipsoid"

    def __init__(self, axes=(1.0, 1.0, 1.2), **kw):
        self.axes = np.asarray(axes, dtype=float)
        if np.any(self.axes <= 0):
            raise ValueError("semi-axes must be positive")
        super().__init__(self.axes.size, **kw)

    def params(self):
        return {"kind": self.name, "n": self.n, "axes": [float(a) for a in self.axes]}

    def radius(self, omega):
        omega = np.asarray(omega, dtype=float)
        return _dot(omega / self.axes, omega / self.axes) ** -0.5

    def radius_gradient(self, omega):
        omega = np.asarray(omega, dtype=float)
        q = _dot(omega / self.axes, omega / self.axes)
        g = -(q ** -1.5)[..., None] * omega / self.axes**2
        return g - _dot(g, omega)[..., None] * omega


class PerturbedBall(StarDomain):
    """Unit ball with boundary ``r(omega) = 1 + eps * omega_n ** index``."""

    name = "perturbed_ball"

    def __init__(self, n: int = 3, eps: float = 0.1, index: int = 2, **kw):
        self.eps = float(eps)
        self.index = int(index)
        if self.index < 1:
            raise ValueError("harmonic index must be positive")
        super().__init__(n, **kw)

    def params(self):
        return {"kind": self.name, "n": self.n, "eps": self.eps, "index": self.index}

    def radius(self, omega):
        omega = np.asarray(omega, dtype=float)
        return 1.0 + self.eps * omega[..., -1] ** self.index

    def radius_gradient(self, omega):
        omega = np.asarray(omega, dtype=float)
        k = self.index
        coef = self.eps * k * omega[..., -1] ** (k - 1)
        e = np.zeros(self.n)
        e[-1] = 1.0
        return coef[..., None] * (e - omega[..., -1:] * omega)


def make_domain(params: dict) -> StarDomain:
    """Build a domain from a config mapping such as ``{"kind": "ball", "n": 3}``."""
    params = dict(params)
    kind = params.pop("kind", "ball")
    if kind == "ball":
        return Ball(params.pop("n", 3), params.pop("radius", 1.0), **params)
    if kind == "ellipsoid":
        return Ellipsoid(params.pop("axes", (1.0, 1.0, 1.2)), **params)
    if kind == "perturbed_ball":
        return PerturbedBall(params.pop("n", 3), params.pop("eps", 0.1), params.pop("index", 2), **params)
    raise ValueError(f"unknown domain kind {kind!r}")


class HalfSpace:
    """Lower half-space ``{x_n < 0}`` with a nominal length scale.

    It exposes the parts of the domain interface used by the sampling and
    verification code; ``diameter`` is the truncation/length scale.
    """

    name = "halfspace"

    def __init__(self, n: int = 3, length: float = 2.0):
        self.n = int(n)
        self.diameter = float(length)
        self.R0 = float(length)
        self.kappa0 = 0.5 * float(length)

    def params(self):
        return {"kind": self.name, "n": self.n, "length": self.diameter}

    def __repr__(self):
        return f"HalfSpace(n={self.n}, length={self.diameter})"

    def level(self, x):
        return np.asarray(x, dtype=float)[..., -1]

    def level_gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape)
        g[..., -1] = 1.0
        return g

    def normal(self, x):
        return self.level_gradient(x)

    def contains(self, x, closed=False):
        t = self.level(x)
        return t <= 0 if closed else t < 0

    def frame_at(self, z) -> BoundaryFrame:
        z = np.asarray(z, dtype=float)
        if abs(z[-1]) > 1e-12:
            raise ValueError("frame base point is not on the boundary")
        return BoundaryFrame(self, z.copy(), np.eye(self.n)[-1], np.eye(self.n))

    def tangent_field(self, z, i, y):
        return self.frame_at(z).tangent(i, y)

    def nearest_boundary_point(self, y, coarse=None) -> NearestPoint:
        y = np.asarray(y, dtype=float)
        if y[-1] > 0:
            raise ValueError("point lies outside the closed domain")
        p = y.copy()
        p[-1] = 0.0
        return NearestPoint(p, float(-y[-1]), True)

    def distance_to_boundary(self, y):
        return self.nearest_boundary_point(y).distance

    def reflect(self, y, anchor):
        return self.frame_at(anchor).reflect(y)

    def boundary_point(self, omega):
        """Boundary point in the direction ``omega`` of the plane (last coordinate ignored)."""
        omega = np.array(omega, dtype=float)
        omega[..., -1] = 0.0
        return omega
