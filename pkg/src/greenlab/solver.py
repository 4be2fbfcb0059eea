"""Dirichlet and Neumann Green's functions by boundary collocation.

For a pole ``x`` the correction ``h(x, .)`` is written as a combination of
point-source potentials ``Gamma(., q_j)`` with sources ``q_j`` outside the
domain, fitted to the boundary condition by truncated least squares:

* Dirichlet: ``h = -Gamma(x, .)`` on the boundary.
* Neumann: ``D_nu h = -D_nu Gamma(x, .)`` on the boundary and
  ``Laplace h = -1/|Omega|`` (carried by the particular solution
  ``-|y|^2 / (2 n |Omega|)``), then shifted to mean zero.

The fit is a fixed linear map from boundary data to coefficients, so the
x-derivatives of the coefficients come from applying the same map to the
x-derivatives of the data.  Poles close to the boundary get their own basis:
extra source shells around the reflected pole, extra collocation nodes near
the nearest boundary point, and an explicit image term
``s * Gamma(xbar(x), .)`` where ``xbar`` is the mirror image through the
tangent plane at a fixed anchor.
"""

from __future__ import annotations

import dataclasses
import threading
from dataclasses import dataclass, field

import numpy as np

from .geometry import Quadrature, StarDomain, rotation_to_pole, sphere_rule, uniform_directions
from .kernels import (
    DIRICHLET,
    NEUMANN,
    add_index,
    axes_of,
    indices_up_to,
    kernel,
    multi_index,
    normalize_kind,
    zero_index,
)

MAX_POLE_ORDER = 2
_CHUNK = 2048  # rows per kernel block when evaluating many points


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverSettings:
    """Collocation parameters.

    ``near_fraction`` is the pole distance to the boundary, as a fraction of
    the diameter, below which the local basis is used.  ``residual_tol``
    bounds the boundary residual relative to the largest boundary datum.
    """

    m: int = 400
    dilation: float = 1.6
    oversample: float = 2.0
    rcond: float = 1e-12
    residual_tol: float = 1e-4
    near_fraction: float = 0.5
    layer_points: int = 60
    layer_margin: float = 0.3
    layer_top: float = 0.25
    local_rings: int = 36
    local_angles: int = 20
    local_min: float = 0.1
    local_max: float = 1.0
    image: bool = True
    surface_order: int = 40
    volume_order: int = 24
    graded_order: int = 16

    def replace(self, **kw) -> "SolverSettings":
        return dataclasses.replace(self, **kw)

    @classmethod
    def from_dict(cls, data: dict | None) -> "SolverSettings":
        data = dict(data or {})
        names = {f.name for f in dataclasses.fields(cls)}
        bad = sorted(set(data) - names)
        if bad:
            raise ValueError(f"unknown solver setting(s): {', '.join(bad)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# Newtonian volume potential of the domain


def newton_potential(domain: StarDomain, a, alpha=None, quad: Quadrature | None = None) -> float:
    """``D^alpha`` of ``N(a) = int_Omega Gamma(a, y) dy`` for a point ``a`` off the boundary.

    Uses the divergence theorem: the value is
    ``-(2 c_n)^-1 int (y - a).nu |y - a|^(2-n) dS`` and each derivative
    ``D^(beta + e_j) N = -int D_a^beta Gamma(a, y) nu_j dS``.
    """
    n = domain.n
    k = kernel(n)
    a = np.asarray(a, dtype=float)
    alpha = zero_index(n) if alpha is None else tuple(alpha)
    quad = domain.surface_quadrature(40) if quad is None else quad
    y, w, nu = quad.nodes, quad.weights, quad.normals
    if sum(alpha) == 0:
        r = y - a
        f = np.einsum("ij,ij->i", r, nu) * np.einsum("ij,ij->i", r, r) ** ((2.0 - n) / 2)
        return float(-(w @ f) / (2.0 * k.c_n))
    j = axes_of(alpha)[-1]
    rest = list(alpha)
    rest[j] -= 1
    f = k.gamma_deriv(tuple(rest), zero_index(n), a, y) * nu[:, j]
    return float(-(w @ f))


# ---------------------------------------------------------------------------
# least-squares basis


class _Basis:
    """Truncated pseudo-inverse of the collocation matrix for a source set."""

    def __init__(self, kind, sources, nodes, normals, rcond):
        self.kind = kind
        self.sources = sources
        self.nodes = nodes
        self.normals = normals
        n = sources.shape[1]
        self.k = kernel(n)
        A = self.matrix(nodes, normals)
        self.scale = 1.0 / np.linalg.norm(A, axis=0)
        U, s, Vt = np.linalg.svd(A * self.scale, full_matrices=False)
        keep = s > rcond * s[0]
        self.rank = int(keep.sum())
        self.cond = float(s[0] / s[keep][-1])
        self._U = U[:, keep]
        self._sinv = 1.0 / s[keep]
        self._V = Vt[keep].T

    def matrix(self, nodes, normals):
        if self.kind == DIRICHLET:
            return self.k.gamma(nodes[:, None, :], self.sources[None, :, :])
        n = nodes.shape[1]
        out = 0.0
        for i in range(n):
            out = out + normals[:, i, None] * self.k.gamma_deriv(
                multi_index(n, i), zero_index(n), nodes[:, None, :], self.sources[None, :, :]
            )
        return out

    def solve(self, rhs):
        """Coefficients (sources x columns) for data columns ``rhs``."""
        return (self._V * self._sinv) @ (self._U.T @ rhs) * self.scale[:, None]


# ---------------------------------------------------------------------------
# correction for one pole


@dataclass(frozen=True)
class ImageTerm:
    """``sign * Gamma(xbar(x), y)`` with ``xbar(x) = anchor + J (x - anchor)``."""

    anchor: np.ndarray
    J: np.ndarray
    sign: float

    def point(self, x):
        return self.anchor + (np.asarray(x, dtype=float) - self.anchor) @ self.J.T


def _pullback(T, J, k):
    """Contract the first ``k`` derivative axes of ``T`` (after the sample axis) with ``J``."""
    for ax in range(k):
        T = np.moveaxis(np.tensordot(T, J, axes=([1 + ax], [0])), -1, 1 + ax)
    return T


def _image_deriv(image, x, y, alpha, beta):
    """``D_x^alpha D_y^beta`` of ``Gamma(xbar(x), y)``."""
    n = len(alpha)
    k = kernel(n)
    xb = image.point(x)
    ka, kb = sum(alpha), sum(beta)
    y = np.atleast_2d(y)
    T = k.gamma_tensor(xb, y, ka, kb)  # (M, n^ka, n^kb)
    T = T.reshape((y.shape[0],) + (n,) * (ka + kb))
    T = _pullback(T, image.J, ka)
    idx = axes_of(alpha) + axes_of(beta)
    return T[(slice(None),) + idx]


@dataclass(frozen=True)
class Correction:
    """Collocation representation of ``h(x, .)`` and its x-derivatives at one pole.

    ``coeffs[alpha]`` and ``mu[alpha]`` are ``D_x^alpha`` of the source
    coefficients and of the mean offset, for ``|alpha| <= 2``.
    """

    kind: str
    pole: np.ndarray
    sources: np.ndarray = field(repr=False)
    coeffs: dict = field(repr=False)
    mu: dict = field(repr=False)
    image: ImageTerm | None
    residual: float
    relative_residual: float
    tolerance: float
    rank: int
    near: bool
    volume: float
    particular: bool = False
    mean_rule: Quadrature | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.relative_residual <= self.tolerance

    def value(self, y, alpha=None, beta=None) -> np.ndarray:
        """``D_x^alpha D_y^beta h(x, y)`` at the pole for points ``y``."""
        n = self.pole.shape[0]
        alpha = zero_index(n) if alpha is None else tuple(int(a) for a in alpha)
        beta = zero_index(n) if beta is None else tuple(int(b) for b in beta)
        if sum(alpha) > MAX_POLE_ORDER:
            raise ValueError(f"x-derivative order above {MAX_POLE_ORDER} is not stored")
        if sum(alpha) + sum(beta) > 3:
            raise ValueError("total derivative order above 3 is unsupported")
        y = np.asarray(y, dtype=float)
        shape = y.shape[:-1]
        yy = y.reshape(-1, n)
        k = kernel(n)
        out = np.empty(yy.shape[0])
        for lo in range(0, yy.shape[0], _CHUNK):
            B = k.gamma_deriv(beta, zero_index(n), yy[lo : lo + _CHUNK, None, :], self.sources[None, :, :])
            out[lo : lo + _CHUNK] = B @ self.coeffs[alpha]
        if self.image is not None:
            out = out + self.image.sign * _image_deriv(self.image, self.pole, yy, alpha, beta)
        if sum(beta) == 0:
            out = out + self.mu[alpha]
        if self.particular and sum(alpha) == 0:
            out = out + _particular(yy, beta, self.volume)
        return out.reshape(shape)


def _particular(y, beta, volume):
    """Derivatives of ``-|y|^2 / (2 n |Omega|)``."""
    n = y.shape[1]
    c = -1.0 / (2.0 * n * volume)
    b = sum(beta)
    if b == 0:
        return c * np.einsum("ij,ij->i", y, y)
    if b == 1:
        return 2.0 * c * y[:, axes_of(beta)[0]]
    if b == 2:
        ax = axes_of(beta)
        return np.full(y.shape[0], 2.0 * c if ax[0] == ax[1] else 0.0)
    return np.zeros(y.shape[0])


# ---------------------------------------------------------------------------
# evaluator


class GreenFunction:
    """Green's function ``G_D`` or ``G_N`` of a domain with a per-pole cache.

    The cache is guarded by a lock; corrections are immutable once built, so
    evaluations for distinct poles may run concurrently.
    """

    def __init__(self, domain: StarDomain, kind: str, settings: SolverSettings | None = None):
        self.domain = domain
        self.kind = normalize_kind(kind)
        self.settings = SolverSettings() if settings is None else settings
        self.n = domain.n
        self.k = kernel(self.n)
        self._lock = threading.Lock()
        self._cache: dict[bytes, Correction] = {}
        self._global = None
        self._global_means = None
        self._surface = None
        self._means: dict[tuple, float] = {}
        self.volume = domain.volume

    def __repr__(self):
        return f"GreenFunction({self.domain!r}, {self.kind!r})"

    # shared pieces ---------------------------------------------------------
    @property
    def surface_rule(self) -> Quadrature:
        if self._surface is None:
            self._surface = self.domain.surface_quadrature(self.settings.surface_order)
        return self._surface

    def _global_basis(self):
        with self._lock:
            if self._global is None:
                s = self.settings
                src = s.dilation * self.domain.boundary_point(uniform_directions(self.n, s.m))
                nodes, nu = self._boundary_nodes(uniform_directions(self.n, int(round(s.oversample * s.m))))
                self._global = _Basis(self.kind, src, nodes, nu, s.rcond)
                if self.kind == NEUMANN:
                    self._global_means = self._source_means(src, self.surface_rule)
            return self._global, self._global_means

    def _boundary_nodes(self, om):
        b = self.domain.boundary_point(om)
        return b, self.domain.normal(b)

    def _source_means(self, sources, quad):
        return np.array([newton_potential(self.domain, q, quad=quad) for q in sources]) / self.volume

    def is_near(self, x) -> bool:
        return self.distance(x) < self.settings.near_fraction * self.domain.diameter

    def distance(self, x) -> float:
        return self.domain.nearest_boundary_point(x).distance

    # construction -----------------------------------------------------------
    def correction(self, x) -> Correction:
        x = np.ascontiguousarray(x, dtype=float)
        key = x.tobytes()
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        corr = self._build(x)
        with self._lock:
            return self._cache.setdefault(key, corr)

    def _build(self, x) -> Correction:
        dom = self.domain
        s = self.settings
        if not dom.contains(x):
            raise ValueError("pole must lie inside the domain")
        near = dom.nearest_boundary_point(x)
        if near.distance <= 0.0:
            raise ValueError("pole lies on the boundary")
        gbasis, gmeans = self._global_basis()
        image = None
        if near.distance < s.near_fraction * dom.diameter and near.unique:
            basis, means, image, graded = self._local_basis(x, near)
        else:
            basis, means, graded = gbasis, gmeans, None

        alphas = indices_up_to(self.n, MAX_POLE_ORDER)
        rhs = np.stack([self._data(x, a, basis.nodes, basis.normals, image) for a in alphas], axis=1)
        C = basis.solve(rhs)
        coeffs = {a: C[:, i] for i, a in enumerate(alphas)}

        fit = basis.matrix(basis.nodes, basis.normals) @ C[:, 0]
        resid = float(np.max(np.abs(fit - rhs[:, 0])))
        scale = float(np.max(np.abs(rhs[:, 0])))

        mu = {a: 0.0 for a in alphas}
        if self.kind == NEUMANN:
            for a in alphas:
                val = -float(means @ coeffs[a])
                if image is not None:
                    val -= image.sign * self._image_mean(x, image, a, graded)
                mu[a] = val
            mu[zero_index(self.n)] -= self._particular_mean()
        return Correction(
            kind=self.kind,
            pole=x.copy(),
            sources=basis.sources,
            coeffs=coeffs,
            mu=mu,
            image=image,
            residual=resid,
            relative_residual=resid / scale if scale > 0 else resid,
            tolerance=s.residual_tol,
            rank=basis.rank,
            near=image is not None,
            volume=self.volume,
            particular=self.kind == NEUMANN,
            mean_rule=graded,
        )

    def _local_basis(self, x, near):
        dom = self.domain
        s = self.settings
        d = near.distance
        zp = near.point
        fr = dom.frame_at(zp)
        nu = fr.normal
        J = np.eye(self.n) - 2.0 * np.outer(nu, nu)
        image = ImageTerm(zp, J, -1.0 if self.kind == DIRICHLET else 1.0) if s.image else None
        xbar = zp + J @ (x - zp)

        shells = []
        rho = 0.5 * d
        shell = uniform_directions(self.n, s.layer_points)
        top = s.layer_top * dom.diameter
        while rho < top:
            p = xbar + rho * shell
            shells.append(p[dom.level(p) > s.layer_margin * rho])
            rho *= 2.0
        gb, gmeans = self._global_basis()
        sources = np.concatenate([gb.sources] + shells)

        om0 = zp / np.linalg.norm(zp)
        R = rotation_to_pole(om0)
        sub = uniform_directions(self.n - 1, s.local_angles) if self.n > 3 else None
        dirs = [np.eye(self.n)[-1]]
        for i, th in enumerate(np.geomspace(s.local_min * d, s.local_max, s.local_rings)):
            if sub is None:
                ph = 2 * np.pi * (np.arange(s.local_angles) + 0.5 * (i % 2)) / s.local_angles
                ring = np.stack([np.cos(ph), np.sin(ph)], axis=-1)
            else:
                ring = sub
            dirs.append(np.concatenate([np.sin(th) * ring, np.full((ring.shape[0], 1), np.cos(th))], axis=-1))
        local = np.concatenate([np.atleast_2d(v) for v in dirs]) @ R
        lnodes, lnu = self._boundary_nodes(local)
        nodes = np.concatenate([gb.nodes, lnodes])
        normals = np.concatenate([gb.normals, lnu])
        basis = _Basis(self.kind, sources, nodes, normals, s.rcond)

        graded = None
        means = None
        if self.kind == NEUMANN:
            graded = dom.graded_surface_quadrature(
                om0, 0.5 * d, order=s.graded_order, azimuth=s.graded_order
            )
            extra = sources[gb.sources.shape[0]:]
            means = np.concatenate([gmeans, self._source_means(extra, graded)])
        return basis, means, image, graded

    def _data(self, x, alpha, nodes, normals, image):
        """``D_x^alpha`` of the boundary data at the collocation nodes."""
        n = self.n
        k = self.k
        if self.kind == DIRICHLET:
            out = -k.gamma_deriv(alpha, zero_index(n), x, nodes)
            if image is not None:
                out = out - image.sign * _image_deriv(image, x, nodes, alpha, zero_index(n))
            return out
        out = np.zeros(nodes.shape[0])
        for i in range(n):
            e = multi_index(n, i)
            g = k.gamma_deriv(alpha, e, x, nodes)
            if image is not None:
                g = g + image.sign * _image_deriv(image, x, nodes, alpha, e)
            out = out - normals[:, i] * g
        if sum(alpha) == 0:
            # normal derivative of the particular solution
            out = out + np.einsum("ij,ij->i", nodes, normals) / (n * self.volume)
        return out

    def _image_mean(self, x, image, alpha, quad):
        """``D_x^alpha`` of the mean of ``Gamma(xbar(x), .)`` over the domain."""
        xb = image.point(x)
        k = sum(alpha)
        n = self.n
        if k == 0:
            return newton_potential(self.domain, xb, quad=quad) / self.volume
        T = np.empty((n,) * k)
        for ax in np.ndindex(*T.shape):
            T[ax] = newton_potential(self.domain, xb, multi_index(n, *ax), quad=quad)
        T = _pullback(T[None], image.J, k)[0]
        return float(T[axes_of(alpha)]) / self.volume

    def _particular_mean(self):
        om, w = sphere_rule(self.n, 48)
        second = w @ self.domain.radius(om) ** (self.n + 2) / (self.n + 2)
        return -second / (2.0 * self.n * self.volume**2)

    # evaluation -------------------------------------------------------------
    def h(self, x, y, alpha=None, beta=None) -> np.ndarray:
        """``D_x^alpha D_y^beta`` of the correction ``h(x, y)``."""
        return self._pairwise(self._h_single, x, y, alpha, beta)

    def green(self, x, y, alpha=None, beta=None) -> np.ndarray:
        """``D_x^alpha D_y^beta G(x, y)``.  ``x`` is one point or matches ``y`` row by row."""
        return self._pairwise(self._green_single, x, y, alpha, beta)

    def _pairwise(self, fn, x, y, alpha, beta):
        n = self.n
        alpha = zero_index(n) if alpha is None else tuple(int(a) for a in alpha)
        beta = zero_index(n) if beta is None else tuple(int(b) for b in beta)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim == 1:
            return fn(x, y, alpha, beta)
        x2 = x.reshape(-1, n)
        y2 = np.broadcast_to(y, x.shape).reshape(-1, n)
        out = np.empty(x2.shape[0])
        for i in range(x2.shape[0]):
            out[i] = fn(x2[i], y2[i], alpha, beta)
        return out.reshape(x.shape[:-1])

    def _h_single(self, x, y, alpha, beta):
        return self.correction(x).value(y, alpha, beta)

    def _green_single(self, x, y, alpha, beta):
        if sum(alpha) > MAX_POLE_ORDER or sum(beta) > 2 or sum(alpha) + sum(beta) > 3:
            raise ValueError("unsupported derivative orders")
        val = self.k.gamma_deriv(alpha, beta, x, y) + self.correction(x).value(y, alpha, beta)
        if self.kind == NEUMANN and sum(beta) == 0:
            val = val - self.gamma_mean(x, alpha)
        return val

    def gamma_mean(self, x, alpha=None) -> float:
        """``D_x^alpha`` of the mean of ``Gamma(x, .)`` over the domain."""
        alpha = zero_index(self.n) if alpha is None else tuple(int(a) for a in alpha)
        key = (np.ascontiguousarray(x, dtype=float).tobytes(), alpha)
        with self._lock:
            hit = self._means.get(key)
        if hit is None:
            hit = newton_potential(self.domain, x, alpha, quad=self._quad_for(x)) / self.volume
            with self._lock:
                self._means[key] = hit
        return hit

    def _quad_for(self, x):
        corr = self.correction(x)
        return self.surface_rule if corr.mean_rule is None else corr.mean_rule

    def boundary_data_residual(self, x, nodes) -> np.ndarray:
        """Boundary condition defect ``G`` (Dirichlet) or ``D_nu G`` (Neumann) at boundary points."""
        nodes = np.asarray(nodes, dtype=float)
        if self.kind == DIRICHLET:
            return self.green(x, nodes)
        nu = self.domain.normal(nodes)
        out = 0.0
        for i in range(self.n):
            out = out + nu[:, i] * self.green(x, nodes, beta=multi_index(self.n, i))
        return out

    def compatibility(self, x, quad: Quadrature | None = None) -> float:
        """Boundary integral of the fitted Neumann data (zero for a solvable problem)."""
        if self.kind != NEUMANN:
            raise ValueError("compatibility applies to the Neumann problem")
        corr = self.correction(x)
        quad = self._quad_for(x) if quad is None else quad
        data = self._data(x, zero_index(self.n), quad.nodes, quad.normals, corr.image)
        return float(quad.weights @ data)

    def volume_rule_at(self, x, order=None) -> Quadrature:
        """Polar volume rule centred at ``x`` (removes the pole singularity)."""
        o = self.settings.volume_order if order is None else order
        return self.domain.volume_quadrature(o, center=x)

    def lp_norm(self, x, p: float, order=None) -> float:
        quad = self.volume_rule_at(x, order)
        g = self.green(x, quad.nodes)
        return float(quad.weights @ np.abs(g) ** p) ** (1.0 / p)


def build_correction(domain: StarDomain, kind: str, x, settings: SolverSettings | None = None) -> Correction:
    return GreenFunction(domain, kind, settings).correction(x)


# ---------------------------------------------------------------------------
# representation formulas


@dataclass(frozen=True)
class TestFunction:
    """Smooth function with gradient and Laplacian, used to exercise representations."""

    __test__ = False  # not a pytest class

    name: str
    f: callable = field(repr=False)
    grad: callable = field(repr=False)
    lap: callable = field(repr=False)


def test_function(name: str, n: int = 3, a: float = 0.3, axis: int = 0) -> TestFunction:
    if name == "constant":
        return TestFunction(
            name,
            lambda y: np.ones(np.shape(y)[:-1]),
            lambda y: np.zeros(np.shape(y)),
            lambda y: np.zeros(np.shape(y)[:-1]),
        )
    if name == "coordinate":
        e = np.eye(n)[axis]
        return TestFunction(
            f"coordinate{axis}",
            lambda y: np.asarray(y)[..., axis],
            lambda y: np.broadcast_to(e, np.shape(y)).copy(),
            lambda y: np.zeros(np.shape(y)[:-1]),
        )
    if name == "squared_norm":
        return TestFunction(
            name,
            lambda y: np.einsum("...i,...i->...", y, y),
            lambda y: 2.0 * np.asarray(y),
            lambda y: np.full(np.shape(y)[:-1], 2.0 * n),
        )
    if name == "exponential":
        e = np.eye(n)[axis]
        return TestFunction(
            f"exponential{axis}",
            lambda y: np.exp(a * np.asarray(y)[..., axis]),
            lambda y: a * np.exp(a * np.asarray(y)[..., axis])[..., None] * e,
            lambda y: a * a * np.exp(a * np.asarray(y)[..., axis]),
        )
    raise ValueError(f"unknown test function {name!r}")


test_function.__test__ = False  # keep pytest from collecting the factory


def default_test_functions(n: int = 3) -> list[TestFunction]:
    out = [test_function("constant", n)]
    out += [test_function("coordinate", n, axis=i) for i in range(n)]
    out += [test_function("squared_norm", n), test_function("exponential", n, a=0.3)]
    return out


@dataclass(frozen=True)
class RepresentationResult:
    lhs: float
    surface: float
    volume: float
    mean: float
    scale: float = 0.0

    @property
    def rhs(self) -> float:
        return self.surface + self.volume

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        """Residual over the largest term in the identity or the boundary size of ``u``."""
        scale = max(abs(self.lhs), abs(self.surface), abs(self.volume), abs(self.mean), self.scale)
        return self.residual / scale if scale > 0 else self.residual


def verify_representation(green: GreenFunction, u: TestFunction, x, surface_order=None, volume_order=None):
    """Evaluate both sides of the Green representation of ``u`` at ``x``.

    Dirichlet: ``u(x) = int D_nu G u dS + int G Lap(u) dy``.
    Neumann: ``u(x) - mean(u) = -int G D_nu u dS + int G Lap(u) dy``.
    """
    dom = green.domain
    n = dom.n
    x = np.asarray(x, dtype=float)
    sq = dom.surface_quadrature(surface_order or green.settings.surface_order)
    vq = green.volume_rule_at(x, volume_order)
    lap = u.lap(vq.nodes)
    vol = float(vq.weights @ (green.green(x, vq.nodes) * lap)) if np.any(lap) else 0.0
    ux = float(u.f(x))
    usize = float(np.max(np.abs(u.f(sq.nodes))))
    if green.kind == DIRICHLET:
        dG = sum(sq.normals[:, i] * green.green(x, sq.nodes, beta=multi_index(n, i)) for i in range(n))
        surf = float(sq.weights @ (dG * u.f(sq.nodes)))
        return RepresentationResult(ux, surf, vol, 0.0, usize)
    du = np.einsum("ij,ij->i", u.grad(sq.nodes), sq.normals)
    surf = -float(sq.weights @ (green.green(x, sq.nodes) * du)) if np.any(du) else 0.0
    mean_rule = dom.volume_quadrature(green.settings.volume_order)
    ubar = float(mean_rule.integrate(u.f(mean_rule.nodes)) / dom.volume)
    return RepresentationResult(ux - ubar, surf, vol, ubar, usize)


def uniqueness_probe(
    domain: StarDomain,
    kind: str,
    x,
    first: SolverSettings,
    second: SolverSettings,
    samples: np.ndarray | None = None,
) -> float:
    """Largest difference between Green's functions built with two solver configurations."""
    x = np.asarray(x, dtype=float)
    if samples is None:
        rule = domain.volume_quadrature(8)
        samples = rule.nodes[np.linalg.norm(rule.nodes - x, axis=1) > 1e-3]
    g1 = GreenFunction(domain, kind, first)
    g2 = GreenFunction(domain, kind, second)
    return float(np.max(np.abs(g1.h(x, samples) - g2.h(x, samples))))
