"""Newtonian potential, its derivatives, and closed-form image Green's functions.

All kernels take points as arrays whose last axis has length ``n`` and
broadcast over the leading axes.  Derivatives are requested with
multi-indices: ``alpha`` acts on the first argument, ``beta`` on the second.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product

import numpy as np

MAX_ORDER = 3


def sphere_area(n: int) -> float:
    """Area of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def multi_index(n: int, *axes: int) -> tuple[int, ...]:
    """Multi-index with one unit per listed axis, e.g. ``multi_index(3, 0, 0)``."""
    out = [0] * n
    for a in axes:
        out[a] += 1
    return tuple(out)


def zero_index(n: int) -> tuple[int, ...]:
    return (0,) * n


def indices_of_order(n: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices of length ``n`` with ``|alpha| == order``, in a fixed order."""
    out = []
    for combo in product(range(order + 1), repeat=n):
        if sum(combo) == order:
            out.append(tuple(combo))
    return sorted(out, reverse=True)


def indices_up_to(n: int, order: int) -> list[tuple[int, ...]]:
    out = []
    for k in range(order + 1):
        out.extend(indices_of_order(n, k))
    return out


def axes_of(index) -> tuple[int, ...]:
    """Expand a multi-index into the list of differentiated axes."""
    return tuple(a for a, k in enumerate(index) for _ in range(int(k)))


def add_index(a, b) -> tuple[int, ...]:
    return tuple(int(i) + int(j) for i, j in zip(a, b))


def _check_index(index, n):
    index = tuple(int(k) for k in index)
    if len(index) != n or any(k < 0 for k in index):
        raise ValueError(f"invalid multi-index {index} for dimension {n}")
    return index


def radial_derivative(r: np.ndarray, axes: tuple[int, ...], p: float) -> np.ndarray:
    """Partial derivatives of ``|r|^p`` along ``axes`` (at most three).

    The formulas are the closed-form derivatives of a power of the radius;
    every term is a Kronecker-delta pattern times a power of ``|r|``.
    """
    r = np.asarray(r, dtype=float)
    s2 = np.einsum("...i,...i->...", r, r)
    k = len(axes)
    if k == 0:
        return s2 ** (p / 2)
    if k == 1:
        (i,) = axes
        return p * s2 ** ((p - 2) / 2) * r[..., i]
    if k == 2:
        i, j = axes
        out = p * (p - 2) * s2 ** ((p - 4) / 2) * r[..., i] * r[..., j]
        if i == j:
            out = out + p * s2 ** ((p - 2) / 2)
        return out
    if k == 3:
        i, j, l = axes
        c1 = p * (p - 2)
        out = c1 * (p - 4) * s2 ** ((p - 6) / 2) * r[..., i] * r[..., j] * r[..., l]
        lower = np.zeros_like(s2)
        if i == j:
            lower = lower + r[..., l]
        if i == l:
            lower = lower + r[..., j]
        if j == l:
            lower = lower + r[..., i]
        return out + c1 * s2 ** ((p - 4) / 2) * lower
    raise ValueError(f"derivative order {k} exceeds the supported maximum {MAX_ORDER}")


class KernelEval:
    """Newtonian potential ``-|x-y|^(2-n) / c_n`` in dimension ``n``."""

    def __init__(self, n: int):
        if n < 3:
            raise ValueError("the Newtonian potential is implemented for n >= 3")
        self.n = int(n)
        self.c_n = sphere_area(self.n)

    def __repr__(self):
        return f"KernelEval(n={self.n})"

    def gamma(self, x, y) -> np.ndarray:
        return self.gamma_deriv(zero_index(self.n), zero_index(self.n), x, y)

    def gamma_deriv(self, alpha, beta, x, y) -> np.ndarray:
        """``D_x^alpha D_y^beta`` of the potential at ``(x, y)``."""
        n = self.n
        alpha = _check_index(alpha, n)
        beta = _check_index(beta, n)
        order = sum(alpha) + sum(beta)
        if order > MAX_ORDER:
            raise ValueError(f"total derivative order {order} exceeds {MAX_ORDER}")
        r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        if np.any(np.einsum("...i,...i->...", r, r) == 0.0):
            raise ValueError("coincident points: the potential is singular on the diagonal")
        sign = -1.0 if sum(beta) % 2 else 1.0
        axes = axes_of(add_index(alpha, beta))
        return (-sign / self.c_n) * radial_derivative(r, axes, 2.0 - n)

    def gamma_tensor(self, x, y, order_x: int, order_y: int = 0) -> np.ndarray:
        """Full derivative tensor with ``order_x`` axes on ``x`` then ``order_y`` on ``y``.

        Shape is ``broadcast_shape + (n,) * (order_x + order_y)``.
        """
        n = self.n
        if order_x + order_y > MAX_ORDER:
            raise ValueError("total derivative order exceeds the supported maximum")
        r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        k = order_x + order_y
        sign = -1.0 if order_y % 2 else 1.0
        shape = r.shape[:-1] + (n,) * k
        out = np.empty(shape)
        for axes in product(range(n), repeat=k):
            out[(Ellipsis,) + axes] = radial_derivative(r, axes, 2.0 - n)
        return (-sign / self.c_n) * out


@lru_cache(maxsize=None)
def kernel(n: int) -> KernelEval:
    return KernelEval(n)


def gamma(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return kernel(x.shape[-1]).gamma(x, y)


def gamma_deriv(alpha, beta, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return kernel(x.shape[-1]).gamma_deriv(alpha, beta, x, y)


DIRICHLET = "dirichlet"
NEUMANN = "neumann"


def normalize_kind(kind: str) -> str:
    k = str(kind).strip().lower()
    if k in ("d", "dirichlet"):
        return DIRICHLET
    if k in ("n", "neumann"):
        return NEUMANN
    raise ValueError(f"unknown boundary condition kind {kind!r}")


class HalfSpaceGreen:
    """Image Green's functions of the lower half-space ``{x_n < 0}``.

    Dirichlet subtracts the reflected potential, Neumann adds it.
    """

    def __init__(self, kind: str, n: int = 3):
        self.kind = normalize_kind(kind)
        self.n = int(n)
        self.k = kernel(self.n)
        self._sign = -1.0 if self.kind == DIRICHLET else 1.0
        self._flip = np.ones(self.n)
        self._flip[-1] = -1.0

    def _check(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p[..., -1] >= 0.0):
            raise ValueError("points must lie in the open lower half-space")
        return p

    def reflect(self, y):
        return np.asarray(y, dtype=float) * self._flip

    def correction(self, x, y, alpha=None, beta=None) -> np.ndarray:
        """The image term ``-/+ Gamma(x, y_reflected)`` and its derivatives."""
        n = self.n
        alpha = zero_index(n) if alpha is None else alpha
        beta = zero_index(n) if beta is None else beta
        x = self._check(x)
        y = self._check(y)
        flips = np.prod(self._flip ** np.asarray(beta))
        return self._sign * flips * self.k.gamma_deriv(alpha, beta, x, self.reflect(y))

    def green(self, x, y, alpha=None, beta=None) -> np.ndarray:
        n = self.n
        alpha = zero_index(n) if alpha is None else alpha
        beta = zero_index(n) if beta is None else beta
        x = self._check(x)
        y = self._check(y)
        return self.k.gamma_deriv(alpha, beta, x, y) + self.correction(x, y, alpha, beta)


def halfspace_green(kind: str, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return HalfSpaceGreen(kind, x.shape[-1]).green(x, y)


class KelvinBallGreen:
    """Dirichlet Green's function of the open unit ball via the Kelvin image.

    The correction is ``|(|y| x - y/|y|)|^(2-n) / c_n``; written through
    ``D(x, y) = |x|^2 |y|^2 - 2 x.y + 1`` it is a polynomial composed with a
    power, so derivatives follow from the chain rule.
    """

    kind = DIRICHLET

    def __init__(self, n: int = 3):
        self.n = int(n)
        self.k = kernel(self.n)

    def _check(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(np.einsum("...i,...i->...", p, p) >= 1.0):
            raise ValueError("points must lie in the open unit ball")
        return p

    @staticmethod
    def _poly_derivs(x, y, axes):
        """Derivative of D along ``axes`` in the stacked variable ``(x, y)``."""
        n = x.shape[-1]
        xx = np.einsum("...i,...i->...", x, x)
        yy = np.einsum("...i,...i->...", y, y)
        if len(axes) == 0:
            return xx * yy - 2.0 * np.einsum("...i,...i->...", x, y) + 1.0
        var = [(a // n, a % n) for a in axes]  # (0 for x / 1 for y, component)
        if len(axes) == 1:
            (w, i), = var
            if w == 0:
                return 2.0 * x[..., i] * yy - 2.0 * y[..., i]
            return 2.0 * y[..., i] * xx - 2.0 * x[..., i]
        if len(axes) == 2:
            (w1, i), (w2, j) = sorted(var)
            delta = 1.0 if i == j else 0.0
            if w1 == 0 and w2 == 0:
                return np.broadcast_to(2.0 * delta * yy, xx.shape).copy()
            if w1 == 1 and w2 == 1:
                return np.broadcast_to(2.0 * delta * xx, xx.shape).copy()
            return 4.0 * x[..., i] * y[..., j] - 2.0 * delta
        if len(axes) == 3:
            ws = sorted(var)
            nx = sum(1 for w, _ in ws if w == 0)
            if nx in (0, 3):
                return np.zeros_like(xx)
            if nx == 2:
                (_, i), (_, j), (_, l) = ws
                return 4.0 * (1.0 if i == j else 0.0) * y[..., l]
            (_, i), (_, j), (_, l) = ws
            return 4.0 * x[..., i] * (1.0 if j == l else 0.0)
        raise ValueError("derivative order exceeds the supported maximum")

    def correction(self, x, y, alpha=None, beta=None) -> np.ndarray:
        n = self.n
        alpha = zero_index(n) if alpha is None else _check_index(alpha, n)
        beta = zero_index(n) if beta is None else _check_index(beta, n)
        x = self._check(x)
        y = self._check(y)
        x, y = np.broadcast_arrays(x, y)
        axes = tuple(axes_of(alpha)) + tuple(n + a for a in axes_of(beta))
        if len(axes) > MAX_ORDER:
            raise ValueError("derivative order exceeds the supported maximum")
        p = (2.0 - n) / 2.0
        D = self._poly_derivs(x, y, ())

        def phi(k):
            c = 1.0
            for j in range(k):
                c *= p - j
            return c * D ** (p - k)

        d = lambda *a: self._poly_derivs(x, y, a)  # noqa: E731
        k = len(axes)
        if k == 0:
            val = phi(0)
        elif k == 1:
            val = phi(1) * d(*axes)
        elif k == 2:
            a, b = axes
            val = phi(2) * d(a) * d(b) + phi(1) * d(a, b)
        else:
            a, b, c = axes
            val = (
                phi(3) * d(a) * d(b) * d(c)
                + phi(2) * (d(a, b) * d(c) + d(a, c) * d(b) + d(b, c) * d(a))
                + phi(1) * d(a, b, c)
            )
        return val / self.k.c_n

    def green(self, x, y, alpha=None, beta=None) -> np.ndarray:
        n = self.n
        alpha = zero_index(n) if alpha is None else alpha
        beta = zero_index(n) if beta is None else beta
        x = self._check(x)
        y = self._check(y)
        return self.k.gamma_deriv(alpha, beta, x, y) + self.correction(x, y, alpha, beta)


def ball_dirichlet_green(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return KelvinBallGreen(x.shape[-1]).green(x, y)
