"""Intrinsic-frequency densities and the Cauchy integrals built on them.

The central object is

    D(lam) = int g(w) dw / (lam - i w),       Re lam > 0,

together with its entire continuation across the imaginary axis
(``D(lam) + 2 pi g(-i lam)`` on the left), the boundary values given by the
Sokhotski-Plemelj formulas, and the two constants

    g1 = 1 / (pi H[g'](0)),        g2 = pi g''(0) / 2

that enter the center-manifold reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import integrate

from .errors import ModelAssumptionError, PreconditionError, UnsupportedOperation

NEAR_AXIS = 1e-3
_QUAD = dict(limit=500, epsabs=1e-14, epsrel=1e-12)


@dataclass(frozen=True)
class FrequencyModel:
    """An even, unimodal frequency density with its first two derivatives.

    ``density`` and its derivatives must accept numpy arrays.  When
    ``complex_ok`` is true they also accept complex arguments (needed for the
    continuation of D and for the shifted-contour quadrature).
    """

    kind: str
    density: Callable = field(compare=False)
    d1: Callable = field(compare=False)
    d2: Callable = field(compare=False)
    sigma: float = 1.0
    complex_ok: bool = False
    half_width: float = 12.0

    @property
    def g0(self) -> float:
        return float(self.density(0.0))

    @property
    def gpp0(self) -> float:
        return float(self.d2(0.0))

    @property
    def hilbert_gprime_0(self) -> float:
        return hilbert_transform(self.d1, 0.0)

    def quadrature(self, m: int = 40):
        """Nodes and weights with ``sum(w * f(x)) ~ int f(w) g(w) dw``."""
        if self.kind in ("standard_normal", "normal"):
            x, w = hermegauss(m)
            return self.sigma * x, w / math.sqrt(2.0 * math.pi)
        x, w = sinh_sinh(m, self.half_width)
        return x, w * self.density(x)

    def contour_quadrature(self, m: int = 40, shift: float = 1.0):
        """Quadrature on the line ``Im w = shift`` in the upper half-plane.

        For f analytic in the strip ``0 <= Im w <= shift`` this integrates the
        same ``int f g dw`` as :meth:`quadrature` (Cauchy's theorem), but the
        free rotation ``exp(i w t)`` is damped on the nodes.
        """
        if shift == 0.0:
            x, w = self.quadrature(m)
            return x.astype(complex), w.astype(complex)
        if not self.complex_ok:
            raise UnsupportedOperation(f"{self.kind} density has no complex continuation")
        if self.kind in ("standard_normal", "normal"):
            s, w = self.quadrature(m)
            ratio = np.exp(-(2j * shift * s - shift ** 2) / (2.0 * self.sigma ** 2))
            return s + 1j * shift, w * ratio
        x, w = sinh_sinh(m, self.half_width)
        z = x + 1j * shift
        return z, w * self.density(z)


def _normal_parts(sigma: float):
    c = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    s2 = sigma * sigma

    def g(w):
        w = np.asarray(w)
        return c * np.exp(-w * w / (2.0 * s2))

    def g1(w):
        w = np.asarray(w)
        return -w / s2 * g(w)

    def g2(w):
        w = np.asarray(w)
        return (w * w / s2 - 1.0) / s2 * g(w)

    return g, g1, g2


def standard_normal() -> FrequencyModel:
    g, d1, d2 = _normal_parts(1.0)
    return FrequencyModel("standard_normal", g, d1, d2, 1.0, True, 12.0)


def normal(sigma: float) -> FrequencyModel:
    if sigma <= 0:
        raise ModelAssumptionError(f"sigma={sigma} must be positive")
    g, d1, d2 = _normal_parts(float(sigma))
    return FrequencyModel("normal", g, d1, d2, float(sigma), True, 12.0 * sigma)


def custom(density: Callable, d1: Callable, d2: Callable, *, complex_ok: bool = False,
           half_width: float = 12.0, check: bool = True) -> FrequencyModel:
    """User-supplied density; evenness, unimodality and normalisation are checked."""
    model = FrequencyModel("custom", density, d1, d2, 1.0, complex_ok, float(half_width))
    if check:
        validate(model)
    model = FrequencyModel("custom", density, d1, d2, math.sqrt(second_moment(model)),
                           complex_ok, float(half_width))
    return model


def validate(model: FrequencyModel, nodes: int = 201) -> None:
    """Raise :class:`ModelAssumptionError` if g is not even, unimodal and normalised."""
    w = np.linspace(0.0, model.half_width, nodes)
    gp, gm = model.density(w), model.density(-w)
    if np.any(gp < 0):
        raise ModelAssumptionError("density takes negative values")
    if not np.allclose(gp, gm, rtol=1e-12, atol=1e-15):
        raise ModelAssumptionError("density is not even")
    if np.any(np.diff(gp) > 1e-15):
        raise ModelAssumptionError("density is not unimodal at 0")
    if abs(float(model.d1(0.0))) > 1e-12:
        raise ModelAssumptionError("g'(0) must vanish")
    x, wts = model.quadrature(80)
    mass = float(np.sum(wts))
    if abs(mass - 1.0) > 1e-10:
        raise ModelAssumptionError(f"density integrates to {mass}, not 1")


def second_moment(model: FrequencyModel) -> float:
    x, w = model.quadrature(80)
    return float(np.sum(w * x * x))


def sinh_sinh(m: int, half_width: float):
    """Sinh-sinh (double exponential) rule on the real line, truncated at ``|x| <= L``.

    Nodes are densest near the origin, where a unimodal density keeps its mass.
    """
    tmax = math.asinh(2.0 / math.pi * math.asinh(half_width))
    t = np.linspace(-tmax, tmax, m)
    h = t[1] - t[0]
    u = 0.5 * math.pi * np.sinh(t)
    return np.sinh(u), h * 0.5 * math.pi * np.cosh(t) * np.cosh(u)


def _quad_halfline(func, scale: float, x0: float = 0.0) -> float:
    """int_0^inf func(t) dt for integrands with structure at ``t ~ x0`` and ``t ~ scale``."""
    edges = [0.0]
    if 0.0 < x0 < scale:
        edges += list(np.geomspace(x0, scale, max(2, int(np.log10(scale / x0)) + 2))[:-1])
    edges += [scale, 10 * scale, 40 * scale]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(func, a, b, **_QUAD)[0]
    total += integrate.quad(func, edges[-1], np.inf, **_QUAD)[0]
    return total


def cauchy_integral(f: Callable, lam: complex, side: int = 1, scale: float = 1.0) -> complex:
    """``F(lam) = int f(w) dw / (lam - i w)`` for ``Re lam != 0``.

    On the axis (``Re lam == 0``) the boundary value from the half-plane
    ``side`` (+1 right, -1 left) is returned, i.e. the Sokhotski-Plemelj
    limit ``+-pi f(y) - i pi H[f](y)``.  ``scale`` is the width of f.
    """
    lam = complex(lam)
    x, y = lam.real, lam.imag
    if abs(x) >= NEAR_AXIS:
        return complex(_direct(f, x, y, scale, real=True), _direct(f, x, y, scale, real=False))
    sgn = side if x == 0.0 else (1 if x > 0 else -1)
    fy = float(f(y))
    re = sgn * math.pi * fy
    if x != 0.0:
        re += _quad_halfline(lambda t: (f(y + t) + f(y - t) - 2.0 * fy) * x / (x * x + t * t),
                             scale, abs(x))
    im = _quad_halfline(lambda t: (f(y + t) - f(y - t)) * t / (x * x + t * t), scale, abs(x))
    return complex(re, im)


def _direct(f, x, y, scale, real):
    if real:
        kern = lambda w: f(w) * x / (x * x + (y - w) ** 2)
    else:
        kern = lambda w: -f(w) * (y - w) / (x * x + (y - w) ** 2)
    width = abs(x)
    cuts = sorted([y - 40 * scale, y - width, y + width, y + 40 * scale])
    out = integrate.quad(kern, -np.inf, cuts[0], **_QUAD)[0]
    for a, b in zip(cuts[:-1], cuts[1:]):
        out += integrate.quad(kern, a, b, points=[y] if a < y < b else None, **_QUAD)[0]
    out += integrate.quad(kern, cuts[-1], np.inf, **_QUAD)[0]
    return out


def hilbert_transform(f: Callable, y: float, eps: float = 1e-2) -> float:
    """``H[f](y) = pi^-1 PV int f(s) / (y - s) ds``.

    The principal value is taken by pairing ``y + t`` with ``y - t`` and
    Richardson-extrapolating the excluded radius ``eps -> 0``.
    """
    pair = lambda t: (f(y + t) - f(y - t)) / t

    tail = _quad_halfline(lambda t: pair(t + 1.0), 1.0)

    def truncated(e):
        return integrate.quad(pair, e, 1.0, **_QUAD)[0] + tail

    e = np.array([eps, eps / 2, eps / 4])
    vals = np.array([truncated(v) for v in e])
    # missing piece int_0^e behaves like a1 e + a3 e^3
    a = np.column_stack([np.ones(3), e, e ** 3])
    limit = np.linalg.solve(a, vals)[0]
    return -limit / math.pi


def d_integral(model: FrequencyModel, lam: complex) -> complex:
    """D(lam) for Re lam > 0."""
    lam = complex(lam)
    if lam.real <= 0:
        raise PreconditionError("D is defined by the integral only for Re lam > 0; "
                                "use d_continuation")
    return cauchy_integral(model.density, lam, scale=model.sigma)


def d_continuation(model: FrequencyModel, lam: complex) -> complex:
    """Entire continuation of D: D on the right, its right limit on the axis,
    ``D(lam) + 2 pi g(-i lam)`` on the left."""
    lam = complex(lam)
    if lam.real > 0:
        return cauchy_integral(model.density, lam, scale=model.sigma)
    if lam.real == 0:
        return cauchy_integral(model.density, lam, side=1, scale=model.sigma)
    if not model.complex_ok:
        raise UnsupportedOperation(f"{model.kind} density has no complex continuation")
    return cauchy_integral(model.density, lam, scale=model.sigma) \
        + 2.0 * math.pi * complex(model.density(-1j * lam))


def d_continuation_derivative(model: FrequencyModel, lam: complex) -> complex:
    """Derivative of the continued D.

    Integrating by parts, ``D'(lam) = -i int g'(w) dw / (lam - i w)``; the
    same continuation rule applies with g' in place of g.
    """
    lam = complex(lam)
    if lam.real >= 0:
        return -1j * cauchy_integral(model.d1, lam, side=1, scale=model.sigma)
    if not model.complex_ok:
        raise UnsupportedOperation(f"{model.kind} density has no complex continuation")
    inner = cauchy_integral(model.d1, lam, scale=model.sigma) \
        + 2.0 * math.pi * complex(model.d1(-1j * lam))
    return -1j * inner


def g1(model: FrequencyModel) -> float:
    """``1 / (pi H[g'](0))``; equals ``-1 / lim D'(0+)``."""
    h = model.hilbert_gprime_0
    if h <= 0:
        raise ModelAssumptionError(f"H[g'](0) = {h} is not positive")
    return 1.0 / (math.pi * h)


def g2(model: FrequencyModel) -> float:
    """``pi g''(0) / 2`` (negative for a unimodal density)."""
    gpp = model.gpp0
    if gpp >= 0:
        raise ModelAssumptionError(f"g''(0) = {gpp} must be negative")
    return math.pi * gpp / 2.0


def sample_frequencies(model: FrequencyModel, n: int, seed) -> np.ndarray:
    """``n`` iid draws from g, reproducible for a given seed."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if n == 0:
        return np.empty(0)
    if model.kind in ("standard_normal", "normal"):
        return rng.normal(0.0, model.sigma, n)
    grid = np.linspace(-model.half_width, model.half_width, 20001)
    pdf = model.density(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(n), cdf, grid)
