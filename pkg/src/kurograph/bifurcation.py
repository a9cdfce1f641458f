"""Center-manifold amplitude predictions, coupling sweeps and square-root fits.

Simple top eigenvalue (slow equation ``dh/dt = p1 h (eps + q C(x) |h|^2)``):

    |h_inf(x)| = g(0)^2 pi^{3/2} / sqrt(-g''(0)) * mu^{3/2} / sqrt(C(x)) * sqrt(K - Kc)

Double top eigenvalue with a conjugate Fourier pair ``exp(+-2 pi i m x)``:

    |h_inf| = sqrt((K - Kc) / p2),    p2 = -2 g2 (Kc / 2)^4 mu
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import dynamics, meanfield
from .criticality import threshold
from .errors import DomainError, NumericalError, PreconditionError, UnsupportedOperation
from .freqdist import FrequencyModel, g1 as _g1, g2 as _g2, sample_frequencies
from .graphon import MIDPOINT, GraphonKernel, sample_weight_matrix
from .spectral import SpectralDecomposition

ZERO_TOL = 1e-8


@dataclass
class AmplitudePrediction:
    """``|h_inf(x)| = coefficient(x) * sqrt(K - kc)``."""

    kc: float
    coefficient: np.ndarray
    case: str  # "simple" or "double"
    constants: dict = field(default_factory=dict)
    K: Optional[float] = None
    notes: str = ""

    def at(self, K: float) -> np.ndarray:
        if K < self.kc:
            raise PreconditionError(f"K={K} below the critical coupling {self.kc}")
        return self.coefficient * math.sqrt(K - self.kc)

    @property
    def amplitude(self) -> Optional[np.ndarray]:
        return None if self.K is None else self.at(self.K)

    def mean_amplitude(self, K: float) -> float:
        return float(np.mean(self.at(K)))


def c_field(w: np.ndarray) -> np.ndarray:
    """``C = Pi(|w|^2 w) / (|w|^2 w)`` with ``Pi f = <f, w> w / <w, w>`` on the grid."""
    w = np.asarray(w)
    bad = np.flatnonzero(np.abs(w) <= ZERO_TOL * max(np.max(np.abs(w)), 1e-300))
    if bad.size:
        raise DomainError(f"C(x) undefined: w_max vanishes at nodes {bad.tolist()}")
    f = np.abs(w) ** 2 * w
    proj = np.vdot(w, f) / np.vdot(w, w) * w
    c = proj / f
    return c.real if np.isrealobj(w) or np.allclose(c.imag, 0.0, atol=1e-14) else c


def compute_C(decomp: SpectralDecomposition) -> np.ndarray:
    if decomp.multiplicity_of_max != 1:
        raise PreconditionError(
            f"mu_max has multiplicity {decomp.multiplicity_of_max}; C(x) needs a simple eigenvalue")
    return c_field(decomp.w_max)


def _constants(decomp, model):
    mu = decomp.mu_max
    if not (0 < mu < math.inf):
        raise PreconditionError("no positive eigenvalue")
    kc = threshold(mu, model)
    return mu, kc, dict(g0=model.g0, gpp0=model.gpp0, g1=_g1(model), g2=_g2(model), mu_max=mu, kc=kc)


def predict_amplitude_1d(decomp: SpectralDecomposition, model: FrequencyModel,
                         K: Optional[float] = None) -> AmplitudePrediction:
    if decomp.multiplicity_of_max == 2:
        raise UnsupportedOperation("mu_max is double: use predict_amplitude_2d")
    C = compute_C(decomp)
    mu, kc, const = _constants(decomp, model)
    coeff = model.g0 ** 2 * math.pi ** 1.5 / math.sqrt(-model.gpp0) * mu ** 1.5 / np.sqrt(C)
    const["C"] = C
    const["p1"] = 2 * const["g1"] / (kc ** 2 * mu)
    if K is not None and K < kc:
        raise PreconditionError(f"K={K} below the critical coupling {kc}")
    return AmplitudePrediction(kc, np.asarray(coeff, dtype=float), "simple", const, K)


def amplitude_1d_reduced(decomp: SpectralDecomposition, model: FrequencyModel) -> np.ndarray:
    """The same coefficient written with g2 and Kc: ``sqrt(-8 / (Kc^4 mu g2 C))``."""
    mu, kc, const = _constants(decomp, model)
    C = compute_C(decomp)
    return np.sqrt(-8.0 / (kc ** 4 * mu * const["g2"] * C))


def p2_constant(mu: float, model: FrequencyModel) -> float:
    kc = threshold(mu, model)
    return -2.0 * _g2(model) * (kc / 2.0) ** 4 * mu


def predict_amplitude_2d(decomp: SpectralDecomposition, model: FrequencyModel,
                         K: Optional[float] = None) -> AmplitudePrediction:
    if decomp.multiplicity_of_max != 2:
        raise UnsupportedOperation(f"mu_max has multiplicity {decomp.multiplicity_of_max}, need 2")
    if decomp.fourier_mode is None:
        raise UnsupportedOperation("the double eigenspace is not a conjugate Fourier pair")
    mu, kc, const = _constants(decomp, model)
    p2 = p2_constant(mu, model)
    const.update(p2=p2, p1=2 * const["g1"] / (kc ** 2 * mu), mode=decomp.fourier_mode)
    coeff = np.full(decomp.n, 1.0 / math.sqrt(p2))
    notes = (f"stable: pure modes exp(+-2 pi i {decomp.fourier_mode} x) with |h| = sqrt(eps/p2) "
             f"(winding +-{decomp.fourier_mode}); unstable: mixed state r+ = r- = sqrt(eps/(3 p2))")
    if K is not None and K < kc:
        raise PreconditionError(f"K={K} below the critical coupling {kc}")
    return AmplitudePrediction(kc, coeff, "double", const, K, notes)


def predict_amplitude(decomp: SpectralDecomposition, model: FrequencyModel,
                      K: Optional[float] = None) -> AmplitudePrediction:
    if decomp.multiplicity_of_max == 2:
        return predict_amplitude_2d(decomp, model, K)
    return predict_amplitude_1d(decomp, model, K)


@dataclass
class SqrtFit:
    kc: float
    A: float
    exponent: float
    residual: float


@dataclass
class BranchData:
    K: np.ndarray
    summary: np.ndarray
    engine: str
    fields: List[np.ndarray] = field(default_factory=list, repr=False)
    converged: np.ndarray = None
    fit: Optional[SqrtFit] = None

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        self.summary = np.asarray(self.summary, dtype=float)
        if self.converged is None:
            self.converged = np.ones(self.K.size, dtype=bool)
        if self.K.size > 1 and not np.all(np.diff(self.K) > 0):
            raise DomainError("K values must be strictly increasing")
        if np.any(self.summary < 0):
            raise DomainError("branch summaries must be nonnegative")


def _trailing_mean(t, y, frac=0.2):
    t, y = np.asarray(t), np.asarray(y)
    keep = t >= t[-1] - frac * (t[-1] - t[0])
    return float(np.mean(y[keep]))


def sweep(kernel: GraphonKernel, model: FrequencyModel, K_grid: Sequence[float],
          engine: str = "galerkin", *, J: int = 8, M: int = 40, n: int = 64,
          shift: float = 1.0, closure: str = "truncate", dt: Optional[float] = None,
          T: Optional[float] = None, tol: float = 1e-6, seed: int = 0,
          seed_amplitude: float = 1e-3, stride: int = 10, progress=None) -> BranchData:
    """Warm-started K sweep; summary = trailing-20% time average of mean_x |h|.

    ``engine="galerkin"`` runs the hierarchy to stationarity (T is the cap);
    ``engine="finite-n"`` integrates n oscillators for time T per point.
    """
    K_grid = np.asarray(K_grid, dtype=float)
    if K_grid.size == 0 or np.any(np.diff(K_grid) <= 0):
        raise DomainError("K grid must be non-empty and strictly increasing")
    from .spectral import nystrom_eigs

    summaries, fields, ok = [], [], []
    if engine == "galerkin":
        grid = meanfield.make_grid(kernel, model, M, n, shift)
        mode = nystrom_eigs(sample_weight_matrix(kernel, n, MIDPOINT), 2).w_max
        state = meanfield.coherent_state(grid, J, seed_amplitude, mode)
        for K in K_grid:
            try:
                res = meanfield.stationary_amplitude(
                    K, kernel, model, J, tol, grid=grid, closure=closure, dt=dt or 0.05,
                    T_max=T or 3000.0, start=state)
            except NumericalError:
                summaries.append(0.0)
                fields.append(np.full(n, np.nan))
                ok.append(False)
                continue
            s = res.series
            summaries.append(_trailing_mean(s.t, s.mean_abs_h))
            fields.append(res.h)
            ok.append(res.converged)
            # keep a seed alive so later points above threshold can grow again
            state = res.state if res.mean_abs_h > 1e-9 else meanfield.coherent_state(
                grid, J, seed_amplitude, mode)
            if progress:
                progress(K, summaries[-1])
    elif engine == "finite-n":
        matrix = sample_weight_matrix(kernel, n, MIDPOINT)
        op = dynamics.Coupling(matrix)
        streams = np.random.SeedSequence(seed).spawn(2)
        omega = sample_frequencies(model, n, streams[0])
        mode = nystrom_eigs(matrix, 2).w_max
        theta = dynamics.coherent_seed(max(seed_amplitude, 1e-2), mode, np.random.default_rng(streams[1]))
        ens = dynamics.OscillatorEnsemble(theta, omega, matrix.grid)
        dt, T = dt or 1e-2, T or 200.0
        for K in K_grid:
            ts, hs = [], []
            obs = lambda t, th: (ts.append(t), hs.append(np.mean(np.abs(op(np.exp(1j * th))))))
            try:
                ens = dynamics.integrate(dynamics.replace(ens, t=0.0), K, op, dt, T, stride, obs)
            except NumericalError:
                summaries.append(0.0)
                fields.append(np.full(n, np.nan))
                ok.append(False)
                continue
            summaries.append(_trailing_mean(ts, hs))
            fields.append(op(np.exp(1j * ens.theta)))
            ok.append(True)
            if progress:
                progress(K, summaries[-1])
    else:
        raise DomainError(f"unknown engine {engine!r}")
    return BranchData(K_grid, np.asarray(summaries), engine, fields, np.asarray(ok))


def _loglin(K, y, kc):
    X = np.log(K - kc)
    Y = np.log(y)
    b, a = np.polyfit(X, Y, 1)
    res = Y - (a + b * X)
    return a, b, float(res @ res)


def fit_sqrt_law(K, y=None, window=None, kc: Optional[float] = None) -> SqrtFit:
    """Least squares of log|h| on log(K - kc); kc is profiled unless given.

    ``K`` may be a BranchData (then ``y`` is its summary).  The profile runs
    over a logarithmic grid of offsets below the smallest K, refined by a
    bounded scalar minimization.
    """
    if isinstance(K, BranchData):
        K, y = K.K, K.summary
    K, y = np.asarray(K, float), np.asarray(y, float)
    m = y > 0
    if window is not None:
        m &= (K >= window[0]) & (K <= window[1])
    K, y = K[m], y[m]
    if K.size < 5:
        raise PreconditionError(f"need at least 5 positive points in the window, got {K.size}")
    if np.ptp(K) <= 0:
        raise PreconditionError("degenerate window")
    if kc is not None:
        if kc >= K.min():
            raise PreconditionError("fixed kc must lie below the window")
        a, b, ss = _loglin(K, y, kc)
        return SqrtFit(float(kc), math.exp(a), float(b), math.sqrt(ss / K.size))
    span = np.ptp(K)
    offsets = span * np.logspace(-6, 1, 400)
    cost = [_loglin(K, y, K.min() - d)[2] for d in offsets]
    i = int(np.argmin(cost))
    lo = offsets[max(i - 1, 0)]
    hi = offsets[min(i + 1, offsets.size - 1)]
    # refine in log-offset coordinates
    f = lambda s: _loglin(K, y, K.min() - math.exp(s))[2]
    r = minimize_scalar(f, bounds=(math.log(lo), math.log(hi)), method="bounded",
                        options=dict(xatol=1e-12))
    s_best = r.x if r.fun <= cost[i] else math.log(offsets[i])
    kc_fit = K.min() - math.exp(s_best)
    a, b, ss = _loglin(K, y, kc_fit)
    return SqrtFit(float(kc_fit), math.exp(a), float(b), math.sqrt(ss / K.size))
