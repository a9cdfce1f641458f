"""Critical couplings and the branches lam(mu, K) of the linearized operator.

Eigenvalues of the linearization are the roots of ``D(lam) = 2 / (K mu)`` with
``Re lam > 0``; below ``K(mu) = 2 / (pi g(0) mu)`` the roots continue into the
left half-plane as resonances of the continued function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError, PreconditionError
from .freqdist import FrequencyModel, d_continuation, d_continuation_derivative, d_integral
from .spectral import NEG_INF, POS_INF, SpectralDecomposition


@dataclass
class CriticalReport:
    kc_plus: float
    kc_minus: float
    mu_max: float
    mu_min: float
    multiplicity_of_max: int


@dataclass
class BranchPoint:
    K: float
    lam: complex
    mu: float
    side: str  # "eigenvalue" (Re lam > 0) or "resonance"
    residual: float


def threshold(mu: float, model: FrequencyModel) -> float:
    """K(mu) = 2 / (pi g(0) mu), where the branch of mu meets the imaginary axis."""
    return 2.0 / (math.pi * model.g0 * mu)


def critical_couplings(decomp: SpectralDecomposition, model: FrequencyModel) -> CriticalReport:
    """K_c^+ and K_c^- from the extreme eigenvalues.

    Without negative eigenvalues ``kc_minus`` is reported as ``-inf``: after
    the reduction K -> -K, W -> -W there is no positive spectrum, so the
    incoherent state is stable for every K < 0.
    """
    mu_max, mu_min = decomp.mu_max, decomp.mu_min
    if not (0 < mu_max < POS_INF):
        raise PreconditionError(
            "the kernel has no positive eigenvalue; study K < 0 by substituting "
            "K := -K and W := -W")
    kc_plus = threshold(mu_max, model)
    kc_minus = NEG_INF if mu_min == NEG_INF else 2.0 / (math.pi * model.g0 * mu_min)
    return CriticalReport(kc_plus, kc_minus, mu_max, mu_min, decomp.multiplicity_of_max)


def eigenvalue_branch(mu: float, K: float, model: FrequencyModel) -> BranchPoint:
    """The unique real eigenvalue lam > 0 of ``D(lam) = 2 / (K mu)`` for K > K(mu)."""
    if mu <= 0:
        raise PreconditionError("mu must be positive")
    target = 2.0 / (K * mu)
    if K <= threshold(mu, model):
        raise PreconditionError(
            f"K={K} <= K(mu)={threshold(mu, model)}: no positive eigenvalue, use resonance_branch")
    f = lambda lam: d_integral(model, lam).real - target
    lo = 1e-8
    while f(lo) < 0 and lo > 1e-300:
        lo *= 1e-2
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    lam = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    res = abs(d_integral(model, lam) - target)
    if res > 1e-10:
        raise NumericalError("eigenvalue root residual too large", lam=lam, residual=res)
    return BranchPoint(K, complex(lam), mu, "eigenvalue", res)


def _newton(model, target, lam, tol, maxiter=60):
    for _ in range(maxiter):
        F = d_continuation(model, lam) - target
        if abs(F) < tol:
            return lam, abs(F)
        step = F / d_continuation_derivative(model, lam)
        # damping: halve the step until the residual does not grow
        damp = 1.0
        while damp > 1e-6:
            trial = lam - damp * step
            if abs(d_continuation(model, trial) - target) < abs(F):
                break
            damp *= 0.5
        lam = trial
    F = abs(d_continuation(model, lam) - target)
    if F < tol:
        return lam, F
    raise NumericalError("Newton iteration for the resonance did not converge",
                         last_iterate=lam, residual=F)


def resonance_branch(mu: float, K: float, model: FrequencyModel, steps: int = 8,
                     tol: float = 1e-12) -> BranchPoint:
    """Root of the continued ``D(lam) = 2 / (K mu)`` with Re lam <= 0, for 0 < K <= K(mu).

    The root is continued from ``lam = 0`` at ``K = K(mu)`` by damped Newton
    steps along a geometric ladder of couplings down to ``K``.
    """
    if mu <= 0 or K <= 0:
        raise PreconditionError("mu and K must be positive")
    k0 = threshold(mu, model)
    if K > k0:
        raise PreconditionError(f"K={K} > K(mu)={k0}: use eigenvalue_branch")
    if K == k0:
        return BranchPoint(K, 0j, mu, "resonance", abs(d_continuation(model, 0j) - 2.0 / (K * mu)))
    ladder = k0 * (K / k0) ** (np.arange(1, steps + 1) / steps)
    lam, prev_k = 0j, k0
    for k in ladder:
        # first-order predictor: d lam / dK = (-2 / (K^2 mu)) / D'(lam)
        lam = lam + (-2.0 / (prev_k ** 2 * mu)) * (k - prev_k) / d_continuation_derivative(model, lam)
        lam, res = _newton(model, 2.0 / (k * mu), lam, tol)
        prev_k = k
    return BranchPoint(float(K), complex(lam), mu, "resonance" if lam.real <= 0 else "eigenvalue", res)


def branch(mu: float, K, model: FrequencyModel) -> BranchPoint:
    """Eigenvalue or resonance at coupling K, whichever side of K(mu) it falls."""
    if K > threshold(mu, model):
        return eigenvalue_branch(mu, K, model)
    return resonance_branch(mu, K, model)
