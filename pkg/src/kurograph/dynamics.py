"""Finite-n Kuramoto model on a weighted graph.

    d theta_i / dt = omega_i + K n^-1 sum_j W_ij sin(theta_j - theta_i)

The coupling sum is evaluated as ``Im(exp(-i theta_i) (W exp(i theta))_i)``, a
dense matrix-vector product, or an FFT circular convolution when the weight
matrix is circulant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NumericalError
from .graphon import WeightMatrix

TWO_PI = 2.0 * math.pi
LOCK_FLOOR = 1e-8


@dataclass
class OscillatorEnsemble:
    """Phases (kept unwrapped), intrinsic frequencies and grid positions."""

    theta: np.ndarray
    omega: np.ndarray
    grid: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)
        self.grid = np.asarray(self.grid, dtype=float)
        if not (self.theta.shape == self.omega.shape == self.grid.shape):
            raise DomainError("theta, omega and grid must have the same length")

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def phases(self) -> np.ndarray:
        """Phases wrapped to [0, 2 pi)."""
        return np.mod(self.theta, TWO_PI)


@dataclass
class OrderField:
    h: np.ndarray

    @property
    def R(self) -> np.ndarray:
        return np.abs(self.h)

    @property
    def Phi(self) -> np.ndarray:
        return np.angle(self.h)


@dataclass
class LockReport:
    locked_mask: np.ndarray
    predicted_phase: np.ndarray  # NaN for drifting oscillators
    winding: int

    @property
    def locked_fraction(self) -> float:
        return float(np.mean(self.locked_mask)) if self.locked_mask.size else 0.0


class Coupling:
    """Precomputed ``u -> W u / n`` for one weight matrix (dense or FFT path)."""

    def __init__(self, matrix: WeightMatrix, fast: bool = True):
        self.n = matrix.n
        self.matrix = matrix
        self.fft = bool(fast and matrix.circulant)
        if self.fft:
            self._symbol = np.fft.fft(matrix.first_column) / self.n
        else:
            self._w = np.asarray(matrix.entries, dtype=float) / self.n

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.fft:
            return np.fft.ifft(self._symbol * np.fft.fft(u))
        return self._w @ u


def _coupling(matrix) -> Coupling:
    return matrix if isinstance(matrix, Coupling) else Coupling(matrix)


def rhs(theta: np.ndarray, omega: np.ndarray, K: float, matrix) -> np.ndarray:
    """Phase velocities; ``matrix`` is a WeightMatrix or a prepared Coupling."""
    op = _coupling(matrix)
    if theta.shape[0] != op.n:
        raise DomainError(f"state has {theta.shape[0]} oscillators, matrix has {op.n}")
    e = np.exp(1j * theta)
    h = op(e)
    return omega + K * (h * np.conj(e)).imag


def integrate(ensemble: OscillatorEnsemble, K: float, matrix, dt: float = 1e-2, T: float = 1.0,
              stride: Optional[int] = None, observer: Optional[Callable] = None) -> OscillatorEnsemble:
    """Classical RK4 with fixed step ``dt`` up to time ``ensemble.t + T``.

    ``observer(t, theta)`` is called at the start and after every ``stride``
    steps (and at the end).  The returned ensemble is a new object; phases
    stay unwrapped.
    """
    if dt <= 0 or T < 0:
        raise DomainError("need dt > 0 and T >= 0")
    op = _coupling(matrix)
    theta = ensemble.theta.copy()
    omega = ensemble.omega
    steps = int(math.ceil(T / dt - 1e-9))
    t0 = ensemble.t
    f = lambda th: rhs(th, omega, K, op)
    if observer is not None:
        observer(t0, theta)
    t_done = t0
    for s in range(steps):
        h = min(dt, T - s * dt)
        k1 = f(theta)
        k2 = f(theta + 0.5 * h * k1)
        k3 = f(theta + 0.5 * h * k2)
        k4 = f(theta + h * k3)
        new = theta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(new)):
            raise NumericalError("non-finite phase encountered", last_valid_time=t_done)
        theta = new
        t_done = t0 + s * dt + h
        if observer is not None and stride and ((s + 1) % stride == 0 or s == steps - 1):
            observer(t_done, theta)
    return replace(ensemble, theta=theta, t=t0 + T)


def order_parameter(theta: np.ndarray, matrix) -> OrderField:
    """Local order parameter h_i = n^-1 sum_j W_ij exp(i theta_j)."""
    op = _coupling(matrix)
    if theta.shape[0] != op.n:
        raise DomainError("dimension mismatch between phases and weight matrix")
    return OrderField(op(np.exp(1j * np.asarray(theta))))


def classify_locked(omega: np.ndarray, K: float, field: OrderField) -> LockReport:
    """Locked iff |omega_i| <= K R_i (with R_i above a small floor).

    Locked oscillators get the predicted phase ``Phi_i + arcsin(omega_i / (K R_i))``.
    The winding reported is that of the order-parameter phase Phi along the grid.
    """
    R, Phi = field.R, field.Phi
    drive = K * R
    locked = (R > LOCK_FLOOR) & (np.abs(omega) <= drive)
    pred = np.full(omega.shape, np.nan)
    ratio = np.clip(omega[locked] / drive[locked], -1.0, 1.0)
    pred[locked] = np.mod(Phi[locked] + np.arcsin(ratio), TWO_PI)
    return LockReport(locked, pred, winding_number(Phi))


def winding_number(theta: np.ndarray) -> int:
    """(2 pi)^-1 times the sum of wrapped increments around the closed cycle."""
    theta = np.asarray(theta, dtype=float)
    if theta.size < 2:
        return 0
    d = np.diff(np.append(theta, theta[0]))
    wrapped = np.pi - np.mod(np.pi - d, TWO_PI)  # into (-pi, pi]
    return int(round(wrapped.sum() / TWO_PI))


def circular_distance(a, b) -> np.ndarray:
    d = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def uniform_random(n: int, rng) -> np.ndarray:
    """iid uniform phases on [0, 2 pi)."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return rng.random(n) * TWO_PI


def coherent_seed(eps: float, mode: np.ndarray, rng) -> np.ndarray:
    """Phases whose density is ``(1 + 2 eps Re(conj(mode) e^{i theta})) / 2 pi`` to first order.

    The expected value of ``exp(i theta_j)`` is then ``eps * mode_j``.
    """
    mode = np.asarray(mode)
    u = uniform_random(mode.size, rng)
    return u - 2.0 * eps * np.abs(mode) * np.sin(u - np.angle(mode))


def mean_velocities(theta_start: np.ndarray, theta_end: np.ndarray, span: float) -> np.ndarray:
    """Time-averaged phase velocities from unwrapped phases ``span`` apart."""
    if span <= 0:
        raise DomainError("span must be positive")
    return (np.asarray(theta_end) - np.asarray(theta_start)) / span


def collective_frequency(h_start: np.ndarray, h_end: np.ndarray, span: float) -> float:
    """Rotation rate of the order parameter between two snapshots (small-rotation estimate)."""
    w = np.abs(h_start) * np.abs(h_end)
    return float(np.angle(np.sum(w * np.exp(1j * (np.angle(h_end) - np.angle(h_start)))))) / span


def frequency_locked(velocities: np.ndarray, Omega: float, tol: float = 0.02) -> np.ndarray:
    """Oscillators whose mean velocity equals the collective frequency within ``tol``."""
    return np.abs(np.asarray(velocities) - Omega) <= tol
