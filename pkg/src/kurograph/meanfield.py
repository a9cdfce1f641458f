"""Fourier hierarchy of the mean-field equation on an (omega, x) grid.

With ``z_j(t, w, x) = int exp(i j theta) rho dtheta`` and
``h = P z_1 = int int W(x, y) z_1(w, y) g(w) dw dy``:

    dz_1/dt = i w z_1 + K/2 (h - conj(h) z_2)
    dz_j/dt = i j w z_j + j K/2 (h z_{j-1} - conj(h) z_{j+1}),   j >= 2

truncated at ``j = J``.  The omega integral uses Gauss-Hermite nodes moved to
the line ``Im w = shift`` in the upper half-plane.  For data analytic in w
the integral is unchanged, while the free rotation ``exp(i j w t)`` is damped
on the nodes, so the discrete system shows the same phase mixing as the
continuum instead of recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dynamics import Coupling
from .errors import DomainError, NumericalError
from .freqdist import FrequencyModel
from .graphon import MIDPOINT, GraphonKernel, sample_weight_matrix

CLOSURES = ("truncate", "ott-antonsen")


@dataclass
class GalerkinGrid:
    """Quadrature in omega, uniform midpoint grid in x and the kernel contraction."""

    omega: np.ndarray  # complex nodes, shape (M,)
    weights: np.ndarray  # complex weights including g, shape (M,)
    x: np.ndarray
    coupling: Coupling = field(repr=False)

    @property
    def M(self) -> int:
        return self.omega.size

    @property
    def n(self) -> int:
        return self.x.size


def make_grid(kernel: GraphonKernel, model: FrequencyModel, M: int = 40, n: int = 64,
              shift: float = 1.0) -> GalerkinGrid:
    omega, weights = model.contour_quadrature(M, shift)
    matrix = sample_weight_matrix(kernel, n, MIDPOINT)
    return GalerkinGrid(omega, weights, matrix.grid, Coupling(matrix))


@dataclass
class GalerkinState:
    """Modes z_1..z_J on the grid; z_0 = 1 is implicit."""

    z: np.ndarray  # shape (J, M, n)
    t: float = 0.0

    @property
    def J(self) -> int:
        return self.z.shape[0]

    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.z))) if self.z.size else 0.0


def apply_P(f: np.ndarray, grid: GalerkinGrid) -> np.ndarray:
    """``(P f)(x) = int int W(x, y) f(w, y) g(w) dw dy`` for f of shape (M, n)."""
    f = np.asarray(f)
    if f.shape != (grid.M, grid.n):
        raise DomainError(f"field shape {f.shape} does not match grid {(grid.M, grid.n)}")
    return grid.coupling(grid.weights @ f)


def _nonlinear_part(z, h, K, closure):
    J = z.shape[0]
    j = np.arange(1, J + 1)[:, None, None]
    lower = np.empty_like(z)
    lower[0] = 1.0
    lower[1:] = z[:-1]
    upper = np.empty_like(z)
    upper[:-1] = z[1:]
    if closure == "truncate":
        upper[-1] = 0.0
    else:
        # Ott-Antonsen consistent closure z_{J+1} = z_1 z_J
        upper[-1] = z[0] * z[-1]
    return j * (0.5 * K) * (h * lower - np.conj(h) * upper)


def nonlinear_rhs(z: np.ndarray, K: float, grid: GalerkinGrid, closure: str = "truncate") -> np.ndarray:
    """Time derivative of the truncated hierarchy (shape (J, M, n))."""
    if closure not in CLOSURES:
        raise DomainError(f"unknown closure {closure!r}")
    h = apply_P(z[0], grid)
    j = np.arange(1, z.shape[0] + 1)[:, None, None]
    return 1j * j * grid.omega[None, :, None] * z + _nonlinear_part(z, h, K, closure)


def linear_rhs(z1: np.ndarray, K: float, grid: GalerkinGrid) -> np.ndarray:
    """``T z_1 = i w z_1 + K/2 P z_1``."""
    return 1j * grid.omega[:, None] * z1 + 0.5 * K * apply_P(z1, grid)[None, :]


class _LawsonRK4:
    """RK4 in the integrating-factor variables of the diagonal rotation ``i j w``."""

    def __init__(self, rate: np.ndarray, nonlinear: Callable, dt: float):
        self.dt = dt
        self.half = np.exp(0.5 * dt * rate)
        self.full = self.half * self.half
        self.N = nonlinear

    def step(self, z):
        dt, E, E2, N = self.dt, self.half, self.full, self.N
        k1 = N(z)
        k2 = N(E * (z + 0.5 * dt * k1))
        k3 = N(E * z + 0.5 * dt * k2)
        k4 = N(E2 * z + dt * E * k3)
        return E2 * z + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)


@dataclass
class Series:
    t: list = field(default_factory=list)
    mean_abs_h: list = field(default_factory=list)
    norm_h: list = field(default_factory=list)
    max_abs_z: list = field(default_factory=list)

    def record(self, t, h, zmax):
        a = np.abs(h)
        self.t.append(t)
        self.mean_abs_h.append(float(a.mean()))
        self.norm_h.append(float(np.sqrt(np.mean(a * a))))
        self.max_abs_z.append(float(zmax))

    def as_arrays(self):
        return {k: np.asarray(v) for k, v in self.__dict__.items()}


def coherent_state(grid: GalerkinGrid, J: int, eps: float, mode: np.ndarray) -> GalerkinState:
    """Small coherent seed ``z_1 = eps * mode(x)``, ``z_j = z_1^j`` (a Poisson-kernel density)."""
    z1 = np.broadcast_to(eps * np.asarray(mode, dtype=complex), (grid.M, grid.n))
    z = np.stack([z1 ** j for j in range(1, J + 1)])
    return GalerkinState(z.astype(complex))


def evolve(state: GalerkinState, K: float, grid: GalerkinGrid, T: float, dt: float = 0.05,
           closure: str = "truncate", sample_dt: float = 0.5,
           stop: Optional[Callable] = None, series: Optional[Series] = None):
    """Integrate the nonlinear hierarchy for time T (or until ``stop(series)`` is true)."""
    if closure not in CLOSURES:
        raise DomainError(f"unknown closure {closure!r}")
    J = state.J
    j = np.arange(1, J + 1)[:, None, None]
    rate = 1j * j * grid.omega[None, :, None] * np.ones((1, 1, grid.n))
    nl = lambda z: _nonlinear_part(z, apply_P(z[0], grid), K, closure)
    stepper = _LawsonRK4(rate, nl, dt)
    every = max(1, int(round(sample_dt / dt)))
    series = series if series is not None else Series()
    z, t = state.z.copy(), state.t
    series.record(t, apply_P(z[0], grid), np.max(np.abs(z)))
    steps = int(math.ceil(T / dt - 1e-9))
    for s in range(1, steps + 1):
        z = stepper.step(z)
        t = state.t + s * dt
        if s % every == 0 or s == steps:
            zmax = np.max(np.abs(z))
            if not np.isfinite(zmax):
                raise NumericalError("non-finite Galerkin state", last_valid_time=series.t[-1])
            series.record(t, apply_P(z[0], grid), zmax)
            if stop is not None and stop(series):
                break
    return GalerkinState(z, t), series


@dataclass
class LinearRun:
    t: np.ndarray
    norm: np.ndarray
    z1: np.ndarray

    def decay_factor(self) -> float:
        return float(self.norm[0] / self.norm[-1]) if self.norm[-1] > 0 else math.inf

    def growth_rate(self, t_from: float, t_to: Optional[float] = None) -> float:
        """Least-squares slope of log ||P z_1|| on [t_from, t_to]."""
        m = self.t >= t_from
        if t_to is not None:
            m &= self.t <= t_to
        return float(np.polyfit(self.t[m], np.log(self.norm[m]), 1)[0])


def evolve_linearized(z1_init, K: float, grid: GalerkinGrid, T: float, dt: float = 0.01,
                      sample_dt: float = 0.1) -> LinearRun:
    """Integrate ``dz_1/dt = T z_1``; record ``||P z_1(t)||`` (discrete L2 in x).

    ``z1_init`` is an array of shape (M, n) or a callable ``f(omega, x)``
    evaluated on the (complex) nodes, which must be analytic in omega.
    """
    if K < 0:
        raise DomainError("K must be nonnegative")
    if callable(z1_init):
        z = np.asarray(z1_init(grid.omega[:, None], grid.x[None, :]), dtype=complex)
        z = np.broadcast_to(z, (grid.M, grid.n)).copy()
    else:
        z = np.array(z1_init, dtype=complex)
    rate = 1j * grid.omega[:, None] * np.ones((1, grid.n))
    stepper = _LawsonRK4(rate, lambda f: 0.5 * K * apply_P(f, grid)[None, :], dt)
    every = max(1, int(round(sample_dt / dt)))
    norm = lambda f: float(np.sqrt(np.mean(np.abs(apply_P(f, grid)) ** 2)))
    ts, ns = [0.0], [norm(z)]
    steps = int(math.ceil(T / dt - 1e-9))
    for s in range(1, steps + 1):
        z = stepper.step(z)
        if s % every == 0 or s == steps:
            ts.append(s * dt)
            ns.append(norm(z))
    return LinearRun(np.asarray(ts), np.asarray(ns), z)


@dataclass
class StationaryResult:
    h: np.ndarray
    mean_abs_h: float
    converged: bool
    state: GalerkinState
    series: Series


def stationarity_stop(tol: float = 1e-6, window: float = 0.1, t_min: float = 20.0,
                      zero_floor: float = 1e-12):
    """Stop rule: relative spread of mean|h| over the trailing ``window`` fraction < tol."""

    def stop(series: Series) -> bool:
        t = series.t[-1]
        if t < t_min:
            return False
        y = np.asarray(series.mean_abs_h)
        if y[-1] < zero_floor:
            return True
        tt = np.asarray(series.t)
        tail = y[tt >= t - window * t]
        if tail.size < 3:
            return False
        return (tail.max() - tail.min()) / max(tail.mean(), zero_floor) < tol

    return stop


def stationary_amplitude(K: float, kernel: GraphonKernel, model: FrequencyModel, J: int = 8,
                         tol: float = 1e-6, *, grid: Optional[GalerkinGrid] = None,
                         M: int = 40, n: int = 64, shift: float = 1.0,
                         closure: str = "truncate", dt: float = 0.05, T_max: float = 3000.0,
                         seed_amplitude: float = 1e-3, mode: Optional[np.ndarray] = None,
                         start: Optional[GalerkinState] = None) -> StationaryResult:
    """Run the nonlinear hierarchy from a small coherent seed (or ``start``)
    until mean|h| is stationary; returns the final order-parameter field."""
    if grid is None:
        grid = make_grid(kernel, model, M, n, shift)
    if start is None:
        if mode is None:
            from .spectral import nystrom_eigs

            decomp = nystrom_eigs(sample_weight_matrix(kernel, grid.n, MIDPOINT), 2)
            mode = decomp.w_max
        start = coherent_state(grid, J, seed_amplitude, mode)
    else:
        start = GalerkinState(start.z.copy(), 0.0)
    stop = stationarity_stop(tol)
    state, series = evolve(start, K, grid, T_max, dt, closure, stop=stop)
    h = apply_P(state.z[0], grid)
    converged = bool(stop(series))
    return StationaryResult(h, float(np.mean(np.abs(h))), converged, state, series)
