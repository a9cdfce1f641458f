"""Graphon kernels and the W-random weighted graphs sampled from them.

A kernel is a symmetric function ``W: [0,1]^2 -> [-1, 1]``.  A weighted graph on
``n`` nodes is obtained by evaluating the kernel on a grid ``xi_1 < ... < xi_n``
that satisfies the Riemann-sum condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, PreconditionError

KINDS = ("constant", "small_world", "circulant", "grid", "custom")
_BOUND_TOL = 1e-12


@dataclass(frozen=True)
class GraphonKernel:
    """Immutable description of a graphon.

    Use the factory functions (:func:`constant`, :func:`small_world`,
    :func:`circulant`, :func:`cosine`, :func:`grid`, :func:`custom`) rather
    than the constructor.
    """

    kind: str
    p: Optional[float] = None
    r: Optional[float] = None
    coeffs: Optional[tuple] = None
    profile: Optional[Callable] = field(default=None, compare=False)
    values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    func: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    @property
    def is_circulant(self) -> bool:
        return self.kind in ("constant", "small_world", "circulant")

    def circular_profile(self, u):
        """G(u) with W(x, y) = G(x - y); ``u`` is taken modulo 1."""
        if not self.is_circulant:
            raise PreconditionError(f"{self.kind} kernel is not circulant")
        u = np.mod(np.asarray(u, dtype=float), 1.0)
        if self.kind == "constant":
            return np.full_like(u, self.p)
        if self.kind == "small_world":
            d = np.minimum(u, 1.0 - u)
            # distance exactly r belongs to the band
            return np.where(d <= self.r, 1.0 - self.p, self.p)
        if self.coeffs is not None:
            c = np.asarray(self.coeffs, dtype=float)
            k = np.arange(1, len(c))
            out = np.full_like(u, c[0])
            if len(k):
                out = out + 2.0 * np.cos(2.0 * np.pi * np.multiply.outer(u, k)) @ c[1:]
            return out
        return np.asarray(self.profile(u), dtype=float)

    def eval(self, x, y):
        """Kernel value W(x, y); broadcasts over array arguments."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any((x < 0) | (x > 1)) or np.any((y < 0) | (y > 1)):
            raise DomainError("graphon arguments must lie in [0, 1]")
        if self.is_circulant:
            out = self.circular_profile(x - y)
        elif self.kind == "grid":
            m = self.values.shape[0]
            i = np.minimum((x * m).astype(int), m - 1)
            j = np.minimum((y * m).astype(int), m - 1)
            out = self.values[i, j]
        else:
            out = np.asarray(self.func(x, y), dtype=float)
        if out.ndim == 0:
            return float(out)
        return out

    __call__ = eval

    def bounds(self, samples: int = 257):
        """(min, max) of the kernel on a uniform sample grid (exact for grid kind)."""
        if self.kind == "grid":
            return float(self.values.min()), float(self.values.max())
        if self.kind == "constant":
            return self.p, self.p
        if self.kind == "small_world":
            return min(self.p, 1 - self.p), max(self.p, 1 - self.p)
        t = np.linspace(0.0, 1.0, samples)
        vals = self.eval(t[:, None], t[None, :])
        return float(vals.min()), float(vals.max())

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == "constant":
            return f"constant(p={self.p})"
        if self.kind == "small_world":
            return f"small_world(p={self.p}, r={self.r})"
        if self.kind == "circulant" and self.coeffs is not None:
            return f"circulant(coeffs={list(self.coeffs)})"
        return self.kind


def _check_bounded(kernel: GraphonKernel) -> GraphonKernel:
    lo, hi = kernel.bounds()
    if lo < -1 - _BOUND_TOL or hi > 1 + _BOUND_TOL:
        raise DomainError(f"{kernel.describe()} takes values outside [-1, 1]")
    return kernel


def constant(p: float) -> GraphonKernel:
    """W(x, y) = p.  With p in (0, 1) this is the Erdos-Renyi graphon."""
    p = float(p)
    if not -1.0 <= p <= 1.0:
        raise DomainError(f"constant kernel value p={p} outside [-1, 1]")
    return GraphonKernel("constant", p=p)


def small_world(p: float, r: float) -> GraphonKernel:
    """1 - p inside the circular band of half-width r, p outside."""
    p, r = float(p), float(r)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"small-world p={p} outside [0, 1]")
    if not 0.0 <= r <= 0.5:
        raise DomainError(f"small-world r={r} outside [0, 1/2]")
    return GraphonKernel("small_world", p=p, r=r)


def circulant(coeffs: Optional[Sequence[float]] = None, profile: Optional[Callable] = None,
              label: str = "") -> GraphonKernel:
    """Kernel G(x - y) given by cosine coefficients or a profile on the circle.

    ``coeffs = [c0, c1, c2, ...]`` means ``G(u) = c0 + 2 sum_k c_k cos(2 pi k u)``,
    i.e. ``c_k = c_{-k}`` are the Fourier coefficients (and the eigenvalues of
    the integral operator).  ``profile`` must be an even 1-periodic callable.
    """
    if (coeffs is None) == (profile is None):
        raise PreconditionError("give exactly one of coeffs or profile")
    if coeffs is not None:
        kernel = GraphonKernel("circulant", coeffs=tuple(float(c) for c in coeffs), label=label)
    else:
        u = np.linspace(0.0, 1.0, 257)
        if not np.allclose(profile(u), profile(1.0 - u), atol=1e-12):
            raise PreconditionError("circulant profile must satisfy G(u) = G(-u)")
        kernel = GraphonKernel("circulant", profile=profile, label=label)
    return _check_bounded(kernel)


def cosine(m: int = 1) -> GraphonKernel:
    """W(x, y) = cos(2 pi m (x - y))."""
    coeffs = [0.0] * (m + 1)
    coeffs[m] = 0.5
    return circulant(coeffs=coeffs, label=f"cosine(m={m})")


def grid(values) -> GraphonKernel:
    """Piecewise-constant kernel from an m x m array (nearest-cell lookup)."""
    values = np.array(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DomainError("grid kernel needs a square array")
    if not np.array_equal(values, values.T):
        raise DomainError("grid kernel values are not symmetric")
    values.setflags(write=False)
    return _check_bounded(GraphonKernel("grid", values=values))


def custom(func: Callable, label: str = "custom") -> GraphonKernel:
    """Kernel from a vectorised callable ``func(x, y)``; symmetry is checked on a grid."""
    t = np.linspace(0.0, 1.0, 65)
    vals = np.asarray(func(t[:, None], t[None, :]), dtype=float)
    if not np.allclose(vals, vals.T, atol=1e-12):
        raise DomainError("custom kernel is not symmetric")
    return _check_bounded(GraphonKernel("custom", func=func, label=label))


def load_grid_csv(path) -> GraphonKernel:
    """Grid kernel from a CSV of m*m values in row-major order."""
    raw = np.loadtxt(path, delimiter=",", comments="#", ndmin=1).ravel()
    m = int(round(np.sqrt(raw.size)))
    if m * m != raw.size:
        raise DomainError(f"{path}: {raw.size} values is not a perfect square")
    return grid(raw.reshape(m, m))


@dataclass(frozen=True)
class GridScheme:
    """Rule producing the nodes xi_1 <= ... <= xi_n."""

    kind: str = "midpoint"
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("midpoint", "left", "uniform_random"):
            raise DomainError(f"unknown grid scheme {self.kind!r}")
        if self.kind == "uniform_random" and self.seed is None:
            raise PreconditionError("uniform_random grid needs a seed")

    @property
    def is_uniform(self) -> bool:
        return self.kind != "uniform_random"

    def points(self, n: int) -> np.ndarray:
        if n < 1:
            raise DomainError("grid needs n >= 1")
        i = np.arange(n)
        if self.kind == "midpoint":
            return (2 * i + 1) / (2.0 * n)
        if self.kind == "left":
            return i / float(n)
        return np.sort(np.random.default_rng(self.seed).random(n))


MIDPOINT = GridScheme("midpoint")


@dataclass
class WeightMatrix:
    """Weighted adjacency W_nij = W(xi_i, xi_j) together with its grid."""

    entries: np.ndarray
    grid: np.ndarray
    kernel: Optional[GraphonKernel] = None
    circulant: bool = False

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def first_column(self) -> np.ndarray:
        return self.entries[:, 0]


def _symmetrize(a: np.ndarray) -> np.ndarray:
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def sample_weight_matrix(kernel: GraphonKernel, n: int, scheme: GridScheme = MIDPOINT) -> WeightMatrix:
    """Evaluate the kernel on the scheme's grid.

    For circulant kernels on a uniform grid the entries are filled from the
    integer lag ``min(k, n - k) / n`` so the matrix is exactly circulant; this
    keeps band-edge ties of small-world kernels away from rounding noise.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    xi = scheme.points(n)
    if kernel.is_circulant and scheme.is_uniform:
        k = np.arange(n)
        lag = np.minimum(k, n - k) / float(n)
        col = np.asarray(kernel.circular_profile(lag), dtype=float)
        idx = (k[:, None] - k[None, :]) % n
        return WeightMatrix(col[idx], xi, kernel, circulant=True)
    entries = _symmetrize(np.asarray(kernel.eval(xi[:, None], xi[None, :]), dtype=float))
    return WeightMatrix(entries, xi, kernel)


def sample_bernoulli_graph(kernel: GraphonKernel, n: int, scheme: GridScheme = MIDPOINT,
                           seed: Optional[int] = None) -> WeightMatrix:
    """Random simple graph: edge {i, j} (i != j) present with probability W(xi_i, xi_j)."""
    lo, hi = kernel.bounds()
    if lo < 0 or hi > 1:
        raise PreconditionError("Bernoulli sampling needs kernel values in [0, 1]")
    probs = sample_weight_matrix(kernel, n, scheme)
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    upper = np.triu(draws < probs.entries, 1).astype(float)
    return WeightMatrix(upper + upper.T, probs.grid, kernel)


def save_matrix_csv(matrix: WeightMatrix, path, header: str = "") -> None:
    np.savetxt(path, matrix.entries, delimiter=",", fmt="%.17g", header=header, comments="# ")
