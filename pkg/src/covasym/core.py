"""Shared numerics: multi-indices, deterministic quadrature, grids, DFT, seeds.

Everything here is a pure function of its inputs. Quadrature is nested
Gauss-Legendre refinement (no randomness), so every downstream identity test
is reproducible bit-for-bit on one platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MultiIndex",
    "multi_indices_of_order",
    "QuadratureSpec",
    "QuadratureError",
    "integrate_radial",
    "integrate_tensor",
    "GridField",
    "FrequencyGrid",
    "grid_from_function",
    "dft_forward",
    "dft_inverse",
    "derived_rng",
]

MAX_MULTI_INDEX_ORDER = 16  # higher orders are out of numerical reach anyway


@dataclass(frozen=True)
class MultiIndex:
    """Vector of nonnegative integer exponents, one per coordinate."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ValueError("multi-index needs at least one entry")
        if any((not isinstance(e, (int, np.integer))) or e < 0 for e in self.entries):
            raise ValueError(f"entries must be nonnegative integers, got {self.entries}")
        if sum(self.entries) > MAX_MULTI_INDEX_ORDER:
            raise ValueError(
                f"order {sum(self.entries)} exceeds cap {MAX_MULTI_INDEX_ORDER}"
            )
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def order(self) -> int:
        return sum(self.entries)

    def factorial(self) -> int:
        out = 1
        for e in self.entries:
            out *= math.factorial(e)
        return out

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def multi_indices_of_order(d: int, m: int) -> list[MultiIndex]:
    """All multi-indices in dimension ``d`` with total order ``m``.

    Returns exactly C(m+d-1, d-1) indices, lexicographically sorted.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if m < 0:
        raise ValueError("order must be >= 0")

    def gen(dim: int, total: int):
        if dim == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in gen(dim - 1, total - first):
                yield (first,) + rest

    return [MultiIndex(entries) for entries in gen(d, m)]


# ---------------------------------------------------------------------------
# Deterministic quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation radius, relative tolerance, and refinement depth cap.

    ``absolute_floor`` guards convergence tests for integrals whose true value
    is (near) zero; it is scaled by the integral of the absolute integrand.
    """

    truncation_radius: float = 8.0
    relative_tolerance: float = 1e-10
    max_depth: int = 12
    absolute_floor: float = 1e-13

    def __post_init__(self):
        if self.truncation_radius <= 0:
            raise ValueError("truncation radius must be positive")
        if not (0 < self.relative_tolerance < 1):
            raise ValueError("relative tolerance must lie in (0, 1)")
        if self.max_depth < 1:
            raise ValueError("max refinement depth must be >= 1")


class QuadratureError(RuntimeError):
    """Raised when refinement does not converge; carries the last two estimates."""

    def __init__(self, message, previous, current):
        super().__init__(f"{message} (last estimates {previous!r} -> {current!r})")
        self.previous = previous
        self.current = current


@lru_cache(maxsize=64)
def _gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_nodes(a: float, b: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on [a, b] split into panels."""
    x, w = _gauss_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _converged(current, previous, abs_current, spec: QuadratureSpec) -> bool:
    diff = abs(current - previous)
    tol = max(
        spec.relative_tolerance * abs(current),
        spec.absolute_floor * max(1.0, abs_current),
    )
    return diff <= tol


def integrate_radial(
    g: Callable[[np.ndarray], np.ndarray],
    weight: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec | None = None,
) -> float:
    """Integral of ``g(r) * weight(r)`` over (0, truncation radius].

    Nested refinement: panel count doubles until two successive composite
    Gauss-Legendre estimates agree to the requested tolerance.
    """
    spec = spec or QuadratureSpec()
    order = 16
    panels = 4
    previous = None
    current = None
    for _ in range(spec.max_depth):
        nodes, weights = _panel_nodes(0.0, spec.truncation_radius, panels, order)
        vals = np.asarray(g(nodes), dtype=float) * np.asarray(weight(nodes), dtype=float)
        estimate = float(np.dot(weights, vals))
        abs_estimate = float(np.dot(weights, np.abs(vals)))
        previous, current = current, estimate
        if previous is not None and _converged(current, previous, abs_estimate, spec):
            return current
        panels *= 2
    raise QuadratureError("radial quadrature did not converge", previous, current)


def integrate_tensor(
    g: Callable[[np.ndarray], np.ndarray],
    weight: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec | None = None,
    dimension: int = 2,
) -> float:
    """Tensor-product quadrature of ``g * weight`` over [-R, R]^dimension.

    ``g`` and ``weight`` must accept arrays of shape (n, dimension). Rejected
    for dimension > 6 (cost guard).
    """
    if dimension > 6:
        raise ValueError(f"tensor quadrature dimension {dimension} > 6 rejected")
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    spec = spec or QuadratureSpec()
    R = spec.truncation_radius
    n = 8
    previous = None
    current = None
    for _ in range(spec.max_depth):
        x, w = _gauss_nodes(n)
        nodes_1d = R * x
        weights_1d = R * w
        total = 0.0
        total_abs = 0.0
        if dimension == 1:
            pts = nodes_1d[:, None]
            vals = np.asarray(g(pts), float) * np.asarray(weight(pts), float)
            total = float(np.dot(weights_1d, vals))
            total_abs = float(np.dot(weights_1d, np.abs(vals)))
        else:
            # slice along the first axis to bound memory at high dimension
            tail_grids = np.meshgrid(*([nodes_1d] * (dimension - 1)), indexing="ij")
            tail = np.stack([t.ravel() for t in tail_grids], axis=-1)
            wgrid = np.meshgrid(*([weights_1d] * (dimension - 1)), indexing="ij")
            tail_w = np.prod(np.stack([t.ravel() for t in wgrid], axis=-1), axis=-1)
            for x0, w0 in zip(nodes_1d, weights_1d):
                pts = np.concatenate([np.full((len(tail), 1), x0), tail], axis=1)
                vals = np.asarray(g(pts), float) * np.asarray(weight(pts), float)
                total += w0 * float(np.dot(tail_w, vals))
                total_abs += abs(w0) * float(np.dot(tail_w, np.abs(vals)))
        previous, current = current, total
        if previous is not None and _converged(current, previous, total_abs, spec):
            return current
        n *= 2
    raise QuadratureError("tensor quadrature did not converge", previous, current)


# ---------------------------------------------------------------------------
# Regular grids and the discrete Fourier transform
#
# Convention (fixed for the whole package): fhat(t) = int f(x) e^{+i<x,t>} dx,
# inverse f(x) = (2 pi)^{-d} int fhat(t) e^{-i<x,t>} dt.


@dataclass(frozen=True)
class GridField:
    """Uniformly sampled field on a box; sample counts are powers of two."""

    extents: tuple[float, ...]
    samples: tuple[int, ...]
    origin: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        d = len(self.extents)
        if not (len(self.samples) == len(self.origin) == d):
            raise ValueError("extents, samples, origin must share length")
        for n in self.samples:
            if n < 2 or (n & (n - 1)) != 0:
                raise ValueError(f"samples per axis must be a power of two, got {n}")
        if tuple(self.values.shape) != tuple(self.samples):
            raise ValueError("value array shape must equal the sample counts")

    @property
    def dimension(self) -> int:
        return len(self.extents)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extents, self.samples))

    def axes(self) -> list[np.ndarray]:
        return [
            o + h * np.arange(n)
            for o, h, n in zip(self.origin, self.spacing, self.samples)
        ]

    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))


@dataclass(frozen=True)
class FrequencyGrid:
    """DFT output: complex values on the frequency lattice of a GridField."""

    frequencies: tuple[np.ndarray, ...]  # per-axis, fftfreq ordering
    values: np.ndarray
    source_origin: tuple[float, ...]
    source_spacing: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.frequencies)

    def frequency_spacing(self) -> tuple[float, ...]:
        return tuple(float(f[1] - f[0]) for f in self.frequencies)

    def meshgrid(self) -> list[np.ndarray]:
        return np.meshgrid(*self.frequencies, indexing="ij")

    def cell_volume(self) -> float:
        return float(np.prod(self.frequency_spacing()))


def grid_from_function(
    func: Callable[[np.ndarray], np.ndarray],
    halfwidth: float | Sequence[float],
    samples: int | Sequence[int],
    dimension: int,
) -> GridField:
    """Sample ``func`` at cell midpoints of [-A, A]^d.

    Midpoint alignment keeps indicator masses exact on aligned boxes and makes
    the rectangle rule spectrally accurate for smooth decaying integrands.
    """
    A = np.broadcast_to(np.asarray(halfwidth, float), (dimension,))
    N = np.broadcast_to(np.asarray(samples, int), (dimension,))
    h = 2.0 * A / N
    axes = [-a + (np.arange(n) + 0.5) * step for a, n, step in zip(A, N, h)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = np.asarray(func(pts), dtype=float).reshape(tuple(N))
    return GridField(
        extents=tuple(2.0 * A),
        samples=tuple(int(n) for n in N),
        origin=tuple(float(ax[0]) for ax in axes),
        values=vals,
    )


def dft_forward(field: GridField) -> FrequencyGrid:
    """Discrete surrogate of fhat(t) = int f(x) e^{+i<x,t>} dx."""
    h = field.spacing
    n = field.samples
    freqs = tuple(
        2.0 * np.pi * np.fft.fftfreq(ni, d=hi) for ni, hi in zip(n, h)
    )
    # sum_j f_j e^{+2 pi i jk/N} = N * ifft(f);  prefactor h^d and origin phase
    spectrum = np.fft.ifftn(field.values) * float(np.prod(n)) * field.cell_volume()
    for axis, (o, f) in enumerate(zip(field.origin, freqs)):
        shape = [1] * field.dimension
        shape[axis] = -1
        spectrum = spectrum * np.exp(1j * o * f).reshape(shape)
    return FrequencyGrid(
        frequencies=freqs,
        values=spectrum,
        source_origin=field.origin,
        source_spacing=h,
    )


def dft_inverse(spec_grid: FrequencyGrid) -> np.ndarray:
    """Invert :func:`dft_forward`; returns the (complex) spatial values."""
    vals = spec_grid.values
    for axis, (o, f) in enumerate(zip(spec_grid.source_origin, spec_grid.frequencies)):
        shape = [1] * spec_grid.dimension
        shape[axis] = -1
        vals = vals * np.exp(-1j * o * f).reshape(shape)
    n_total = float(np.prod(vals.shape))
    cell = float(np.prod(spec_grid.source_spacing))
    return np.fft.fftn(vals) / (n_total * cell)


def derived_rng(seed_base: int, index: int = 0) -> np.random.Generator:
    """Deterministic replicate generator: seed_base + replicate index."""
    return np.random.default_rng(int(seed_base) + int(index))
