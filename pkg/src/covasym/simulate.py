"""Seeded Monte Carlo samplers for the process zoo.

Every sampler is a pure function of its parameters and a 64-bit seed. The
catalog: homogeneous Poisson, the finite Ginibre ensemble (eigenvalues of an
iid complex Gaussian matrix, bulk intensity 1/pi), perturbed integer lattices
with optional stationarization, the one-dimensional smoothed-noise random
measure, and a small-window sampler for zeros of the planar Gaussian entire
function via companion-matrix roots of the truncated Taylor series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import GridField, derived_rng
from .kernels import smoothing_profile

__all__ = [
    "BoxWindow",
    "DiscWindow",
    "PointSample",
    "MeasureSample",
    "sample_poisson",
    "sample_ginibre",
    "sample_perturbed_lattice",
    "sample_convolution_measure",
    "sample_gef_zeros",
    "gef_scaled_coefficients",
    "gef_zeros_from_scaled_coefficients",
    "points_to_csv",
    "points_from_csv",
    "measure_to_text",
    "measure_from_text",
]


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class BoxWindow:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(
            b <= a for a, b in zip(self.lo, self.hi)
        ):
            raise ValueError("box window needs lo < hi per axis")

    @property
    def dimension(self):
        return len(self.lo)

    @property
    def volume(self):
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def contains(self, pts):
        pts = np.asarray(pts, float)
        ok = np.ones(pts.shape[:-1], dtype=bool)
        for ax, (a, b) in enumerate(zip(self.lo, self.hi)):
            ok &= (pts[..., ax] >= a) & (pts[..., ax] <= b)
        return ok

    def contains_box(self, lo, hi):
        return all(a <= x for a, x in zip(self.lo, lo)) and all(
            x <= b for x, b in zip(hi, self.hi)
        )


@dataclass(frozen=True)
class DiscWindow:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("window radius must be positive")

    @property
    def dimension(self):
        return 2

    @property
    def volume(self):
        return math.pi * self.radius**2

    def contains(self, pts):
        v = np.asarray(pts, float) - np.asarray(self.center)
        return np.sum(v * v, axis=-1) <= self.radius**2

    def contains_box(self, lo, hi):
        corners = np.array(
            [[a, b] for a in (lo[0], hi[0]) for b in (lo[1], hi[1])]
        )
        return bool(np.all(self.contains(corners)))


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class PointSample:
    """One seeded realization of a point process restricted to a window."""

    dimension: int
    window: object
    points: np.ndarray  # (n, d)
    seed: int
    metadata: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class MeasureSample:
    """One seeded realization of an absolutely continuous random measure."""

    field: GridField
    seed: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.field.values < 0):
            raise ValueError("measure density must be nonnegative")


# ---------------------------------------------------------------------------
# samplers


def sample_poisson(intensity: float, window, seed: int) -> PointSample:
    """Homogeneous Poisson points in a box or disc window."""
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    rng = derived_rng(seed)
    d = window.dimension
    if isinstance(window, BoxWindow):
        n = rng.poisson(intensity * window.volume)
        pts = rng.uniform(window.lo, window.hi, size=(n, d))
    elif isinstance(window, DiscWindow):
        # rejection from the bounding box keeps the law exact
        lam_box = intensity * (2 * window.radius) ** 2
        n = rng.poisson(lam_box)
        c = np.asarray(window.center)
        pts = c + rng.uniform(-window.radius, window.radius, size=(n, 2))
        pts = pts[window.contains(pts)]
    else:
        raise TypeError(f"unsupported window type {type(window).__name__}")
    return PointSample(dimension=d, window=window, points=pts, seed=int(seed))


def sample_ginibre(n_points: int, seed: int) -> PointSample:
    """Eigenvalues of an n x n iid standard-complex-Gaussian matrix.

    The bulk fills the disc of radius sqrt(n) at intensity 1/pi; the recorded
    usable window stops 3 units short of the spectral edge, where finite-size
    fluctuations contaminate bulk statistics.
    """
    if not (16 <= n_points <= 1024):
        raise ValueError("n_points must lie in [16, 1024]")
    rng = derived_rng(seed)
    a = rng.standard_normal((n_points, n_points))
    b = rng.standard_normal((n_points, n_points))
    mat = (a + 1j * b) / math.sqrt(2.0)
    eig = np.linalg.eigvals(mat)
    pts = np.stack([eig.real, eig.imag], axis=-1)
    usable = math.sqrt(n_points) - 3.0
    return PointSample(
        dimension=2,
        window=DiscWindow((0.0, 0.0), usable),
        points=pts,
        seed=int(seed),
        metadata={"matrix_size": n_points, "usable_radius": usable},
    )


def sample_perturbed_lattice(
    noise_std: float,
    window,
    seed: int,
    stationarize: bool = True,
) -> PointSample:
    """Integer lattice with iid Gaussian jitter, optionally shifted uniformly.

    Lattice sites are enumerated with a 6 * noise_std margin around the
    window, so every site whose perturbed point could land inside is present.
    """
    if noise_std < 0:
        raise ValueError("noise_std must be nonnegative")
    rng = derived_rng(seed)
    d = window.dimension
    margin = 6.0 * noise_std + 1.0
    if isinstance(window, BoxWindow):
        lo = [a - margin for a in window.lo]
        hi = [b + margin for b in window.hi]
    else:
        c = window.center
        lo = [c[i] - window.radius - margin for i in range(2)]
        hi = [c[i] + window.radius + margin for i in range(2)]
    axes = [np.arange(math.floor(a), math.ceil(b) + 1) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    sites = np.stack([m.ravel() for m in mesh], axis=-1).astype(float)
    shift = rng.uniform(0.0, 1.0, size=d) if stationarize else np.zeros(d)
    pts = sites + shift
    if noise_std > 0:
        pts = pts + noise_std * rng.standard_normal(sites.shape)
    pts = pts[window.contains(pts)]
    return PointSample(
        dimension=d,
        window=window,
        points=pts,
        seed=int(seed),
        metadata={"noise_std": noise_std, "stationarized": stationarize},
    )


def sample_convolution_measure(
    p: int,
    halfwidth: float,
    seed: int,
    resolution: int = 64,
) -> MeasureSample:
    """The measure X(x) dx with X = 1 + (Y * phi), on a one-dimensional grid.

    Y is the range-2 moving average of iid +-1 cell variables (scaled to
    |Y| <= 1), stationarized by a uniform cell-phase shift; phi is the p-fold
    self-convolution of the mean-zero unit step. X stays nonnegative because
    the smoothing has unit absolute mass.
    """
    if p not in (1, 2, 3):
        raise ValueError("p must be in {1, 2, 3}")
    if resolution > 64:
        raise ValueError("grid finer than 1/64 per unit rejected (cost guard)")
    rng = derived_rng(seed)
    s = 1.0 / resolution
    n = 1 << max(4, math.ceil(math.log2(2.0 * halfwidth * resolution)))
    A = 0.5 * n * s
    x0 = -A + 0.5 * s

    phi = smoothing_profile(p, s)
    m = len(phi)
    # Y evaluated on the half-shifted lattice q_k = x0 - (m - 1/2) s + k s
    q0 = x0 - (m - 0.5) * s
    q = q0 + np.arange(n + m) * s
    shift = rng.uniform(0.0, 1.0)
    cell_lo = math.floor(q[0] + shift)
    cell_hi = math.floor(q[-1] + shift) + 1
    eps = rng.choice([-1.0, 1.0], size=cell_hi - cell_lo + 2)
    idx = np.floor(q + shift).astype(int) - cell_lo
    y = 0.5 * (eps[idx] + eps[idx + 1])
    z = np.convolve(y, phi)[m - 1 : m - 1 + n] * s
    values = 1.0 + z
    field = GridField(
        extents=(2.0 * A,), samples=(n,), origin=(x0,), values=values
    )
    return MeasureSample(
        field=field, seed=int(seed), metadata={"p": p, "resolution": resolution}
    )


# ---------------------------------------------------------------------------
# zeros of the planar Gaussian entire function (small windows)


def gef_scaled_coefficients(radius: float, rng: np.random.Generator) -> np.ndarray:
    """Taylor coefficients in the scaled variable w = z / radius.

    Degree ceil(R^2 + 12 R) keeps the dropped tail below 1e-8 of the typical
    modulus on |z| <= R; the R^n / sqrt(n!) rescaling keeps magnitudes in
    floating range.
    """
    degree = math.ceil(radius * radius + 12.0 * radius)
    n = np.arange(degree + 1)
    log_scale = n * math.log(max(radius, 1e-12)) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n]
    )
    a = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / math.sqrt(2.0)
    return a * np.exp(log_scale)


def gef_zeros_from_scaled_coefficients(coeffs: np.ndarray, radius: float) -> np.ndarray:
    """Roots of the scaled polynomial mapped back to |z| <= radius."""
    c = np.asarray(coeffs, complex)
    c = np.trim_zeros(c, "b")
    if len(c) < 2:
        return np.empty(0, complex)
    roots = np.roots(c[::-1])
    roots = roots[np.abs(roots) <= 1.0]
    return radius * roots


def sample_gef_zeros(radius: float, seed: int) -> PointSample:
    """Zeros of the truncated Gaussian Taylor series inside |z| <= radius."""
    if radius > 12.0:
        raise ValueError("radius > 12 rejected (degree/cost guard)")
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = derived_rng(seed)
    coeffs = gef_scaled_coefficients(radius, rng)
    zeros = gef_zeros_from_scaled_coefficients(coeffs, radius)
    pts = np.stack([zeros.real, zeros.imag], axis=-1)
    return PointSample(
        dimension=2,
        window=DiscWindow((0.0, 0.0), radius),
        points=pts,
        seed=int(seed),
        metadata={"truncation_degree": len(coeffs) - 1},
    )


# ---------------------------------------------------------------------------
# text formats


def points_to_csv(sample: PointSample, path) -> None:
    """One point per row, `x,y[,weight]` (weights unused by the catalog)."""
    with open(path, "w") as fh:
        for row in sample.points:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def points_from_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    return np.asarray(rows, float)


def measure_to_text(sample: MeasureSample, path) -> None:
    """GridField text format: three header lines (dims, extents, origin)."""
    f = sample.field
    with open(path, "w") as fh:
        fh.write(" ".join(str(n) for n in f.samples) + "\n")
        fh.write(" ".join(repr(float(e)) for e in f.extents) + "\n")
        fh.write(" ".join(repr(float(o)) for o in f.origin) + "\n")
        for v in f.values.ravel():
            fh.write(f"{float(v)!r}\n")


def measure_from_text(path) -> GridField:
    with open(path) as fh:
        samples = tuple(int(v) for v in fh.readline().split())
        extents = tuple(float(v) for v in fh.readline().split())
        origin = tuple(float(v) for v in fh.readline().split())
        values = np.array([float(line) for line in fh if line.strip()])
    return GridField(
        extents=extents, samples=samples, origin=origin,
        values=values.reshape(samples),
    )
