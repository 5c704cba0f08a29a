"""Covariance expansion terms, variance bounds, and asymptotic predictions.

The covariance of smooth statistics of a scaled stationary random measure
expands over even orders: the order-m coefficient couples the kernel moments
of total order m with inner products <f, d^gamma g>. This module computes
those terms by three routes (spatial quadrature, frequency sums, and the
radial-moment reduction for isotropic kernels), the Sobolev variance upper
bounds, the exact transform-side covariance at finite scale L, and the
predicted leading order/constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .core import (
    GridField,
    MultiIndex,
    QuadratureSpec,
    dft_forward,
    multi_indices_of_order,
)
from .kernels import (
    TruncatedCorrelationKernel,
    is_exact_zero_moment,
    kernel_fourier,
    radial_moment,
    sphere_surface_area,
    tensor_moment,
)

__all__ = [
    "TestFunction",
    "ExpansionTerm",
    "ExpansionContribution",
    "AsymptoticPrediction",
    "HypothesisViolation",
    "gaussian_bump",
    "poly_bump",
    "indicator_box",
    "indicator_disc",
    "l2_inner",
    "inner_with_derivative",
    "q_term_spatial",
    "q_term_fourier",
    "q_term_isotropic",
    "variance_upper_bound",
    "covariance_exact_fourier",
    "predict_asymptotics",
    "format_expansion_term",
    "parse_expansion_term",
    "sobolev_seminorm_sq",
]


class HypothesisViolation(ValueError):
    """A bound or reduction was requested outside its hypotheses."""


@dataclass(frozen=True)
class TestFunction:
    """Test function with partial-derivative evaluators and known support.

    ``derivative(alpha, pts)`` evaluates d^alpha f at pts of shape (..., d);
    alpha orders up to ``sobolev_order`` are available. ``support_box`` is the
    smallest axis box outside which |f| < 1e-12 of its sup; ``fourier``, when
    present, is the closed-form transform under the e^{+i<x,t>} convention.
    """

    dimension: int
    func: Callable[[np.ndarray], np.ndarray]
    derivative_impl: Callable[[tuple[int, ...], np.ndarray], np.ndarray]
    sobolev_order: int
    support_box: tuple[tuple[float, ...], tuple[float, ...]]
    name: str = ""
    fourier: Callable[[np.ndarray], np.ndarray] | None = None
    grid_step: float = 0.05
    # radial supports live in the origin ball of radius support_radius, a
    # strictly smaller set than their box; window guards exploit this
    radial_support: bool = False

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(pts, float)), float)

    def derivative(self, alpha, pts: np.ndarray) -> np.ndarray:
        alpha = tuple(int(a) for a in alpha)
        if sum(alpha) == 0:
            return self(pts)
        if sum(alpha) > self.sobolev_order:
            raise ValueError(
                f"{self.name or 'function'} provides derivatives up to order "
                f"{self.sobolev_order}, requested {alpha}"
            )
        return np.asarray(self.derivative_impl(alpha, np.asarray(pts, float)), float)

    @property
    def support_radius(self) -> float:
        # per-axis reach of the support box (what window containment needs)
        lo, hi = self.support_box
        return float(max(max(abs(a), abs(b)) for a, b in zip(lo, hi)))


# ---------------------------------------------------------------------------
# function catalog


def _hermite_values(n: int, x: np.ndarray) -> np.ndarray:
    # probabilists' Hermite polynomials He_n by recursion
    if n == 0:
        return np.ones_like(x)
    prev, cur = np.ones_like(x), x.copy()
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur


@lru_cache(maxsize=8)
def gaussian_bump(d: int = 2) -> TestFunction:
    """The standard Gaussian profile exp(-|x|^2/2)."""

    def func(pts):
        return np.exp(-0.5 * np.sum(pts * pts, axis=-1))

    def derivative(alpha, pts):
        out = func(pts)
        for axis, a in enumerate(alpha):
            if a:
                x = pts[..., axis]
                out = out * ((-1.0) ** a) * _hermite_values(a, x)
        return out

    def fourier(ts):
        ts = np.asarray(ts, float)
        return (2.0 * math.pi) ** (d / 2.0) * np.exp(-0.5 * np.sum(ts * ts, axis=-1))

    radius = math.sqrt(2.0 * 12.0 * math.log(10.0))  # |f| < 1e-12 beyond
    box = (tuple([-radius] * d), tuple([radius] * d))
    return TestFunction(
        dimension=d,
        func=func,
        derivative_impl=derivative,
        sobolev_order=8,
        support_box=box,
        name=f"gaussian-bump(d={d})",
        fourier=fourier,
        grid_step=0.05,
        radial_support=True,
    )


@lru_cache(maxsize=8)
def poly_bump(d: int = 2, power: int = 4) -> TestFunction:
    """Compactly supported bump (1-|x|^2)^power on the unit ball."""
    import sympy as sp

    xs = sp.symbols(f"x0:{d}")
    r2 = sum(x * x for x in xs)
    expr = (1 - r2) ** power

    @lru_cache(maxsize=256)
    def lambdified(alpha: tuple[int, ...]):
        e = expr
        for x, a in zip(xs, alpha):
            for _ in range(a):
                e = sp.diff(e, x)
        return sp.lambdify(xs, e, "numpy")

    def evaluate(alpha, pts):
        fn = lambdified(tuple(alpha))
        inside = np.sum(pts * pts, axis=-1) <= 1.0
        vals = np.asarray(fn(*[pts[..., i] for i in range(d)]), float)
        vals = np.broadcast_to(vals, inside.shape).copy()
        vals[~inside] = 0.0
        return vals

    def func(pts):
        return evaluate((0,) * d, pts)

    box = (tuple([-1.0] * d), tuple([1.0] * d))
    return TestFunction(
        dimension=d,
        func=func,
        derivative_impl=evaluate,
        sobolev_order=power,
        support_box=box,
        name=f"poly-bump(d={d}, power={power})",
        grid_step=0.01,
        radial_support=True,
    )


def indicator_box(lo, hi) -> TestFunction:
    """Indicator of the axis box [lo, hi] (order-zero statistics only)."""
    lo = tuple(float(a) for a in np.atleast_1d(lo))
    hi = tuple(float(b) for b in np.atleast_1d(hi))
    d = len(lo)
    if len(hi) != d or any(b <= a for a, b in zip(lo, hi)):
        raise ValueError("box needs lo < hi per axis")

    def func(pts):
        inside = np.ones(pts.shape[:-1], dtype=bool)
        for axis in range(d):
            inside &= (pts[..., axis] >= lo[axis]) & (pts[..., axis] <= hi[axis])
        return inside.astype(float)

    def fourier(ts):
        ts = np.asarray(ts, float)
        out = np.ones(ts.shape[:-1], dtype=complex)
        for axis in range(d):
            t = ts[..., axis]
            piece = np.empty_like(out)
            nz = np.abs(t) > 1e-14
            tz = t[nz]
            piece[nz] = (np.exp(1j * tz * hi[axis]) - np.exp(1j * tz * lo[axis])) / (
                1j * tz
            )
            piece[~nz] = hi[axis] - lo[axis]
            out = out * piece
        return out

    def derivative(alpha, pts):
        raise ValueError("indicator statistics carry no derivatives")

    return TestFunction(
        dimension=d,
        func=func,
        derivative_impl=derivative,
        sobolev_order=0,
        support_box=(lo, hi),
        name=f"indicator-box({lo}, {hi})",
        fourier=fourier,
        grid_step=0.05,
    )


def indicator_disc(radius: float = 1.0) -> TestFunction:
    """Indicator of the origin-centered planar disc."""
    if radius <= 0:
        raise ValueError("radius must be positive")

    def func(pts):
        return (np.sum(pts * pts, axis=-1) <= radius * radius).astype(float)

    def fourier(ts):
        ts = np.asarray(ts, float)
        rt = np.sqrt(np.sum(ts * ts, axis=-1))
        out = np.full(rt.shape, math.pi * radius * radius, dtype=complex)
        nz = rt > 1e-14
        out[nz] = 2.0 * math.pi * radius * special.j1(radius * rt[nz]) / rt[nz]
        return out

    def derivative(alpha, pts):
        raise ValueError("indicator statistics carry no derivatives")

    box = ((-radius, -radius), (radius, radius))
    return TestFunction(
        dimension=2,
        func=func,
        derivative_impl=derivative,
        sobolev_order=0,
        support_box=box,
        name=f"indicator-disc(r={radius:g})",
        fourier=fourier,
        grid_step=0.05,
        radial_support=True,
    )


# ---------------------------------------------------------------------------
# inner products on grids


def _joint_box(f: TestFunction, g: TestFunction):
    lo_f, hi_f = f.support_box
    lo_g, hi_g = g.support_box
    lo = [max(a, b) for a, b in zip(lo_f, lo_g)]
    hi = [min(a, b) for a, b in zip(hi_f, hi_g)]
    if any(b <= a for a, b in zip(lo, hi)):
        return None
    return lo, hi


def _default_resolution(d: int) -> int:
    return {1: 4096, 2: 384, 3: 64}[d]


def _midpoint_grid(lo, hi, n):
    axes = [l + (np.arange(n) + 0.5) * (h - l) / n for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    cell = float(np.prod([(h - l) / n for l, h in zip(lo, hi)]))
    return pts, cell


def _grid_integral(values: np.ndarray, cell: float) -> float:
    return float(values.sum() * cell)


def l2_inner(
    f: TestFunction,
    g: TestFunction,
    resolution: int | None = None,
) -> float:
    """L2 inner product <f, g> by midpoint quadrature on the joint support."""
    return inner_with_derivative(f, g, (0,) * f.dimension, resolution)


def inner_with_derivative(
    f: TestFunction,
    g: TestFunction,
    gamma,
    resolution: int | None = None,
) -> float:
    """Inner product <f, d^gamma g> by midpoint quadrature.

    When the total order is even and both functions carry enough derivatives,
    the derivatives are split half-and-half between the two factors via
    integration by parts. The split form is preferred outright: it halves the
    order applied to either factor (less discretization bias on functions
    with boundary kinks) and is symmetric under exchanging f and g for the
    even splits that symmetric kernels produce. Putting every derivative on g
    is the fallback when only g is smooth enough.
    """
    gamma = tuple(int(a) for a in gamma)
    d = f.dimension
    if g.dimension != d or len(gamma) != d:
        raise ValueError("dimension mismatch")
    box = _joint_box(f, g)
    if box is None:
        return 0.0
    lo, hi = box
    n = resolution or _default_resolution(d)
    pts, cell = _midpoint_grid(lo, hi, n)

    m = sum(gamma)
    if m > 0 and m % 2 == 0:
        beta = _half_split(gamma)
        rest = tuple(gv - bv for gv, bv in zip(gamma, beta))
        if sum(beta) <= f.sobolev_order and sum(rest) <= g.sobolev_order:
            sign = (-1.0) ** sum(beta)
            return sign * _grid_integral(
                f.derivative(beta, pts) * g.derivative(rest, pts), cell
            )
    if m <= g.sobolev_order:
        return _grid_integral(f(pts) * g.derivative(gamma, pts), cell)
    raise ValueError(
        f"cannot form <f, d^{gamma} g>: insufficient derivative orders "
        f"(f: {f.sobolev_order}, g: {g.sobolev_order})"
    )


def _half_split(gamma: tuple[int, ...]) -> tuple[int, ...]:
    """A beta <= gamma with |beta| = |gamma|/2 (total order must be even)."""
    beta = [gv // 2 for gv in gamma]
    deficit = sum(gamma) // 2 - sum(beta)
    for i, gv in enumerate(gamma):
        while deficit > 0 and beta[i] < gv:
            beta[i] += 1
            deficit -= 1
    return tuple(beta)


# ---------------------------------------------------------------------------
# expansion terms


@dataclass(frozen=True)
class ExpansionContribution:
    gamma: tuple[int, ...]
    moment: float  # kernel moment; for order zero, the full defect
    inner_product: float

    @property
    def value(self) -> float:
        return self.moment / MultiIndex(self.gamma).factorial() * self.inner_product


@dataclass(frozen=True)
class ExpansionTerm:
    """One even-order coefficient of the covariance expansion in L."""

    order: int
    value: float
    contributions: tuple[ExpansionContribution, ...]

    def check_bookkeeping(self, tol: float = 1e-12) -> bool:
        return abs(self.value - sum(c.value for c in self.contributions)) <= tol * (
            1.0 + abs(self.value)
        )


def _require_even(m: int):
    if m < 0:
        raise ValueError("order must be nonnegative")
    if m % 2 == 1:
        raise ValueError(
            f"odd order {m} vanishes identically by symmetry; do not request it"
        )


def q_term_spatial(
    kernel: TruncatedCorrelationKernel,
    f: TestFunction,
    g: TestFunction,
    m: int,
    spec: QuadratureSpec | None = None,
    resolution: int | None = None,
) -> ExpansionTerm:
    """Order-m expansion term from kernel moments and <f, d^gamma g>."""
    _require_even(m)
    d = kernel.dimension
    if f.dimension != d or g.dimension != d:
        raise ValueError("function dimensions must match the kernel")
    if m == 0:
        defect = kernel.diagonal_intensity + tensor_moment(kernel, (0,) * d, spec)
        inner = l2_inner(f, g, resolution)
        contrib = ExpansionContribution((0,) * d, defect, inner)
        return ExpansionTerm(order=0, value=defect * inner, contributions=(contrib,))
    contribs = []
    total = 0.0
    for idx in multi_indices_of_order(d, m):
        gamma = idx.entries
        if is_exact_zero_moment(kernel, gamma):
            continue
        mom = tensor_moment(kernel, gamma, spec)
        inner = inner_with_derivative(f, g, gamma, resolution)
        contribs.append(ExpansionContribution(gamma, mom, inner))
        total += mom / idx.factorial() * inner
    return ExpansionTerm(order=m, value=total, contributions=tuple(contribs))


def _sampled_transform(func: TestFunction, grid: GridField):
    field = GridField(
        extents=grid.extents,
        samples=grid.samples,
        origin=grid.origin,
        values=np.asarray(func(_grid_points(grid)), float).reshape(grid.samples),
    )
    return dft_forward(field).values


def _fourier_on_lattice(func: TestFunction, freq: "np.ndarray", grid: GridField):
    if func.fourier is not None:
        return np.asarray(func.fourier(freq), complex)
    return _sampled_transform(func, grid)


def _grid_points(grid: GridField) -> np.ndarray:
    mesh = np.meshgrid(*grid.axes(), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1).reshape(grid.samples + (-1,))


def _transform_grid(f: TestFunction, g: TestFunction, samples: int | None):
    d = f.dimension
    radius = max(f.support_radius, g.support_radius) + 1.0
    n = samples or {1: 8192, 2: 256, 3: 64}[d]
    h = 2.0 * radius / n
    origin = tuple([-radius + 0.5 * h] * d)
    return GridField(
        extents=tuple([2.0 * radius] * d),
        samples=tuple([n] * d),
        origin=origin,
        values=np.zeros(tuple([n] * d)),
    )


def q_term_fourier(
    kernel: TruncatedCorrelationKernel,
    f: TestFunction,
    g: TestFunction,
    m: int,
    spec: QuadratureSpec | None = None,
    samples: int | None = None,
) -> ExpansionTerm:
    """Order-m expansion term from the transform side.

    Uses d^gamma Khat(0) = i^|gamma| I(gamma) and frequency-lattice sums of
    t^gamma fhat conj(ghat); closed-form transforms are preferred, sampled
    DFTs are the fallback.
    """
    _require_even(m)
    d = kernel.dimension
    grid = _transform_grid(f, g, samples)
    spectrum = dft_forward(grid)  # only for its frequency lattice
    freqs = spectrum.meshgrid()
    tpts = np.stack([fr.ravel() for fr in freqs], axis=-1).reshape(
        grid.samples + (d,)
    )
    fhat = _fourier_on_lattice(f, tpts, grid)
    ghat = _fourier_on_lattice(g, tpts, grid)
    cell = spectrum.cell_volume()
    cross = fhat * np.conj(ghat)
    pref = (2.0 * math.pi) ** (-d)

    if m == 0:
        khat0 = kernel_fourier(kernel, np.zeros(d))
        weight = kernel.diagonal_intensity + khat0
        inner = pref * float(np.real(cross.sum() * cell))
        contrib = ExpansionContribution((0,) * d, weight, inner)
        return ExpansionTerm(order=0, value=weight * inner, contributions=(contrib,))

    sign = (-1.0) ** (m // 2)  # i^m for even m
    contribs = []
    total = 0.0
    for idx in multi_indices_of_order(d, m):
        gamma = idx.entries
        if is_exact_zero_moment(kernel, gamma):
            continue
        mom = tensor_moment(kernel, gamma, spec)
        mono = np.ones_like(cross, dtype=float)
        for axis, a in enumerate(gamma):
            if a:
                mono = mono * tpts[..., axis] ** a
        lattice_sum = float(np.real((mono * cross).sum() * cell))
        # <f, d^gamma g> = (2 pi)^-d (-i)^m  int t^gamma fhat conj(ghat)
        inner = pref * sign * lattice_sum
        contribs.append(ExpansionContribution(gamma, mom, inner))
        total += mom / idx.factorial() * inner
    return ExpansionTerm(order=m, value=total, contributions=tuple(contribs))


def _laplacian_power(func: TestFunction, q: int, pts: np.ndarray) -> np.ndarray:
    """Delta^q f via the multinomial expansion over order-q multi-indices."""
    d = func.dimension
    if q == 0:
        return func(pts)
    out = np.zeros(pts.shape[:-1])
    for idx in multi_indices_of_order(d, q):
        beta = idx.entries
        coeff = math.factorial(q) / idx.factorial()
        out = out + coeff * func.derivative(tuple(2 * b for b in beta), pts)
    return out


def q_term_isotropic(
    kernel: TruncatedCorrelationKernel,
    f: TestFunction,
    g: TestFunction,
    p: int,
    spec: QuadratureSpec | None = None,
    resolution: int | None = None,
) -> ExpansionTerm:
    """Order-2p term of an isotropic kernel via radial moments.

    The half Laplacian power for odd p acts as the gradient of the integer
    power, so the inner product becomes a sum over coordinate derivatives.
    """
    if not kernel.isotropic:
        raise ValueError("isotropic reduction requires an isotropic kernel")
    if p < 0:
        raise ValueError("p must be nonnegative")
    d = kernel.dimension
    sigma_d = sphere_surface_area(d)
    if p == 0:
        j = radial_moment(kernel, d - 1, spec)
        weight = kernel.diagonal_intensity + sigma_d * j
        inner = l2_inner(f, g, resolution)
        contrib = ExpansionContribution((0,) * d, weight, inner)
        return ExpansionTerm(order=0, value=weight * inner, contributions=(contrib,))

    j = radial_moment(kernel, d - 1 + 2 * p, spec)
    denom = math.factorial(p) * 2.0**p
    for jj in range(p):
        denom *= d + 2 * jj
    coeff = ((-1.0) ** p) * sigma_d * j / denom

    box = _joint_box(f, g)
    if box is None:
        inner = 0.0
    else:
        lo, hi = box
        n = resolution or _default_resolution(d)
        pts, cell = _midpoint_grid(lo, hi, n)
        if p % 2 == 0:
            q = p // 2
            inner = _grid_integral(
                _laplacian_power(f, q, pts) * _laplacian_power(g, q, pts), cell
            )
        else:
            q = (p - 1) // 2
            inner = 0.0
            for axis in range(d):
                fa = _gradient_of_laplacian_power(f, q, axis, pts)
                ga = _gradient_of_laplacian_power(g, q, axis, pts)
                inner += _grid_integral(fa * ga, cell)
    value = coeff * inner
    contrib = ExpansionContribution(
        gamma=(2 * p,) + (0,) * (d - 1), moment=coeff, inner_product=inner
    )
    # bookkeeping note: the single stored triple carries the reduced
    # coefficient (not a raw kernel moment) and the Sobolev-form inner product
    term = ExpansionTerm(order=2 * p, value=value, contributions=(contrib,))
    return term


def _gradient_of_laplacian_power(func, q, axis, pts):
    d = func.dimension
    out = np.zeros(pts.shape[:-1])
    for idx in multi_indices_of_order(d, q):
        beta = idx.entries
        coeff = math.factorial(q) / idx.factorial()
        alpha = tuple(2 * b + (1 if i == axis else 0) for i, b in enumerate(beta))
        out = out + coeff * func.derivative(alpha, pts)
    return out


# ---------------------------------------------------------------------------
# variance upper bounds


def sobolev_seminorm_sq(f: TestFunction, k: int, resolution: int | None = None) -> float:
    """|f|_{H^k}^2 as the multinomial sum of squared order-k derivatives."""
    if k == 0:
        return l2_inner(f, f, resolution)
    d = f.dimension
    total = 0.0
    for idx in multi_indices_of_order(d, k):
        beta = idx.entries
        coeff = math.factorial(k) / idx.factorial()
        box = f.support_box
        pts, cell = _midpoint_grid(*box, resolution or _default_resolution(d))
        vals = f.derivative(beta, pts)
        total += coeff * _grid_integral(vals * vals, cell)
    return total


def _transform_derivative_sup(
    kernel: TruncatedCorrelationKernel, gamma, grid_points: int = 129
) -> float:
    """Grid maximum of |d^gamma Khat| out to 4x the inverse truncation radius.

    A grid maximum can undershoot the true sup; the frequency box is centered
    where the derivatives of the transform of a truncated kernel concentrate.
    """
    d = kernel.dimension
    if kernel.total_variation == 0.0:
        return 0.0
    B = 4.0 / kernel.truncation_radius
    taxis = np.linspace(-B, B, grid_points)
    x, w = np.polynomial.legendre.leggauss(96)
    R = kernel.truncation_radius
    nodes = R * x
    weights = R * w
    if d == 1:
        dens = kernel.density_at(nodes[:, None])
        zmono = nodes ** gamma[0]
        phase = np.exp(1j * np.outer(nodes, taxis))
        vals = (weights * dens * zmono) @ phase
        return float(np.max(np.abs(np.real(vals))))
    if d == 2:
        z1 = nodes[:, None].repeat(len(nodes), 1)
        z2 = nodes[None, :].repeat(len(nodes), 0)
        pts = np.stack([z1.ravel(), z2.ravel()], axis=-1)
        dens = kernel.density_at(pts).reshape(len(nodes), len(nodes))
        core = (
            dens
            * (nodes ** gamma[0])[:, None]
            * (nodes ** gamma[1])[None, :]
            * np.outer(weights, weights)
        )
        e1 = np.exp(1j * np.outer(nodes, taxis))
        vals = e1.T @ core @ e1
        return float(np.max(np.abs(np.real(vals))))
    raise ValueError("transform-derivative scan implemented for d <= 2")


def variance_upper_bound(
    kernel: TruncatedCorrelationKernel,
    f: TestFunction,
    k: int,
    spec: QuadratureSpec | None = None,
) -> float:
    """Scale-free Sobolev variance bound of order k.

    For k = 0 the bound is (lambda_D + sup|Khat|) ||f||^2 and dominates the
    variance at every L after dividing by L^d. For k >= 1 the kernel must be
    hyperuniform with all moments below order 2k vanishing; then
    d^k/(2k-1)! * sup|D^2k Khat| * |f|_{H^k}^2 dominates Var/L^(d-2k).
    """
    d = kernel.dimension
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        if kernel.total_variation == 0.0:
            sup_khat = 0.0
        else:
            sup_khat = _transform_derivative_sup(kernel, (0,) * d)
            sup_khat = max(sup_khat, abs(kernel_fourier(kernel, np.zeros(d))))
        return (kernel.diagonal_intensity + sup_khat) * l2_inner(f, f)

    defect = kernel.diagonal_intensity + tensor_moment(kernel, (0,) * d, spec)
    if abs(defect) > 1e-9:
        raise HypothesisViolation(
            f"defect lambda_D + I(0) = {defect:.3e} is nonzero; the order-{k} "
            "bound needs a hyperuniform kernel"
        )
    for order in range(1, 2 * k):
        for idx in multi_indices_of_order(d, order):
            gamma = idx.entries
            mom = tensor_moment(kernel, gamma, spec)
            if abs(mom) > 1e-9:
                raise HypothesisViolation(
                    f"moment I({gamma}) = {mom:.3e} does not vanish; hypothesis "
                    f"of the order-{k} bound is violated"
                )
    sup_d2k = 0.0
    for idx in multi_indices_of_order(d, 2 * k):
        sup_d2k = max(sup_d2k, _transform_derivative_sup(kernel, idx.entries))
    return (d**k) / math.factorial(2 * k - 1) * sup_d2k * sobolev_seminorm_sq(f, k)


# ---------------------------------------------------------------------------
# exact transform-side covariance at finite scale


def covariance_exact_fourier(
    kernel: TruncatedCorrelationKernel,
    f: TestFunction,
    g: TestFunction,
    L: float,
    samples: int | None = None,
    halfwidth: float | None = None,
) -> float:
    """Cov(X_L(f), X_L(g)) as a frequency-lattice integral at finite L.

    Computes (2 pi)^-d L^d int fhat(s) conj(ghat(s)) (Khat(s/L) + lambda_D) ds
    on the lattice of a midpoint grid. The lattice spacing pi/halfwidth must
    resolve Khat at its compressed argument, which bounds halfwidth from below
    by 2 pi R_K / L (checked).
    """
    if L < 1.0:
        raise ValueError("scale L must be >= 1")
    d = kernel.dimension
    if f.dimension != d or g.dimension != d:
        raise ValueError("dimension mismatch")
    radius = max(f.support_radius, g.support_radius)
    # a kernel without a continuous part has nothing to resolve in frequency
    needed = (
        2.0 * math.pi * kernel.truncation_radius / L
        if kernel.total_variation > 0.0
        else 0.0
    )
    if halfwidth is None:
        A = max(radius + 1.0, needed)
    else:
        if halfwidth < needed:
            raise ValueError(
                f"frequency lattice too coarse: halfwidth {halfwidth:g} < "
                f"{needed:g} required to resolve the kernel transform at L={L:g}"
            )
        if halfwidth < radius:
            raise ValueError(
                f"halfwidth {halfwidth:g} does not cover the support radius "
                f"{radius:g}"
            )
        A = float(halfwidth)
    n = samples or {1: 8192, 2: 512, 3: 64}[d]
    h = 2.0 * A / n
    step = max(f.grid_step, g.grid_step)
    if h > step:
        n = int(2 ** math.ceil(math.log2(2.0 * A / step)))
        h = 2.0 * A / n
    origin = tuple([-A + 0.5 * h] * d)
    grid = GridField(
        extents=tuple([2.0 * A] * d),
        samples=tuple([n] * d),
        origin=origin,
        values=np.zeros(tuple([n] * d)),
    )
    lattice = dft_forward(grid)
    freqs = lattice.meshgrid()
    tpts = np.stack([fr.ravel() for fr in freqs], axis=-1).reshape(grid.samples + (d,))
    # always transform the sampled grid: the discrete Parseval identity is
    # what makes flat-transform kernels exact here (closed-form transforms
    # would truncate slowly decaying tails at the lattice edge)
    fhat = _sampled_transform(f, grid)
    ghat = fhat if g is f else _sampled_transform(g, grid)
    khat = kernel_fourier(kernel, tpts / L) if kernel.total_variation else 0.0
    weight = khat + kernel.diagonal_intensity
    cell = lattice.cell_volume()
    val = np.sum(fhat * np.conj(ghat) * weight) * cell
    return float(np.real(val)) * (L**d) * (2.0 * math.pi) ** (-d)


# ---------------------------------------------------------------------------
# asymptotic prediction


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Leading order and constant of Cov(X_L(f), X_L(g)) as L grows."""

    classification: str  # volume-order | suppressed-order-k | beyond-computed-range
    order_k: int | None
    leading_exponent: int | None
    leading_constant: float
    term: ExpansionTerm | None


MOMENT_NULL_THRESHOLD = 1e-9  # absolute, on symmetry-cleaned moments


def predict_asymptotics(
    kernel: TruncatedCorrelationKernel,
    f: TestFunction,
    g: TestFunction,
    max_k: int = 3,
    spec: QuadratureSpec | None = None,
) -> AsymptoticPrediction:
    """Smallest k with surviving kernel moments decides the covariance order.

    Orders fall only by even steps: the exponent is d - 2k and the constant is
    the order-2k expansion term.
    """
    d = kernel.dimension
    defect = kernel.diagonal_intensity + tensor_moment(kernel, (0,) * d, spec)
    if abs(defect) > MOMENT_NULL_THRESHOLD:
        term = q_term_spatial(kernel, f, g, 0, spec)
        return AsymptoticPrediction(
            classification="volume-order",
            order_k=0,
            leading_exponent=d,
            leading_constant=term.value,
            term=term,
        )
    for k in range(1, max_k + 1):
        alive = False
        for idx in multi_indices_of_order(d, 2 * k):
            if abs(tensor_moment(kernel, idx.entries, spec)) > MOMENT_NULL_THRESHOLD:
                alive = True
                break
        if alive:
            term = q_term_spatial(kernel, f, g, 2 * k, spec)
            return AsymptoticPrediction(
                classification=f"suppressed-order-{k}",
                order_k=k,
                leading_exponent=d - 2 * k,
                leading_constant=term.value,
                term=term,
            )
    return AsymptoticPrediction(
        classification="beyond-computed-range",
        order_k=None,
        leading_exponent=None,
        leading_constant=0.0,
        term=None,
    )


# ---------------------------------------------------------------------------
# line-oriented serialization


def format_expansion_term(term: ExpansionTerm) -> str:
    return f"Q m={term.order} value={term.value:.12g} terms={len(term.contributions)}"


def parse_expansion_term(line: str) -> tuple[int, float, int]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "Q":
        raise ValueError(f"not an expansion record: {line!r}")
    fields = dict(p.split("=", 1) for p in parts[1:])
    return int(fields["m"]), float(fields["value"]), int(fields["terms"])
