"""Linear statistics on samples, cumulant estimators, and scaling fits.

The empirical side of the covariance asymptotics: evaluate X_L(f) on seeded
replicates, estimate per-scale variances with jackknife intervals, and fit
log-log scaling exponents with bootstrap confidence half-widths. The support
guard is strict rejection by default: evaluating f(./L) outside a sample's
usable window is exactly the edge effect the asymptotics exclude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import derived_rng
from .expansion import TestFunction
from .simulate import BoxWindow, DiscWindow, MeasureSample, PointSample

__all__ = [
    "SupportError",
    "linear_statistic",
    "k_statistics",
    "ProcessSpec",
    "StatisticSeries",
    "VarianceCurve",
    "variance_curve",
    "ScalingFit",
    "fit_scaling",
    "series_to_csv",
    "summary_to_csv",
    "series_from_csv",
    "summary_from_csv",
]


class SupportError(ValueError):
    """The scaled test function does not fit in the sample's usable window."""

    def __init__(self, message, required_radius=None):
        super().__init__(message)
        self.required_radius = required_radius


def _scaled_support(f: TestFunction, L: float):
    lo, hi = f.support_box
    return [v * L for v in lo], [v * L for v in hi]


def _check_support(f: TestFunction, L: float, window) -> None:
    if f.radial_support:
        # the support is the origin ball of radius L * support_radius
        r = L * f.support_radius
        if isinstance(window, DiscWindow):
            slack = window.radius - math.hypot(*window.center) - r
            if slack >= 0:
                return
        elif isinstance(window, BoxWindow):
            if all(a <= -r and r <= b for a, b in zip(window.lo, window.hi)):
                return
    else:
        lo, hi = _scaled_support(f, L)
        if isinstance(window, (BoxWindow, DiscWindow)) and window.contains_box(
            lo, hi
        ):
            return
    required = L * f.support_radius
    raise SupportError(
        f"support of f(./L) at L={L:g} needs a window covering radius "
        f"{required:g}; sample window is {window}",
        required_radius=required,
    )


def linear_statistic(
    sample,
    f: TestFunction,
    L: float,
    enforce_support: bool = True,
) -> float:
    """X_L(f): sum of f(x/L) over points, or the grid integral against the density.

    ``enforce_support=False`` skips the usable-window guard; finite ensembles
    whose window cannot contain the scaled support (edge-biased by
    construction) are the one sanctioned use.
    """
    if L <= 0:
        raise ValueError("scale L must be positive")
    if isinstance(sample, PointSample):
        if enforce_support:
            _check_support(f, L, sample.window)
        if sample.count == 0:
            return 0.0
        return float(np.sum(f(sample.points / L)))
    if isinstance(sample, MeasureSample):
        grid = sample.field
        if enforce_support:
            lo, hi = _scaled_support(f, L)
            axes = grid.axes()
            glo = [float(ax[0]) for ax in axes]
            ghi = [float(ax[-1]) for ax in axes]
            if not all(g <= a and b <= h for g, a, b, h in zip(glo, lo, hi, ghi)):
                raise SupportError(
                    f"scaled support {lo}..{hi} exceeds the sampled grid "
                    f"{glo}..{ghi}",
                    required_radius=L * f.support_radius,
                )
        mesh = np.meshgrid(*grid.axes(), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = f(pts / L).reshape(grid.samples)
        return float(np.sum(vals * grid.values) * grid.cell_volume())
    raise TypeError(f"unsupported sample type {type(sample).__name__}")


# ---------------------------------------------------------------------------
# unbiased cumulant estimators


def k_statistics(values: Sequence[float], order: int) -> float:
    """Unbiased k-statistic of the requested order (1 through 4)."""
    x = np.asarray(values, float)
    n = x.size
    if order not in (1, 2, 3, 4):
        raise ValueError("k-statistics implemented for orders 1..4")
    if n < order + 1:
        raise ValueError(f"order-{order} k-statistic needs at least {order + 1} values")
    mean = x.mean()
    if order == 1:
        return float(mean)
    d = x - mean
    m2 = np.mean(d * d)
    if order == 2:
        return float(n / (n - 1) * m2)
    m3 = np.mean(d**3)
    if order == 3:
        return float(n * n * m3 / ((n - 1) * (n - 2)))
    m4 = np.mean(d**4)
    return float(
        n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2)
        / ((n - 1) * (n - 2) * (n - 3))
    )


# ---------------------------------------------------------------------------
# variance curves over the scale


@dataclass(frozen=True)
class ProcessSpec:
    """A named, seedable sampler."""

    label: str
    sampler: Callable[[int], object]


@dataclass(frozen=True)
class StatisticSeries:
    """Replicated values of X_L(f) for each scale in a sweep."""

    process_label: str
    function_label: str
    scales: tuple[float, ...]
    values: np.ndarray  # (n_scales, replicates)
    seed_base: int

    def __post_init__(self):
        if self.values.shape[0] != len(self.scales):
            raise ValueError("one row of replicates per scale required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("statistic values must be finite")


@dataclass(frozen=True)
class VarianceCurve:
    series: StatisticSeries
    variances: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray

    @property
    def scales(self):
        return self.series.scales


def _jackknife_variance_ci(vals: np.ndarray, level_z: float = 1.96):
    n = vals.size
    full = vals.var(ddof=1)
    total = vals.sum()
    total_sq = (vals * vals).sum()
    # leave-one-out variances in closed form
    loo_mean = (total - vals) / (n - 1)
    loo_sq = (total_sq - vals * vals) / (n - 1)
    loo_var = (loo_sq - loo_mean**2) * (n - 1) / (n - 2)
    pseudo = n * full - (n - 1) * loo_var
    se = math.sqrt(max(pseudo.var(ddof=1) / n, 0.0))
    return full, full - level_z * se, full + level_z * se


def variance_curve(
    process: ProcessSpec,
    f: TestFunction,
    scales: Sequence[float],
    replicates: int,
    seed_base: int,
    enforce_support: bool = True,
) -> VarianceCurve:
    """Replicate X_L(f) across scales; per-scale variance with jackknife CI.

    Replicate r uses the generator seeded seed_base + r, so one integer
    reproduces the whole experiment; each sample is reused for every L.
    """
    if replicates < 4:
        raise ValueError("variance estimation needs at least 4 replicates")
    scales = tuple(float(L) for L in scales)
    values = np.empty((len(scales), replicates))
    for r in range(replicates):
        sample = process.sampler(seed_base + r)
        for i, L in enumerate(scales):
            values[i, r] = linear_statistic(
                sample, f, L, enforce_support=enforce_support
            )
    series = StatisticSeries(
        process_label=process.label,
        function_label=f.name,
        scales=scales,
        values=values,
        seed_base=int(seed_base),
    )
    stats = [_jackknife_variance_ci(values[i]) for i in range(len(scales))]
    return VarianceCurve(
        series=series,
        variances=np.array([s[0] for s in stats]),
        ci_lo=np.array([s[1] for s in stats]),
        ci_hi=np.array([s[2] for s in stats]),
    )


# ---------------------------------------------------------------------------
# scaling fits


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of log variance against log scale."""

    exponent: float
    log_constant: float
    residual_rms: float
    exponent_half_width: float
    scales_used: tuple[float, ...]

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)


def _fit_loglog(scales, variances):
    logL = np.log(scales)
    logV = np.log(variances)
    A = np.stack([logL, np.ones_like(logL)], axis=-1)
    coef, *_ = np.linalg.lstsq(A, logV, rcond=None)
    resid = logV - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(coef[0]), float(coef[1]), rms


def fit_scaling(
    curve: VarianceCurve,
    bootstrap: int = 200,
) -> ScalingFit:
    """Fit the variance growth exponent; bootstrap CI over replicates.

    Nonpositive variance estimates (possible in deep-suppression regimes with
    few replicates) are excluded with a warning.
    """
    import warnings

    scales = np.asarray(curve.scales, float)
    variances = np.asarray(curve.variances, float)
    keep = variances > 0
    if not np.all(keep):
        warnings.warn(
            f"excluding {np.count_nonzero(~keep)} nonpositive variance entries",
            stacklevel=2,
        )
    scales, variances = scales[keep], variances[keep]
    if len(scales) < 3:
        raise ValueError("scaling fits need at least 3 usable scales")
    exponent, logc, rms = _fit_loglog(scales, variances)

    values = curve.series.values[keep]
    n_rep = values.shape[1]
    rng = derived_rng(curve.series.seed_base, 987654321)
    exps = []
    for _ in range(bootstrap):
        idx = rng.integers(0, n_rep, size=n_rep)
        v = values[:, idx].var(axis=1, ddof=1)
        if np.all(v > 0):
            exps.append(_fit_loglog(scales, v)[0])
    half = 1.96 * float(np.std(exps)) if exps else float("nan")
    return ScalingFit(
        exponent=exponent,
        log_constant=logc,
        residual_rms=rms,
        exponent_half_width=half,
        scales_used=tuple(float(s) for s in scales),
    )


# ---------------------------------------------------------------------------
# CSV formats


def series_to_csv(series: StatisticSeries, path) -> None:
    """Rows `L,replicate,value`."""
    with open(path, "w") as fh:
        fh.write("L,replicate,value\n")
        for i, L in enumerate(series.scales):
            for r in range(series.values.shape[1]):
                fh.write(f"{L:.12g},{r},{series.values[i, r]:.12g}\n")


def series_from_csv(path) -> dict[float, np.ndarray]:
    out: dict[float, list[float]] = {}
    with open(path) as fh:
        header = fh.readline()
        if header.strip() != "L,replicate,value":
            raise ValueError("unexpected series header")
        for line in fh:
            L, _, v = line.strip().split(",")
            out.setdefault(float(L), []).append(float(v))
    return {L: np.asarray(v) for L, v in out.items()}


def summary_to_csv(curve: VarianceCurve, path) -> None:
    """Rows `L,variance,ci_lo,ci_hi,n`."""
    n = curve.series.values.shape[1]
    with open(path, "w") as fh:
        fh.write("L,variance,ci_lo,ci_hi,n\n")
        for L, v, lo, hi in zip(
            curve.scales, curve.variances, curve.ci_lo, curve.ci_hi
        ):
            fh.write(f"{L:.12g},{v:.12g},{lo:.12g},{hi:.12g},{n}\n")


def summary_from_csv(path) -> list[dict]:
    """Parse the summary rows back into per-scale records."""
    out = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "L,variance,ci_lo,ci_hi,n":
            raise ValueError("unexpected summary header")
        for line in fh:
            L, v, lo, hi, n = line.strip().split(",")
            out.append(
                {
                    "L": float(L),
                    "variance": float(v),
                    "ci_lo": float(lo),
                    "ci_hi": float(hi),
                    "n": int(n),
                }
            )
    return out
