"""Set-partition algebra, cumulant reduction identities, and discrete verifiers.

Correlation functions and their truncations are related exactly like moments
and cumulants: a signed sum over set partitions one way, a plain product sum
back. The reduction identity rewrites the order-m cumulant of linear
statistics as a pairing of the order-m truncated correlation with a
difference-product polynomial, which is where the cancellation that drives
the central limit theorems lives. Everything here is small enough to verify
by exhaustive enumeration, in exact arithmetic where the inputs are rational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import QuadratureSpec, integrate_tensor

__all__ = [
    "SetPartition",
    "set_partitions",
    "bell_number",
    "CorrelationTable",
    "truncate_correlations",
    "moebius_expand",
    "multilinear_cumulant",
    "TruncationMap",
    "truncation_maps",
    "cumulant_weight_reduced",
    "cumulant_weight_raw",
    "DiscreteProcess",
    "correlation_table",
    "ThreeWayCumulantReport",
    "cumulant_linear_statistic_discrete",
    "IdentityReport",
    "verify_integral_identity_discrete",
    "dpp_correlation",
    "dpp_correlation_table",
    "dpp_truncated_correlation",
    "integral_identity_defect_matrix",
    "verify_integral_identity_projection",
    "ginibre_matrix_kernel",
    "ginibre_truncated_density",
    "higher_order_moment",
    "load_matrix",
    "save_matrix",
]


# ---------------------------------------------------------------------------
# set partitions


@dataclass(frozen=True)
class SetPartition:
    """Partition of {0, ..., m-1} into disjoint nonempty blocks."""

    blocks: tuple[tuple[int, ...], ...]

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def ground_size(self) -> int:
        return sum(len(b) for b in self.blocks)


def set_partitions(m: int) -> list[SetPartition]:
    """All partitions of an m-element set; Bell(m) of them. Capped at m = 10."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > 10:
        raise ValueError("m > 10 rejected (Bell-number growth)")
    out: list[SetPartition] = []

    def build(i: int, blocks: list[list[int]]):
        if i == m:
            out.append(
                SetPartition(tuple(tuple(b) for b in blocks))
            )
            return
        for b in blocks:
            b.append(i)
            build(i + 1, blocks)
            b.pop()
        blocks.append([i])
        build(i + 1, blocks)
        blocks.pop()

    build(0, [])
    return out


def bell_number(m: int) -> int:
    """Bell numbers by the triangle recurrence (oracle for the enumerator)."""
    if m < 1:
        return 1
    row = [1]
    for _ in range(m - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1]


# ---------------------------------------------------------------------------
# correlation tables and their truncation


@dataclass
class CorrelationTable:
    """Correlation values on a finite ground set, zero on the diagonal.

    ``values[k]`` maps sorted distinct k-tuples to the symmetric value; the
    evaluator extends by symmetry and by the zero-on-coincidence convention.
    """

    ground_size: int
    max_order: int
    values: dict[int, dict[tuple[int, ...], object]]

    def rho(self, points: Sequence[int]):
        k = len(points)
        if k > self.max_order:
            raise ValueError(f"table holds orders up to {self.max_order}")
        if len(set(points)) != k:
            return 0
        return self.values[k][tuple(sorted(points))]


def truncate_correlations(table: CorrelationTable, k: int):
    """Evaluator of the order-k truncated correlation from plain correlations.

    The signed partition sum applies verbatim to any argument tuple, repeated
    entries included; coincidences are handled by the table's zero convention.
    """
    partitions = set_partitions(k)

    def rho_truncated(points: Sequence[int]):
        if len(points) != k:
            raise ValueError(f"expected {k} points")
        total = 0
        for part in partitions:
            ell = part.block_count
            sign = (-1) ** (ell - 1) * math.factorial(ell - 1)
            prod = 1
            for block in part.blocks:
                prod = prod * table.rho([points[i] for i in block])
                if prod == 0:
                    break
            total = total + sign * prod
        return total

    return rho_truncated


def moebius_expand(truncated_by_order: dict[int, Callable], k: int):
    """Inverse transform: correlations as plain products of truncated ones."""
    partitions = set_partitions(k)

    def rho(points: Sequence[int]):
        total = 0
        for part in partitions:
            prod = 1
            for block in part.blocks:
                prod = prod * truncated_by_order[len(block)](
                    [points[i] for i in block]
                )
            total = total + prod
        return total

    return rho


def multilinear_cumulant(moment_of: Callable[[tuple[int, ...]], object], n: int):
    """Joint cumulant of (Y_1, ..., Y_n) from a joint-moment oracle.

    ``moment_of(S)`` must return E prod_{i in S} Y_i for index tuples S.
    """
    if n > 8:
        raise ValueError("n > 8 rejected (partition growth)")
    total = 0
    for part in set_partitions(n):
        ell = part.block_count
        sign = (-1) ** (ell - 1) * math.factorial(ell - 1)
        prod = 1
        for block in part.blocks:
            prod = prod * moment_of(tuple(block))
        total = total + sign * prod
    return total


# ---------------------------------------------------------------------------
# reduction polynomials


@dataclass(frozen=True)
class TruncationMap:
    """Function from row indices {0..m-1} to column indices; level = |range|."""

    mapping: tuple[int, ...]

    @property
    def level_count(self) -> int:
        return len(set(self.mapping))


def truncation_maps(m: int, codomain: int) -> list[TruncationMap]:
    """All functions [m] -> [codomain] (the reduction sums run over these)."""
    return [
        TruncationMap(t) for t in itertools.product(range(codomain), repeat=m)
    ]


@lru_cache(maxsize=128)
def _reduced_coefficient(m: int, level: int) -> Fraction:
    return (
        Fraction((-1) ** (m - level))
        * Fraction(math.factorial(level - 1) * math.factorial(m - level))
        / Fraction(math.factorial(m) * math.factorial(m - 1))
    )


@lru_cache(maxsize=128)
def _raw_coefficient(m: int, level: int) -> Fraction:
    return Fraction(
        (-1) ** (m - level), math.comb(m - 1, level - 1) * math.factorial(m)
    )


def cumulant_weight_reduced(zeta) -> float:
    """Difference-product form of the order-m reduction polynomial.

    Sums c_tau * prod_i (zeta[i, tau(i)] - zeta[i, m-1]) over all functions
    tau from rows to the first m-1 columns. Invariant under adding row
    constants, which is the cancellation the reduction exists to expose.
    """
    zeta = _as_matrix(zeta)
    m = len(zeta)
    if m < 2:
        raise ValueError("reduced form needs m >= 2")
    if m > 7:
        raise ValueError("m > 7 rejected (m^m enumeration guard)")
    total = None
    for tau in itertools.product(range(m - 1), repeat=m):
        level = len(set(tau))
        coeff = _reduced_coefficient(m, level)
        prod = coeff
        for i, t in enumerate(tau):
            prod = prod * (zeta[i][t] - zeta[i][m - 1])
        total = prod if total is None else total + prod
    return total


def cumulant_weight_raw(zeta) -> float:
    """Full-function form: (1/m!) sum over tau: [m] -> [m] of
    (-1)^(m - level) / C(m-1, level-1) * prod_i zeta[i, tau(i)].
    """
    zeta = _as_matrix(zeta)
    m = len(zeta)
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > 7:
        raise ValueError("m > 7 rejected (m^m enumeration guard)")
    total = None
    for tau in itertools.product(range(m), repeat=m):
        level = len(set(tau))
        prod = _raw_coefficient(m, level)
        for i, t in enumerate(tau):
            prod = prod * zeta[i][t]
        total = prod if total is None else total + prod
    return total


def _as_matrix(zeta):
    if isinstance(zeta, np.ndarray):
        if zeta.ndim != 2 or zeta.shape[0] != zeta.shape[1]:
            raise ValueError("zeta must be square")
        return [[float(v) for v in row] for row in zeta]
    rows = [list(r) for r in zeta]
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("zeta must be square")
    return rows


# ---------------------------------------------------------------------------
# explicit finite processes


@dataclass(frozen=True)
class DiscreteProcess:
    """Explicit distribution over point configurations on {0, ..., n-1}."""

    ground_size: int
    configurations: tuple[tuple[frozenset, Fraction], ...]

    def __post_init__(self):
        if self.ground_size > 8:
            raise ValueError("ground set size capped at 8")
        total = sum(p for _, p in self.configurations)
        if total != 1:
            raise ValueError(f"configuration weights sum to {total}, not 1")
        if any(p < 0 for _, p in self.configurations):
            raise ValueError("negative configuration weight")

    @classmethod
    def uniform_subsets(cls, n: int, k: int) -> "DiscreteProcess":
        subs = list(itertools.combinations(range(n), k))
        w = Fraction(1, len(subs))
        return cls(n, tuple((frozenset(s), w) for s in subs))

    @classmethod
    def mixture(cls, parts: Iterable[tuple["DiscreteProcess", Fraction]]) -> "DiscreteProcess":
        parts = list(parts)
        n = parts[0][0].ground_size
        combined: dict[frozenset, Fraction] = {}
        for proc, weight in parts:
            if proc.ground_size != n:
                raise ValueError("mixture components must share the ground set")
            for cfg, p in proc.configurations:
                combined[cfg] = combined.get(cfg, Fraction(0)) + weight * p
        return cls(n, tuple(combined.items()))

    def has_constant_count(self) -> bool:
        counts = {len(cfg) for cfg, p in self.configurations if p > 0}
        return len(counts) == 1


def correlation_table(process: DiscreteProcess, max_order: int) -> CorrelationTable:
    """Exact correlation table: rho_k(x) = P(all of x present), x distinct."""
    n = process.ground_size
    values: dict[int, dict[tuple[int, ...], Fraction]] = {}
    for k in range(1, max_order + 1):
        level: dict[tuple[int, ...], Fraction] = {}
        for tup in itertools.combinations(range(n), k):
            s = set(tup)
            level[tup] = sum(
                (p for cfg, p in process.configurations if s <= cfg),
                Fraction(0),
            )
        values[k] = level
    return CorrelationTable(ground_size=n, max_order=max_order, values=values)


@dataclass(frozen=True)
class ThreeWayCumulantReport:
    """Order-m cumulant of linear statistics, three independent routes."""

    order: int
    direct: object            # cumulant of the exactly enumerated joint law
    partition_form: object    # pairing of tensorized h with truncated tables
    reduced_form: object      # pairing of the reduction polynomial with rho_m^T
    constant_count: bool

    @property
    def value(self):
        return self.direct

    def partition_defect(self):
        return self.direct - self.partition_form

    def reduced_defect(self):
        return self.partition_form - self.reduced_form


class CumulantMismatch(AssertionError):
    pass


def cumulant_linear_statistic_discrete(
    process: DiscreteProcess,
    h_list: Sequence[Sequence],
    check: bool = True,
) -> ThreeWayCumulantReport:
    """kappa_m[X(h_1), ..., X(h_m)] computed three ways on a finite process.

    Route (a) enumerates the joint law of the statistics, (b) pairs block
    products of the h's with truncated correlation tables, (c) pairs the
    reduction polynomial with the order-m truncated correlation. (a) = (b)
    always; (b) = (c) exactly when the point count is a.s. constant.
    """
    m = len(h_list)
    n = process.ground_size
    hs = [[Fraction(v) if not isinstance(v, Fraction) else v for v in h] for h in h_list]
    if any(len(h) != n for h in hs):
        raise ValueError("each h must assign a value to every ground point")

    # (a) direct: moments of the joint law of Y_i = sum_x h_i(x) V_x
    stats = [
        [sum((h[x] for x in cfg), Fraction(0)) for h in hs]
        for cfg, _ in process.configurations
    ]

    def moment_of(index_set: tuple[int, ...]):
        total = Fraction(0)
        for (cfg, p), ys in zip(process.configurations, stats):
            prod = p
            for i in index_set:
                prod = prod * ys[i]
            total += prod
        return total

    direct = multilinear_cumulant(moment_of, m)

    # (b) partition form against truncated correlation tables
    table = correlation_table(process, m)
    truncated = {k: truncate_correlations(table, k) for k in range(1, m + 1)}
    partition_form = Fraction(0)
    for part in set_partitions(m):
        ell = part.block_count
        for tup in itertools.product(range(n), repeat=ell):
            weight = Fraction(1)
            for block, u in zip(part.blocks, tup):
                for i in block:
                    weight = weight * hs[i][u]
                if weight == 0:
                    break
            if weight == 0:
                continue
            partition_form += weight * truncated[ell](list(tup))

    # (c) reduced form against rho_m^T
    if m >= 2:
        rho_m_t = truncated[m]
        reduced_form = Fraction(0)
        taus = list(itertools.product(range(m - 1), repeat=m))
        coeffs = [_reduced_coefficient(m, len(set(t))) for t in taus]
        for tup in itertools.product(range(n), repeat=m):
            rho_val = rho_m_t(list(tup))
            if rho_val == 0:
                continue
            acc = Fraction(0)
            for tau, coeff in zip(taus, coeffs):
                prod = coeff
                for i, t in enumerate(tau):
                    prod = prod * (hs[i][tup[t]] - hs[i][tup[m - 1]])
                    if prod == 0:
                        break
                acc += prod
            reduced_form += acc * rho_val
    else:
        reduced_form = direct

    constant = process.has_constant_count()
    report = ThreeWayCumulantReport(
        order=m,
        direct=direct,
        partition_form=partition_form,
        reduced_form=reduced_form,
        constant_count=constant,
    )
    if check:
        if direct != partition_form:
            raise CumulantMismatch(
                f"order {m}: direct {direct} != partition form {partition_form}"
            )
        if constant and partition_form != reduced_form:
            raise CumulantMismatch(
                f"order {m}: partition form {partition_form} != reduced form "
                f"{reduced_form} despite constant point count"
            )
    return report


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of the truncated-correlation integral identity check."""

    order: int
    holds: bool
    max_defect: object
    worst_tuple: tuple[int, ...] | None
    iterated_holds: bool | None = None


def verify_integral_identity_discrete(
    process: DiscreteProcess, k: int
) -> IdentityReport:
    """Check sum_u rho_k^T(x, u) = -(k-1) rho_{k-1}^T(x) exactly.

    Holds exactly when the total point count is a.s. constant; the report
    carries the worst defect otherwise. The iterated form down to every lower
    order r is checked alongside.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    n = process.ground_size
    table = correlation_table(process, k)
    truncated = {r: truncate_correlations(table, r) for r in range(1, k + 1)}

    max_defect = Fraction(0)
    worst = None
    for xs in itertools.permutations(range(n), k - 1):
        lhs = sum(truncated[k](list(xs) + [u]) for u in range(n))
        rhs = -(k - 1) * truncated[k - 1](list(xs))
        defect = abs(lhs - rhs)
        if defect > max_defect:
            max_defect, worst = defect, xs

    iterated_ok = True
    for r in range(1, k):
        coeff = Fraction(
            (-1) ** (k - r) * math.factorial(k - 1), math.factorial(r - 1)
        )
        for xs in itertools.permutations(range(n), r):
            lhs = Fraction(0)
            for tail in itertools.product(range(n), repeat=k - r):
                lhs += truncated[k](list(xs) + list(tail))
            if lhs != coeff * truncated[r](list(xs)):
                iterated_ok = False
                break
        if not iterated_ok:
            break

    return IdentityReport(
        order=k,
        holds=(max_defect == 0),
        max_defect=max_defect,
        worst_tuple=worst,
        iterated_holds=iterated_ok if max_defect == 0 else None,
    )


# ---------------------------------------------------------------------------
# determinantal processes on finite ground sets


def dpp_correlation(kernel_matrix: np.ndarray, points: Sequence[int]) -> float:
    """rho_k as the principal minor det K[x, x] (zero when points repeat)."""
    idx = list(points)
    minor = kernel_matrix[np.ix_(idx, idx)]
    return float(np.real(np.linalg.det(minor))) if len(idx) else 1.0


def _cyclic_permutations(k: int):
    for tail in itertools.permutations(range(1, k)):
        perm = [0] * k
        seq = (0,) + tail
        for a, b in zip(seq, seq[1:] + (0,)):
            perm[a] = b
        yield perm


def dpp_truncated_correlation(
    kernel_matrix: np.ndarray, points: Sequence[int]
) -> float:
    """Cyclic-product formula for rho_k^T of a determinantal process."""
    k = len(points)
    if k > 8:
        raise ValueError("k > 8 rejected (cyclic enumeration guard)")
    if k == 1:
        return float(np.real(kernel_matrix[points[0], points[0]]))
    total = 0.0 + 0.0j
    for perm in _cyclic_permutations(k):
        prod = 1.0 + 0.0j
        for i, j in enumerate(perm):
            prod *= kernel_matrix[points[i], points[j]]
        total += prod
    return float(np.real((-1.0) ** (k - 1) * total))


def dpp_correlation_table(kernel_matrix: np.ndarray, max_order: int) -> CorrelationTable:
    n = kernel_matrix.shape[0]
    values: dict[int, dict[tuple[int, ...], float]] = {}
    for k in range(1, max_order + 1):
        values[k] = {
            tup: dpp_correlation(kernel_matrix, tup)
            for tup in itertools.combinations(range(n), k)
        }
    return CorrelationTable(ground_size=n, max_order=max_order, values=values)


def integral_identity_defect_matrix(
    kernel_matrix: np.ndarray,
    k: int,
    sample_tuples: Sequence[Sequence[int]] | None = None,
) -> float:
    """Max defect of sum_u rho_k^T(x, u) + (k-1) rho_{k-1}^T(x) for a matrix kernel.

    Truncated correlations come from the partition transform of determinantal
    minors with the zero-coincidence convention, and the ground-set sum plays
    the integral's role.
    """
    n = kernel_matrix.shape[0]
    table = dpp_correlation_table(kernel_matrix, k)
    rho_k_t = truncate_correlations(table, k)
    rho_km1_t = truncate_correlations(table, k - 1)
    if sample_tuples is None:
        sample_tuples = list(itertools.permutations(range(n), k - 1))
    worst = 0.0
    for xs in sample_tuples:
        lhs = sum(rho_k_t(list(xs) + [u]) for u in range(n))
        rhs = -(k - 1) * rho_km1_t(list(xs))
        worst = max(worst, abs(lhs - rhs))
    return worst


def verify_integral_identity_projection(
    projection: np.ndarray,
    k: int,
    sample_tuples: Sequence[Sequence[int]] | None = None,
    tol: float = 1e-10,
) -> IdentityReport:
    """Integral identity for a projection-kernel determinantal process.

    The matrix must be Hermitian and idempotent to ``tol``; the reproducing
    property is what collapses the ground-set sum.
    """
    P = np.asarray(projection)
    if not np.allclose(P, P.conj().T, atol=tol):
        raise ValueError("kernel matrix is not Hermitian")
    if not np.allclose(P @ P, P, atol=tol):
        raise ValueError("kernel matrix is not idempotent (not a projection)")
    defect = integral_identity_defect_matrix(P, k, sample_tuples)
    return IdentityReport(
        order=k,
        holds=bool(defect < 1e-9),
        max_defect=defect,
        worst_tuple=None,
    )


# ---------------------------------------------------------------------------
# continuum kernels for low-order moment probes


def ginibre_matrix_kernel(points: np.ndarray) -> np.ndarray:
    """The planar determinantal kernel evaluated on complex points."""
    z = np.asarray(points, complex)
    zi = z[:, None]
    zj = z[None, :]
    return (
        np.exp(-0.5 * np.abs(zi) ** 2 - 0.5 * np.abs(zj) ** 2 + zi * np.conj(zj))
        / math.pi
    )


def ginibre_truncated_density(m: int) -> Callable[[np.ndarray], np.ndarray]:
    """kappa_{m-1}(z_1, ..., z_{m-1}) for the infinite planar ensemble.

    Cyclic products of the exponential kernel over the m points
    (z_1, ..., z_{m-1}, 0); vectorized over leading axes. m <= 3.
    """
    if m < 2 or m > 3:
        raise ValueError("truncated densities provided for m in {2, 3}")

    def kfun(z, w):
        return (
            np.exp(-0.5 * np.abs(z) ** 2 - 0.5 * np.abs(w) ** 2 + z * np.conj(w))
            / math.pi
        )

    if m == 2:

        def density(zs):
            z = zs[..., 0] + 1j * zs[..., 1]
            zero = np.zeros_like(z)
            return np.real(-kfun(z, zero) * kfun(zero, z))

        return density

    def density(zs):
        z1 = zs[..., 0] + 1j * zs[..., 1]
        z2 = zs[..., 2] + 1j * zs[..., 3]
        zero = np.zeros_like(z1)
        cyc1 = kfun(z1, z2) * kfun(z2, zero) * kfun(zero, z1)
        cyc2 = kfun(z1, zero) * kfun(zero, z2) * kfun(z2, z1)
        return np.real(cyc1 + cyc2)

    return density


def higher_order_moment(
    truncated_density: Callable[[np.ndarray], np.ndarray],
    m: int,
    tau: TruncationMap,
    alphas: Sequence[tuple[int, ...]],
    dimension: int = 2,
    spec: QuadratureSpec | None = None,
) -> float:
    """Moment of the order-(m-1) truncated density against a split monomial.

    Integrates kappa_{m-1}(z_1, .., z_{m-1}) prod_i z_{tau(i)}^{alpha^(i)}
    over (R^d)^(m-1), divided by the product of alpha factorials. The m-th
    point sits at the origin, so tau takes values in {0, .., m-2}.
    """
    if m > 3:
        raise ValueError("m > 3 rejected (quadrature dimension guard)")
    if len(tau.mapping) != m or len(alphas) != m:
        raise ValueError("tau and alphas must have length m")
    if any(t < 0 or t > m - 2 for t in tau.mapping):
        raise ValueError("tau must map into {0, ..., m-2}")
    d = dimension
    total_dim = d * (m - 1)

    norm = 1.0
    for a in alphas:
        for ai in a:
            norm *= math.factorial(ai)

    def monomial(pts):
        out = np.ones(pts.shape[:-1])
        for i, a in enumerate(alphas):
            block = tau.mapping[i] * d
            for axis, ai in enumerate(a):
                if ai:
                    out = out * pts[..., block + axis] ** ai
        return out

    # default probe tolerance 1e-7: the downstream vanishing checks sit at
    # 1e-6, and full tolerance in 2(m-1) dimensions is disproportionate
    spec = spec or QuadratureSpec(truncation_radius=5.0, relative_tolerance=1e-7)
    val = integrate_tensor(monomial, truncated_density, spec, total_dim)
    return val / norm


# ---------------------------------------------------------------------------
# text matrix format


def save_matrix(path, matrix: np.ndarray) -> None:
    """Write a square matrix as `n` then n*n entries, row-major."""
    M = np.asarray(matrix)
    n = M.shape[0]
    with open(path, "w") as fh:
        fh.write(f"{n}\n")
        for row in M:
            fh.write(" ".join(repr(complex(v))[1:-1] if np.iscomplexobj(M) else repr(float(v)) for v in row))
            fh.write("\n")


def load_matrix(path) -> np.ndarray:
    """Read the text matrix format written by :func:`save_matrix`."""
    with open(path) as fh:
        n = int(fh.readline())
        entries = []
        for line in fh:
            entries.extend(complex(tok) for tok in line.split())
    if len(entries) != n * n:
        raise ValueError(f"expected {n * n} entries, found {len(entries)}")
    M = np.array(entries).reshape(n, n)
    if np.allclose(M.imag, 0.0):
        return M.real
    return M
