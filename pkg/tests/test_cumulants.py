import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from covasym.core import derived_rng
from covasym.cumulants import (
    CorrelationTable,
    CumulantMismatch,
    DiscreteProcess,
    TruncationMap,
    bell_number,
    correlation_table,
    cumulant_linear_statistic_discrete,
    cumulant_weight_raw,
    cumulant_weight_reduced,
    dpp_correlation,
    dpp_truncated_correlation,
    ginibre_truncated_density,
    higher_order_moment,
    integral_identity_defect_matrix,
    load_matrix,
    moebius_expand,
    multilinear_cumulant,
    save_matrix,
    set_partitions,
    truncate_correlations,
    verify_integral_identity_discrete,
    verify_integral_identity_projection,
)
from covasym.cumulants import dpp_correlation_table


def random_projection(n, rank, seed):
    rng = derived_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(a)
    return q[:, :rank] @ q[:, :rank].conj().T


class TestSetPartitions:
    def test_single_element(self):
        assert len(set_partitions(1)) == 1

    def test_bell_four(self):
        assert len(set_partitions(4)) == 15

    def test_bell_six_by_recurrence_oracle(self):
        assert len(set_partitions(6)) == bell_number(6) == 203

    def test_blocks_partition_ground_set(self):
        for part in set_partitions(5):
            flat = sorted(i for b in part.blocks for i in b)
            assert flat == list(range(5))

    def test_no_duplicates(self):
        parts = set_partitions(5)
        keys = {tuple(sorted(tuple(sorted(b)) for b in p.blocks)) for p in parts}
        assert len(keys) == len(parts) == bell_number(5)

    def test_growth_guard(self):
        with pytest.raises(ValueError):
            set_partitions(11)


def _random_symmetric_table(n, k_max, seed):
    rng = derived_rng(seed)
    values = {}
    for k in range(1, k_max + 1):
        values[k] = {
            tup: float(rng.uniform(0.5, 2.0))
            for tup in itertools.combinations(range(n), k)
        }
    return CorrelationTable(ground_size=n, max_order=k_max, values=values)


class TestTruncation:
    def test_order_one_is_identity(self):
        table = _random_symmetric_table(4, 1, 1)
        rho_t = truncate_correlations(table, 1)
        for x in range(4):
            assert rho_t([x]) == table.rho([x])

    def test_order_two_subtracts_product(self):
        table = _random_symmetric_table(4, 2, 2)
        rho_t = truncate_correlations(table, 2)
        assert rho_t([0, 1]) == pytest.approx(
            table.rho([0, 1]) - table.rho([0]) * table.rho([1])
        )

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_moebius_round_trip(self, k):
        table = _random_symmetric_table(5, k, 40 + k)
        truncated = {r: truncate_correlations(table, r) for r in range(1, k + 1)}
        rho_back = moebius_expand(truncated, k)
        for tup in itertools.combinations(range(5), k):
            assert rho_back(list(tup)) == pytest.approx(
                table.rho(list(tup)), rel=1e-12
            )

    def test_round_trip_exact_on_rationals(self):
        values = {
            1: {(i,): Fraction(i + 1, 7) for i in range(4)},
            2: {
                tup: Fraction(1, 3 + sum(tup))
                for tup in itertools.combinations(range(4), 2)
            },
        }
        table = CorrelationTable(4, 2, values)
        truncated = {r: truncate_correlations(table, r) for r in (1, 2)}
        rho_back = moebius_expand(truncated, 2)
        for tup in itertools.combinations(range(4), 2):
            assert rho_back(list(tup)) == table.rho(list(tup))


class TestMultilinearCumulant:
    def test_independent_coins_have_zero_mixed_cumulant(self):
        # Y1, Y2 independent fair +-1 coins
        def moment(idx):
            c = {i: idx.count(i) for i in set(idx)}
            return 1 if all(v % 2 == 0 for v in c.values()) else 0

        assert multilinear_cumulant(moment, 2) == 0

    def test_identical_coordinates_give_variance(self):
        def moment(idx):
            return 1 if len(idx) % 2 == 0 else 0  # fair +-1 coin moments

        assert multilinear_cumulant(moment, 2) == 1

    def test_bernoulli_third_cumulant(self):
        p = Fraction(1, 3)

        def moment(idx):
            return p  # all moments of an indicator equal p

        val = multilinear_cumulant(moment, 3)
        assert val == p * (1 - p) * (1 - 2 * p)


class TestReductionPolynomials:
    def test_m2_closed_form(self):
        # -(1/2)(y11 - y12)(y21 - y22) on the identity
        val = cumulant_weight_reduced([[1, 0], [0, 1]])
        assert val == Fraction(1, 2)

    def test_constant_rows_vanish(self):
        zeta = [[3.7] * 4 for _ in range(4)]
        assert abs(float(cumulant_weight_reduced(zeta))) == 0.0
        rng = derived_rng(55)
        z = np.tile(rng.standard_normal((5, 1)), (1, 5))
        assert abs(float(cumulant_weight_reduced(z))) < 1e-14

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
    def test_raw_equals_reduced_on_random_matrices(self, m):
        rng = derived_rng(60 + m)
        reps = 100 if m <= 4 else 20
        for _ in range(reps):
            zeta = rng.standard_normal((m, m))
            a = float(cumulant_weight_reduced(zeta))
            b = float(cumulant_weight_raw(zeta))
            assert abs(a - b) < 1e-12

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
    def test_row_shift_invariance(self, m):
        rng = derived_rng(70 + m)
        for _ in range(20):
            zeta = rng.standard_normal((m, m))
            shifts = rng.standard_normal((m, 1))
            a = float(cumulant_weight_reduced(zeta))
            b = float(cumulant_weight_reduced(zeta + shifts))
            assert abs(a - b) < 1e-12

    def test_exact_arithmetic_identity(self):
        rng = derived_rng(80)
        zeta = [
            [Fraction(int(v), 13) for v in row]
            for row in rng.integers(-10, 10, size=(4, 4))
        ]
        assert cumulant_weight_reduced(zeta) == cumulant_weight_raw(zeta)

    def test_enumeration_guard(self):
        with pytest.raises(ValueError):
            cumulant_weight_reduced(np.zeros((8, 8)))


class TestDiscreteThreeWay:
    def test_hypergeometric_variance(self):
        proc = DiscreteProcess.uniform_subsets(4, 2)
        h = [1, 0, 0, 0]
        rep = cumulant_linear_statistic_discrete(proc, [h, h])
        assert rep.direct == Fraction(1, 4)
        assert rep.partition_defect() == 0
        assert rep.reduced_defect() == 0

    def test_mean_is_campbell_sum(self):
        proc = DiscreteProcess.uniform_subsets(4, 2)
        table = correlation_table(proc, 1)
        h = [2, 1, 0, 0]
        rep = cumulant_linear_statistic_discrete(proc, [h])
        campbell = sum(Fraction(v) * table.rho([x]) for x, v in enumerate(h))
        assert rep.direct == campbell

    def test_deterministic_coordinate_kills_cumulant(self):
        proc = DiscreteProcess.uniform_subsets(5, 2)  # constant count: X(1)=2
        const = [1, 1, 1, 1, 1]
        h = [1, 0, 2, 0, 0]
        rep = cumulant_linear_statistic_discrete(proc, [const, h, h])
        assert rep.direct == 0

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_three_routes_exact_for_constant_count(self, m):
        proc = DiscreteProcess.uniform_subsets(5, 2)
        hs = [
            [1, 0, 0, 0, 0],
            [1, 1, 0, 0, 0],
            [0, 1, 2, 0, 1],
            [1, -1, 1, -1, 0],
        ][:m]
        rep = cumulant_linear_statistic_discrete(proc, hs)
        assert rep.partition_defect() == 0
        if m >= 2:
            assert rep.constant_count
            assert rep.reduced_defect() == 0

    def test_variable_count_breaks_reduced_route(self):
        mix = DiscreteProcess.mixture(
            [
                (DiscreteProcess.uniform_subsets(4, 1), Fraction(1, 2)),
                (DiscreteProcess.uniform_subsets(4, 2), Fraction(1, 2)),
            ]
        )
        h = [1, 0, 0, 0]
        rep = cumulant_linear_statistic_discrete(mix, [h, h])
        assert rep.partition_defect() == 0  # holds for any process
        assert rep.reduced_defect() != 0
        assert not rep.constant_count

    def test_mismatch_raises_when_constant_count_expected(self):
        proc = DiscreteProcess.uniform_subsets(4, 2)
        h = [1, 0, 0, 0]
        # sanity: check=True on a valid case does not raise
        cumulant_linear_statistic_discrete(proc, [h, h], check=True)


class TestIntegralIdentityDiscrete:
    def test_uniform_pairs_of_five(self):
        rep = verify_integral_identity_discrete(
            DiscreteProcess.uniform_subsets(5, 2), 2
        )
        assert rep.holds and rep.max_defect == 0 and rep.iterated_holds

    def test_uniform_triples_of_six_k3(self):
        rep = verify_integral_identity_discrete(
            DiscreteProcess.uniform_subsets(6, 3), 3
        )
        assert rep.holds and rep.max_defect == 0 and rep.iterated_holds

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_constant_count_holds_to_order_four(self, k):
        rep = verify_integral_identity_discrete(
            DiscreteProcess.uniform_subsets(6, 3), k
        )
        assert rep.holds and rep.iterated_holds

    def test_random_count_mixture_fails_with_reported_defect(self):
        mix = DiscreteProcess.mixture(
            [
                (DiscreteProcess.uniform_subsets(4, 1), Fraction(1, 2)),
                (DiscreteProcess.uniform_subsets(4, 2), Fraction(1, 2)),
            ]
        )
        rep = verify_integral_identity_discrete(mix, 2)
        assert not rep.holds
        assert rep.max_defect > 0
        assert rep.worst_tuple is not None


class TestDeterminantal:
    def test_single_point(self):
        P = random_projection(5, 2, 90)
        assert dpp_truncated_correlation(P, [3]) == pytest.approx(P[3, 3].real)

    def test_pair_formula(self):
        P = random_projection(5, 2, 91)
        expected = -abs(P[0, 1]) ** 2
        assert dpp_truncated_correlation(P, [0, 1]) == pytest.approx(expected)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_cyclic_equals_partition_transform(self, k):
        P = random_projection(6, 3, 92)
        table = dpp_correlation_table(P, k)
        rho_t = truncate_correlations(table, k)
        worst = max(
            abs(rho_t(list(tup)) - dpp_truncated_correlation(P, list(tup)))
            for tup in itertools.permutations(range(6), k)
        )
        assert worst < 1e-10

    def test_minor_vanishes_on_repeats(self):
        P = random_projection(5, 3, 93)
        assert dpp_correlation(P, [1, 1]) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("k", [2, 3])
    def test_projection_identity(self, k):
        P = random_projection(5, 2, 94)
        rep = verify_integral_identity_projection(P, k)
        assert rep.holds
        assert rep.max_defect < 1e-9

    def test_non_projection_rejected_and_defective(self):
        rng = derived_rng(95)
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        q, _ = np.linalg.qr(a)
        half = (q * np.array([1.0, 0.5, 0.0, 0.0, 0.0])) @ q.conj().T
        with pytest.raises(ValueError):
            verify_integral_identity_projection(half, 2)
        defect = integral_identity_defect_matrix(half, 2)
        assert defect > 1e-3


class TestHigherOrderMoments:
    def test_pair_probe_matches_kernel_moment(self):
        dens = ginibre_truncated_density(2)
        tm = TruncationMap((0, 0))
        val = higher_order_moment(dens, 2, tm, [(1, 0), (1, 0)])
        assert val == pytest.approx(-1.0 / (2.0 * math.pi), abs=1e-6)

    def test_parity_kills_odd_probes(self):
        dens = ginibre_truncated_density(2)
        tm = TruncationMap((0, 0))
        val = higher_order_moment(dens, 2, tm, [(1, 0), (0, 0)])
        assert abs(val) < 1e-8

    def test_order_three_probes_vanish(self):
        # all alphas nonzero with total order 3 = m: killed by the global flip
        dens = ginibre_truncated_density(3)
        val = higher_order_moment(
            dens, 3, TruncationMap((0, 1, 0)), [(1, 0), (1, 0), (0, 1)]
        )
        assert abs(val) < 1e-6

    def test_zero_padded_probe_is_nonzero(self):
        # with a vanishing exponent allowed, the probe is a pair-type moment
        # and does NOT vanish: quadrature oracle gives +1/(2 pi)
        dens = ginibre_truncated_density(3)
        val = higher_order_moment(
            dens, 3, TruncationMap((0, 1, 0)), [(1, 0), (1, 0), (0, 0)]
        )
        assert val == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-4)

    def test_order_guard(self):
        with pytest.raises(ValueError):
            higher_order_moment(
                ginibre_truncated_density(3), 4, TruncationMap((0,) * 4), [(1, 0)] * 4
            )


class TestMatrixFormat:
    def test_round_trip_complex(self, tmp_path):
        P = random_projection(4, 2, 96)
        path = tmp_path / "kernel.txt"
        save_matrix(path, P)
        back = load_matrix(path)
        assert np.allclose(P, back, atol=0)

    def test_round_trip_real(self, tmp_path):
        M = np.array([[1.0, 0.25], [0.25, 0.5]])
        path = tmp_path / "m.txt"
        save_matrix(path, M)
        back = load_matrix(path)
        assert back.dtype.kind == "f"
        assert np.array_equal(M, back)
