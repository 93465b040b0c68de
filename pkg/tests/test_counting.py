"""The solution counter against its brute-force oracle, the Dirichlet solver,
rescaling, discrepancy, and the combinatorial bounds."""

import dataclasses
import random
from fractions import Fraction

import pytest

from sapprox.approx import ApproxCollection, FiniteApproxFunction, PowerLaw, psi_one
from sapprox.checks import _count_rescaled, check_discrepancy_sandwich
from sapprox.counting import (
    AffineLatticeSpec,
    CountRequest,
    InsufficientPrecision,
    TruncatedMatrix,
    count_solutions,
    count_solutions_bruteforce,
    count_solutions_chunked,
    default_dirichlet_constants,
    dirichlet_solve,
    discrepancy,
    embed_unipotent,
    profile_count_bound,
    rescale_congruence,
    verify_dirichlet,
    x_region_bound,
    x_region_volume_mc,
)
from sapprox.sampler import SamplerConfig, random_request, sample_matrix
from sapprox.sring import REAL_PLACE, NormProfile, PlaceSet
from sapprox.volume import Region, volume_exact

S2 = PlaceSet((2,))


def zero_matrix(m, n, places, K=8):
    return TruncatedMatrix.of(
        [[Fraction(0)] * n for _ in range(m)],
        {p: [[0] * n for _ in range(m)] for p in places.primes},
        {p: K for p in places.primes},
    )


class TestTruncatedMatrix:
    def test_validation(self):
        with pytest.raises(ValueError):
            TruncatedMatrix.of([[0]], {2: [[4]]}, {2: 1})  # not reduced mod 2
        with pytest.raises(ValueError):
            TruncatedMatrix.of([[0]], {2: [[0]]}, {2: 0})  # precision too small
        with pytest.raises(ValueError):
            TruncatedMatrix.of([[0]], {2: [[0], [0]]}, {2: 2})  # shape mismatch
        with pytest.raises(ValueError):
            TruncatedMatrix.of([[0]], {2: [[0]]}, {3: 2})  # precision keys

    def test_request_validation(self):
        psi = psi_one(S2, 1, 1)
        prof = NormProfile.of(Fraction(2), {2: 1})
        A = zero_matrix(1, 1, S2)
        with pytest.raises(ValueError):
            CountRequest(S2, A, psi, prof, modulus=2)  # 2 not coprime to S
        with pytest.raises(ValueError):
            CountRequest(S2, A, psi, prof, shift=(Fraction(1, 3),))  # wrong length
        with pytest.raises(ValueError):
            CountRequest(S2, A, psi, prof, shift=(Fraction(1, 3), Fraction(0)))  # not in Z_S
        with pytest.raises(ValueError):
            CountRequest(S2, A, psi_one(S2, 1, 2), prof)  # dims disagree


class TestCountSolutions:
    def test_zero_matrix_27(self):
        # p in {-1,0,1} and q in {a/2 : |a| <= 4}: 3 * 9 pairs
        req = CountRequest(S2, zero_matrix(1, 1, S2), psi_one(S2, 1, 1), NormProfile.of(Fraction(2), {2: 1}))
        assert count_solutions(req) == 27
        assert count_solutions_bruteforce(req) == 27

    def test_zero_pair_always_counts(self):
        cfg = SamplerConfig.of(5, (2, 1), S2, {2: 10}, 2**10)
        req = CountRequest(
            S2, sample_matrix(cfg), psi_one(S2, 2, 1), NormProfile.of(Fraction(1), {2: 0})
        )
        assert count_solutions(req) >= 1

    def test_modulus_2_rejected_when_2_in_s(self):
        # the congruence is defined for N coprime to S: N = 2 with 2 in S is
        # degenerate (2 is a unit in Z_S) and the request refuses it
        req_kwargs = dict(
            places=S2,
            matrix=zero_matrix(1, 1, S2),
            psi=psi_one(S2, 1, 1),
            profile=NormProfile.of(Fraction(2), {2: 1}),
        )
        with pytest.raises(ValueError):
            CountRequest(modulus=2, shift=(Fraction(0), Fraction(0)), **req_kwargs)

    def test_classical_congruence_variant(self):
        # the same parity-style filter over S = {inf}: q even, p even
        S0 = PlaceSet(())
        req = CountRequest(
            S0,
            zero_matrix(1, 1, S0),
            psi_one(S0, 1, 1),
            NormProfile.of(Fraction(4), {}),
            modulus=2,
            shift=(Fraction(0), Fraction(0)),
        )
        fast, brute = count_solutions(req), count_solutions_bruteforce(req)
        assert fast == brute
        # p in {0}, q in {-4, -2, 0, 2, 4}
        assert fast == 5

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(20260810)
        for _ in range(60):
            req = random_request(rng)
            assert count_solutions(req) == count_solutions_bruteforce(req)

    def test_chunked_equals_plain(self):
        rng = random.Random(55)
        for _ in range(5):
            req = random_request(rng)
            expected = count_solutions(req)
            for chunk in (1, 3, 97):
                assert count_solutions_chunked(req, chunk) == expected

    def test_residue_partition_small(self):
        cfg = SamplerConfig.of(17, (1, 1), S2, {2: 12}, 2**12)
        A = sample_matrix(cfg)
        psi = psi_one(S2, 1, 1)
        prof = NormProfile.of(Fraction(3), {2: 1})
        base = count_solutions(CountRequest(S2, A, psi, prof))
        total = 0
        for vm in range(3):
            for vn in range(3):
                total += count_solutions(
                    CountRequest(S2, A, psi, prof, 3, (Fraction(vm), Fraction(vn)))
                )
        assert total == base

    def test_insufficient_precision_raised_and_recovered(self):
        from sapprox.sampler import deepen

        cfg = SamplerConfig.of(23, (1, 1), S2, {2: 2}, 2**12)
        A = sample_matrix(cfg)
        # z_k = 3k needs congruences mod 2^(3k + e) fast: K = 2 is not enough
        psi = ApproxCollection.of(
            PowerLaw(Fraction(1), Fraction(1)),
            {2: FiniteApproxFunction(2, 1, 1, (), ("linear", 3, 0))},
            1,
            1,
        )
        req = CountRequest(S2, A, psi, NormProfile.of(Fraction(8), {2: 2}))
        with pytest.raises(InsufficientPrecision) as exc_info:
            count_solutions(req)
        exc = exc_info.value
        deeper = deepen(A, exc.place, exc.needed + 2)
        req2 = dataclasses.replace(req, matrix=deeper)
        assert count_solutions(req2) == count_solutions_bruteforce(req2)

    def test_truncation_consistency(self):
        from sapprox.sampler import deepen

        cfg = SamplerConfig.of(29, (2, 1), S2, {2: 12}, 2**16)
        A = sample_matrix(cfg)
        psi = psi_one(S2, 2, 1)
        prof = NormProfile.of(Fraction(4), {2: 2})
        req = CountRequest(S2, A, psi, prof)
        base = count_solutions(req)
        deeper = dataclasses.replace(req, matrix=deepen(A, 2, 20))
        assert count_solutions(deeper) == base

    def test_log_law_real_part_vs_oracle(self):
        # exercises the interval-arithmetic window (no closed-form values):
        # the two paths decide the window independently
        from sapprox.approx import LogLaw

        psi = ApproxCollection.of(
            LogLaw(Fraction(3), Fraction(1)), {2: FiniteApproxFunction(2, 1, 1, (1,))}, 1, 1
        )
        for seed in (3, 4, 5):
            cfg = SamplerConfig.of(seed, (1, 1), S2, {2: 10}, 2**10)
            req = CountRequest(S2, sample_matrix(cfg), psi, NormProfile.of(Fraction(6), {2: 1}))
            assert count_solutions(req) == count_solutions_bruteforce(req)


class TestDirichlet:
    def test_zero_matrix_has_unit_solution(self):
        A = zero_matrix(1, 2, S2)
        prof = NormProfile.of(Fraction(2), {2: 1})
        pvec, qvec = dirichlet_solve(A, prof, S2)
        assert any(pvec) or any(qvec)
        consts = default_dirichlet_constants(S2, 1)
        verify_dirichlet(A, prof, S2, consts, pvec, qvec)
        # the pair (p, q) = (0, e_1) qualifies for A = 0 and any T >= 1
        verify_dirichlet(A, prof, S2, consts, (Fraction(0),), (Fraction(1), Fraction(0)))

    def test_spec_instance(self):
        A = TruncatedMatrix.of([[Fraction(1, 3)]], {2: [[1]]}, {2: 10})
        prof = NormProfile.of(Fraction(3), {2: 1})
        pvec, qvec = dirichlet_solve(A, prof, S2)
        verify_dirichlet(A, prof, S2, default_dirichlet_constants(S2, 1), pvec, qvec)

    def test_unit_constants_with_restricted_profile(self):
        rng = random.Random(7)
        for _ in range(10):
            m, n = rng.randint(1, 2), rng.randint(1, 2)
            cfg = SamplerConfig.of(rng.randrange(2**31), (m, n), S2, {2: 14}, 2**10)
            A = sample_matrix(cfg)
            prof = NormProfile.of(Fraction(rng.randint(1, 5)), {2: m * rng.randint(1, 2)})
            constants = {REAL_PLACE: Fraction(1), 2: Fraction(1)}
            pvec, qvec = dirichlet_solve(A, prof, S2, constants)
            consts = default_dirichlet_constants(S2, m)
            consts.update(constants)
            verify_dirichlet(A, prof, S2, consts, pvec, qvec)

    def test_rejects_sub_unit_profile(self):
        with pytest.raises(ValueError):
            dirichlet_solve(zero_matrix(1, 1, S2), NormProfile.of(Fraction(1, 2), {2: 1}), S2)


class TestRescale:
    def test_identity_transform(self):
        psi = psi_one(S2, 1, 1)
        prof = NormProfile.of(Fraction(4), {2: 1})
        rs = rescale_congruence(psi, prof, 1, (Fraction(0), Fraction(0)))
        assert rs.psi == psi and rs.profile == prof

    def test_formulas(self):
        psi = psi_one(S2, 1, 1)
        prof = NormProfile.of(Fraction(10), {2: 1})
        rs = rescale_congruence(psi, prof, 5, (Fraction(1), Fraction(2)))
        assert rs.profile.t_inf == 2  # T_inf / N^n
        assert rs.profile.exponent(2) == 1
        assert rs.psi.real.value_exact(Fraction(1)) == Fraction(1, 5)  # psi/N^m
        assert rs.shift == (Fraction(1, 5), Fraction(2, 5))

    def test_count_identity_bruteforce(self):
        rng = random.Random(101)
        checked = 0
        while checked < 12:
            req = random_request(rng)
            if req.modulus == 1:
                continue
            checked += 1
            assert count_solutions_bruteforce(req) == _count_rescaled(req)


class TestDiscrepancy:
    def test_disjoint_points(self):
        reg = Region(psi_one(S2, 1, 1), NormProfile.of(Fraction(2), {2: 1}), S2)
        pts = [((Fraction(10),), (Fraction(10),))]
        assert discrepancy(pts, reg) == 16

    def test_standard_lattice_unit_box(self):
        # Z_S^d meets the unit adelic box in the classical integer points
        S0 = PlaceSet(())
        for m, n in ((1, 1), (2, 1)):
            reg = Region(psi_one(S0, m, n), NormProfile.of(Fraction(1), {}), S0)
            gens = {REAL_PLACE: [[Fraction(int(i == j)) for j in range(m + n)] for i in range(m + n)]}
            lam = AffineLatticeSpec.of(gens, [Fraction(0)] * (m + n))
            # integer points with sup norm <= 1 per block: 3^(m+n); volume 2^(m+n)
            assert discrepancy(lam, reg) == 3 ** (m + n) - 2 ** (m + n)

    def test_unipotent_lattice_matches_counter(self):
        cfg = SamplerConfig.of(31, (1, 1), S2, {2: 10}, 2**8)
        A = sample_matrix(cfg)
        psi = psi_one(S2, 1, 1)
        prof = NormProfile.of(Fraction(2), {2: 1})
        req = CountRequest(S2, A, psi, prof)
        expected = count_solutions(req)
        lam = AffineLatticeSpec.of(embed_unipotent(A, S2), [Fraction(0)] * 2)
        reg = Region(psi, prof, S2)
        vol = volume_exact(reg).total
        assert discrepancy(lam, reg) == abs(expected - vol)

    def test_dilated_lattice_congruence_count(self):
        # g(N Z_S^d + v) with g = u_A reproduces the congruence-constrained count
        cfg = SamplerConfig.of(37, (1, 1), S2, {2: 10}, 2**8)
        A = sample_matrix(cfg)
        psi = psi_one(S2, 1, 1)
        prof = NormProfile.of(Fraction(3), {2: 1})
        shift = (Fraction(1), Fraction(2))
        req = CountRequest(S2, A, psi, prof, 3, shift)
        expected = count_solutions(req)
        lam = AffineLatticeSpec.of(embed_unipotent(A, S2), shift, dilation=3)
        reg = Region(psi, prof, S2)
        vol = volume_exact(reg).total
        assert discrepancy(lam, reg) == abs(expected - vol)

    def test_generator_determinant_validation(self):
        with pytest.raises(ValueError):
            AffineLatticeSpec.of({REAL_PLACE: [[Fraction(2)]]}, [Fraction(0)])
        with pytest.raises(ValueError):
            AffineLatticeSpec.of(
                {REAL_PLACE: [[Fraction(1)]], 2: [[Fraction(2)]]}, [Fraction(0)]
            )

    def test_sandwich_randomized(self):
        rng = random.Random(88)
        ok, detail = check_discrepancy_sandwich(rng, rounds=40)
        assert ok, detail


class TestProfileBounds:
    def test_incompatible_profile_counts_zero(self):
        # v_2(T_inf) = 1 < 2 = -k_2 violates the compatibility condition
        prof = NormProfile.of(Fraction(2), {2: -2})
        res = profile_count_bound(1, prof, S2)
        assert not res.feasible
        assert res.exact == 0
        # T_inf not of the S-unit shape: denominator outside S
        res2 = profile_count_bound(1, NormProfile.of(Fraction(1, 5), {2: 0}), S2)
        assert not res2.feasible and res2.exact == 0

    def test_compatibility_is_necessary_not_sufficient(self):
        # T = (2, 2) passes the condition, yet no q has |q| = 2 and |q|_2 = 2
        prof = NormProfile.of(Fraction(2), {2: 1})
        res = profile_count_bound(1, prof, S2)
        assert res.feasible
        assert res.exact == 0
        assert res.bound == 2  # 2n (2 prod T + 1)^(n-1) = 2 for n = 1

    def test_compatible_example(self):
        # T_inf = 1/2, T_2 = 2: q = +-1/2 realize both norms
        prof = NormProfile.of(Fraction(1, 2), {2: 1})
        res = profile_count_bound(1, prof, S2)
        assert res.feasible
        assert res.exact == 2
        assert res.exact <= res.bound

    def test_classical_square(self):
        # n = 2, S = {inf}: boundary of the square of side 2T
        prof = NormProfile.of(Fraction(3), {})
        res = profile_count_bound(2, prof, PlaceSet(()))
        assert res.exact == 7**2 - 5**2
        assert res.exact <= res.bound == 2 * 2 * 7

    def test_randomized_bound(self):
        rng = random.Random(3)
        for _ in range(40):
            S = rng.choice([PlaceSet(()), PlaceSet((2,)), PlaceSet((2, 3))])
            n = rng.randint(1, 2)
            exps = {p: rng.randint(-1, 2) for p in S.primes}
            t_inf = Fraction(rng.randint(1, 8), rng.choice([1, 2]))
            prof = NormProfile.of(t_inf, exps)
            res = profile_count_bound(n, prof, S)
            assert res.exact <= res.bound
            if not res.feasible:
                assert res.exact == 0


class TestFiberRegion:
    def test_bound_holds(self):
        rng = random.Random(41)
        for _ in range(6):
            S = rng.choice([PlaceSet(()), PlaceSet((2,))])
            m, n = rng.randint(1, 2), rng.randint(1, 2)
            psi = psi_one(S, m, n)
            q = tuple(Fraction(rng.randint(-6, 6)) for _ in range(n))
            if not any(q):
                q = (Fraction(2),) + q[1:]
            est, se, _ = x_region_volume_mc(q, psi, S, 1500, seed=rng.randrange(2**30))
            assert est <= min(x_region_bound(q, psi, S), 1.0) + 4 * se + 1e-9

    def test_rejects_zero_q(self):
        with pytest.raises(ValueError):
            x_region_bound((Fraction(0),), psi_one(S2, 1, 1), S2)
