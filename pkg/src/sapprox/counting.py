"""Congruence-constrained counting of S-integer approximation pairs.

The counter answers: how many pairs (p, q) in Z_S^m x Z_S^n satisfy, at
every place, ||A_p q + p||_p^m <= psi_p(||q||_p^n) and ||q||_p^n <= T_p,
with (p, q) congruent to a fixed vector modulo N.

The fast path enumerates q over the adelic box and, for each q, converts
the finite-place conditions on p into integer congruences on the
cleared-denominator representative b of p (the p-adic ball around -A_p q
becomes one congruence per place).  All congruences merge into a single
modulus via the Chinese remainder theorem -- the moduli are pairwise
coprime by construction -- and the real-place window is resolved by the
closed-form arithmetic-progression counter, so the cost per q is
independent of the size of the real box.

A direct brute-force twin checks every candidate pair against the defining
inequalities and serves as the oracle for the fast path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from . import _kernel
from .approx import ApproxCollection, Scaled, as_root_triple
from .sring import (
    REAL_PLACE,
    NormProfile,
    PlaceSet,
    enumerate_box,
    enumerate_box_raw,
    min_valuation,
    padic_valuation,
    sup_norm,
)
from .volume import Region, contains, volume_exact


class InsufficientPrecision(Exception):
    """A finite-place decision needs more matrix digits than are available.

    The sampler can recover by deepening the offending place to ``needed``.
    """

    def __init__(self, place: int, needed: int, available: int):
        super().__init__(
            f"place {place}: decision needs precision {needed}, matrix has {available}"
        )
        self.place = place
        self.needed = needed
        self.available = available


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured work budget."""


class SearchExhausted(RuntimeError):
    """The Dirichlet search scanned the whole guaranteed box without success:
    this indicates an implementation or precision bug, not a counterexample."""


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TruncatedMatrix:
    """A = (A_p): exact rationals at the real place, finite-place entries
    known modulo p**K_p.  Real entries are intended to lie in [0, 1) (the
    fundamental domain) but this is not enforced."""

    real: tuple[tuple[Fraction, ...], ...]
    finite: tuple[tuple[int, tuple[tuple[int, ...], ...]], ...]
    precision: tuple[tuple[int, int], ...]
    origin: object = None

    def __post_init__(self):
        rows = len(self.real)
        if rows == 0 or any(len(r) != len(self.real[0]) for r in self.real):
            raise ValueError("real part must be a nonempty rectangular matrix")
        cols = len(self.real[0])
        prec = dict(self.precision)
        if sorted(prec) != [p for p, _ in self.finite]:
            raise ValueError("precision map must cover exactly the finite places")
        for p, mat in self.finite:
            K = prec[p]
            if K < 1:
                raise ValueError(f"precision at {p} must be >= 1")
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise ValueError(f"finite part at {p} has the wrong shape")
            if any(not (0 <= e < p**K) for r in mat for e in r):
                raise ValueError(f"finite entries at {p} must be reduced mod {p}^{K}")

    @classmethod
    def of(
        cls,
        real: Sequence[Sequence],
        finite: Mapping[int, Sequence[Sequence[int]]] | None = None,
        precision: Mapping[int, int] | None = None,
        origin=None,
    ) -> "TruncatedMatrix":
        finite = finite or {}
        precision = precision or {}
        return cls(
            tuple(tuple(Fraction(e) for e in row) for row in real),
            tuple(sorted((p, tuple(tuple(int(e) for e in row) for row in mat)) for p, mat in finite.items())),
            tuple(sorted(precision.items())),
            origin,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.real), len(self.real[0])

    def K(self, p: int) -> int:
        for q, k in self.precision:
            if q == p:
                return k
        raise KeyError(p)

    def finite_rows(self, p: int) -> tuple[tuple[int, ...], ...]:
        for q, mat in self.finite:
            if q == p:
                return mat
        raise KeyError(p)

    def finite_fraction(self, p: int, i: int, j: int) -> Fraction:
        """The representative of the p-adic entry, as an exact rational."""
        return Fraction(self.finite_rows(p)[i][j])


@dataclass(frozen=True)
class CountRequest:
    """Everything the counter needs: A, psi, T, the congruence (N, v_d)."""

    places: PlaceSet
    matrix: TruncatedMatrix
    psi: ApproxCollection
    profile: NormProfile
    modulus: int = 1
    shift: tuple[Fraction, ...] = ()

    def __post_init__(self):
        m, n = self.matrix.shape
        if (self.psi.m, self.psi.n) != (m, n):
            raise ValueError("psi dimensions do not match the matrix")
        self.psi.check_places(self.places)
        if tuple(p for p, _ in self.matrix.finite) != self.places.primes:
            raise ValueError("matrix places do not match the place set")
        if tuple(p for p, _ in self.profile.fin_exp) != self.places.primes:
            raise ValueError("profile places do not match the place set")
        for p, e in self.profile.fin_exp:
            if e % n != 0:
                raise ValueError(f"profile exponent at {p} must be a multiple of n={n}")
        if not self.places.admissible_modulus(self.modulus):
            raise ValueError(
                f"modulus {self.modulus} is not coprime to the finite places"
            )
        shift = tuple(Fraction(c) for c in self.shift) or tuple(
            Fraction(0) for _ in range(m + n)
        )
        if len(shift) != m + n:
            raise ValueError("congruence shift must have dimension m + n")
        if not self.places.contains_vector(shift):
            raise ValueError("congruence shift must be an S-integer vector")
        object.__setattr__(self, "shift", shift)

    @property
    def dims(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def v_m(self) -> tuple[Fraction, ...]:
        return self.shift[: self.dims[0]]

    @property
    def v_n(self) -> tuple[Fraction, ...]:
        return self.shift[self.dims[0] :]

    def region(self) -> Region:
        return Region(self.psi, self.profile, self.places)


# --------------------------------------------------------------------------
# CRT plumbing


class _CrtCache:
    """Caches modular inverses and two-modulus merges; the moduli seen while
    counting repeat heavily across q."""

    def __init__(self):
        self.inv = {}
        self.merge = {}

    def inverse(self, a: int, mod: int) -> int:
        key = (a, mod)
        out = self.inv.get(key)
        if out is None:
            out = pow(a, -1, mod)
            self.inv[key] = out
        return out

    def crt_fold(self, pairs: Sequence[tuple[int, int]]) -> tuple[int, int]:
        """Merge (residue, modulus) pairs with pairwise coprime moduli."""
        r, M = 0, 1
        for r2, m2 in pairs:
            if m2 == 1:
                continue
            if M == 1:
                r, M = r2 % m2, m2
                continue
            key = (M, m2)
            pair = self.merge.get(key)
            if pair is None:
                pair = (self.inverse(M % m2, m2), M * m2)
                self.merge[key] = pair
            inv, prod = pair
            r = (r + ((r2 - r) * inv % m2) * M) % prod
            M = prod
        return r, M


# --------------------------------------------------------------------------
# the fast counter


def _real_row_data(matrix: TruncatedMatrix) -> tuple[int, list[list[int]]]:
    """Common denominator R and integer numerators of the real part."""
    R = 1
    for row in matrix.real:
        for e in row:
            R = R * e.denominator // math.gcd(R, e.denominator)
    nums = [[int(e * R) for e in row] for row in matrix.real]
    return R, nums


def count_solutions(req: CountRequest) -> int:
    """Exact N_{psi,A}(T) under the congruence (p, q) = (v_m, v_n) mod N."""
    total = 0
    for c in _per_q_counts(req):
        total += c
    return total


def count_solutions_chunked(req: CountRequest, chunk_size: int) -> int:
    """Chunked evaluation: identical result for any chunk size (the per-q
    counts are summed associatively), demonstrating the parallel split."""
    counts = _per_q_counts(req)
    total = 0
    while True:
        chunk = list(itertools.islice(counts, chunk_size))
        if not chunk:
            return total
        total += sum(chunk)


def _per_q_counts(req: CountRequest) -> Iterator[int]:
    m, n = req.dims
    S = req.places
    N = req.modulus
    psi = req.psi
    real_fn = psi.real

    u_fin = {p: req.profile.exponent(p) // n for p in S.primes}
    cong = (N, req.v_n) if N > 1 else None
    Dq, reps = enumerate_box_raw(n, S, req.profile.t_inf, u_fin, cong, u_inf_root=n)

    R, Areal = _real_row_data(req.matrix)
    gd = R * Dq  # denominator of (A_inf q)_i for integer representatives a
    Dqn = Dq**n

    fin = []
    for p in S.primes:
        dq = max(u_fin[p], 0)
        fn = psi.finite_fn(p)
        # kappa = dq - min_j v_p(a_j) never exceeds dq for integer reps
        z_table = tuple(fn.z_at_block(k) for k in range(dq + 1))
        fin.append(
            (
                p,
                req.matrix.K(p),
                req.matrix.finite_rows(p),
                dq,
                Dq // p**dq,  # the prime-to-p part of Dq
                z_table,
            )
        )

    # b_i = D * v_i (mod N), with the S-supported denominator of v_i inverted
    vm_res = None
    if N > 1:
        vm_res = [v.numerator * pow(v.denominator, -1, N) % N for v in req.v_m]

    cache = _CrtCache()

    for a in reps:
        # -- per-place data for q = a / Dq
        place_data = []  # (p, j, e, residues mod p^(j+e))
        D = 1
        for p, K, rows, dq, dq_unit, z_table in fin:
            minv = None
            for aj in a:
                if aj:
                    v = _kernel.valuation(aj, p)
                    if minv is None or v < minv:
                        minv = v
                        if v == 0:
                            break
            kappa = None if minv is None else dq - minv
            j = z_table[kappa] if kappa is not None and kappa > 0 else 0
            k_eff = 0 if kappa is None else max(kappa, 0)
            if j + k_eff > K:
                raise InsufficientPrecision(p, j + k_eff, K)
            svals = []
            e = 0
            for i in range(m):
                Si = 0
                row = rows[i]
                for jj in range(n):
                    Si += row[jj] * a[jj]
                svals.append(Si)
                if Si:
                    need = dq - _kernel.valuation(Si, p)
                    if need > e:
                        e = need
            place_data.append((p, j, e, dq, dq_unit, svals))
            D *= p**e

        # -- congruences per coordinate of p
        coord_pairs: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for p, j, e, dq, dq_unit, svals in place_data:
            kap = j + e
            if kap <= 0:
                continue
            modp = p**kap
            inv_unit = cache.inverse(dq_unit % modp, modp) if dq_unit % modp != 1 else 1
            pdq = p**dq
            for i in range(m):
                Si = svals[i]
                if Si == 0:
                    coord_pairs[i].append((0, modp))
                else:
                    num = D * Si
                    coord_pairs[i].append(((-(num // pdq) * inv_unit) % modp, modp))
        if N > 1:
            DmodN = D % N
            for i in range(m):
                coord_pairs[i].append((DmodN * vm_res[i] % N, N))

        # -- real-place window
        amax = 0
        for aj in a:
            if aj > amax:
                amax = aj
            elif -aj > amax:
                amax = -aj
        Dgd = D * gd
        trip = real_fn.value_triple(amax**n, Dqn)
        if trip is not None:
            vn, vd, w = trip
            if vn == vd:
                Ky = Dgd
            else:
                E = m * w
                Ky = _kernel.introot((vn * Dgd**E) // vd, E)
        else:
            Ky = real_fn.max_root_leq(Fraction(amax**n, Dqn), Fraction(Dgd**m), m)

        count_q = 1
        for i in range(m):
            gn = 0
            row = Areal[i]
            for jj in range(n):
                gn += row[jj] * a[jj]
            cnum = D * gn
            lo = -((Ky + cnum) // gd)
            hi = (Ky - cnum) // gd
            r_i, M_i = cache.crt_fold(coord_pairs[i])
            ci = _kernel.count_in_ap_int(lo, hi, r_i, M_i)
            if ci == 0:
                count_q = 0
                break
            count_q *= ci
        yield count_q


# --------------------------------------------------------------------------
# brute-force oracle


def count_solutions_bruteforce(req: CountRequest, budget: int = 2_000_000) -> int:
    """Direct enumeration of candidate pairs, checking the defining
    inequalities per place.  Small profiles only; this is the oracle the
    fast counter is validated against."""
    m, n = req.dims
    S = req.places
    N = req.modulus
    psi = req.psi
    sup = psi.real.sup_value()

    u_fin = {p: req.profile.exponent(p) // n for p in S.primes}
    cong_q = (N, req.v_n) if N > 1 else None
    total = 0
    spent = 0
    for q in enumerate_box(n, S, req.profile.t_inf, u_fin, cong_q, u_inf_root=n):
        # exact targets per place, from the matrix representatives
        g = [sum(req.matrix.real[i][j] * q[j] for j in range(n)) for i in range(m)]
        c_fin = {
            p: [
                sum(req.matrix.finite_fraction(p, i, j) * q[j] for j in range(n))
                for i in range(m)
            ]
            for p in S.primes
        }
        t_real = sup_norm(q) ** n if any(q) else Fraction(0)
        thresholds = {}
        p_box_exp = {}
        for p in S.primes:
            fn = psi.finite_fn(p)
            mv = min_valuation(q, p)
            kappa = None if mv is None else -mv
            j = fn.threshold_exponent(kappa)
            thresholds[p] = j
            worst = max((-padic_valuation(c, p) for c in c_fin[p] if c != 0), default=0)
            p_box_exp[p] = max(0, int(worst), -j)
        u_inf_p = sup_norm(g) + max(Fraction(1), sup) if any(g) else max(Fraction(1), sup)
        cong_p = (N, req.v_m) if N > 1 else None

        for pvec in enumerate_box(m, S, u_inf_p, p_box_exp, cong_p):
            spent += 1
            if spent > budget:
                raise BudgetExceeded(f"brute force budget {budget} exceeded")
            ok = True
            for p in S.primes:
                j = thresholds[p]
                for i in range(m):
                    val = padic_valuation(c_fin[p][i] + pvec[i], p)
                    if val < j:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                lhs = sup_norm([g[i] + pvec[i] for i in range(m)]) ** m
                ok = psi.real.leq_value(lhs, t_real)
            if ok:
                total += 1
    return total


# --------------------------------------------------------------------------
# Dirichlet solver


def default_dirichlet_constants(places: PlaceSet, m: int) -> dict:
    """C_inf = 1 and C_p = p**m, the constants that always admit a solution."""
    out = {REAL_PLACE: Fraction(1)}
    for p in places.primes:
        out[p] = Fraction(p) ** m
    return out


def dirichlet_solve(
    matrix: TruncatedMatrix,
    profile: NormProfile,
    places: PlaceSet,
    constants: Mapping | None = None,
    budget: int = 500_000,
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """A nontrivial (p, q) with ||q||_p <= T_p and ||A_p q + p||_p^m <= C_p T_p^(-n)
    at every place.  The profile bounds the norms themselves here (not their
    n-th powers) and must have T_p >= 1.

    The search scans q by increasing height and solves the per-place
    congruence/window constraints for p in closed form, so exhausting the
    box (which the pigeonhole guarantee forbids) raises SearchExhausted.
    """
    m, n = matrix.shape
    if profile.t_inf < 1 or any(e < 0 for _, e in profile.fin_exp):
        raise ValueError("Dirichlet systems need T_p >= 1 at every place")
    consts = dict(default_dirichlet_constants(places, m))
    if constants:
        consts.update(constants)

    v_real = Fraction(consts[REAL_PLACE]) / profile.t_inf**n
    j_by_place = {}
    for p in places.primes:
        k = profile.exponent(p)
        C = Fraction(consts[p])
        # smallest j with p^(-jm) <= C p^(-kn)
        j = math.ceil((k * n - math.log(C) / math.log(p)) / m) - 2
        while Fraction(p) ** (k * n - j * m) > C:
            j += 1
        j_by_place[p] = j

    u_fin = {p: e for p, e in profile.fin_exp}
    Dq = 1
    for p in places.primes:
        Dq *= p ** u_fin[p]
    B = (Dq * profile.t_inf.numerator) // profile.t_inf.denominator

    tested = 0
    for a in _by_height(n, B):
        tested += 1
        if tested > budget:
            raise BudgetExceeded("Dirichlet search budget exceeded")
        q = tuple(Fraction(aj, Dq) for aj in a)
        g = [sum(matrix.real[i][j] * q[j] for j in range(n)) for i in range(m)]
        # first pass: clearing exponents (the congruences need the final D)
        stage = []
        D = 1
        for p in places.primes:
            j = j_by_place[p]
            c = [
                sum(matrix.finite_fraction(p, i, jj) * q[jj] for jj in range(n))
                for i in range(m)
            ]
            worst = max((-padic_valuation(ci, p) for ci in c if ci != 0), default=0)
            e = max(0, int(worst), -j)
            stage.append((p, j, e, c))
            D *= p**e
            mv = min_valuation(q, p)
            kq = -mv if mv is not None else 0
            needed = max(j, 0) + max(kq, 0)
            if needed > matrix.K(p):
                raise InsufficientPrecision(p, needed, matrix.K(p))
        pairs_by_coord: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for p, j, e, c in stage:
            kap = j + e
            if kap > 0:
                modp = p**kap
                for i in range(m):
                    x = D * c[i]
                    if x == 0:
                        pairs_by_coord[i].append((0, modp))
                    else:
                        r = (-x.numerator * pow(x.denominator, -1, modp)) % modp
                        pairs_by_coord[i].append((r, modp))

        cache = _CrtCache()
        bvec = []
        for i in range(m):
            gi = D * g[i]
            gn, gdi = gi.numerator, gi.denominator
            K = _kernel.introot((v_real.numerator * (D * gdi) ** m) // v_real.denominator, m)
            lo = -((K + gn) // gdi)
            hi = (K - gn) // gdi
            r_i, M_i = cache.crt_fold(pairs_by_coord[i])
            b = _pick_in_ap(lo, hi, r_i, M_i)
            if b is None:
                bvec = None
                break
            bvec.append((b, lo, hi, r_i, M_i))
        if bvec is None:
            continue
        pvec = tuple(Fraction(b, D) for b, *_ in bvec)
        if not any(q) and not any(pvec):
            # the zero pair is trivial: try to bump one coordinate off zero
            bumped = None
            for i, (b, lo, hi, r_i, M_i) in enumerate(bvec):
                for cand in (b + M_i, b - M_i):
                    if lo <= cand <= hi and cand != 0:
                        bumped = (i, cand)
                        break
                if bumped:
                    break
            if bumped is None:
                continue
            i, cand = bumped
            pvec = tuple(
                Fraction(cand if k == i else bvec[k][0], D) for k in range(m)
            )
        verify_dirichlet(matrix, profile, places, consts, pvec, q)
        return pvec, q
    raise SearchExhausted("no solution in the guaranteed box; this is a bug")


def _by_height(dim: int, bound: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors ordered by sup norm (shells), lexicographic within a
    shell; the Dirichlet guarantee makes small heights overwhelmingly likely,
    so the search never materializes the box."""
    yield (0,) * dim
    for H in range(1, bound + 1):
        for a in itertools.product(range(-H, H + 1), repeat=dim):
            if max(abs(x) for x in a) == H:
                yield a


def _pick_in_ap(lo: int, hi: int, r: int, M: int) -> int | None:
    """A deterministic element of the progression in [lo, hi], near zero."""
    if lo > hi:
        return None
    x = r + M * ((0 - r) // M)  # largest element <= 0
    for cand in (x, x + M):
        if lo <= cand <= hi:
            return cand
    if x + M < lo:
        cand = r + M * (-((-(lo - r)) // M))  # smallest element >= lo
        return cand if cand <= hi else None
    cand = r + M * ((hi - r) // M)  # largest element <= hi
    return cand if cand >= lo else None


def verify_dirichlet(matrix, profile, places, constants, pvec, qvec) -> None:
    """Re-check a claimed Dirichlet solution against the defining inequalities."""
    m, n = matrix.shape
    if not any(pvec) and not any(qvec):
        raise AssertionError("trivial pair")
    if any(qvec):
        if sup_norm(qvec) > profile.t_inf:
            raise AssertionError("real height bound violated")
        for p in places.primes:
            mv = min_valuation(qvec, p)
            if mv is not None and -mv > profile.exponent(p):
                raise AssertionError(f"{p}-adic height bound violated")
    v_real = Fraction(constants[REAL_PLACE]) / profile.t_inf**n
    g = [sum(matrix.real[i][j] * qvec[j] for j in range(n)) + pvec[i] for i in range(m)]
    lhs = sup_norm(g) ** m if any(g) else Fraction(0)
    if lhs > v_real:
        raise AssertionError("real approximation inequality violated")
    for p in places.primes:
        Cp = Fraction(constants[p])
        bound = Cp * Fraction(p) ** (-profile.exponent(p) * n)
        c = [
            sum(matrix.finite_fraction(p, i, j) * qvec[j] for j in range(n)) + pvec[i]
            for i in range(m)
        ]
        mv = min_valuation(c, p)
        norm_pow = Fraction(p) ** (-mv * m) if mv is not None else Fraction(0)
        if norm_pow > bound:
            raise AssertionError(f"{p}-adic approximation inequality violated")


# --------------------------------------------------------------------------
# congruence rescaling


@dataclass(frozen=True)
class RescaledSystem:
    psi: ApproxCollection
    profile: NormProfile
    shift: tuple[Fraction, ...]


def rescale_congruence(
    psi: ApproxCollection, profile: NormProfile, N: int, v_d: Sequence[Fraction]
) -> RescaledSystem:
    """The substitution that absorbs the congruence into the lattice:
    T'_inf = T_inf / N**n with finite components unchanged, and
    psi'_inf(t) = psi_inf(N**n t) / N**m with finite components unchanged.
    Counting (p, q) = v_d (mod N) in E_psi(T) equals counting the shifted
    lattice Z_S^d + v_d/N in E_psi'(T')."""
    if N < 1:
        raise ValueError("modulus must be positive")
    v_d = tuple(Fraction(c) for c in v_d)
    if N == 1:
        return RescaledSystem(psi, profile, v_d)
    real2 = Scaled(psi.real, value_scale=Fraction(1, N**psi.m), arg_scale=Fraction(N**psi.n))
    psi2 = ApproxCollection(psi.m, psi.n, real2, psi.finite)
    profile2 = profile.with_real(profile.t_inf / Fraction(N) ** psi.n)
    return RescaledSystem(psi2, profile2, tuple(c / N for c in v_d))


# --------------------------------------------------------------------------
# discrepancy and explicit affine lattices


def _det(mat: list[list[Fraction]]) -> Fraction:
    d = len(mat)
    if d == 1:
        return mat[0][0]
    out = Fraction(0)
    for j in range(d):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        term = mat[0][j] * _det(minor)
        out += term if j % 2 == 0 else -term
    return out


def _mat_inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    d = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(mat)]
    for col in range(d):
        piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        f = aug[col][col]
        aug[col] = [x / f for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                fac = aug[r][col]
                aug[r] = [x - fac * y for x, y in zip(aug[r], aug[col])]
    return [row[d:] for row in aug]


@dataclass(frozen=True)
class AffineLatticeSpec:
    """g(dilation * Z_S^d + shift) for per-place generators g_p of
    determinant norm 1; shift is a diagonal rational vector."""

    generators: tuple[tuple[object, tuple[tuple[Fraction, ...], ...]], ...]
    shift: tuple[Fraction, ...]
    dilation: int = 1

    def __post_init__(self):
        object.__setattr__(
            self, "shift", tuple(Fraction(c) for c in self.shift)
        )
        if self.dilation < 1:
            raise ValueError("dilation must be a positive integer")
        d = len(self.shift)
        for place, mat in self.generators:
            if len(mat) != d or any(len(r) != d for r in mat):
                raise ValueError("generator shape must match the shift dimension")
            det = _det([list(r) for r in mat])
            if place == REAL_PLACE:
                if abs(det) != 1:
                    raise ValueError("real generator must have |det| = 1")
            else:
                if padic_valuation(det, place) != 0:
                    raise ValueError(f"generator at {place} must have |det|_p = 1")

    @classmethod
    def of(cls, generators: Mapping, shift: Sequence, dilation: int = 1):
        gens = tuple(
            sorted(
                (
                    (pl, tuple(tuple(Fraction(e) for e in row) for row in mat))
                    for pl, mat in generators.items()
                ),
                key=lambda kv: (kv[0] != REAL_PLACE, kv[0] if kv[0] != REAL_PLACE else 0),
            )
        )
        return cls(gens, tuple(Fraction(c) for c in shift), dilation)

    def generator(self, place) -> tuple[tuple[Fraction, ...], ...]:
        for pl, mat in self.generators:
            if pl == place:
                return mat
        raise KeyError(place)


def embed_unipotent(matrix: TruncatedMatrix, places: PlaceSet) -> dict:
    """Per-place generators [[I_m, A], [0, I_n]] from a truncated matrix,
    using the finite-place representatives as exact entries."""
    m, n = matrix.shape
    d = m + n

    def block(amat) -> tuple:
        rows = []
        for i in range(m):
            rows.append(
                tuple(Fraction(int(i == j)) for j in range(m)) + tuple(amat[i])
            )
        for i in range(n):
            rows.append(
                tuple(Fraction(0) for _ in range(m))
                + tuple(Fraction(int(i == j)) for j in range(n))
            )
        return tuple(rows)

    gens = {REAL_PLACE: block(matrix.real)}
    for p in places.primes:
        gens[p] = block(
            [[matrix.finite_fraction(p, i, j) for j in range(n)] for i in range(m)]
        )
    return gens


def lattice_points_in_region(
    spec: AffineLatticeSpec, region: Region, budget: int = 500_000
) -> Iterator[tuple[dict, dict]]:
    """Enumerate the lattice points that land inside the region, yielding
    per-place (x_at, y_at) coordinate dictionaries."""
    m, n = region.m, region.n
    d = m + n
    if len(spec.shift) != d:
        raise ValueError("lattice dimension does not match the region")
    places = region.places

    # radii of the region's bounding box, bounded rationally from above
    sup = region.psi.real.sup_value()
    r_real = max(Fraction(1), sup, region.profile.t_inf)
    exps = {p: max(region.profile.exponent(p) // n, 0) for p in places.primes}

    # pull back through the inverse generators
    inv_real = _mat_inverse([list(r) for r in spec.generator(REAL_PLACE)])
    row_sums = [sum(abs(e) for e in row) for row in inv_real]
    w_real = max(row_sums) * r_real
    w_exp = {}
    for p in places.primes:
        inv_p = _mat_inverse([list(r) for r in spec.generator(p)])
        worst = max(
            int(-padic_valuation(e, p)) for row in inv_p for e in row if e != 0
        )
        w_exp[p] = worst + exps[p]

    # clear the non-S part of the shift denominators
    N0 = 1
    for c in spec.shift:
        den = c.denominator
        for p in places.primes:
            while den % p == 0:
                den //= p
        N0 = N0 * den // math.gcd(N0, den)
    mod = N0 * spec.dilation
    if not places.admissible_modulus(mod):
        raise ValueError("shift denominator and dilation must be coprime to S")
    resid = tuple(c * N0 for c in spec.shift)

    count = 0
    for z in enumerate_box(
        d, places, Fraction(N0) * w_real, w_exp, congruence=(mod, resid) if mod > 1 else None
    ):
        count += 1
        if count > budget:
            raise BudgetExceeded("lattice enumeration budget exceeded")
        w = tuple(c / N0 for c in z)
        x_at, y_at = {}, {}
        for place in places.all_places():
            mat = spec.generator(place)
            img = tuple(
                sum(mat[i][j] * w[j] for j in range(d)) for i in range(d)
            )
            x_at[place] = img[:m]
            y_at[place] = img[m:]
        if contains(region, x_at, y_at):
            yield x_at, y_at


def discrepancy(lam, region: Region, budget: int = 500_000) -> Fraction | float:
    """|#(Lambda intersect E) - vol(E)| for an explicit point list or an
    affine lattice with enumerable intersection."""
    if isinstance(lam, AffineLatticeSpec):
        hits = sum(1 for _ in lattice_points_in_region(lam, region, budget))
    else:
        hits = 0
        for point in lam:
            x, y = point
            if isinstance(x, Mapping):
                if contains(region, x, y):
                    hits += 1
            else:
                x_at = {pl: x for pl in region.places.all_places()}
                y_at = {pl: y for pl in region.places.all_places()}
                if contains(region, x_at, y_at):
                    hits += 1
    vol = volume_exact(region).total
    if isinstance(vol, Fraction):
        return abs(hits - vol)
    return abs(hits - float(vol))


# --------------------------------------------------------------------------
# the fiber region over a fixed q: X_q = {X in fundamental-domain^n :
# some b in Z_S lands X.q + b inside every per-place window}


def x_region_bound(qvec: Sequence[Fraction], psi: ApproxCollection, places: PlaceSet) -> float:
    """The closed-form upper bound 2n prod_p psi_p(||q||_p^n)**(1/m)."""
    if not any(qvec):
        raise ValueError("the fiber bound is for nonzero q")
    m, n = psi.m, psi.n
    out = 2.0 * n
    t = sup_norm(qvec) ** n
    v = psi.real.value_exact(t)
    if v is None:
        out *= psi.real.value_float(t) ** (1.0 / m)
    else:
        vn, vd, w = as_root_triple(v)
        out *= float(Fraction(vn, vd)) ** (1.0 / (w * m))
    for p in places.primes:
        mv = min_valuation(qvec, p)
        kappa = -mv if mv is not None else None
        z = psi.finite_fn(p).threshold_exponent(kappa)
        out *= float(p) ** (-z)
    return out


def x_region_volume_mc(
    qvec: Sequence[Fraction],
    psi: ApproxCollection,
    places: PlaceSet,
    samples: int,
    seed: int,
):
    """Monte Carlo volume of X_q: sample X uniformly from the fundamental
    domain per coordinate and decide, exactly, whether some b in Z_S brings
    X.q + b inside every window.  Returns (estimate, std_error, hits)."""
    import hashlib
    import random as _random

    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not any(qvec):
        raise ValueError("the fiber region is for nonzero q")
    m, n = psi.m, psi.n
    qvec = tuple(Fraction(c) for c in qvec)

    fin_data = []
    for p in places.primes:
        mv = min_valuation(qvec, p)
        kappa = -mv if mv is not None else None
        j = psi.finite_fn(p).threshold_exponent(kappa)
        depth = j + 2 * max(kappa or 0, 0) + 1
        fin_data.append((p, j, depth))
    t_real = sup_norm(qvec) ** n
    res = 2**53

    rng = _random.Random(
        int.from_bytes(hashlib.sha256(f"{seed}/xq".encode()).digest()[:8], "big")
    )
    hits = 0
    for _ in range(samples):
        xs_real = [Fraction(rng.randrange(res), res) for _ in range(n)]
        sigma_real = sum(x * q for x, q in zip(xs_real, qvec))
        pairs = []
        D = 1
        stage = []
        for p, j, depth in fin_data:
            xs_p = [rng.randrange(p**depth) for _ in range(n)]
            sigma_p = sum(x * q for x, q in zip(xs_p, qvec))
            vp = padic_valuation(sigma_p, p)
            e = max(0, int(-vp) if sigma_p != 0 else 0, -j)
            stage.append((p, j, e, sigma_p))
            D *= p**e
        for p, j, e, sigma_p in stage:
            kap = j + e
            if kap > 0:
                modp = p**kap
                x = D * sigma_p
                if x == 0:
                    pairs.append((0, modp))
                else:
                    pairs.append(
                        ((-x.numerator * pow(x.denominator, -1, modp)) % modp, modp)
                    )
        r, M = _CrtCache().crt_fold(pairs)
        c = D * sigma_real
        v = psi.real.value_exact(t_real)
        if v is not None:
            vn, vd, w = as_root_triple(v)
            E = m * w
            Ky = _kernel.introot((vn * (c.denominator * D) ** E) // vd, E)
        else:
            Ky = psi.real.max_root_leq(t_real, Fraction((c.denominator * D) ** m), m)
        lo = -((Ky + c.numerator) // c.denominator)
        hi = (Ky - c.numerator) // c.denominator
        if _kernel.count_in_ap_int(lo, hi, r, M) >= 1:
            hits += 1
    phat = hits / samples
    se = math.sqrt(phat * (1 - phat) / samples)
    return phat, se, hits


# --------------------------------------------------------------------------
# combinatorial bounds


@dataclass(frozen=True)
class ProfileCountResult:
    exact: int
    bound: Fraction
    feasible: bool


def profile_equality_feasible(profile: NormProfile, places: PlaceSet) -> bool:
    """The compatibility condition for ||q||_p = T_p to be achievable: T_inf
    factors over Z_S with a positive integer unit part, and the valuation of
    T_inf at each finite place is at least -k_p."""
    t = profile.t_inf
    rest = t
    for p in places.primes:
        lp = padic_valuation(t, p)
        if -lp > profile.exponent(p):
            return False
        rest /= Fraction(p) ** lp
    return rest.denominator == 1 and rest >= 1


def profile_count_bound(
    n: int, profile: NormProfile, places: PlaceSet, budget: int = 500_000
) -> ProfileCountResult:
    """Exact #{q in Z_S^n : ||q||_p = T_p at every place} with the closed-form
    upper bound 2n(2 prod T_p + 1)**(n-1).  Profiles violating the
    compatibility condition have exact count 0."""
    u_fin = {p: e for p, e in profile.fin_exp}
    exact = 0
    spent = 0
    for q in enumerate_box(n, places, profile.t_inf, u_fin):
        spent += 1
        if spent > budget:
            raise BudgetExceeded("profile enumeration budget exceeded")
        nrm = sup_norm(q) if any(q) else Fraction(0)
        if nrm != profile.t_inf:
            continue
        ok = True
        for p in places.primes:
            mv = min_valuation(q, p)
            if mv is None or -mv != profile.exponent(p):
                ok = False
                break
        if ok:
            exact += 1
    bound = 2 * n * (2 * profile.product() + 1) ** (n - 1)
    return ProfileCountResult(exact, bound, profile_equality_feasible(profile, places))
