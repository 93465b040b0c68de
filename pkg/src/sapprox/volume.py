"""Exact volumes of the adelic approximation regions, with a Monte Carlo oracle.

The region attached to a collection psi and a profile T is the set of pairs
(x, y) with ||x||_p^m <= psi_p(||y||_p^n) and ||y||_p^n <= T_p at every
place.  Its volume factors over the places: the real factor is
2**n * integral of psi_inf over [0, T_inf] (times 2**m for the x-ball),
and each finite factor is the shell sum
sum_{k <= t_p} p**(kn) (1 - p**(-n)) psi_p(p**(kn)) with T_p = p**(t_p n),
whose k <= 0 part telescopes exactly to 1.

The Monte Carlo estimator is an independent oracle: it samples the bounding
adelic box (uniform reals at the real place, uniform residues at the finite
places) and tests membership with the same exact comparisons used
everywhere else.  The bounding box volume is exact, so the only error is
binomial.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .approx import ApproxCollection
from .sring import REAL_PLACE, NormProfile, PlaceSet, min_valuation, sup_norm


@dataclass(frozen=True)
class Region:
    """E_psi(T) for a collection psi and a profile T bounding ||y||_p^n."""

    psi: ApproxCollection
    profile: NormProfile
    places: PlaceSet

    def __post_init__(self):
        self.psi.check_places(self.places)
        if tuple(p for p, _ in self.profile.fin_exp) != self.places.primes:
            raise ValueError("profile places do not match the place set")
        for p, e in self.profile.fin_exp:
            if e % self.psi.n != 0:
                raise ValueError(
                    f"finite bound exponent at p={p} must be a multiple of n={self.psi.n}"
                )

    @property
    def m(self) -> int:
        return self.psi.m

    @property
    def n(self) -> int:
        return self.psi.n

    def t_block(self, p: int) -> int:
        """t_p with T_p = p**(t_p * n)."""
        return self.profile.exponent(p) // self.psi.n


@dataclass(frozen=True)
class VolumeResult:
    """Exact factored volume: total = 2**m * real_factor * prod(finite factors)."""

    m: int
    n: int
    real_factor: Fraction | float
    real_error: Fraction | float
    finite_factors: tuple[tuple[int, Fraction], ...]
    total: Fraction | float
    total_error: Fraction | float

    @property
    def is_exact(self) -> bool:
        return isinstance(self.total, Fraction)

    def place_factor(self, place) -> Fraction | float:
        """vol(E_{psi_p}(T_p)); the real place carries the 2**m x-ball factor."""
        if place == REAL_PLACE:
            return Fraction(2) ** self.m * self.real_factor
        for p, f in self.finite_factors:
            if p == place:
                return f
        raise KeyError(place)

    def identity_holds(self) -> bool:
        """total == 2**m * real_factor * prod(finite factors), re-multiplied."""
        prod = Fraction(2) ** self.m * self.real_factor
        for _, f in self.finite_factors:
            prod = prod * f
        if self.is_exact:
            return prod == self.total
        return math.isclose(float(prod), float(self.total), rel_tol=1e-12)


def finite_place_factor(region: Region, p: int) -> Fraction:
    """The exact factor at p: shell sum up to t_p, with the k <= 0 tail = 1."""
    n, m = region.n, region.m
    fn = region.psi.finite_fn(p)
    t = region.t_block(p)
    if t <= 0:
        return Fraction(p) ** (t * n)  # pure geometric tail: vol of the T_p ball
    total = Fraction(1)
    shell = 1 - Fraction(p) ** (-n)
    for k in range(1, t + 1):
        total += Fraction(p) ** (k * n) * shell * Fraction(p) ** (-m * fn.z_at_block(k))
    return total


def volume_exact(region: Region) -> VolumeResult:
    """The factored volume of E_psi(T), exact whenever the real-place kind
    admits a closed rational form (plateau, rational power data, step data);
    otherwise the real factor carries an explicit absolute error bound."""
    m, n = region.m, region.n
    val, err = region.psi.real.integral_to(region.profile.t_inf)
    two_n = Fraction(2) ** n
    if isinstance(val, Fraction):
        real_factor: Fraction | float = two_n * val
        real_error: Fraction | float = two_n * err
    else:
        real_factor = float(two_n) * float(val)
        real_error = float(two_n) * float(err)

    fin = tuple((p, finite_place_factor(region, p)) for p in region.places.primes)
    fin_prod = Fraction(1)
    for _, f in fin:
        fin_prod *= f
    scale = Fraction(2) ** m * fin_prod
    if isinstance(real_factor, Fraction):
        total: Fraction | float = scale * real_factor
        total_error: Fraction | float = scale * real_error
    else:
        total = float(scale) * real_factor
        total_error = float(scale) * float(real_error)
    return VolumeResult(m, n, real_factor, real_error, fin, total, total_error)


# --------------------------------------------------------------------------
# membership


def contains(
    region: Region,
    x_at: Mapping[object, Sequence[Fraction]],
    y_at: Mapping[object, Sequence[Fraction]],
) -> bool:
    """Exact membership of an adelic point, given per-place rational coordinates."""
    m, n = region.m, region.n
    for place in region.places.all_places():
        x = tuple(Fraction(c) for c in x_at[place])
        y = tuple(Fraction(c) for c in y_at[place])
        if len(x) != m or len(y) != n:
            raise ValueError("point dimensions do not match the region")
        if place == REAL_PLACE:
            t = sup_norm(y) ** n
            if t > region.profile.t_inf:
                return False
            if not region.psi.real.leq_value(sup_norm(x) ** m, t):
                return False
        else:
            p = place
            fn = region.psi.finite_fn(p)
            mv_y = min_valuation(y, p)
            kappa = None if mv_y is None else -mv_y
            if kappa is not None and kappa * n > region.profile.exponent(p):
                return False
            z = fn.threshold_exponent(kappa)
            mv_x = min_valuation(x, p)
            if mv_x is not None and mv_x < z:
                return False
    return True


def contains_pair(region: Region, x_vec: Sequence[Fraction], y_vec: Sequence[Fraction]) -> bool:
    """Membership of a diagonally embedded S-integer pair."""
    x_at = {place: x_vec for place in region.places.all_places()}
    y_at = {place: y_vec for place in region.places.all_places()}
    return contains(region, x_at, y_at)


# --------------------------------------------------------------------------
# Monte Carlo oracle


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    std_error: float
    hits: int
    samples: int
    box_volume: Fraction


def _derive_seed(seed: int, *tags) -> int:
    text = "/".join(str(t) for t in (seed,) + tags)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _cover_radius(bound: Fraction, root: int) -> float:
    """Smallest convenient float r with r**root >= bound (exactly)."""
    r = float(bound) ** (1.0 / root) if bound > 0 else 0.0
    while Fraction(r) ** root < bound:
        r = math.nextafter(r, math.inf)
    return r


def volume_monte_carlo(region: Region, samples: int, seed: int) -> MonteCarloResult:
    """Uniform sampling of the bounding adelic box with exact membership tests.

    Deterministic given (seed, samples); the budget is consumed in fixed-size
    blocks with independently derived streams, so the result is independent
    of how blocks would be distributed across workers.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if region.profile.t_inf < 1:
        raise ValueError("Monte Carlo oracle requires T_inf >= 1")
    m, n = region.m, region.n
    psi = region.psi

    sup_x = psi.real.sup_value()
    if sup_x <= 0 or region.profile.t_inf <= 0:
        raise ValueError("degenerate bounding box")
    rx = _cover_radius(sup_x, m)
    ry = _cover_radius(region.profile.t_inf, n)

    fin_data = []  # (p, t, depth_y, depth_x, z table upper bound)
    box_vol = (2 * Fraction(rx)) ** m * (2 * Fraction(ry)) ** n
    for p in region.places.primes:
        fn = psi.finite_fn(p)
        t = region.t_block(p)
        z_max = fn.z_at_block(t) if t >= 1 else 0
        depth_y = max(t, 0) + 1
        depth_x = z_max + 1
        fin_data.append((p, t, depth_y, depth_x, fn))
        box_vol *= Fraction(p) ** (t * n)  # exact volume of the ||y||_p ball

    hits = 0
    block = 8192
    done = 0
    block_index = 0
    while done < samples:
        count = min(block, samples - done)
        rng = random.Random(_derive_seed(seed, "mc-block", block_index))
        for _ in range(count):
            xs = tuple(Fraction(rng.uniform(-rx, rx)) for _ in range(m))
            ys = tuple(Fraction(rng.uniform(-ry, ry)) for _ in range(n))
            ok = True
            t_real = sup_norm(ys) ** n if n else Fraction(0)
            if t_real > region.profile.t_inf:
                ok = False
            if ok and not psi.real.leq_value(sup_norm(xs) ** m, t_real):
                ok = False
            if ok:
                for p, t, dy, dx, fn in fin_data:
                    ry_res = [rng.randrange(p**dy) for _ in range(n)]
                    rx_res = [rng.randrange(p**dx) for _ in range(m)]
                    mv_y = min((_capped_val(r, p, dy) for r in ry_res), default=dy)
                    kappa = t - mv_y
                    z = fn.z_at_block(kappa) if kappa >= 1 else 0
                    if z > 0:
                        mv_x = min(_capped_val(r, p, dx) for r in rx_res)
                        if mv_x < z:
                            ok = False
                            break
            else:
                # keep the finite-place stream aligned even on real-place misses
                for p, t, dy, dx, fn in fin_data:
                    for _ in range(n):
                        rng.randrange(p**dy)
                    for _ in range(m):
                        rng.randrange(p**dx)
            if ok:
                hits += 1
        done += count
        block_index += 1

    phat = hits / samples
    est = float(box_vol) * phat
    se = float(box_vol) * math.sqrt(phat * (1 - phat) / samples)
    return MonteCarloResult(est, se, hits, samples, box_vol)


def _capped_val(residue: int, p: int, depth: int) -> int:
    """Valuation of a residue known mod p**depth, capped at depth."""
    if residue == 0:
        return depth
    v = 0
    while residue % p == 0:
        residue //= p
        v += 1
    return v
