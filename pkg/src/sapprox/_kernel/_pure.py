"""Pure-Python counting kernel.

Exact integer primitives used by the hot per-candidate loop of the solution
counter: p-adic valuations of integers, integer k-th roots, and closed-form
counts of arithmetic-progression points inside intervals.  A compiled twin
lives in ``_fast.pyx``; both implementations must agree bit-for-bit, which
is enforced by the kernel test suite.

Everything here is arbitrary-precision and branch-exact: no floats, no
rounding, no iteration over the counted range.
"""

from math import isqrt


def valuation(n: int, p: int) -> int:
    """Exponent of the prime p in n.  Requires n != 0."""
    if n == 0:
        raise ValueError("valuation of 0 is +infinity; handle upstream")
    n = abs(n)
    if p == 2:
        return (n & -n).bit_length() - 1
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def remove_factor(n: int, p: int) -> tuple[int, int]:
    """Split n != 0 as (v, u) with n = p**v * u and p not dividing u."""
    v = valuation(n, p)
    return v, n // p**v


def introot(x: int, e: int) -> int:
    """floor(x ** (1/e)) for x >= 0, exact."""
    if x < 0:
        raise ValueError("introot requires x >= 0")
    if e < 1:
        raise ValueError("introot requires e >= 1")
    if e == 1 or x < 2:
        return x
    if e == 2:
        return isqrt(x)
    if x.bit_length() <= e:
        return 1
    # Newton iteration from an over-estimate; converges monotonically down.
    r = 1 << ((x.bit_length() - 1) // e + 1)
    while True:
        nr = ((e - 1) * r + x // r ** (e - 1)) // e
        if nr >= r:
            break
        r = nr
    while r**e > x:
        r -= 1
    while (r + 1) ** e <= x:
        r += 1
    return r


def count_in_ap_int(lo: int, hi: int, residue: int, modulus: int) -> int:
    """#{b in Z : lo <= b <= hi, b = residue (mod modulus)}, closed form."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    if lo > hi:
        return 0
    return (hi - residue) // modulus - (lo - 1 - residue) // modulus


def count_in_ap(
    lo_num: int, lo_den: int, hi_num: int, hi_den: int, residue: int, modulus: int
) -> int:
    """AP count with rational interval endpoints lo_num/lo_den, hi_num/hi_den."""
    if lo_den < 1 or hi_den < 1:
        raise ValueError("endpoint denominators must be positive")
    lo = -((-lo_num) // lo_den)  # ceil
    hi = hi_num // hi_den  # floor
    return count_in_ap_int(lo, hi, residue, modulus)


def count_ap_abs_root(
    c_num: int, c_den: int, v_num: int, v_den: int, e: int, residue: int, modulus: int
) -> int:
    """#{b in Z : b = residue (mod modulus), |b + c_num/c_den|**e <= v_num/v_den}.

    c_den, v_den >= 1 and e >= 1.  The bound is resolved without computing
    the (generally irrational) e-th root: with y = b*c_den + c_num (an
    integer), the condition is |y|**e * v_den <= v_num * c_den**e, so the
    admissible |y| are exactly 0..K with K the integer e-th root of the
    cross-multiplied bound.
    """
    if c_den < 1 or v_den < 1:
        raise ValueError("denominators must be positive")
    if v_num < 0:
        return 0
    K = introot((v_num * c_den**e) // v_den, e)
    lo = -((K + c_num) // c_den)  # ceil((-K - c_num) / c_den)
    hi = (K - c_num) // c_den
    return count_in_ap_int(lo, hi, residue, modulus)
