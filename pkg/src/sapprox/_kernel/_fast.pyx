# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled counting kernel.

Twin of ``_pure``: identical semantics, exact arbitrary-precision results.
Small operands take branch-free C int64 paths; anything that could overflow
falls through to Python-object arithmetic, so results never depend on which
path ran.  The equivalence test suite cross-checks the two modules.
"""

from math import isqrt

# int64 guard: operands below this bound cannot overflow the C paths used here.
DEF SMALL = 2_000_000_000


cdef long long _fdiv(long long a, long long b) nogil:
    # floor division matching Python semantics (cdivision truncates).
    cdef long long q = a // b
    if a % b != 0 and ((a < 0) != (b < 0)):
        q -= 1
    return q


cpdef valuation(n, p):
    """Exponent of the prime p in n.  Requires n != 0."""
    if n == 0:
        raise ValueError("valuation of 0 is +infinity; handle upstream")
    cdef long long cn, cp, v
    if -SMALL < n < SMALL and p < SMALL:
        cn = n
        if cn < 0:
            cn = -cn
        cp = p
        v = 0
        while cn % cp == 0:
            cn //= cp
            v += 1
        return v
    n = abs(n)
    vv = 0
    while n % p == 0:
        n //= p
        vv += 1
    return vv


cpdef remove_factor(n, p):
    """Split n != 0 as (v, u) with n = p**v * u and p not dividing u."""
    v = valuation(n, p)
    return v, n // p**v


cpdef introot(x, e):
    """floor(x ** (1/e)) for x >= 0, exact."""
    if x < 0:
        raise ValueError("introot requires x >= 0")
    if e < 1:
        raise ValueError("introot requires e >= 1")
    if e == 1 or x < 2:
        return x
    if e == 2:
        return isqrt(x)
    bl = x.bit_length() if hasattr(x, "bit_length") else int(x).bit_length()
    if bl <= e:
        return 1
    r = 1 << ((bl - 1) // e + 1)
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


cpdef count_in_ap_int(lo, hi, residue, modulus):
    """#{b in Z : lo <= b <= hi, b = residue (mod modulus)}, closed form."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    if lo > hi:
        return 0
    cdef long long clo, chi, cr, cm
    if (
        -SMALL < lo < SMALL
        and -SMALL < hi < SMALL
        and -SMALL < residue < SMALL
        and modulus < SMALL
    ):
        clo = lo
        chi = hi
        cr = residue
        cm = modulus
        return _fdiv(chi - cr, cm) - _fdiv(clo - 1 - cr, cm)
    return (hi - residue) // modulus - (lo - 1 - residue) // modulus


cpdef count_in_ap(lo_num, lo_den, hi_num, hi_den, residue, modulus):
    """AP count with rational interval endpoints lo_num/lo_den, hi_num/hi_den."""
    if lo_den < 1 or hi_den < 1:
        raise ValueError("endpoint denominators must be positive")
    lo = -((-lo_num) // lo_den)
    hi = hi_num // hi_den
    return count_in_ap_int(lo, hi, residue, modulus)


cpdef count_ap_abs_root(c_num, c_den, v_num, v_den, e, residue, modulus):
    """#{b = residue (mod modulus) : |b + c_num/c_den|**e <= v_num/v_den}."""
    if c_den < 1 or v_den < 1:
        raise ValueError("denominators must be positive")
    if v_num < 0:
        return 0
    K = introot((v_num * c_den**e) // v_den, e)
    lo = -((K + c_num) // c_den)
    hi = (K - c_num) // c_den
    return count_in_ap_int(lo, hi, residue, modulus)
