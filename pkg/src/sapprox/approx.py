"""Collections of approximation functions, one per place.

The real-place function is non-increasing, positive, and identically 1 on
(0, 1]; a finite-place function is a step function on powers of p, constant
on blocks {p^(kn), ..., p^(kn+n-1)} with values p^(-m*z_k) for nonnegative
nondecreasing integers z_k.  Functions are data (a kind tag plus parameters),
not opaque callables, so that volumes, divergence decisions and the exact
comparisons inside the solution counter all have closed forms.

Real-place values may be irrational (a power law evaluates to an e-th root
of a rational); such values are carried exactly as :class:`RootVal` and all
comparisons against them cross-multiply integers.  Only the logarithmic
family has no exact representation: its comparisons run in rigorous interval
arithmetic with escalating precision and raise :class:`UndecidedComparison`
on a persistent tie instead of ever miscounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import mpmath

from . import _kernel
from .sring import PlaceSet


class UndecidedComparison(ArithmeticError):
    """An exact decision was required but the value straddles the boundary."""


class IntegralUndecidable(ValueError):
    """The divergence of an integral cannot be decided from the given data."""


# --------------------------------------------------------------------------
# exact values of the form (num/den)**(1/root)


@dataclass(frozen=True)
class RootVal:
    """The exact positive value (num/den) ** (1/root)."""

    num: int
    den: int
    root: int

    def __float__(self) -> float:
        return float(mpmath.root(mpmath.mpf(self.num) / self.den, self.root))


def make_root(num: int, den: int, root: int) -> Fraction | RootVal:
    """Build (num/den)**(1/root), collapsing to a Fraction when possible."""
    if num <= 0 or den <= 0 or root < 1:
        raise ValueError("make_root expects positive num/den and root >= 1")
    g = math.gcd(num, den)
    num, den = num // g, den // g
    if root == 1:
        return Fraction(num, den)
    rn = _kernel.introot(num, root)
    rd = _kernel.introot(den, root)
    if rn**root == num and rd**root == den:
        return Fraction(rn, rd)
    return RootVal(num, den, root)


def as_root_triple(v: Fraction | RootVal) -> tuple[int, int, int]:
    if isinstance(v, RootVal):
        return v.num, v.den, v.root
    return v.numerator, v.denominator, 1


def value_float(v) -> float:
    return float(v)


def fraction_leq(lhs: Fraction, v: Fraction | RootVal) -> bool:
    """Exact decision of lhs <= v for nonnegative lhs."""
    if isinstance(v, Fraction):
        return lhs <= v
    if lhs <= 0:
        return True
    # lhs <= (num/den)**(1/root), cross-multiplied with integer powers
    return lhs.numerator**v.root * v.den <= v.num * lhs.denominator**v.root


def _exact_pow(x: Fraction, q: Fraction) -> Fraction | None:
    """x**q as an exact positive rational, or None when it is irrational."""
    x, q = Fraction(x), Fraction(q)
    if x <= 0:
        raise ValueError("exact powers only for positive bases")
    if q < 0:
        out = _exact_pow(x, -q)
        return None if out is None else 1 / out
    y = x**q.numerator
    w = q.denominator
    if w == 1:
        return y
    rn = _kernel.introot(y.numerator, w)
    rd = _kernel.introot(y.denominator, w)
    if rn**w == y.numerator and rd**w == y.denominator:
        return Fraction(rn, rd)
    return None


def _to_mpf(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)


def _root_mpf(c: Fraction, a: Fraction) -> mpmath.mpf:
    """c ** (1/a) at the current working precision."""
    return mpmath.exp(mpmath.log(_to_mpf(c)) / _to_mpf(a))


def _mpf_with_error(expr) -> tuple[float, float]:
    """Evaluate a closed-form positive expression at high precision and
    report it with a generous absolute error bound."""
    with mpmath.workdps(40):
        v = expr()
        err = abs(v) * mpmath.mpf("1e-30") + mpmath.mpf("1e-30")
        return float(v), float(err)


# --------------------------------------------------------------------------
# real-place approximation functions


class RealApproxFunction:
    """Base of the real-place catalog.  Subclasses are immutable value types."""

    #: whether the plateau invariant psi((0,1]) = 1 holds structurally
    normalized = True

    def value_exact(self, t: Fraction) -> Fraction | RootVal | None:
        """The exact value at rational t >= 0, or None for numeric-only kinds."""
        raise NotImplementedError

    def value_triple(self, tn: int, td: int) -> tuple[int, int, int] | None:
        """psi(tn/td) as an unreduced root triple (vn, vd, w), meaning
        (vn/vd)**(1/w); None for numeric-only kinds.  The integer-only entry
        point the counting loop runs on: callers may pass unreduced tn/td
        and must not rely on reduced output."""
        v = self.value_exact(Fraction(tn, td))
        if v is None:
            return None
        return as_root_triple(v)

    def value_float(self, t) -> float:
        v = self.value_exact(Fraction(t))
        if v is None:
            raise NotImplementedError
        return float(v)

    def sup_value(self) -> Fraction:
        """sup over (0, inf); rational for every catalog kind."""
        return Fraction(1)

    def leq_value(self, lhs: Fraction, t: Fraction) -> bool:
        """Decide lhs <= psi(t) exactly (lhs rational, lhs >= 0)."""
        v = self.value_exact(t)
        if v is None:
            raise NotImplementedError
        return fraction_leq(lhs, v)

    def max_root_leq(self, t: Fraction, mult: Fraction, e: int) -> int:
        """max{y integer >= 0 : y**e <= psi(t) * mult}."""
        v = self.value_exact(t)
        if v is None:
            raise NotImplementedError
        vn, vd, w = as_root_triple(v)
        num = vn * mult.numerator**w
        den = vd * mult.denominator**w
        return _kernel.introot(num // den, e * w)

    def integral_to(self, T: Fraction) -> tuple[Fraction | float, Fraction | float]:
        """(value, absolute error bound) for the truncated integral over [0, T]."""
        raise NotImplementedError

    def integral_tail(self):
        """('divergent', None, None) or ('convergent', value, error) for [0, inf)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantOne(RealApproxFunction):
    """psi(t) = 1."""

    def value_exact(self, t):
        return Fraction(1)

    def value_triple(self, tn, td):
        return 1, 1, 1

    def integral_to(self, T):
        return Fraction(T), Fraction(0)

    def integral_tail(self):
        return ("divergent", None, None)

    def to_json(self):
        return {"kind": "constant-one"}


@dataclass(frozen=True)
class PowerLaw(RealApproxFunction):
    """psi(t) = min(1, c * t**(-a)) with rational c >= 1 and a > 0.

    c >= 1 keeps the plateau: for t <= 1, c*t**(-a) >= 1.
    """

    c: Fraction
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "a", Fraction(self.a))
        if self.c < 1:
            raise ValueError("power-law coefficient must be >= 1 to keep psi = 1 on (0,1]")
        if self.a <= 0:
            raise ValueError("power-law exponent must be positive")

    def _on_plateau(self, t: Fraction) -> bool:
        # c * t**(-a) >= 1  <=>  t**u <= c**w  with a = u/w
        if t <= 1:
            return True
        u, w = self.a.numerator, self.a.denominator
        cn, cd = self.c.numerator, self.c.denominator
        return t.numerator**u * cd**w <= cn**w * t.denominator**u

    def value_exact(self, t):
        t = Fraction(t)
        if self._on_plateau(t):
            return Fraction(1)
        u, w = self.a.numerator, self.a.denominator
        cn, cd = self.c.numerator, self.c.denominator
        # c * t**(-u/w) = (c**w / t**u) ** (1/w)
        return make_root(cn**w * t.denominator**u, cd**w * t.numerator**u, w)

    def value_triple(self, tn, td):
        u, w = self.a.numerator, self.a.denominator
        cn, cd = self.c.numerator, self.c.denominator
        if tn <= td or tn**u * cd**w <= cn**w * td**u:  # t <= 1 or c t^-a >= 1
            return 1, 1, 1
        return cn**w * td**u, cd**w * tn**u, w

    def integral_to(self, T):
        T = Fraction(T)
        if self._on_plateau(T):
            return T, Fraction(0)
        r0 = _exact_pow(self.c, 1 / self.a)
        if self.a == 1:

            def log_expr():
                r = _to_mpf(r0) if r0 is not None else _root_mpf(self.c, self.a)
                return r + _to_mpf(self.c) * mpmath.log(_to_mpf(T) / r)

            return _mpf_with_error(log_expr)
        if r0 is not None:
            t_pow = _exact_pow(T, 1 - self.a)
            if t_pow is not None:
                # integral of c r^-a over [r0, T] is (c*T^(1-a) - r0)/(1-a),
                # using c * r0^(1-a) = r0
                return r0 + (self.c * t_pow - r0) / (1 - self.a), Fraction(0)

        def pow_expr():
            r = _to_mpf(r0) if r0 is not None else _root_mpf(self.c, self.a)
            return r + (_to_mpf(self.c) * _to_mpf(T) ** _to_mpf(1 - self.a) - r) / _to_mpf(
                1 - self.a
            )

        return _mpf_with_error(pow_expr)

    def integral_tail(self):
        if self.a <= 1:
            return ("divergent", None, None)
        r0 = _exact_pow(self.c, 1 / self.a)
        if r0 is not None:
            return ("convergent", r0 * self.a / (self.a - 1), Fraction(0))
        val, err = _mpf_with_error(
            lambda: _root_mpf(self.c, self.a) * _to_mpf(self.a) / _to_mpf(self.a - 1)
        )
        return ("convergent", val, err)

    def to_json(self):
        return {"kind": "power-law", "c": str(self.c), "a": str(self.a)}


@dataclass(frozen=True)
class LogLaw(RealApproxFunction):
    """psi(t) = min(1, c / (t * (ln t)**b)) for t > 1, and 1 on (0, 1].

    c > 0, b >= 0.  The classical borderline family: the tail integral
    converges exactly when b > 1.  Values are transcendental, so decisions
    run in interval arithmetic.
    """

    c: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.c <= 0:
            raise ValueError("log-law coefficient must be positive")
        if self.b < 0:
            raise ValueError("log-law exponent must be nonnegative")

    def value_exact(self, t):
        t = Fraction(t)
        if t <= 1:
            return Fraction(1)
        if self.b == 0:
            return min(Fraction(1), self.c / t)
        return None

    def value_triple(self, tn, td):
        if tn <= td:
            return 1, 1, 1
        if self.b == 0:
            cn, cd = self.c.numerator, self.c.denominator
            if cn * td >= cd * tn:  # c/t >= 1
                return 1, 1, 1
            return cn * td, cd * tn, 1
        return None

    def value_float(self, t):
        t = Fraction(t)
        if t <= 1:
            return 1.0
        g = float(self.c) / (float(t) * math.log(float(t)) ** float(self.b))
        return min(1.0, g)

    def _g_interval(self, t: Fraction, prec: int):
        """Rigorous enclosure of c / (t * ln(t)**b) for t > 1."""
        iv = mpmath.iv
        old = iv.prec
        try:
            iv.prec = prec
            tt = iv.mpf(t.numerator) / iv.mpf(t.denominator)
            cc = iv.mpf(self.c.numerator) / iv.mpf(self.c.denominator)
            bb = iv.mpf(self.b.numerator) / iv.mpf(self.b.denominator)
            return cc / (tt * iv.exp(bb * iv.log(iv.log(tt))))
        finally:
            iv.prec = old

    def leq_value(self, lhs, t):
        t, lhs = Fraction(t), Fraction(lhs)
        if lhs > 1:
            return False
        if t <= 1:
            return True
        if self.b == 0:
            return lhs <= min(Fraction(1), self.c / t)
        iv = mpmath.iv
        for prec in (64, 128, 512, 2048):
            old = iv.prec
            try:
                iv.prec = prec
                g = self._g_interval(t, prec)
                f = iv.mpf(lhs.numerator) / iv.mpf(lhs.denominator)
                d = g - f
            finally:
                iv.prec = old
            if d.a >= 0:
                return True
            if d.b < 0:
                return False
        raise UndecidedComparison(f"psi(t) tie at t={t}")

    def max_root_leq(self, t, mult, e):
        t, mult = Fraction(t), Fraction(mult)
        if t <= 1 or self.b == 0:
            v = self.value_exact(t)
            return _kernel.introot(
                (v.numerator * mult.numerator) // (v.denominator * mult.denominator), e
            )
        iv = mpmath.iv
        for prec in (64, 128, 512, 2048):
            old = iv.prec
            try:
                iv.prec = prec
                g = self._g_interval(t, prec)
                if g.a >= 1:
                    # plateau: the value is exactly 1 and the threshold is the
                    # exact integer root of mult (an interval floor can never
                    # settle that boundary)
                    return _kernel.introot(mult.numerator // mult.denominator, e)
                root = None
                if g.b < 1:
                    mm = iv.mpf(mult.numerator) / iv.mpf(mult.denominator)
                    prod = g * mm
                    if prod.a > 0:
                        root = iv.exp(iv.log(prod) / e)
            finally:
                iv.prec = old
            if root is not None:
                klo = int(mpmath.floor(root.a))
                khi = int(mpmath.floor(root.b))
                if klo == khi:
                    return max(klo, 0)
        raise UndecidedComparison(f"root threshold tie at t={t}")

    def _crossover(self) -> tuple[Fraction, Fraction]:
        """Rational bracket [lo, hi] of the plateau end t0 (t0*(ln t0)**b = c)."""
        lo, hi = Fraction(1), Fraction(2)
        while self.leq_value(Fraction(1), hi):  # still on the plateau at hi
            lo, hi = hi, hi * 2
            if hi > 2**80:
                raise IntegralUndecidable("crossover search overflow")
        for _ in range(80):
            mid = (lo + hi) / 2
            if self.leq_value(Fraction(1), mid):
                lo = mid
            else:
                hi = mid
        return lo, hi

    def integral_to(self, T):
        T = Fraction(T)
        if T <= 1 or self.leq_value(Fraction(1), T):
            return T, Fraction(0)  # entirely on the plateau
        lo, hi = self._crossover()
        with mpmath.workdps(30):
            f = lambda r: _to_mpf(self.c) / (r * mpmath.log(r) ** _to_mpf(self.b))
            val, quad_err = mpmath.quad(f, [_to_mpf(hi), _to_mpf(T)], error=True)
            total = _to_mpf(lo) + val
            err = float(quad_err) + float(hi - lo)
        return float(total), err

    def integral_tail(self):
        if self.b <= 1:
            return ("divergent", None, None)
        lo, hi = self._crossover()
        with mpmath.workdps(30):
            f = lambda r: _to_mpf(self.c) / (r * mpmath.log(r) ** _to_mpf(self.b))
            val, quad_err = mpmath.quad(f, [_to_mpf(hi), mpmath.inf], error=True)
            total = _to_mpf(lo) + val
            err = float(quad_err) + float(hi - lo)
        return ("convergent", float(total), err)

    def to_json(self):
        return {"kind": "log-law", "c": str(self.c), "b": str(self.b)}


@dataclass(frozen=True)
class UserStep(RealApproxFunction):
    """Right-continuous-from-the-left step data: value 1 on (0, t_1], then
    v_i on (t_i, t_{i+1}], extended by the last value (the 'constant' tail).

    ``tail=None`` marks the extension as unacknowledged: evaluation still
    works, but tail integrals refuse to decide.
    """

    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    tail: str | None = "constant"

    def __post_init__(self):
        bps = tuple((Fraction(t), Fraction(v)) for t, v in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if not bps:
            raise ValueError("user-step needs at least one breakpoint")
        if bps[0][0] < 1:
            raise ValueError("first breakpoint below 1 would break psi = 1 on (0,1]")
        last_t, last_v = None, Fraction(1)
        for t, v in bps:
            if last_t is not None and t <= last_t:
                raise ValueError("breakpoint abscissae must be strictly increasing")
            if not (0 < v <= last_v):
                raise ValueError("step values must be positive and non-increasing")
            last_t, last_v = t, v
        if self.tail not in ("constant", None):
            raise ValueError("tail rule must be 'constant' or None")

    def value_exact(self, t):
        t = Fraction(t)
        val = Fraction(1)
        for ti, vi in self.breakpoints:
            if t <= ti:
                return val
            val = vi
        return val

    def value_triple(self, tn, td):
        val = Fraction(1)
        for ti, vi in self.breakpoints:
            if tn * ti.denominator <= ti.numerator * td:
                break
            val = vi
        return val.numerator, val.denominator, 1

    def integral_to(self, T):
        T = Fraction(T)
        total = Fraction(0)
        prev_t, val = Fraction(0), Fraction(1)
        for ti, vi in self.breakpoints:
            if T <= ti:
                return total + val * (T - prev_t), Fraction(0)
            total += val * (ti - prev_t)
            prev_t, val = ti, vi
        return total + val * (T - prev_t), Fraction(0)

    def integral_tail(self):
        if self.tail != "constant":
            raise IntegralUndecidable("user-step function has no acknowledged tail rule")
        return ("divergent", None, None)  # the constant tail value is positive

    def to_json(self):
        return {
            "kind": "user-step",
            "breakpoints": [[str(t), str(v)] for t, v in self.breakpoints],
            "tail": self.tail,
        }


@dataclass(frozen=True)
class Scaled(RealApproxFunction):
    """sigma * base(lambda * t): the wrapper produced by inflation and by the
    congruence rescaling.  Generally breaks the plateau normalization, which
    is intended; it never validates as a top-level user function.
    """

    base: RealApproxFunction
    value_scale: Fraction
    arg_scale: Fraction

    normalized = False

    def __post_init__(self):
        object.__setattr__(self, "value_scale", Fraction(self.value_scale))
        object.__setattr__(self, "arg_scale", Fraction(self.arg_scale))
        if self.value_scale <= 0 or self.arg_scale <= 0:
            raise ValueError("scales must be positive")

    def value_exact(self, t):
        v = self.base.value_exact(Fraction(t) * self.arg_scale)
        if v is None:
            return None
        if isinstance(v, Fraction):
            return v * self.value_scale
        s = self.value_scale
        return make_root(
            v.num * s.numerator**v.root, v.den * s.denominator**v.root, v.root
        )

    def value_triple(self, tn, td):
        lam = self.arg_scale
        base = self.base.value_triple(tn * lam.numerator, td * lam.denominator)
        if base is None:
            return None
        vn, vd, w = base
        s = self.value_scale
        return vn * s.numerator**w, vd * s.denominator**w, w

    def value_float(self, t):
        return float(self.value_scale) * self.base.value_float(Fraction(t) * self.arg_scale)

    def sup_value(self):
        return self.value_scale * self.base.sup_value()

    def leq_value(self, lhs, t):
        return self.base.leq_value(lhs / self.value_scale, Fraction(t) * self.arg_scale)

    def max_root_leq(self, t, mult, e):
        return self.base.max_root_leq(
            Fraction(t) * self.arg_scale, mult * self.value_scale, e
        )

    def integral_to(self, T):
        val, err = self.base.integral_to(Fraction(T) * self.arg_scale)
        f = self.value_scale / self.arg_scale
        if isinstance(val, Fraction):
            return val * f, err * f
        return float(val) * float(f), float(err) * float(f)

    def integral_tail(self):
        verdict, val, err = self.base.integral_tail()
        if verdict == "divergent":
            return (verdict, None, None)
        f = self.value_scale / self.arg_scale
        if isinstance(val, Fraction):
            return (verdict, val * f, err * f)
        return (verdict, float(val) * float(f), float(err) * float(f))

    def to_json(self):
        return {
            "kind": "scaled",
            "base": self.base.to_json(),
            "value_scale": str(self.value_scale),
            "arg_scale": str(self.arg_scale),
        }


def real_from_json(obj: Mapping) -> RealApproxFunction:
    kind = obj["kind"]
    if kind == "constant-one":
        return ConstantOne()
    if kind == "power-law":
        return PowerLaw(Fraction(obj["c"]), Fraction(obj["a"]))
    if kind == "log-law":
        return LogLaw(Fraction(obj["c"]), Fraction(obj["b"]))
    if kind == "user-step":
        return UserStep(
            tuple((Fraction(t), Fraction(v)) for t, v in obj["breakpoints"]),
            obj.get("tail", "constant"),
        )
    if kind == "scaled":
        return Scaled(
            real_from_json(obj["base"]),
            Fraction(obj["value_scale"]),
            Fraction(obj["arg_scale"]),
        )
    raise ValueError(f"unknown real function kind {kind!r}")


# --------------------------------------------------------------------------
# finite-place approximation functions


@dataclass(frozen=True)
class FiniteApproxFunction:
    """Step data z_k for one finite place: psi_p(p**j) = p**(-m*z_k) on the
    block j in [kn, kn+n-1], with z_k = 0 for k <= 0.

    ``head`` lists z_1..z_H explicitly; beyond that the tail rule applies:
    ("constant",) repeats the last head value (or 0 for an empty head) and
    ("linear", alpha, beta) sets z_k = alpha*k + beta.
    """

    p: int
    m: int
    n: int
    head: tuple[int, ...] = ()
    tail: tuple = ("constant",)

    def __post_init__(self):
        if not _is_prime_int(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if any(not isinstance(z, int) for z in self.head):
            raise ValueError("exponents z_k must be integers (values must lie in p^mZ)")
        if any(z < 0 for z in self.head):
            raise ValueError("exponents z_k must be nonnegative (psi_p <= 1)")
        if any(a > b for a, b in zip(self.head, self.head[1:])):
            raise ValueError("exponents z_k must be nondecreasing (psi_p non-increasing)")
        if self.tail[0] == "constant":
            if len(self.tail) != 1:
                raise ValueError("constant tail takes no parameters")
        elif self.tail[0] == "linear":
            _, alpha, beta = self.tail
            if not (isinstance(alpha, int) and isinstance(beta, int)) or alpha < 0:
                raise ValueError("linear tail needs integer alpha >= 0 and beta")
            H = len(self.head)
            first_tail = alpha * (H + 1) + beta
            prev = self.head[-1] if self.head else 0
            if first_tail < prev:
                raise ValueError("tail must continue nondecreasingly")
            if first_tail < 0:
                raise ValueError("tail exponents must be nonnegative")
        else:
            raise ValueError(f"unknown tail rule {self.tail!r}")

    def z_at_block(self, k: int) -> int:
        """The exponent z_k (psi_p = p**(-m*z_k) on block k); 0 for k <= 0."""
        if k <= 0:
            return 0
        if k <= len(self.head):
            return self.head[k - 1]
        if self.tail[0] == "constant":
            return self.head[-1] if self.head else 0
        _, alpha, beta = self.tail
        return alpha * k + beta

    def threshold_exponent(self, kappa) -> int:
        """z at the block of ||q||_p^n = p**(kappa*n); kappa None means q = 0."""
        if kappa is None:
            return 0
        return self.z_at_block(kappa)

    def evaluate(self, t: Fraction) -> Fraction:
        """psi_p(t) as an exact power of p (steps between powers of p follow
        the smallest power >= t); psi_p(0) = 1 by the plateau extension."""
        t = Fraction(t)
        if t < 0:
            raise ValueError("psi_p is defined for t >= 0")
        if t <= 1:
            return Fraction(1)
        j, x = 0, Fraction(1)
        while x < t:
            x *= self.p
            j += 1
        return Fraction(1, self.p ** (self.m * self.z_at_block(j // self.n)))

    def factor_tail_divergent(self) -> bool:
        """Divergence of sum_k p**(kn) * psi_p(p**(kn)): decided by the tail."""
        if self.tail[0] == "constant":
            return True
        _, alpha, _ = self.tail
        return self.m * alpha <= self.n

    def to_json(self):
        return {"p": self.p, "head": list(self.head), "tail": list(self.tail)}

    @classmethod
    def from_json(cls, obj: Mapping, m: int, n: int) -> "FiniteApproxFunction":
        return cls(obj["p"], m, n, tuple(obj.get("head", ())), tuple(obj.get("tail", ("constant",))))


def _is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


# --------------------------------------------------------------------------
# collections


@dataclass(frozen=True)
class ApproxCollection:
    """psi = (psi_p): the real function plus one finite function per place."""

    m: int
    n: int
    real: RealApproxFunction
    finite: tuple[tuple[int, FiniteApproxFunction], ...] = ()

    def __post_init__(self):
        ps = [p for p, _ in self.finite]
        if ps != sorted(set(ps)):
            raise ValueError("finite places must be sorted and distinct")
        for p, fn in self.finite:
            if fn.p != p:
                raise ValueError("finite function keyed under the wrong prime")
            if (fn.m, fn.n) != (self.m, self.n):
                raise ValueError("inconsistent dimensions across places")

    @classmethod
    def of(cls, real, finite: Mapping[int, FiniteApproxFunction], m: int, n: int):
        return cls(m, n, real, tuple(sorted(finite.items())))

    def finite_fn(self, p: int) -> FiniteApproxFunction:
        for q, fn in self.finite:
            if q == p:
                return fn
        raise KeyError(p)

    def check_places(self, places: PlaceSet) -> None:
        if tuple(p for p, _ in self.finite) != places.primes:
            raise ValueError("collection places do not match the place set")

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "real": self.real.to_json(),
            "finite": {str(p): fn.to_json() for p, fn in self.finite},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ApproxCollection":
        m, n = obj["m"], obj["n"]
        fin = {
            int(p): FiniteApproxFunction.from_json(spec, m, n)
            for p, spec in obj.get("finite", {}).items()
        }
        return cls.of(real_from_json(obj["real"]), fin, m, n)


def psi_one(places: PlaceSet, m: int, n: int) -> ApproxCollection:
    """The collection psi_p = 1 at every place."""
    fin = {p: FiniteApproxFunction(p, m, n) for p in places.primes}
    return ApproxCollection.of(ConstantOne(), fin, m, n)


def inflate(psi: ApproxCollection, eps: Fraction, sign: int) -> ApproxCollection:
    """The inflated collection psi^(+/-): the real component becomes
    (1+eps)**(+/-1) * psi_inf((1+eps)**(-/+1) * t); finite components are
    unchanged.  inflate(., eps, +1) >= psi >= inflate(., eps, -1) pointwise.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("inflation parameter must be positive")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    f = 1 + eps
    if sign == 1:
        real = Scaled(psi.real, value_scale=f, arg_scale=1 / f)
    else:
        real = Scaled(psi.real, value_scale=1 / f, arg_scale=f)
    return ApproxCollection(psi.m, psi.n, real, psi.finite)


# --------------------------------------------------------------------------
# divergence of the defining integral


@dataclass(frozen=True)
class DivergenceResult:
    divergent: bool
    real_divergent: bool
    finite_divergent: tuple[tuple[int, bool], ...]
    value: Fraction | float | None  # the full integral when convergent
    error: Fraction | float | None

    @property
    def verdict(self) -> str:
        return "divergent" if self.divergent else "convergent"


def integral_diverges(psi: ApproxCollection, places: PlaceSet) -> DivergenceResult:
    """Decide whether the integral of prod_p psi_p(||y||_p^n) over the full
    n-dimensional S-arithmetic space diverges, via the place factorization:
    the real factor is 2**n * integral of psi_inf over [0, inf), the factor
    at p is sum_k p**(kn) (1 - p**(-n)) psi_p(p**(kn)).  When every factor
    converges the exact (or tightly enclosed) product is returned.
    """
    psi.check_places(places)
    n = psi.n
    verdict, real_val, real_err = psi.real.integral_tail()
    real_div = verdict == "divergent"

    fin_flags = []
    fin_values = {}
    for p, fn in psi.finite:
        if fn.factor_tail_divergent():
            fin_flags.append((p, True))
            continue
        fin_flags.append((p, False))
        # exact head + geometric tail (linear z_k with m*alpha > n)
        H = len(fn.head)
        total = Fraction(1)  # the k <= 0 part sums exactly to 1
        shell = 1 - Fraction(p) ** (-n)
        for k in range(1, H + 1):
            total += Fraction(p) ** (k * n) * shell * Fraction(p) ** (-fn.m * fn.z_at_block(k))
        _, alpha, beta = fn.tail
        ratio = Fraction(p) ** (n - fn.m * alpha)
        first = Fraction(p) ** (-fn.m * beta) * ratio ** (H + 1)
        total += shell * first / (1 - ratio)
        fin_values[p] = total

    divergent = real_div or any(flag for _, flag in fin_flags)
    if divergent:
        return DivergenceResult(True, real_div, tuple(fin_flags), None, None)

    fin_prod = Fraction(1)
    for p, _ in psi.finite:
        fin_prod *= fin_values[p]
    scale = Fraction(2) ** n * fin_prod
    if isinstance(real_val, Fraction):
        return DivergenceResult(False, False, tuple(fin_flags), scale * real_val, scale * real_err)
    return DivergenceResult(
        False, False, tuple(fin_flags), float(scale) * float(real_val), float(scale) * float(real_err)
    )


def evaluate(fn, t) -> Fraction | float:
    """Evaluate either kind of approximation function at t, exactly when the
    kind admits it (finite places always do)."""
    t = Fraction(t)
    if isinstance(fn, FiniteApproxFunction):
        return fn.evaluate(t)
    v = fn.value_exact(t)
    if v is None:
        return fn.value_float(t)
    return v if isinstance(v, Fraction) else float(v)
