"""Capped-absolute-precision arithmetic in Q_p.

A :class:`PadicNumber` stores an exact valuation, a unit residue and the
absolute precision ``prec`` it is known to (value modulo ``p**prec``).
Precision never exceeds the context cap and shrinks honestly under
multiplication and division by non-units.

Radii are handled as rational *exponents*: the radius ``p**(-t)`` is stored
as ``t`` (a :class:`~fractions.Fraction`), with ``INF`` standing for radius
zero.  Larger exponent means smaller radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ContextMismatch,
    DivisionByIndistinguishableZero,
    InsufficientPrecision,
)

INF = math.inf
DEFAULT_PRECISION = 128


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def vp_int(n: int, p: int):
    """p-adic valuation of an integer; ``INF`` for zero."""
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(x, p: int):
    """p-adic valuation of an int or Fraction."""
    x = Fraction(x)
    if x == 0:
        return INF
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def as_exponent(t):
    """Normalise a radius exponent to Fraction (or INF)."""
    if t == INF:
        return INF
    return Fraction(t)


def point_set_exponent(t):
    """Smallest p^Z radius with the same Q_p point set as radius p^(-t)."""
    if t == INF:
        return INF
    return Fraction(math.ceil(t))


def format_exponent(t) -> str:
    if t == INF:
        return "inf"
    return str(Fraction(t))


def parse_exponent(s: str):
    if s in ("inf", "+inf", "INF"):
        return INF
    return Fraction(s)


@dataclass(frozen=True)
class PadicContext:
    """The prime ``p`` and the absolute precision cap ``N``."""

    prime: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")

    def __call__(self, x) -> "PadicNumber":
        if isinstance(x, PadicNumber):
            if x.ctx.prime != self.prime:
                raise ContextMismatch(f"p={x.ctx.prime} vs p={self.prime}")
            return x
        return self.from_rational(x)

    def from_rational(self, num, den=1) -> "PadicNumber":
        if type(num) is int and den == 1:
            a, b = num, 1
        else:
            x = Fraction(num) / Fraction(den)
            a, b = x.numerator, x.denominator
        if a == 0:
            return self.exact_zero()
        p, N = self.prime, self.precision
        va, vb = vp_int(a, p), (0 if b == 1 else vp_int(b, p))
        val = va - vb
        if val >= N:
            return PadicNumber(self, INF, 0, N)
        mod = p ** (N - val)
        unit = (a // p**va) * pow(b // p**vb, -1, mod) % mod
        return PadicNumber(self, val, unit, N)

    def exact_zero(self) -> "PadicNumber":
        return PadicNumber(self, INF, 0, INF, exact=True)

    def zero(self, prec) -> "PadicNumber":
        return PadicNumber(self, INF, 0, min(prec, self.precision))

    def with_precision(self, precision: int) -> "PadicContext":
        return PadicContext(self.prime, precision)

    def _make(self, n: int, e: int, prec) -> "PadicNumber":
        """The value ``n * p**e`` known modulo ``p**prec``."""
        prec = min(prec, self.precision)
        if n == 0 or e >= prec:
            return PadicNumber(self, INF, 0, prec)
        p = self.prime
        v = vp_int(n, p)
        val = e + v
        if val >= prec:
            return PadicNumber(self, INF, 0, prec)
        unit = (n // p**v) % p ** (prec - val)
        return PadicNumber(self, val, unit, prec)


class PadicNumber:
    """An element of Q_p known modulo ``p**prec``.

    ``val`` is the exact valuation, or ``INF`` when the value is
    indistinguishable from zero at its precision.  ``exact`` marks the
    rational zero itself, which absorbs multiplication and never loses
    precision.
    """

    __slots__ = ("ctx", "val", "unit", "prec", "exact")

    def __init__(self, ctx: PadicContext, val, unit: int, prec, exact: bool = False):
        self.ctx = ctx
        self.val = val
        self.unit = unit
        self.prec = prec
        self.exact = exact

    # -- helpers -------------------------------------------------------
    @property
    def p(self) -> int:
        return self.ctx.prime

    def is_zero(self) -> bool:
        return self.val == INF

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.ctx.prime != self.ctx.prime:
                raise ContextMismatch(f"p={self.p} vs p={other.p}")
            return other
        if isinstance(other, Fraction) and other.denominator == 1:
            return self.ctx.from_rational(other.numerator)
        if isinstance(other, (int, Fraction)):
            return self.ctx.from_rational(other)
        return NotImplemented

    def _low_val(self):
        # a lower bound for the true valuation
        return self.val if self.val != INF else self.prec

    def norm_exponent(self):
        """Exponent t with |x| = p^(-t); INF for (indistinguishable) zero."""
        return self.val

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.exact:
            return other
        if other.exact:
            return self
        prec = min(self.prec, other.prec)
        if self.is_zero() and other.is_zero():
            return self.ctx.zero(prec)
        p = self.p
        if self.is_zero():
            return self.ctx._make(other.unit, other.val, prec)
        if other.is_zero():
            return self.ctx._make(self.unit, self.val, prec)
        e = min(self.val, other.val)
        n = self.unit * p ** (self.val - e) + other.unit * p ** (other.val - e)
        return self.ctx._make(n, e, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        mod = self.p ** (self.prec - self.val)
        return PadicNumber(self.ctx, self.val, (-self.unit) % mod, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.exact or other.exact:
            return self.ctx.exact_zero()
        prec = min(self.prec + other._low_val(), other.prec + self._low_val())
        if self.is_zero() or other.is_zero():
            return self.ctx.zero(prec)
        return self.ctx._make(self.unit * other.unit, self.val + other.val, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise DivisionByIndistinguishableZero(
                f"division by a value indistinguishable from 0 mod p^{other.prec}"
            )
        if self.exact:
            return self
        if self.is_zero():
            return self.ctx.zero(self.prec - other.val)
        rel = min(self.prec - self.val, other.prec - other.val)
        val = self.val - other.val
        mod = self.p**rel
        unit = self.unit * pow(other.unit, -1, mod) % mod
        return self.ctx._make(unit, val, val + rel)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int):
        if k < 0:
            return self.ctx.from_rational(1) / self**(-k)
        result = self.ctx.from_rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def key(self):
        """Hashable representation (identical digits and precision)."""
        return (self.p, self.val, self.unit, self.prec, self.exact)

    # -- conversions ---------------------------------------------------
    def truncate(self, T) -> Fraction:
        """The rational representative of ``self mod p**T``.

        Non-negative-valuation values give an integer in ``[0, p**T)``; a
        value of valuation ``v < 0`` gives ``a / p**(-v)``.
        """
        if T == INF:
            raise InsufficientPrecision("cannot truncate at infinite precision")
        T = int(T)
        if T > self.prec:
            raise InsufficientPrecision(
                f"need precision {T}, value known only mod p^{self.prec}"
            )
        if self.val >= T:
            return Fraction(0)
        p = self.p
        if self.val >= 0:
            return Fraction(self.unit * p**self.val % p**T)
        return Fraction(self.unit % p ** (T - self.val), p ** (-self.val))

    def lift(self) -> Fraction:
        """Rational representative at full known precision."""
        if self.exact:
            return Fraction(0)
        return self.truncate(self.prec)

    def digits(self, count: int = 10) -> list[int]:
        """Base-p digits starting at the valuation (for display)."""
        if self.is_zero():
            return []
        u, out = self.unit, []
        for _ in range(min(count, self.prec - self.val)):
            u, r = divmod(u, self.p)
            out.append(r)
        return out

    def __repr__(self):
        if self.exact:
            return "0"
        if self.is_zero():
            return f"O({self.p}^{self.prec})"
        return f"{self.lift()} + O({self.p}^{self.prec})"


class _Infinity:
    """The point at infinity of the projective line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


def norm(x: PadicNumber):
    """Radius exponent of |x| (its valuation)."""
    return x.val


def chordal_distance(z, w):
    """Exponent t with rho(z, w) = p^(-t) for the chordal metric.

    Identical representations give distance 0 (exponent INF); a difference
    that vanishes only to the available precision raises.
    """
    if z is INFINITY and w is INFINITY:
        return INF
    if z is INFINITY or w is INFINITY:
        a = w if z is INFINITY else z
        if a.is_zero():
            return Fraction(0)
        return Fraction(max(0, -a.val))
    if z is w or z.key() == w.key():
        return INF
    diff = z - w
    if diff.is_zero():
        if diff.exact:
            return INF
        raise InsufficientPrecision("|z - w| below working precision")

    def scale(a):
        return 0 if a.is_zero() else max(0, -a.val)

    return Fraction(diff.val + scale(z) + scale(w))


def rational_reconstruction(x: PadicNumber):
    """The rational a/b with |a|, |b| <= sqrt(p^N / 2) congruent to x, or None.

    Used for display: a root that is an exact small rational prints as one.
    """
    if x.exact:
        return Fraction(0)
    if x.is_zero() or x.prec == INF:
        return None
    p = x.p
    shift = min(x.val, 0)
    m = p ** (x.prec - shift)
    a = x.unit * p ** (x.val - shift) % m
    bound = math.isqrt(m // 2)
    r0, r1, s0, s1 = m, a, 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, s1) != 1:
        return None
    return Fraction(r1, s1) / Fraction(p) ** (-shift)
