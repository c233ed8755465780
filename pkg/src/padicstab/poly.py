"""Exact polynomials and rational maps over Q.

Structural work (gcd, resultants, composition) happens over exact
rationals; p-adic numbers enter only through evaluation and norms.
Polynomials may also carry :class:`PadicNumber` coefficients, which is what
Taylor shifts at p-adic centres and the conjugacy equations produce.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

from .errors import DegreeCapExceeded, InsufficientPrecision
from .padic import INF, INFINITY, PadicNumber, vp

DEFAULT_DEGREE_CAP = 4096


def _is_exact_zero(c) -> bool:
    if isinstance(c, PadicNumber):
        return c.exact
    return c == 0


class Polynomial:
    """Dense polynomial c_0 + c_1 z + ... with trailing exact zeros trimmed."""

    __slots__ = ("coeffs", "_ints")

    def __init__(self, coeffs=()):
        cs = [c if isinstance(c, PadicNumber) else Fraction(c) for c in coeffs]
        while cs and _is_exact_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)
        self._ints = None

    def integer_coeffs(self):
        """The coefficients as ints, or None unless all are integers."""
        if self._ints is None:
            ok = all(isinstance(c, Fraction) and c.denominator == 1 for c in self.coeffs)
            self._ints = [int(c) for c in self.coeffs] if ok else False
        return self._ints or None

    @classmethod
    def z(cls) -> "Polynomial":
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls([c])

    @property
    def degree(self):
        """Degree; ``-INF`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -INF

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs) if self.is_rational() else id(self)

    def __repr__(self):
        if not self.coeffs:
            return "Polynomial(0)"
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if _is_exact_zero(c):
                continue
            mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            terms.append(f"({c}){mono}" if mono else f"({c})")
        return " + ".join(terms) or "0"

    # -- ring operations -----------------------------------------------
    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other])

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial([self.coeff(i) + other.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_exact_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Polynomial([1])
        for _ in range(k):
            result = result * self
        return result

    def __call__(self, z):
        if isinstance(z, PadicNumber) and self.coeffs and not z.exact and z.prec != INF and z.val >= 0:
            ints = self.integer_coeffs()
            if ints is not None:
                # integral polynomial at an integral point: known mod p^prec
                mod = z.p**z.prec
                Z = 0 if z.is_zero() else z.unit * z.p**z.val % mod
                acc = 0
                for c in reversed(ints):
                    acc = (acc * Z + c) % mod
                return z.ctx._make(acc, 0, z.prec)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def taylor_shift(self, a) -> "Polynomial":
        """Coefficients of F(a + u) as a polynomial in u."""
        cs = list(self.coeffs)
        n = len(cs)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                cs[j] = cs[j] + a * cs[j + 1]
        return Polynomial(cs)

    def scale_variable(self, s) -> "Polynomial":
        """F(s u)."""
        out, power = [], Fraction(1)
        for c in self.coeffs:
            out.append(c * power)
            power = power * s
        return Polynomial(out)

    def compose(self, other: "Polynomial") -> "Polynomial":
        acc = Polynomial()
        for c in reversed(self.coeffs):
            acc = acc * other + c
        return acc

    # -- Euclidean algebra over Q --------------------------------------
    def divmod(self, other: "Polynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.leading
        if len(rem) - 1 < dq:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] / lc
            quot[k - dq] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return Polynomial(quot), Polynomial(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Polynomial":
        return self * (1 / self.leading) if self.coeffs else self

    def content_and_primitive(self):
        """(c, P) with self = c * P and P integral with content 1, lc > 0."""
        if not self.coeffs:
            return Fraction(0), self
        den = lcm(*(c.denominator for c in self.coeffs))
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for x in ints:
            g = gcd(g, x)
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den), Polynomial([Fraction(x // g) for x in ints])


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over Q."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def squarefree_decomposition(F: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: F = c * prod P_k^k with P_k squarefree, coprime."""
    if F.degree < 1:
        return []
    out = []
    a0 = poly_gcd(F, F.derivative())
    b = F // a0
    c = F.derivative() // a0
    d = c - b.derivative()
    k = 1
    while b.degree >= 1:
        a = poly_gcd(b, d)
        if a.degree >= 1:
            out.append((a, k))
        b = b // a
        c = d // a
        d = c - b.derivative()
        k += 1
    return out


def sylvester_resultant(a: Polynomial, b: Polynomial, m: int | None = None, n: int | None = None) -> Fraction:
    """Resultant via the Sylvester determinant with formal degrees m, n.

    Formal degrees default to the actual degrees; passing larger ones gives
    the homogeneous resultant (leading zeros allowed).
    """
    m = a.degree if m is None else m
    n = b.degree if n is None else n
    if m < 0 or n < 0:
        return Fraction(0)
    if m == 0 and n == 0:
        return Fraction(1)
    size = m + n
    rows = []
    ac = [a.coeff(i) for i in range(m, -1, -1)]
    bc = [b.coeff(i) for i in range(n, -1, -1)]
    for i in range(n):
        rows.append([Fraction(0)] * i + ac + [Fraction(0)] * (size - m - 1 - i))
    for i in range(m):
        rows.append([Fraction(0)] * i + bc + [Fraction(0)] * (size - n - 1 - i))
    return _determinant(rows)


def _determinant(rows) -> Fraction:
    M = [list(r) for r in rows]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        pv = M[col][col]
        det *= pv
        for r in range(col + 1, n):
            if M[r][col]:
                factor = M[r][col] / pv
                row_r, row_c = M[r], M[col]
                for k in range(col, n):
                    row_r[k] -= factor * row_c[k]
    return det


def resultant_nonzero(a: Polynomial, b: Polynomial, p: int | None = None):
    """(nonzero?, p-adic valuation or None, exact resultant)."""
    r = sylvester_resultant(a, b)
    return r != 0, (vp(r, p) if p is not None else None), r


def gauss_norm(F: Polynomial, eta, p: int):
    """Exponent of sup_{|z| <= p^(-eta)} |F(z)| = max_i |c_i| p^(-i eta)."""
    best = INF
    for i, c in enumerate(F.coeffs):
        v = c.val if isinstance(c, PadicNumber) else vp(c, p)
        if v == INF:
            continue
        term = v + i * eta
        if term < best:
            best = term
    return best if best == INF else Fraction(best)


@dataclass(frozen=True)
class DerivativeData:
    numerator: Polynomial
    denominator: Polynomial


class RationalMap:
    """f = f1 / f2 with coprime integral f1, f2 of joint content 1.

    The constructor cancels nothing: non-coprime input raises.  Use
    :meth:`reduced` when a common factor is expected (composition).
    """

    def __init__(self, numerator, denominator=None, *, check: bool = True):
        f1 = numerator if isinstance(numerator, Polynomial) else Polynomial(numerator)
        if denominator is None:
            f2 = Polynomial([1])
        else:
            f2 = denominator if isinstance(denominator, Polynomial) else Polynomial(denominator)
        if f2.is_zero():
            raise ValueError("denominator is the zero polynomial")
        if check and (f1.degree >= 1 or f2.degree >= 1):
            if f1.is_zero() or sylvester_resultant(f1, f2) == 0:
                raise ValueError("numerator and denominator share a common factor")
        f1, f2 = _normalize_pair(f1, f2)
        self.f1 = f1
        self.f2 = f2

    @classmethod
    def reduced(cls, f1: Polynomial, f2: Polynomial) -> "RationalMap":
        g = poly_gcd(f1, f2)
        if g.degree >= 1:
            f1, f2 = f1 // g, f2 // g
        return cls(f1, f2, check=False)

    @classmethod
    def from_strings(cls, num: list[str], den: list[str]) -> "RationalMap":
        return cls(Polynomial([Fraction(s) for s in num]), Polynomial([Fraction(s) for s in den]))

    @property
    def degree(self) -> int:
        return max(self.f1.degree, self.f2.degree)

    def __eq__(self, other):
        if not isinstance(other, RationalMap):
            return NotImplemented
        return self.f1 == other.f1 and self.f2 == other.f2

    def __hash__(self):
        return hash((self.f1, self.f2))

    def __repr__(self):
        return f"RationalMap(({self.f1}) / ({self.f2}))"

    def key(self):
        return (tuple(str(c) for c in self.f1.coeffs), tuple(str(c) for c in self.f2.coeffs))

    def __call__(self, z):
        return evaluate(self, z)

    @cached_property
    def derivative(self) -> DerivativeData:
        f1, f2 = self.f1, self.f2
        num = f1.derivative() * f2 - f1 * f2.derivative()
        return DerivativeData(num, f2 * f2)

    def derivative_at(self, z):
        d = self.derivative
        return d.numerator(z) / d.denominator(z)

    def compose(self, other: "RationalMap") -> "RationalMap":
        """self o other, via the homogenised numerator and denominator."""
        d = self.degree
        g1, g2 = other.f1, other.f2
        powers1 = [Polynomial([1])]
        powers2 = [Polynomial([1])]
        for _ in range(d):
            powers1.append(powers1[-1] * g1)
            powers2.append(powers2[-1] * g2)

        def homog(F: Polynomial) -> Polynomial:
            acc = Polynomial()
            for i in range(d + 1):
                c = F.coeff(i)
                if c:
                    acc = acc + powers1[i] * powers2[d - i] * c
            return acc

        return RationalMap.reduced(homog(self.f1), homog(self.f2))

    def iterate(self, k: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> "RationalMap":
        if k < 1:
            raise ValueError("iterate needs k >= 1")
        if self.degree**k > degree_cap:
            raise DegreeCapExceeded(f"degree {self.degree}^{k} exceeds cap {degree_cap}")
        result = self
        for _ in range(k - 1):
            result = self.compose(result)
        return result

    def critical_polynomial(self) -> Polynomial:
        """Numerator of f' (zeros are the finite critical points, poles aside)."""
        return self.derivative.numerator

    @cached_property
    def critical_values(self) -> Polynomial:
        return self.critical_value_polynomial()

    def critical_value_polynomial(self) -> Polynomial:
        """Polynomial in w vanishing at every finite critical value.

        Res_z(f1(z) - w f2(z), f1' f2 - f1 f2') is computed by evaluating the
        Sylvester determinant at deg+1 integer points and interpolating.
        """
        D = self.critical_polynomial()
        if D.degree < 1:
            return Polynomial([1])
        n = self.degree
        samples = []
        for w in range(D.degree + 1):
            samples.append((Fraction(w), sylvester_resultant(self.f1 - self.f2 * w, D, n, D.degree)))
        return _interpolate(samples)


def _interpolate(points) -> Polynomial:
    result = Polynomial()
    for i, (xi, yi) in enumerate(points):
        if yi == 0:
            continue
        term = Polynomial([yi])
        for j, (xj, _) in enumerate(points):
            if j != i:
                term = term * Polynomial([-xj, 1]) * (1 / (xi - xj))
        result = result + term
    return result


def _normalize_pair(f1: Polynomial, f2: Polynomial):
    cs = list(f1.coeffs) + list(f2.coeffs)
    den = lcm(*(c.denominator for c in cs))
    g = 0
    for c in cs:
        g = gcd(g, int(c * den))
    scale = Fraction(den, g)
    if f2.leading * scale < 0:
        scale = -scale
    return f1 * scale, f2 * scale


def evaluate(f: RationalMap, z):
    """Apply f to a point of the projective line (Fraction, PadicNumber or INFINITY)."""
    if z is INFINITY:
        if f.f1.degree > f.f2.degree:
            return INFINITY
        if f.f1.degree < f.f2.degree:
            return Fraction(0)
        return f.f1.leading / f.f2.leading
    den = f.f2(z)
    num = f.f1(z)
    if isinstance(den, PadicNumber):
        if den.is_zero():
            if den.exact:
                return INFINITY
            raise InsufficientPrecision("denominator indistinguishable from zero")
        return num / den
    if den == 0:
        return INFINITY
    return Fraction(num) / den
