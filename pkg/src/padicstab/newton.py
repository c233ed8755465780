"""Ball algebra: Newton counts, ball images, Hensel lifting, pullbacks.

Counts and images follow C_p semantics (the balls are balls of the
algebraic closure); enumeration only ever returns Q_p-rational roots, and
a shortfall against the Newton count is reported as
:class:`ExtensionFieldRequired`.

Ball centres are canonical exact rationals: a centre is truncated to
absolute precision ``ceil(t)``, which keeps it inside the ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    BasinConditionViolated,
    BranchOverlap,
    CriticalPointMeetsCover,
    ExtensionFieldRequired,
    InsufficientPrecision,
    PoleInBall,
    RadiusExceedsMu,
    ZeroOrPoleInBall,
)
from .padic import INF, PadicContext, PadicNumber, as_exponent, vp, vp_int
from .poly import DerivativeData, Polynomial, RationalMap, squarefree_decomposition


def canonical_center(ctx: PadicContext, c, t) -> Fraction:
    T = math.ceil(t)
    if isinstance(c, PadicNumber):
        return c.truncate(T)
    c = Fraction(c)
    if c == 0 or vp(c, ctx.prime) >= T:
        return Fraction(0)
    p = ctx.prime
    a, b = c.numerator, c.denominator
    m = vp_int(b, p)
    mod = p ** (T + m)
    r = a * pow(b // p**m, -1, mod) % mod
    return Fraction(r, p**m)


class ClosedBall:
    """Closed ball B(c, p^(-t)) of C_p with a canonical rational centre."""

    __slots__ = ("ctx", "center", "exp")

    def __init__(self, ctx: PadicContext, center, exp):
        exp = as_exponent(exp)
        if exp == INF:
            raise ValueError("radius-zero balls are not supported")
        self.ctx = ctx
        self.exp = exp
        self.center = canonical_center(ctx, center, exp)

    @property
    def p(self) -> int:
        return self.ctx.prime

    def sort_key(self):
        return (self.center, self.exp)

    def __repr__(self):
        return f"B({self.center}, {self.p}^{-self.exp})"

    def __eq__(self, other):
        if not isinstance(other, ClosedBall):
            return NotImplemented
        return self.exp == other.exp and self.center == other.center

    def __hash__(self):
        return hash((self.center, self.exp))

    def contains_point(self, z) -> bool:
        if isinstance(z, PadicNumber):
            d = z - self.center
            if d.is_zero():
                if d.exact or d.prec >= self.exp:
                    return True
                raise InsufficientPrecision(f"membership in {self} unresolved")
            return d.val >= self.exp
        return vp(Fraction(z) - self.center, self.p) >= self.exp

    def contains_ball(self, other: "ClosedBall") -> bool:
        return other.exp >= self.exp and self.contains_point(other.center)

    def disjoint(self, other: "ClosedBall") -> bool:
        return vp(self.center - other.center, self.p) < min(self.exp, other.exp)

    def point_set_ball(self) -> "ClosedBall":
        return ClosedBall(self.ctx, self.center, math.ceil(self.exp))


@dataclass(frozen=True)
class MaximalTermIndex:
    l: int
    achieved: Fraction


def _valuation_of(c, p):
    """(valuation, resolved?) for a Fraction or PadicNumber coefficient."""
    if isinstance(c, PadicNumber):
        if c.is_zero() and not c.exact:
            return c.prec, False
        return c.val, True
    return vp(c, p), True


def maximal_term_index(coeffs, t, p: int) -> MaximalTermIndex:
    """Largest m maximising |a_m| r^m, with r = p^(-t)."""
    t = as_exponent(t)
    best, l = INF, None
    unresolved = []
    for m, c in enumerate(coeffs):
        v, ok = _valuation_of(c, p)
        if not ok:
            unresolved.append((v + m * t, m))
            continue
        if v == INF:
            continue
        term = v + m * t
        if term <= best:
            best, l = term, m
    if l is None:
        raise InsufficientPrecision("no coefficient has a resolved valuation")
    for bound, m in unresolved:
        if bound < best or (bound == best and m > l):
            raise InsufficientPrecision("an unresolved coefficient could change the maximal term")
    return MaximalTermIndex(l, Fraction(best))


def _int_coeffs(F: Polynomial):
    """Integer vector c and denominator D with F = (1/D) sum c_k z^k."""
    coeffs = [Fraction(c) for c in F.coeffs]
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in coeffs], den


def _int_shift(c, a: Fraction, deg: int):
    """h with m^deg * sum c_k (a + x)^k = sum h_i (m x)^i, where a = n/m."""
    n, m = a.numerator, a.denominator
    b = [ck * m ** (deg - k) for k, ck in enumerate(c)] + [0] * (deg + 1 - len(c))
    if n:
        for i in range(deg):
            for k in range(deg - 1, i - 1, -1):
                b[k] += n * b[k + 1]
    return b


def _shifted_valuations(F: Polynomial, a, p: int):
    """Exact valuations of the coefficients of F(a + x)."""
    a = Fraction(a)
    c, den = _int_coeffs(F)
    deg = len(c) - 1
    h = _int_shift(c, a, deg)
    vm = vp_int(a.denominator, p)
    base = vp_int(den, p) + deg * vm
    return [vp_int(x, p) + i * vm - base if x else INF for i, x in enumerate(h)]


def _max_term(vals, t):
    if t.denominator == 1:
        t = int(t)
    best, l = INF, None
    for m, v in enumerate(vals):
        if v == INF:
            continue
        term = v + m * t
        if term <= best:
            best, l = term, m
    return l, best


def count_roots_in_ball(F: Polynomial, B: ClosedBall) -> int:
    """Roots of F in B over C_p, with multiplicity."""
    if F.is_zero():
        raise ValueError("the zero polynomial has no root count")
    if all(not isinstance(c, PadicNumber) for c in F.coeffs):
        return _max_term(_shifted_valuations(F, B.center, B.p), B.exp)[0]
    shifted = F.taylor_shift(B.center)
    return maximal_term_index(shifted.coeffs, B.exp, B.p).l


def _image_data(f: RationalMap, B: ClosedBall):
    # with a = n/m and d = deg f, H_j(y) = m^d f_j(a + y/m) are integral and
    # m^(2d) N(a + x) = H1(y) H2(0) - H2(y) H1(0)
    p, a, t = B.p, B.center, B.exp
    d = max(f.f1.degree, f.f2.degree, 0)
    H1 = _int_shift([int(c) for c in f.f1.coeffs], a, d)
    H2 = _int_shift([int(c) for c in f.f2.coeffs], a, d)
    vm = vp_int(a.denominator, p)
    if f.f2.degree >= 1:
        l2, _ = _max_term([vp_int(x, p) + i * vm if x else INF for i, x in enumerate(H2)], t)
        if l2 > 0:
            raise PoleInBall(f"{f} has a pole in {B}")
    K = [H1[i] * H2[0] - H2[i] * H1[0] for i in range(d + 1)]
    if not any(K):
        raise ValueError("constant map has no ball image")
    l, best = _max_term([vp_int(x, p) + i * vm if x else INF for i, x in enumerate(K)], t)
    radius = Fraction(best) - 2 * vp_int(H2[0], p)
    return ClosedBall(B.ctx, Fraction(H1[0], H2[0]), radius), l


def image_of_ball(f: RationalMap, B: ClosedBall) -> ClosedBall:
    """f(B) for a pole-free ball.

    |f(z) - f(a)| = |N(z)| / |f2(a)|^2 with N = f1 f2(a) - f1(a) f2, because
    |f2| is constant on a pole-free ball; the sup of |N| on B is a Gauss
    norm, so the image radius is exact.
    """
    return _image_data(f, B)[0]


def image_index(f: RationalMap, B: ClosedBall) -> int:
    """Number of preimages in B of each point of f(B) (the l of the image)."""
    return _image_data(f, B)[1]


def constant_norm_on_ball(f, B: ClosedBall):
    """The common value of |f| on a ball free of zeros and poles."""
    if isinstance(f, RationalMap):
        num, den = f.f1, f.f2
    elif isinstance(f, DerivativeData):
        num, den = f.numerator, f.denominator
    else:
        num, den = f, Polynomial([1])
    if num.is_zero():
        raise ZeroOrPoleInBall("identically zero")
    for P in (num, den):
        if P.degree >= 1 and count_roots_in_ball(P, B) > 0:
            raise ZeroOrPoleInBall(f"zero or pole in {B}")
    return Fraction(vp(num(B.center), B.p) - vp(den(B.center), B.p))


# -- Hensel lifting -----------------------------------------------------

def hensel_lift(F: Polynomial, z0, target_precision=None, ctx: PadicContext | None = None) -> PadicNumber:
    """Newton iteration from z0 to the root in its basin.

    Requires |F(z0)| < |F'(z0)|^2.  The returned root is known to the
    precision that the iteration certifies (|z - root| = |F(z)/F'(z)|).
    ``target_precision`` (default: the context cap) must be reached, else
    InsufficientPrecision.
    """
    if not isinstance(z0, PadicNumber):
        if ctx is None:
            raise ValueError("a context is needed for a rational seed")
        z0 = ctx.from_rational(z0)
    ctx = z0.ctx
    target = ctx.precision if target_precision is None else target_precision
    dF = F.derivative()
    z = z0
    Fz = F(z)
    if Fz.is_zero():
        return _certify_root(z, Fz, dF(z), target)
    dz = dF(z)
    if dz.is_zero():
        raise BasinConditionViolated("F'(z0) vanishes")
    if not Fz.val > 2 * dz.val:
        raise BasinConditionViolated(
            f"|F(z0)| = p^-{Fz.val} not below |F'(z0)|^2 = p^-{2 * dz.val}"
        )
    for _ in range(4 * ctx.precision.bit_length() + 8):
        z = z - Fz / dz
        Fz, dz = F(z), dF(z)
        if Fz.is_zero() or Fz.val - dz.val >= z.prec:
            break
    return _certify_root(z, Fz, dz, target)


def _certify_root(z: PadicNumber, Fz: PadicNumber, dz: PadicNumber, target) -> PadicNumber:
    if dz.is_zero():
        known = z.prec
    else:
        err = (Fz.prec if Fz.is_zero() else Fz.val) - dz.val
        known = min(z.prec, err)
    if Fz.exact:
        known = z.prec
    if known < target:
        raise InsufficientPrecision(f"root certified only mod p^{known}, wanted p^{target}")
    return z.ctx._make(z.unit, z.val, known) if not z.is_zero() else z.ctx.zero(known)


# -- root isolation -----------------------------------------------------

def _int_primitive(coeffs):
    """Scale rational coefficients to a primitive integer vector."""
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints


def _unit_ball_count(G, p):
    best, l = INF, 0
    for i, c in enumerate(G):
        v = vp_int(c, p)
        if v <= best:
            best, l = v, i
    return l


def _child(G, j, p):
    cs = list(G)
    n = len(cs)
    if j:
        for i in range(n - 1):
            for k in range(n - 2, i - 1, -1):
                cs[k] += j * cs[k + 1]
    power = 1
    for i in range(n):
        cs[i] *= power
        power *= p
    g = 0
    for x in cs:
        g = gcd(g, x)
    return [x // g for x in cs] if g else cs


def root_bound_exponent(F: Polynomial, p: int) -> int:
    """Integer exponent T with every C_p root of F in B(0, p^(-T))."""
    n = F.degree
    vn = vp(F.leading, p)
    best = None
    for i in range(n):
        c = F.coeff(i)
        if c == 0:
            continue
        s = Fraction(vp(c, p) - vn, n - i)
        best = s if best is None or s < best else best
    return 0 if best is None else min(0, math.floor(best))


def root_bound_ball(F: Polynomial, ctx: PadicContext) -> ClosedBall:
    return ClosedBall(ctx, 0, root_bound_exponent(F, ctx.prime))


def isolate_simple_roots(S: Polynomial, region: ClosedBall, max_depth: int | None = None):
    """Q_p-rational roots of a squarefree S in a ball, as isolating balls.

    Returns ``(a, s)`` pairs: B(a, p^-s) holds exactly one C_p root of S,
    which is rational iff the Newton iteration from ``a`` converges (it
    does whenever the isolating node was reached).  Branches on residues
    mod p and prunes nodes whose Newton count is zero.
    """
    return _isolate_int(_int_coeffs(S)[0], region, max_depth)[0]


def _isolate_int(c, region: ClosedBall, max_depth=None):
    # also returns the Newton count of the integral-radius region
    p = region.p
    if max_depth is None:
        max_depth = 4 * region.ctx.precision
    T0 = math.ceil(region.exp)
    c0 = region.center
    deg = len(c) - 1
    h = _int_shift(c, c0, deg)
    m = c0.denominator
    if T0 >= 0:
        G0 = [x * (m * p**T0) ** i for i, x in enumerate(h)]
    else:
        G0 = [x * m**i * p ** (-T0 * (deg - i)) for i, x in enumerate(h)]
    g = 0
    for x in G0:
        g = gcd(g, x)
    G0 = [x // g for x in G0]
    out = []
    total = _unit_ball_count(G0, p)
    stack = [(c0, T0, G0)]
    while stack:
        a, s, G = stack.pop()
        l = _unit_ball_count(G, p)
        if l == 0:
            continue
        if l == 1:
            out.append((a, s))
            continue
        if s - T0 > max_depth:
            continue
        step = Fraction(p) ** s
        for j in range(p - 1, -1, -1):
            stack.append((a + j * step, s + 1, _child(G, j, p)))
    out.sort()
    return out, total


def _eval_int(c, n: int, m: int) -> int:
    """m^deg * sum c_k (n/m)^k."""
    acc, mp = 0, 1
    for ck in reversed(c):
        acc = acc * n + ck * mp
        mp *= m
    return acc


def _val_at(c, a: Fraction, p: int):
    """v(P(a)) for P = sum c_k z^k with integer c."""
    x = _eval_int(c, a.numerator, a.denominator)
    if x == 0:
        return INF
    return vp_int(x, p) - (len(c) - 1) * vp_int(a.denominator, p)


def newton_refine(S: Polynomial, a: Fraction, target, p: int, dS: Polynomial | None = None):
    """Refine an isolated root approximation until |a - root| <= p^-target.

    Returns ``(a, accuracy)`` where accuracy is the exact exponent of
    |a - root| (INF when a is the root).
    """
    c = _int_coeffs(S)[0]
    return _newton_int(c, _int_derivative(c), Fraction(a), target, p)


def _int_derivative(c):
    return [k * ck for k, ck in enumerate(c)][1:]


def _newton_int(c, dc, a: Fraction, target, p: int):
    K = max(math.ceil(target) + 2, 1)
    trunc_ctx = PadicContext(p, K)
    deg = len(c) - 1
    for _ in range(400):
        n, m = a.numerator, a.denominator
        Sa = _eval_int(c, n, m)
        if Sa == 0:
            return a, INF
        # S(a) = Sa / m^deg and S'(a) = dSa / m^(deg-1)
        dSa = _eval_int(dc, n, m)
        if dSa == 0:
            raise InsufficientPrecision("Newton refinement hit a critical point")
        acc = vp_int(Sa, p) - vp_int(dSa, p) - vp_int(m, p)
        if acc >= target:
            return a, acc
        a = canonical_center(trunc_ctx, Fraction(n * dSa - Sa, m * dSa), K)
    raise InsufficientPrecision("Newton refinement did not converge")


def _to_padic(ctx: PadicContext, a: Fraction, acc) -> PadicNumber:
    x = ctx.from_rational(a)
    if acc == INF or x.exact:
        return x
    known = min(ctx.precision, int(math.floor(acc)))
    if x.is_zero():
        return ctx.zero(known)
    return ctx._make(x.unit, x.val, known)


def roots_in_ball(F: Polynomial, B: ClosedBall) -> list[tuple[PadicNumber, int]]:
    """All Q_p-rational roots of F in B with multiplicity."""
    ctx = B.ctx
    p = ctx.prime
    if F.degree < 1:
        return []
    roots = []
    for S, k in squarefree_decomposition(F):
        dS = S.derivative()
        for a, _ in isolate_simple_roots(S, B.point_set_ball()):
            a, acc = newton_refine(S, a, ctx.precision, p, dS)
            roots.append((_to_padic(ctx, a, acc), k, a))
    roots.sort(key=lambda r: r[2])
    found = [(z, k) for z, k, _ in roots]
    expected = count_roots_in_ball(F, B)
    total = sum(k for _, k in found)
    if total < expected:
        raise ExtensionFieldRequired(
            f"Newton count {expected} in {B}, only {total} Q_p-rational", found, expected
        )
    return found


# -- inverse branches ---------------------------------------------------

@dataclass
class Branch:
    center: Fraction
    ball: ClosedBall
    derivative_exp: Fraction | None
    degree: int = 1


@dataclass
class BranchSystem:
    target: ClosedBall
    branches: list[Branch]

    @property
    def balls(self) -> list[ClosedBall]:
        return [b.ball for b in self.branches]


def _component_exponent(f: RationalMap, a: Fraction, target, p: int):
    # smallest t with f(B(a, p^-t)) of radius p^-target; the image radius
    # exponent min_i(w_i + i t) - 2 v(H2(0)) increases strictly in t
    d = max(f.f1.degree, f.f2.degree, 0)
    H1 = _int_shift([int(c) for c in f.f1.coeffs], a, d)
    H2 = _int_shift([int(c) for c in f.f2.coeffs], a, d)
    vm = vp_int(a.denominator, p)
    goal = target + 2 * vp_int(H2[0], p)
    best = None
    for i in range(1, d + 1):
        K = H1[i] * H2[0] - H2[i] * H1[0]
        if K:
            t = Fraction(goal - vp_int(K, p) - i * vm, i)
            best = t if best is None else max(best, t)
    return best


def _pullback_critical(f: RationalMap, B: ClosedBall, region, F: Polynomial) -> BranchSystem:
    # c is a critical value: components may map several-to-one onto B
    ctx, p = B.ctx, B.p
    S = Polynomial([1])
    for P, _ in squarefree_decomposition(F):
        S = S * P
    Sc, _ = _int_coeffs(S)
    dSc = _int_derivative(Sc)
    branches: list[Branch] = []
    expected = 0
    for R in region:
        expected += count_roots_in_ball(F, R)
        found, _ = _isolate_int(Sc, R.point_set_ball())
        for a, _ in found:
            acc = -INF
            while True:
                s = _component_exponent(f, a, B.exp, p)
                if acc >= s:
                    break
                a, acc = _newton_int(Sc, dSc, a, s, p)
            D = ClosedBall(ctx, a, s)
            if any(b.ball.contains_ball(D) for b in branches):
                continue
            img, l = _image_data(f, D)
            if img != B:
                raise BranchOverlap(f"component {D} maps onto {img}, not {B}")
            branches.append(Branch(D.center, D, None if l > 1 else B.exp - s, l))
    found_degree = sum(b.degree for b in branches)
    if found_degree < expected:
        raise ExtensionFieldRequired(
            f"{expected} preimages of {B} over C_p, {found_degree} accounted for in Q_p",
            [b.center for b in branches], expected,
        )
    branches.sort(key=lambda b: b.ball.sort_key())
    return BranchSystem(B, branches)


def pullback_ball(f: RationalMap, B: ClosedBall, mu=None, f_prime_floor=None,
                  region: list[ClosedBall] | None = None, allow_critical: bool = False) -> BranchSystem:
    """The components of f^{-1}(B), each mapped bijectively onto B.

    Roots z_k of f1 - c f2 (c the centre of B) are isolated inside
    ``region`` (default: a ball holding every C_p root); the branch around
    z_k has radius r / |f'(z_k)|.  Every branch is certified by recomputing
    its image: it must equal B with a single preimage per point.
    ``f_prime_floor`` optionally demands |f'| >= p^-floor on every branch.
    With ``allow_critical`` a critical value c is accepted: the result then
    lists the components of f^{-1}(B), with ``degree`` the local degree.
    """
    ctx, p = B.ctx, B.p
    if mu is not None and B.exp < mu:
        raise RadiusExceedsMu(f"{B} has radius above mu = {p}^-{mu}")
    c = B.center
    F = f.f1 - f.f2 * c
    if F.degree < 1:
        raise ValueError("f is constant on the fibre")
    if region is None:
        region = [root_bound_ball(F, ctx)]
    # a repeated root of f1 - c f2 is a critical point with value c
    if f.critical_values(c) == 0:
        if allow_critical:
            return _pullback_critical(f, B, region, F)
        raise CriticalPointMeetsCover(f"{c} is a critical value of {f}")
    # m F = m f1 - n f2 for c = n/m, an integer polynomial with the same roots
    n, m = c.numerator, c.denominator
    f1c, f2c = [int(x) for x in f.f1.coeffs], [int(x) for x in f.f2.coeffs]
    width = max(len(f1c), len(f2c))
    f1c += [0] * (width - len(f1c))
    f2c += [0] * (width - len(f2c))
    Fc = [m * x - n * y for x, y in zip(f1c, f2c)]
    while Fc and Fc[-1] == 0:
        Fc.pop()
    dFc = _int_derivative(Fc)
    f2c = [int(x) for x in f.f2.coeffs]
    branches = []
    expected = 0
    for R in region:
        found, total = _isolate_int(Fc, R.point_set_ball())
        expected += total if R.exp.denominator == 1 else count_roots_in_ball(F, R)
        for a, _ in found:
            acc = -INF
            while True:
                # |f'(z_k)| = |F'(z_k)| / |f2(z_k)|, both constant near z_k
                dexp = Fraction(_val_at(dFc, a, p) - _val_at(f2c, a, p))
                s = B.exp - dexp
                if acc >= s:
                    break
                a, acc = _newton_int(Fc, dFc, a, s, p)
            D = ClosedBall(ctx, a, s)
            img, l = _image_data(f, D)
            if l != 1:
                raise CriticalPointMeetsCover(f"critical point in branch {D}")
            if img != B:
                raise BranchOverlap(f"branch {D} maps onto {img}, not {B}")
            if f_prime_floor is not None and dexp > f_prime_floor:
                raise ZeroOrPoleInBall(f"|f'| below floor on {D}")
            branches.append(Branch(D.center, D, dexp))
    if len(branches) < expected:
        raise ExtensionFieldRequired(
            f"{expected} preimages of {B} over C_p, {len(branches)} Q_p-rational",
            [b.center for b in branches], expected,
        )
    branches.sort(key=lambda b: b.ball.sort_key())
    for i in range(len(branches)):
        for j in range(i + 1, len(branches)):
            if not branches[i].ball.disjoint(branches[j].ball):
                raise BranchOverlap(f"{branches[i].ball} meets {branches[j].ball}")
    return BranchSystem(B, branches)
