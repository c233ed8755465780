"""Periodic points, reduction screening, Julia-set ball covers.

The Julia set is never computed directly: it is approximated by finite
unions of closed balls closed under pullback (``build_omega``) and by the
nested preimage covers Omega_0 > Omega_1 > ... (``omega_sequence``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    EscapedCover,
    ExtensionFieldRequired,
    MemoryCapExceeded,
    MembershipFailure,
    NotFoundWithinPeriodCap,
    PadicError,
    SaturationNotReached,
)
from .newton import (
    ClosedBall,
    canonical_center,
    constant_norm_on_ball,
    pullback_ball,
    root_bound_ball,
    roots_in_ball,
)
from .padic import INF, PadicContext, PadicNumber, vp
from .poly import DEFAULT_DEGREE_CAP, Polynomial, RationalMap, sylvester_resultant

log = logging.getLogger(__name__)

DEFAULT_MEMORY_CAP = 1 << 20


@dataclass
class BallCover:
    """Disjoint closed balls; ``parents[i]`` is the ball of the previous
    generation that ball ``i`` pulls back from, ``containers[i]`` the one
    that contains it."""

    balls: list[ClosedBall]
    generation: int = 0
    parents: list[int] | None = None
    containers: list[int] | None = None
    _index: dict | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    @property
    def ctx(self) -> PadicContext:
        return self.balls[0].ctx

    def radius_exponents(self):
        return sorted({b.exp for b in self.balls})

    def bounding_exponent(self):
        """eta with every ball inside B(0, p^-eta)."""
        worst = INF
        for b in self.balls:
            v = vp(b.center, b.p)
            worst = min(worst, b.exp, v)
        return Fraction(worst)

    def index_of(self, z):
        """Index of the unique ball containing z, or None."""
        exps = {b.exp for b in self.balls}
        if len(exps) == 1 and next(iter(exps)).denominator == 1:
            if self._index is None:
                self._index = {b.center: i for i, b in enumerate(self.balls)}
            t = next(iter(exps))
            try:
                key = canonical_center(self.ctx, z, t)
            except PadicError:
                key = None
            if key is not None:
                return self._index.get(key)
        hits = [i for i, b in enumerate(self.balls) if b.contains_point(z)]
        return hits[0] if hits else None

    def contains_ball(self, B: ClosedBall) -> bool:
        return any(b.contains_ball(B) for b in self.balls)

    def same_point_set(self, other: "BallCover") -> bool:
        return sorted(b.sort_key() for b in self.balls) == sorted(b.sort_key() for b in other.balls)


@dataclass
class PeriodicPoint:
    point: PadicNumber
    period: int
    multiplier_exp: Fraction
    cycle: list = field(default_factory=list)

    @property
    def repelling(self) -> bool:
        return self.multiplier_exp < 0


class PeriodicPointList(list):
    """Q_p-rational periodic points; ``missing`` counts roots outside Q_p."""

    missing: int = 0


@dataclass
class ExpansionWitness:
    lam_exp: Fraction
    derivative_exps: list[Fraction]
    delta_exp: Fraction | None = None


def multiplier_norm(f: RationalMap, cycle, p: int | None = None) -> Fraction:
    """Exponent of |(f^q)'(p)| as the sum over the cycle of v(f'(x))."""
    q = len(cycle)
    if p is None:
        p = cycle[0].p
    total = Fraction(0)
    for i, x in enumerate(cycle):
        nxt = f(x)
        if not nxt == cycle[(i + 1) % q]:
            raise ValueError("not a cycle of f at working precision")
        d = f.derivative_at(x)
        v = d.val if isinstance(d, PadicNumber) else vp(d, p)
        total += v
    return total


def periodic_points(f: RationalMap, q: int, ctx: PadicContext, search: ClosedBall | None = None,
                    degree_cap: int = DEFAULT_DEGREE_CAP) -> PeriodicPointList:
    """All Q_p-rational points of period dividing q, with multipliers."""
    if f.degree < 2:
        raise ValueError("periodic point search needs degree >= 2")
    fq = f.iterate(q, degree_cap)
    P = fq.f1 - fq.f2 * Polynomial.z()
    region = search if search is not None else root_bound_ball(P, ctx)
    out = PeriodicPointList()
    try:
        roots = roots_in_ball(P, region)
    except ExtensionFieldRequired as e:
        roots = e.found
        out.missing = e.expected - sum(k for _, k in e.found)
        log.info("q=%d: %d periodic points outside Q_p", q, out.missing)
    for x, _ in roots:
        cycle = [x]
        for _ in range(q - 1):
            cycle.append(f(cycle[-1]))
        out.append(PeriodicPoint(x, q, multiplier_norm(f, cycle), cycle))
    return out


def good_reduction(f: RationalMap, p: int) -> bool:
    """Unit homogeneous resultant of the content-1 integral pair."""
    d = f.degree
    r = sylvester_resultant(f.f1, f.f2, d, d)
    return r != 0 and vp(r, p) == 0


def build_omega(f: RationalMap, seeds, radius_exp, ctx: PadicContext, depth_cap: int = 20) -> BallCover:
    """Balls of radius p^-radius_exp about the seeds, saturated under pullback.

    Each pass pulls every ball back; a branch not already inside the
    cover contributes a new ball about its centre.  The result is closed:
    every branch of every ball lies in some cover ball.
    """
    balls: list[ClosedBall] = []

    def add(B: ClosedBall):
        nonlocal balls
        if any(b.contains_ball(B) for b in balls):
            return False
        balls = [b for b in balls if not B.contains_ball(b)] + [B]
        return True

    for s in seeds:
        point = s.point if isinstance(s, PeriodicPoint) else s
        add(ClosedBall(ctx, point, radius_exp))
    if not balls:
        raise ValueError("no seeds")
    cache: dict = {}
    for _ in range(depth_cap + 1):
        changed = False
        for B in list(balls):
            if B not in cache:
                cache[B] = pullback_ball(f, B)
            for D in cache[B].balls:
                if not any(b.contains_ball(D) for b in balls):
                    add(ClosedBall(ctx, D.center, min(radius_exp, D.exp)))
                    changed = True
        if not changed:
            balls.sort(key=ClosedBall.sort_key)
            return BallCover(balls, 0)
    raise SaturationNotReached(f"cover not pullback-closed within {depth_cap} passes")


def _pullback_generation(f: RationalMap, prev: BallCover, regions) -> BallCover:
    d = f.degree
    entries = []
    for i, B in enumerate(prev.balls):
        region_idx = regions(i)
        region = [prev_region_ball for _, prev_region_ball in region_idx]
        bs = pullback_ball(f, B, region=region, allow_critical=True)
        count = sum(br.degree for br in bs.branches)
        if count != d:
            raise MembershipFailure(f"{B} has {count} preimages in the cover, expected {d}", i)
        for br in bs.branches:
            host = [j for j, R in region_idx if R.contains_ball(br.ball)]
            if not host:
                raise MembershipFailure(f"branch {br.ball} escapes the cover", i)
            entries.append((br.ball, i, host[0]))
    entries.sort(key=lambda e: e[0].sort_key())
    return BallCover([e[0] for e in entries], prev.generation + 1, [e[1] for e in entries], [e[2] for e in entries])


def omega_sequence(f: RationalMap, omega: BallCover, k: int, memory_cap: int = DEFAULT_MEMORY_CAP) -> list[BallCover]:
    """Omega_0 = omega, Omega_{m+1} = f^{-1}(Omega_m), for m < k.

    Preimages of a ball of Omega_m are searched only inside the children of
    its container in Omega_{m-1}, which is where nesting puts them.
    """
    if len(omega) * f.degree**k > memory_cap:
        raise MemoryCapExceeded(f"{len(omega)}*{f.degree}^{k} balls exceed cap {memory_cap}")
    base = BallCover(list(omega.balls), 0)
    seq = [base]
    if k == 0:
        return seq
    whole = list(enumerate(base.balls))
    seq.append(_pullback_generation(f, base, lambda i: whole))
    for _ in range(1, k):
        prev, grand = seq[-1], seq[-2]
        children: dict[int, list] = {}
        for j, par in enumerate(prev.parents):
            children.setdefault(par, []).append((j, prev.balls[j]))
        seq.append(_pullback_generation(f, prev, lambda i: children.get(prev.containers[i], [])))
        del grand
    return seq


def check_membership(f: RationalMap, lam_exp, omega: BallCover) -> ExpansionWitness:
    """Certify |f'| >= p^-lam_exp on omega and f^{-1}(omega) within omega."""
    if lam_exp >= 0:
        raise ValueError("lambda must exceed 1 (exponent < 0)")
    if not len(omega):
        raise ValueError("empty cover")
    d = f.degree
    exps = []
    region = list(omega.balls)
    for i, B in enumerate(omega.balls):
        try:
            e = constant_norm_on_ball(f.derivative, B)
        except PadicError as err:
            raise MembershipFailure(f"|f'| not constant on {B}: {err}", i) from err
        if e > lam_exp:
            raise MembershipFailure(f"|f'| = p^{-e} below lambda on {B}", i)
        exps.append(e)
        try:
            bs = pullback_ball(f, B, region=region)
        except ExtensionFieldRequired:
            raise
        except PadicError as err:
            raise MembershipFailure(f"pullback of {B} failed: {err}", i) from err
        if len(bs.branches) != d or any(not omega.contains_ball(D) for D in bs.balls):
            raise MembershipFailure(f"preimages of {B} leave the cover", i)
    return ExpansionWitness(Fraction(lam_exp), exps)


def find_repelling_in_omega(f: RationalMap, omega: BallCover, q_max: int = 6,
                            degree_cap: int = DEFAULT_DEGREE_CAP) -> PeriodicPoint:
    """A repelling cycle with every point inside omega, periods 1..q_max."""
    if not len(omega):
        raise ValueError("empty cover: no certified Omega")
    ctx = omega.ctx
    eta = omega.bounding_exponent()
    search = ClosedBall(ctx, 0, math.floor(eta) - 1)
    for q in range(1, q_max + 1):
        for pt in periodic_points(f, q, ctx, search, degree_cap):
            if not all(omega.index_of(x) is not None for x in pt.cycle):
                continue
            if multiplier_norm(f, pt.cycle) < 0:
                return pt
    raise NotFoundWithinPeriodCap(f"no repelling cycle in the cover with period <= {q_max}")


def itinerary(f: RationalMap, z, omega1: BallCover, depth: int) -> tuple[int, ...]:
    """Indices of the omega1 balls visited by z, f(z), ..., f^{depth-1}(z)."""
    out = []
    for _ in range(depth):
        i = omega1.index_of(z)
        if i is None:
            raise EscapedCover(f"orbit point {z} left the cover")
        out.append(i)
        z = f(z)
    return tuple(out)


def sample_points(cover: BallCover, n: int, rng, ctx: PadicContext | None = None, digits: int = 40) -> list[PadicNumber]:
    """n points of the cover: a random ball, then random digits below its radius."""
    ctx = ctx or cover.ctx
    p = ctx.prime
    out = []
    for _ in range(n):
        B = cover.balls[rng.randrange(len(cover))]
        T = math.ceil(B.exp)
        z = B.center + Fraction(p) ** T * rng.randrange(p**digits)
        out.append(ctx.from_rational(z))
    return out


def orbit_stays(f: RationalMap, z, cover: BallCover, depth: int) -> bool:
    """Whether z, f(z), ..., f^depth(z) all lie in the cover (z in Omega_depth)."""
    for i in range(depth + 1):
        if cover.index_of(z) is None:
            return False
        if i < depth:
            z = f(z)
    return True
