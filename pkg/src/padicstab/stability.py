"""Expansion constants, perturbation neighbourhoods, conjugacies, certificates.

All radii are exponents (radius p^-t stored as t).  The pipeline in
:func:`j_stability_certificate` screens the map, grows a pullback-closed
cover around a repelling cycle, measures how far the critical data sits
from it, and turns that distance into an explicit box of allowed
coefficient perturbations.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import (
    BallCover,
    PeriodicPoint,
    build_omega,
    check_membership,
    good_reduction,
    periodic_points,
)
from .errors import (
    BasinConditionViolated,
    CriticalPointMeetsCover,
    DegreeCapExceeded,
    ExtensionFieldRequired,
    GOutsideCertifiedNeighborhood,
    InsufficientPrecision,
    MembershipFailure,
    OrbitEscapedOmega,
    PadicError,
    SaturationNotReached,
    UniquenessViolation,
    ZeroOrPoleInBall,
)
from .newton import (
    ClosedBall,
    _max_term,
    _shifted_valuations,
    constant_norm_on_ball,
    count_roots_in_ball,
    hensel_lift,
    maximal_term_index,
)
from .padic import INF, PadicContext, PadicNumber, vp
from .poly import DEFAULT_DEGREE_CAP, Polynomial, RationalMap, gauss_norm

log = logging.getLogger(__name__)

ERRATA = (
    "mu uses the minimum of |k|^(1/(k-1)); a maximum there would give mu = delta",
    "degree 2 maps are accepted; the arguments only need d >= 2",
    "coefficient bounds carry the m2^2 factor from dividing by |f2||g2|",
)


# -- constants ----------------------------------------------------------

def expansion_constant_exponent(p: int) -> Fraction:
    """Exponent of min_k |k|^(1/(k-1)), attained at k = p."""
    if p < 2:
        raise ValueError("p must be prime")
    return Fraction(1, p - 1)


def mu_from_delta(delta_exp, p: int) -> Fraction:
    if delta_exp == INF:
        raise ValueError("delta must be positive")
    return Fraction(delta_exp) + expansion_constant_exponent(p)


def critical_set_polynomials(f: RationalMap) -> list[tuple[str, Polynomial]]:
    """Polynomials whose roots are the finite critical points, poles and critical values."""
    out = [("critical point", f.critical_polynomial()), ("pole", f.f2), ("critical value", f.critical_values)]
    return [(name, P) for name, P in out if P.degree >= 1]


def _nearest_root_exponent(P: Polynomial, B: ClosedBall):
    """Exponent of the distance from B to the nearest root of P (none inside B)."""
    vals = _shifted_valuations(P, B.center, B.p)
    l, _ = _max_term(vals, B.exp)
    if l > 0:
        return None
    # largest root valuation of P(c + x): the first Newton polygon slope
    v0 = vals[0]
    return max(Fraction(v0 - v, j) for j, v in enumerate(vals) if j and v != INF)


def separation_exponent(f: RationalMap, balls) -> Fraction:
    """The largest e with p^-e attained as a distance between the balls and
    the critical set; raises if a critical point, pole or critical value
    lies in a ball."""
    worst = None
    for name, P in critical_set_polynomials(f):
        for B in balls:
            e = _nearest_root_exponent(P, B)
            if e is None:
                raise CriticalPointMeetsCover(f"a {name} of {f} lies in {B}")
            worst = e if worst is None or e > worst else worst
    return worst


def delta_from_separation(f: RationalMap, cover: BallCover) -> Fraction:
    """Integral exponent of the largest p^Z radius strictly below the
    distance from the cover to the critical set."""
    if not len(cover):
        raise ValueError("empty cover")
    e = separation_exponent(f, cover.balls)
    if e is None:
        return Fraction(0)
    return Fraction(math.floor(e) + 1)


@dataclass(frozen=True)
class SupNormConstants:
    M1: Fraction
    M2: Fraction
    M1_prime: Fraction
    M2_prime: Fraction
    m2: Fraction
    MD: Fraction


def sup_norm_constants(f: RationalMap, omega: BallCover, eta) -> SupNormConstants:
    """Gauss norms on B(0, p^-eta) and min |f2| on the cover, as exponents."""
    p = omega.ctx.prime
    m2 = None
    for B in omega.balls:
        e = constant_norm_on_ball(f.f2, B)
        m2 = e if m2 is None or e > m2 else m2
    return SupNormConstants(
        gauss_norm(f.f1, eta, p),
        gauss_norm(f.f2, eta, p),
        gauss_norm(f.f1.derivative(), eta, p),
        gauss_norm(f.f2.derivative(), eta, p),
        m2,
        gauss_norm(f.derivative.numerator, eta, p),
    )


# -- perturbation bounds -------------------------------------------------

@dataclass
class PerturbationBounds:
    """Allowed |eps_i| < p^-numerator_exps[i], |kappa_j| < p^-denominator_exps[j].

    ``r_exp`` and ``s_exp`` are the guaranteed strict bounds on
    sup |f - g| and sup |f' - g'| over the cover.  The ``literal_*`` lists
    hold the uncorrected textbook constants for comparison only.
    """

    numerator_exps: list
    denominator_exps: list
    r_exp: Fraction
    s_exp: Fraction
    eta_exp: Fraction
    prime: int = 2
    constants: SupNormConstants | None = None
    literal_numerator_exps: list = field(default_factory=list)
    literal_denominator_exps: list = field(default_factory=list)

    def deviations(self, f: RationalMap, g: RationalMap, scale=Fraction(1)):
        d = len(self.numerator_exps)
        eps = [Fraction(scale) * g.f1.coeff(i) - f.f1.coeff(i) for i in range(d)]
        kap = [Fraction(scale) * g.f2.coeff(j) - f.f2.coeff(j) for j in range(d)]
        return eps, kap

    def contains(self, f: RationalMap, g: RationalMap) -> bool:
        """Whether some scaling of (g1, g2) lies in the coefficient box around (f1, f2)."""
        if g.degree != f.degree:
            return False
        p = self.prime
        for scale in _candidate_scales(f, g):
            eps, kap = self.deviations(f, g, scale)
            if all(vp(e, p) > b for e, b in zip(eps, self.numerator_exps)) and \
                    all(vp(k, p) > b for k, b in zip(kap, self.denominator_exps)):
                return True
        return False


def _candidate_scales(f: RationalMap, g: RationalMap):
    seen = {Fraction(1)}
    yield Fraction(1)
    for F, G in ((f.f1, g.f1), (f.f2, g.f2)):
        for i in range(max(F.degree, G.degree, 0) + 1):
            a, b = Fraction(F.coeff(i)), Fraction(G.coeff(i))
            if a and b and a / b not in seen:
                seen.add(a / b)
                yield a / b


def perturbation_bounds(f: RationalMap, omega: BallCover, eta, r_exp, s_exp) -> PerturbationBounds:
    """Sound coefficient bounds for sup|f-g| < p^-r and sup|f'-g'| < p^-s.

    With E = sum eps_i z^i and K = sum kappa_j z^j bounded on B(0, eta) by
    Ehat and Khat, Khat < m2 keeps |f2 + K| = |f2| and

      f - g = (f1 K - f2 E) / (f2 (f2 + K))
      g' - f' = (Delta f2^2 - A (2 f2 K + K^2)) / (f2^2 (f2 + K)^2)

    where A = f1' f2 - f1 f2' and Delta collects the first-order terms in
    E, E', K, K'.  Bounding each product by Gauss norms gives the
    conditions below (all in exponent form).
    """
    if r_exp == INF or s_exp == INF:
        raise ValueError("bounds must be positive")
    p = omega.ctx.prime
    eta = Fraction(eta)
    C = sup_norm_constants(f, omega, eta)
    m2 = C.m2
    # conditions on Ehat and Khat, each as "exponent must exceed"
    e_conds = [r_exp + 2 * m2 - C.M2, s_exp + 2 * m2 - min(C.M2 - eta, C.M2_prime)]
    k_conds = [m2, r_exp + 2 * m2 - C.M1, s_exp + 2 * m2 - min(C.M1_prime, C.M1 - eta)]
    if C.MD != INF:
        k_conds.append(s_exp + 3 * m2 - C.MD)
    e_hat = max(c for c in e_conds if c != -INF)
    k_hat = max(c for c in k_conds if c != -INF)
    d = f.degree + 1
    num = [Fraction(e_hat - i * eta) for i in range(d)]
    den = [Fraction(k_hat - j * eta) for j in range(d)]
    # the uncorrected constants: xi_i = r/(M2 eta^i), zeta_j = min(m2/eta^j, r M1/(M2^2 eta^j))
    lit_num = [Fraction(r_exp - C.M2 - i * eta) for i in range(d)]
    lit_den = [Fraction(max(m2, r_exp + C.M1 - 2 * C.M2) - j * eta) for j in range(d)]
    return PerturbationBounds(num, den, Fraction(r_exp), Fraction(s_exp), eta, p, C, lit_num, lit_den)


def certify_neighborhood(f: RationalMap, lam_exp, omega: BallCover, delta_exp) -> PerturbationBounds:
    """Bounds with r = mu(delta) and s = lambda for a cover that is delta-interior."""
    if any(delta_exp < B.exp for B in omega.balls):
        raise ValueError("delta exceeds a cover radius: B(z, delta) is not inside the cover")
    mu = mu_from_delta(delta_exp, omega.ctx.prime)
    return perturbation_bounds(f, omega, omega.bounding_exponent(), mu, lam_exp)


def sup_difference_exponent(f: RationalMap, g: RationalMap, omega: BallCover) -> Fraction:
    """Exact exponent of sup over the cover of |f - g| (pole-free cover).

    On each ball |f2| and |g2| are constant, so the sup of
    |f1 g2 - g1 f2| / |f2 g2| is a Gauss norm of the shifted numerator.
    """
    P = f.f1 * g.f2 - g.f1 * f.f2
    best = INF
    for B in omega.balls:
        for Q in (f.f2, g.f2):
            if Q.degree >= 1 and count_roots_in_ball(Q, B) > 0:
                raise ZeroOrPoleInBall(f"pole in {B}")
        if P.is_zero():
            continue
        top = maximal_term_index(P.taylor_shift(B.center).coeffs, B.exp, B.p).achieved
        e = top - vp(f.f2(B.center), B.p) - vp(g.f2(B.center), B.p)
        best = min(best, e)
    return best


def sample_perturbation(f: RationalMap, bounds: PerturbationBounds, rng, digits: int = 6) -> RationalMap:
    """A map whose coefficient deviations lie strictly inside the bounds."""
    p = bounds.prime
    for _ in range(100):
        g1, g2 = [], []
        for target, exps, src in ((g1, bounds.numerator_exps, f.f1), (g2, bounds.denominator_exps, f.f2)):
            for i, b in enumerate(exps):
                e = Fraction(p) ** (math.floor(b) + 1) * rng.randrange(p**digits)
                target.append(Fraction(src.coeff(i)) + e)
        try:
            g = RationalMap(g1, g2)
        except ValueError:
            continue
        if g.degree == f.degree:
            return g
    raise RuntimeError("could not sample a perturbation of full degree")


# -- conjugacy ----------------------------------------------------------

class Conjugacy:
    """h_l : Omega_l(f) -> Omega_l(g) with g(h_{l+1}(z)) = h_l(f(z)).

    h_{l+1}(z) is the root of g1 - h_l(f(z)) g2 in B(z, mu/|g'(z)|).
    Values are memoised by (point, level) so forward orbits share work.
    """

    def __init__(self, f: RationalMap, g: RationalMap, mu_exp, lam_exp, omega: BallCover,
                 precision: int | None = None):
        self.f, self.g = f, g
        self.mu_exp, self.lam_exp = Fraction(mu_exp), Fraction(lam_exp)
        self.omega = omega
        self.ctx = omega.ctx if precision is None else omega.ctx.with_precision(precision)
        self.memo: dict = {}

    @classmethod
    def for_depth(cls, f, g, mu_exp, lam_exp, omega, depth: int):
        """A conjugacy working at the smallest precision that certifies depth levels."""
        c = cls(f, g, mu_exp, lam_exp, omega)
        return cls(f, g, mu_exp, lam_exp, omega, c.required_precision(depth))

    def point(self, z) -> PadicNumber:
        """z in the working context, truncated to its precision."""
        if not isinstance(z, PadicNumber):
            return self.ctx.from_rational(z)
        if z.exact or z.ctx == self.ctx:
            return self.ctx.exact_zero() if z.exact else z
        N = min(z.prec, self.ctx.precision)
        return self.ctx._make(z.unit, z.val, N) if not z.is_zero() else self.ctx.zero(N)

    def bound_exponent(self, level: int) -> Fraction:
        """Exponent of mu / lambda^level."""
        return self.mu_exp - level * self.lam_exp

    def required_precision(self, depth: int) -> int:
        # Hensel lifting restores full precision at every level, so only the
        # digits spent by one evaluation of f and g need a margin
        p = self.ctx.prime
        loss = max(max(0, vp(m.f2(B.center), p)) for m in (self.f, self.g) for B in self.omega.balls)
        return math.ceil(self.bound_exponent(depth)) + 16 + 2 * loss

    def step(self, z: PadicNumber, c: PadicNumber) -> PadicNumber:
        g = self.g
        dz = g.derivative_at(z)
        if dz.is_zero():
            raise UniquenessViolation(f"g' vanishes at {z}")
        radius = self.mu_exp - dz.val
        F = g.f1 - g.f2 * c
        mti = maximal_term_index(F.taylor_shift(z).coeffs, radius, z.p)
        if mti.l == 0:
            raise GOutsideCertifiedNeighborhood(f"no solution of g(w) = {c} near {z}")
        if mti.l > 1:
            raise UniquenessViolation(f"{mti.l} solutions of g(w) = {c} near {z}")
        target = min(z.prec, c.prec, z.ctx.precision) - 2 * max(0, -dz.val) - 2
        try:
            return hensel_lift(F, z, target_precision=max(target, 1))
        except BasinConditionViolated as err:
            raise UniquenessViolation(f"Newton iteration not certified at {z}: {err}") from err

    def orbit(self, z, depth: int) -> list:
        pts = [z]
        for _ in range(depth):
            if self.omega.index_of(pts[-1]) is None:
                raise OrbitEscapedOmega(f"{pts[-1]} left the cover")
            pts.append(self.f(pts[-1]))
        if self.omega.index_of(pts[-1]) is None:
            raise OrbitEscapedOmega(f"{pts[-1]} left the cover")
        return pts

    def h(self, z, level: int) -> PadicNumber:
        z = self.point(z)
        pts = self.orbit(z, level)
        value = pts[level]
        for j in range(level - 1, -1, -1):
            lev = level - j
            key = (pts[j].key(), lev)
            hit = self.memo.get(key)
            if hit is None:
                hit = self.step(pts[j], value)
                self.memo[key] = hit
            value = hit
        return value

    def trace(self, z, depth: int) -> list[PadicNumber]:
        """h_0(z), ..., h_depth(z)."""
        return [self.h(z, l) for l in range(depth + 1)]


def difference_exponent(a: PadicNumber, b: PadicNumber):
    """Exponent of |a - b|; a lower bound (the precision) when they agree."""
    d = a - b
    if d.is_zero():
        return d.prec
    return Fraction(d.val)


def conjugate_point(f: RationalMap, g: RationalMap, z, depth: int, mu_exp, lam_exp, omega: BallCover,
                    conj: Conjugacy | None = None):
    """(h_depth(z), exponent of the certified bound |h_inf(z) - h_depth(z)|)."""
    conj = conj or Conjugacy.for_depth(f, g, mu_exp, lam_exp, omega, depth)
    value, bound = conj.h(z, depth), conj.bound_exponent(depth)
    if value.prec < bound:
        raise InsufficientPrecision(f"h_{depth}(z) known mod p^{value.prec}, bound needs p^{bound}")
    return value, bound


@dataclass
class SemiconjugacyReport:
    depth: int
    bound_exp: Fraction
    residuals: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r >= self.bound_exp for r in self.residuals)


def verify_semiconjugacy(conj: Conjugacy, points, depth: int) -> SemiconjugacyReport:
    """Residual exponents of |h_d(f(z)) - g(h_d(z))| against mu / lambda^d."""
    rep = SemiconjugacyReport(depth, conj.bound_exponent(depth))
    for z in points:
        z = conj.point(z)
        a = conj.h(conj.f(z), depth)
        b = conj.g(conj.h(z, depth))
        rep.residuals.append(difference_exponent(a, b))
    return rep


# -- the certificate pipeline -------------------------------------------

@dataclass
class CertifyConfig:
    q_max: int = 6
    depth_cap: int = 20
    precision: int = 128
    degree_cap: int = DEFAULT_DEGREE_CAP
    radius_retries: int = 8


@dataclass
class StabilityCertificate:
    f: RationalMap
    p: int
    precision: int
    status: str
    reason: str | None = None
    detail: str = ""
    lam_exp: Fraction | None = None
    delta_exp: Fraction | None = None
    mu_exp: Fraction | None = None
    eta_exp: Fraction | None = None
    omega: BallCover | None = None
    bounds: PerturbationBounds | None = None
    seed: PeriodicPoint | None = None
    notes: tuple = ERRATA

    @property
    def certified(self) -> bool:
        return self.status == "Certified"


def _refuse(f, p, config, reason, detail="", **kw):
    log.info("not certified: %s (%s)", reason, detail)
    return StabilityCertificate(f, p, config.precision, "NotCertified", reason, str(detail), **kw)


def find_repelling_seed(f: RationalMap, ctx: PadicContext, q_max: int, degree_cap=DEFAULT_DEGREE_CAP):
    for q in range(1, q_max + 1):
        for pt in periodic_points(f, q, ctx, degree_cap=degree_cap):
            if pt.repelling:
                return pt
    return None


def expansion_exponent(f: RationalMap, omega: BallCover) -> Fraction:
    """Weakest |f'| over the cover (largest exponent)."""
    return max(constant_norm_on_ball(f.derivative, B) for B in omega.balls)


def j_stability_certificate(f: RationalMap, p: int, config: CertifyConfig | None = None) -> StabilityCertificate:
    config = config or CertifyConfig()
    ctx = PadicContext(p, config.precision)
    if f.degree < 2:
        return _refuse(f, p, config, "DegreeTooSmall", f"degree {f.degree}")
    if good_reduction(f, p):
        return _refuse(f, p, config, "GoodReduction", "unit resultant: empty Julia set")
    try:
        seed = find_repelling_seed(f, ctx, config.q_max, config.degree_cap)
    except DegreeCapExceeded as err:
        return _refuse(f, p, config, "DegreeCapExceeded", err)
    if seed is None:
        return _refuse(f, p, config, "NoRepellingSeed", f"no Q_p-rational repelling cycle of period <= {config.q_max}")
    try:
        sep = separation_exponent(f, [ClosedBall(ctx, x, 0) for x in seed.cycle])
    except CriticalPointMeetsCover:
        sep = None
    except ExtensionFieldRequired as err:
        return _refuse(f, p, config, "ExtensionFieldRequired", err, seed=seed)
    # start from the largest integral radius separating the cycle from the critical set
    rho = 0 if sep is None else max(0, math.floor(sep) + 1)
    last_error: PadicError | None = None
    for _ in range(config.radius_retries):
        try:
            omega = build_omega(f, seed.cycle, rho, ctx, config.depth_cap)
            delta = max(delta_from_separation(f, omega), max(B.exp for B in omega.balls))
        except CriticalPointMeetsCover as err:
            last_error, rho = err, rho + 1
            continue
        except ExtensionFieldRequired as err:
            return _refuse(f, p, config, "ExtensionFieldRequired", err, seed=seed)
        except SaturationNotReached as err:
            return _refuse(f, p, config, "SaturationNotReached", err, seed=seed)
        except PadicError as err:
            last_error, rho = err, rho + 1
            continue
        break
    else:
        return _refuse(f, p, config, "CriticalPointMeetsCover", last_error, seed=seed)
    try:
        lam = expansion_exponent(f, omega)
    except ZeroOrPoleInBall as err:
        return _refuse(f, p, config, "NotExpanding", err, seed=seed, omega=omega)
    if lam >= 0:
        return _refuse(f, p, config, "NotExpanding", f"|f'| = p^{-lam} <= 1 on the cover", seed=seed, omega=omega)
    try:
        check_membership(f, lam, omega)
    except MembershipFailure as err:
        return _refuse(f, p, config, "MembershipFailure", err, seed=seed, omega=omega)
    except ExtensionFieldRequired as err:
        return _refuse(f, p, config, "ExtensionFieldRequired", err, seed=seed, omega=omega)
    mu = mu_from_delta(delta, p)
    bounds = certify_neighborhood(f, lam, omega, delta)
    return StabilityCertificate(f, p, config.precision, "Certified", None, "", lam, delta, mu,
                                omega.bounding_exponent(), omega, bounds, seed)


def check_certificate(cert: StabilityCertificate, f: RationalMap, rng=None, samples: int = 0) -> list[str]:
    """Re-derive every certified quantity; returns the list of mismatches."""
    problems = []
    if cert.f.key() != f.key():
        problems.append("certificate is for a different map")
        return problems
    if not cert.certified:
        problems.append(f"certificate status is {cert.status}")
        return problems
    omega = cert.omega
    try:
        lam = expansion_exponent(f, omega)
        if lam != cert.lam_exp:
            problems.append(f"lambda exponent {cert.lam_exp} recomputes as {lam}")
        check_membership(f, cert.lam_exp, omega)
        delta = max(delta_from_separation(f, omega), max(B.exp for B in omega.balls))
        if delta != cert.delta_exp:
            problems.append(f"delta exponent {cert.delta_exp} recomputes as {delta}")
        mu = mu_from_delta(cert.delta_exp, cert.p)
        if mu != cert.mu_exp:
            problems.append(f"mu exponent {cert.mu_exp} recomputes as {mu}")
        if omega.bounding_exponent() != cert.eta_exp:
            problems.append("eta mismatch")
        bounds = certify_neighborhood(f, cert.lam_exp, omega, cert.delta_exp)
        if (bounds.numerator_exps, bounds.denominator_exps) != (cert.bounds.numerator_exps, cert.bounds.denominator_exps):
            problems.append("coefficient bounds do not recompute")
    except (PadicError, ValueError) as err:
        problems.append(f"{type(err).__name__}: {err}")
        return problems
    if rng is not None:
        from .dynamics import sample_points
        pts = sample_points(omega, samples, rng)
        for _ in range(samples):
            g = sample_perturbation(f, cert.bounds, rng)
            try:
                check_membership(g, cert.lam_exp, omega)
            except PadicError as err:
                problems.append(f"sampled perturbation {g} fails membership: {err}")
                break
            if not sampled_differences_ok(f, g, pts, cert.bounds):
                problems.append(f"sampled perturbation {g} violates the sup bounds")
                break
    return problems


def sampled_differences_ok(f: RationalMap, g: RationalMap, points, bounds: PerturbationBounds) -> bool:
    for z in points:
        if difference_exponent(f(z), g(z)) <= bounds.r_exp:
            return False
        if difference_exponent(f.derivative_at(z), g.derivative_at(z)) <= bounds.s_exp:
            return False
    return True


def g_admissible(cert: StabilityCertificate, g: RationalMap) -> tuple[bool, str]:
    """Whether g may be conjugated to f with the certificate's constants.

    Accepted when g lies in the coefficient box, or directly when g passes
    the membership check and sup over the cover of |f - g| is at most mu.
    """
    f = cert.f
    if g.degree != f.degree:
        return False, f"degree {g.degree} differs from {f.degree}"
    if cert.bounds.contains(f, g):
        return True, "inside the coefficient bounds"
    try:
        sup = sup_difference_exponent(f, g, cert.omega)
        if sup < cert.mu_exp:
            p = cert.p
            return False, f"sup |f - g| = {p}^{-sup} exceeds mu = {p}^{-cert.mu_exp}"
        check_membership(g, cert.lam_exp, cert.omega)
        # the critical data of g must also stay off the cover
        separation_exponent(g, cert.omega.balls)
    except PadicError as err:
        return False, f"{type(err).__name__}: {err}"
    return True, "direct check: sup |f - g| <= mu and g passes membership"
