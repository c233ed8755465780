"""One test per acceptance criterion; each records a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are
printed in the terminal summary.
"""
import io
import json
import random
import time
from fractions import Fraction
from pathlib import Path

import sympy

from conftest import ACCEPTANCE_LINES
from padicstab import (
    BallCover,
    ClosedBall,
    PadicContext,
    Polynomial,
    RationalMap,
    chordal_distance,
    count_roots_in_ball,
    image_of_ball,
    omega_sequence,
    roots_in_ball,
)
from padicstab.cli import main
from padicstab.dynamics import check_membership, itinerary, orbit_stays, sample_points
from padicstab.errors import ExtensionFieldRequired
from padicstab.padic import INF, INFINITY, vp
from padicstab.stability import (
    Conjugacy,
    difference_exponent,
    expansion_constant_exponent,
    j_stability_certificate,
    sample_perturbation,
    sampled_differences_ok,
    verify_semiconjugacy,
)

MAPS = Path(__file__).resolve().parent.parent / "maps"
C2 = PadicContext(2, 128)
UNIT = ClosedBall(C2, 0, 0)
F = RationalMap([0, -1, 1], [2])
G = RationalMap([4, -1, 1], [2])  # F + 2


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def cli(*argv):
    out = io.StringIO()
    return main([str(a) for a in argv], out), out.getvalue()


# 1 ----------------------------------------------------------------------

def test_worked_example_certificate():
    t0 = time.perf_counter()
    code, text = cli("certify", MAPS / "worked_example.json", "--precision", "128", "--format", "json")
    elapsed = time.perf_counter() - t0
    data = json.loads(text)
    ok = (
        code == 0 and data["status"] == "Certified"
        and data["lambda_exp"] == "-1" and data["delta_exp"] == "0" and data["mu_exp"] == "1"
        and data["omega"] == [{"center": "0", "modulus_exp": "0", "radius_exp": "0"}]
        and elapsed < 2
    )
    report(1, ok, f"lambda 2^1, delta 2^0, mu 2^-1, Omega B(0,1) in {elapsed:.3f}s")


# 2 ----------------------------------------------------------------------

def test_expansion_constant_brute_force():
    t0 = time.perf_counter()
    bad = []
    for p in (2, 3, 5, 7, 11):
        # min over k of |k|^(1/(k-1)) is p^-(max over k of v(k)/(k-1))
        brute = max(Fraction(vp(k, p), k - 1) for k in range(2, 1001))
        if expansion_constant_exponent(p) != brute or brute != Fraction(1, p - 1):
            bad.append(p)
    elapsed = time.perf_counter() - t0
    report(2, not bad and elapsed < 0.1, f"exponent 1/(p-1) for p in 2,3,5,7,11 in {elapsed:.3f}s")


# 3 ----------------------------------------------------------------------

def hull_count(coeffs, p):
    """Roots in the closed unit ball from the lower convex hull of (i, v(a_i))."""
    pts = [(i, vp(c, p)) for i, c in enumerate(coeffs) if c]
    hull = []
    for q in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (q[0] - x1) >= (q[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(q)
    # zero roots, then segments of slope <= 0 (roots of valuation >= 0)
    count = pts[0][0]
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if y2 <= y1:
            count += x2 - x1
    return count


def zp_roots(S, p, N=10):
    """Distinct roots in Z_p of a squarefree integer polynomial, by residue lifting."""
    def ev(x, mod):
        acc = 0
        for c in reversed(S):
            acc = (acc * x + c) % mod
        return acc

    dS = [i * c for i, c in enumerate(S)][1:]
    level = [x for x in range(p) if ev(x, p) == 0]
    for j in range(2, N + 1):
        mod = p**j
        level = [x + k * p ** (j - 1) for x in level for k in range(p) if ev(x + k * p ** (j - 1), mod) == 0]
    roots = set()
    big = p**60
    for x in level:
        sx = sympy.Poly(list(reversed(S)), sympy.Symbol("z")).eval(x)
        dx = sympy.Poly(list(reversed(dS)), sympy.Symbol("z")).eval(x) if dS else 0
        if sx == 0:
            roots.add(x % p**20)
            continue
        if dx == 0 or not vp(int(sx), p) > 2 * vp(int(dx), p):
            continue  # no Hensel certificate: not near a Z_p root
        y = Fraction(x)
        for _ in range(8):
            num = sum(Fraction(c) * y**i for i, c in enumerate(S))
            den = sum(Fraction(c) * y**i for i, c in enumerate(dS))
            if num == 0:
                break
            y = y - num / den
            y = Fraction(y.numerator * pow(y.denominator, -1, big) % big)
        roots.add(int(y) % p**20)
    return len(roots)


def residue_count(coeffs, p):
    z = sympy.Symbol("z")
    P = sympy.Poly(list(reversed(coeffs)), z)
    total = 0
    for factor, k in sympy.sqf_list(P)[1]:
        ints = [int(c) for c in reversed(factor.all_coeffs())]
        total += k * zp_roots(ints, p)
    return total


def test_newton_count_oracle():
    rng = random.Random(20240603)
    t0 = time.perf_counter()
    mismatches = []
    for case in range(500):
        p = rng.choice((2, 3, 5))
        deg = rng.randint(1, 4)
        coeffs = [rng.randint(-20, 20) for _ in range(deg)] + [rng.choice([c for c in range(-20, 21) if c])]
        ctx = PadicContext(p, 40)
        Fp = Polynomial(coeffs)
        B = ClosedBall(ctx, 0, 0)
        n = count_roots_in_ball(Fp, B)
        cp_count = hull_count(coeffs, p)
        qp_count = residue_count(coeffs, p)
        try:
            found = sum(k for _, k in roots_in_ball(Fp, B))
            deficit = 0
        except ExtensionFieldRequired as err:
            found = sum(k for _, k in err.found)
            deficit = err.expected - found
        if n != cp_count or found != qp_count or found + deficit != cp_count:
            mismatches.append((case, p, coeffs, n, cp_count, found, qp_count))
    elapsed = time.perf_counter() - t0
    report(3, not mismatches and elapsed < 30,
           f"500 polynomials, {len(mismatches)} mismatches, {elapsed:.1f}s")


# 4 ----------------------------------------------------------------------

def test_pullback_geometry():
    t0 = time.perf_counter()
    seq = omega_sequence(F, BallCover([UNIT]), 14)
    elapsed = time.perf_counter() - t0
    bad = 0
    for k, cover in enumerate(seq):
        if len(cover) != 2**k or any(b.exp != k for b in cover.balls):
            bad += 1
        # equal radii: disjoint iff the centres differ mod 2^k
        if len({b.center % 2**k for b in cover.balls}) != len(cover):
            bad += 1
        if k:
            parent = seq[k - 1].balls
            bad += sum(1 for b, i in zip(cover.balls, cover.parents) if image_of_ball(F, b) != parent[i])
    report(4, bad == 0 and elapsed < 10, f"Omega_0..Omega_14 sizes 2^k radii 2^-k, {bad} defects, {elapsed:.1f}s")


# 5 ----------------------------------------------------------------------

def test_conjugacy_convergence():
    omega = BallCover([UNIT])
    cf, cg = j_stability_certificate(F, 2), j_stability_certificate(G, 2)
    rng = random.Random(5)
    t0 = time.perf_counter()
    conj = Conjugacy.for_depth(F, G, cf.mu_exp, cf.lam_exp, omega, 20)
    inv = Conjugacy.for_depth(G, F, cg.mu_exp, cg.lam_exp, cg.omega, 20)
    points = sample_points(omega, 100, rng, conj.ctx)
    step_fail = 0
    for z in points:
        tr = conj.trace(z, 20)
        for l in range(20):
            if difference_exponent(tr[l + 1], tr[l]) < 1 + l:
                step_fail += 1
    semi = verify_semiconjugacy(conj, points, 20)
    inv_fail = 0
    for k in (5, 10, 15, 20):
        for z in points:
            back = inv.h(inv.point(conj.h(z, k)), k)
            if difference_exponent(back, inv.point(z)) < conj.bound_exponent(k):
                inv_fail += 1
    elapsed = time.perf_counter() - t0
    ok = step_fail == 0 and semi.passed and inv_fail == 0 and elapsed < 20
    report(5, ok, f"step violations {step_fail}, worst residual 2^-{min(semi.residuals)} vs bound "
                  f"2^-{semi.bound_exp}, inverse failures {inv_fail}, {elapsed:.1f}s")


# 6 ----------------------------------------------------------------------

def test_itinerary_conjugacy():
    omega = BallCover([UNIT])
    seq = omega_sequence(F, omega, 12)
    om1 = seq[1]
    its = {itinerary(F, C2(b.center), om1, 12) for b in seq[12].balls}
    distinct = len(its) == 2**12
    om1_g = omega_sequence(G, omega, 1)[1]
    conj = Conjugacy.for_depth(F, G, 1, -1, omega, 12)
    pts = sample_points(omega, 100, random.Random(6), conj.ctx)
    violations = sum(
        1 for z in pts if itinerary(F, z, om1, 12) != itinerary(G, conj.h(z, 12), om1_g, 12)
    )
    report(6, distinct and violations == 0 and om1_g.same_point_set(om1),
           f"{len(its)} distinct depth-12 itineraries, {violations} violations under h")


# 7 ----------------------------------------------------------------------

def test_perturbation_soundness(worked_cert):
    rng = random.Random(7)
    omega = worked_cert.omega
    pts = sample_points(omega, 20, rng)
    failures = 0
    for _ in range(100):
        g = sample_perturbation(F, worked_cert.bounds, rng)
        try:
            check_membership(g, -1, omega)
        except Exception:
            failures += 1
            continue
        if not sampled_differences_ok(F, g, pts, worked_cert.bounds):
            failures += 1
    code, _ = cli("conjugate", MAPS / "worked_example.json", MAPS / "worked_plus_one.json", "--point", "0")
    report(7, failures == 0 and code == 1, f"100 sampled g, {failures} failures; f+1 refused with exit {code}")


# 8 ----------------------------------------------------------------------

def test_negative_controls():
    code_sq, text = cli("certify", MAPS / "square_p3.json", "--format", "json")
    reason_sq = json.loads(text)["reason"]
    code_aff, text = cli("certify", MAPS / "affine_p3.json", "--format", "json")
    reason_aff = json.loads(text)["reason"]
    ok = (code_sq, reason_sq, code_aff, reason_aff) == (1, "GoodReduction", 1, "DegreeTooSmall")
    report(8, ok, f"z^2 over Q_3: exit {code_sq} {reason_sq}; degree 1: exit {code_aff} {reason_aff}")


# 9 ----------------------------------------------------------------------

CASES = 10_000


def _rational(rng, bound=10**4, den=60):
    return Fraction(rng.randint(-bound, bound), rng.randint(1, den))


def _suite_ultrametric(rng):
    p = rng.choice((2, 3, 5, 7))
    a, b = _rational(rng), _rational(rng)
    if a == 0 or b == 0 or a + b == 0:
        return True
    va, vb, vs = vp(a, p), vp(b, p), vp(a + b, p)
    return vs >= min(va, vb) and (va == vb or vs == min(va, vb))


def _suite_multiplicative(rng):
    p = rng.choice((2, 3, 5, 7))
    ctx = PadicContext(p, 40)
    a, b = _rational(rng), _rational(rng)
    if a == 0 or b == 0:
        return (ctx(a) * ctx(b)).is_zero()
    return (ctx(a) * ctx(b)).val == ctx(a).val + ctx(b).val


def _suite_taylor(rng):
    P = Polynomial([_rational(rng, 50, 6) for _ in range(rng.randint(1, 6))])
    a = _rational(rng, 50, 6)
    return P.taylor_shift(a).taylor_shift(-a) == P


def _suite_chordal(rng):
    ctx = PadicContext(rng.choice((2, 3, 5, 7)), 40)
    pts = set()
    while len(pts) < 3:
        pts.add(None if rng.random() < 0.1 else _rational(rng))
    z, w, u = (INFINITY if x is None else ctx(x) for x in pts)
    d = chordal_distance
    return d(z, u) >= min(d(z, w), d(w, u)) and d(z, w) == d(w, z)


def _dynamics_pool(worked_cert):
    rng = random.Random(99)
    omega = worked_cert.omega
    pool = [F] + [sample_perturbation(F, worked_cert.bounds, rng) for _ in range(7)]
    out = []
    for g in pool:
        seq = omega_sequence(g, omega, 10)
        seq2 = omega_sequence(g.iterate(2), omega, 5)
        out.append((g, seq, seq2))
    return out


def test_property_suites(worked_cert):
    rng = random.Random(9)
    t0 = time.perf_counter()
    fails = {}
    for name, fn in (("ultrametric", _suite_ultrametric), ("multiplicativity", _suite_multiplicative),
                     ("taylor round-trip", _suite_taylor), ("chordal triangle", _suite_chordal)):
        fails[name] = sum(1 for _ in range(CASES) if not fn(rng))
    pool = _dynamics_pool(worked_cert)
    # structural checks: nesting of every generation, J_{g^2} cover equality at depth <= 5
    structural = 0
    for g, seq, seq2 in pool:
        for prev, cur in zip(seq, seq[1:]):
            structural += sum(1 for b in cur.balls if not prev.contains_ball(b))
        structural += sum(1 for k in range(6) if not seq2[k].same_point_set(seq[2 * k]))
    nest = equal = 0
    for _ in range(CASES):
        g, seq, seq2 = pool[rng.randrange(len(pool))]
        z = C2(rng.randrange(2**40))
        k = rng.randint(0, 5)
        in_next = seq[k + 1].index_of(z) is not None
        if in_next and seq[k].index_of(z) is None:
            nest += 1
        if (seq2[k].index_of(z) is not None) != (seq[2 * k].index_of(z) is not None):
            equal += 1
        if (seq[k].index_of(z) is not None) != orbit_stays(g, z, seq[0], k):
            nest += 1
    fails["Omega nesting"] = nest + structural
    fails["J_{f^2} = J_f covers"] = equal
    elapsed = time.perf_counter() - t0
    summary = ", ".join(f"{k} {v}" for k, v in fails.items())
    report(9, not any(fails.values()), f"{CASES} cases per suite, failures: {summary} ({elapsed:.1f}s)")
