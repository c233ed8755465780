"""Command-line front end: analyze, certify, julia, conjugate, check.

Exit codes: 0 certified or passed, 1 a definite negative answer, 2 usage or
parse errors, 3 a resource cap was hit, 4 roots outside Q_p were needed.
"""
from __future__ import annotations

import argparse
import logging
import random
import sys
from fractions import Fraction

from .dynamics import good_reduction, omega_sequence, periodic_points, sample_points
from .errors import (
    DegreeCapExceeded,
    ExtensionFieldRequired,
    MemoryCapExceeded,
    PadicError,
)
from .fileio import (
    SpecError,
    certificate_to_json,
    dumps,
    load_certificate,
    load_map_spec,
    parse_rational,
)
from .newton import root_bound_ball, roots_in_ball
from .padic import INF, PadicContext, PadicNumber, format_exponent, rational_reconstruction, vp
from .poly import sylvester_resultant
from .stability import (
    CertifyConfig,
    Conjugacy,
    check_certificate,
    conjugate_point,
    g_admissible,
    j_stability_certificate,
    verify_semiconjugacy,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_CAP, EXIT_EXTENSION = 0, 1, 2, 3, 4

REASON_EXIT = {"DegreeCapExceeded": EXIT_CAP, "ExtensionFieldRequired": EXIT_EXTENSION}


def show_norm(e, p: int) -> str:
    """p^(-e) written out, e.g. 2^1 for exponent -1."""
    if e == INF:
        return "0"
    return f"{p}^{format_exponent(-e)}"


def show_point(x, is_exact=None, digits: int = 24) -> str:
    """A small exact rational when ``is_exact`` confirms one, else digits."""
    if not isinstance(x, PadicNumber):
        return str(Fraction(x))
    if x.exact:
        return "0"
    r = rational_reconstruction(x)
    if r is not None and is_exact is not None and is_exact(r):
        return str(r)
    if x.is_zero():
        return f"O({x.p}^{x.prec})"
    T = min(x.prec, x.val + digits)
    return f"{x.truncate(T)} + O({x.p}^{T})"


def _roots(P, ctx):
    """Q_p-rational roots and the number of C_p roots missing from Q_p."""
    if P.degree < 1:
        return [], 0
    try:
        return roots_in_ball(P, root_bound_ball(P, ctx)), 0
    except ExtensionFieldRequired as err:
        return err.found, err.expected - sum(k for _, k in err.found)


def _returns(f, r: Fraction, q: int) -> bool:
    y = r
    for _ in range(q):
        y = f(y)
        if not isinstance(y, Fraction):
            return False
    return y == r


def _exact_period(f, x, q) -> bool:
    y = x
    for j in range(1, q):
        y = f(y)
        if q % j == 0 and y == x:
            return False
    return True


def cmd_analyze(args, out) -> int:
    spec = load_map_spec(args.map)
    f, p = spec.f, spec.p
    ctx = PadicContext(p, args.precision or spec.precision)
    res = sylvester_resultant(f.f1, f.f2, f.degree, f.degree)
    report = {
        "p": p,
        "degree": f.degree,
        "map": f"({f.f1}) / ({f.f2})",
        "resultant_valuation": format_exponent(vp(res, p)),
        "good_reduction": good_reduction(f, p),
        "cycles": [],
        "critical_points": [],
        "critical_values": [],
        "poles": [],
    }
    seen = []
    for q in range(1, args.qmax + 1):
        pts = periodic_points(f, q, ctx, degree_cap=args.degree_cap)
        for pt in pts:
            if _exact_period(f, pt.point, q) and not any(pt.point == y for y in seen):
                seen.extend(pt.cycle)
                report["cycles"].append({
                    "period": q,
                    "point": show_point(pt.point, lambda r, q=q: _returns(f, r, q)),
                    "multiplier_norm": show_norm(pt.multiplier_exp, p),
                    "repelling": pt.repelling,
                })
        if pts.missing:
            report["cycles"].append({"period": q, "outside_Qp": pts.missing})
    for key, P in (("critical_points", f.critical_polynomial()), ("critical_values", f.critical_values),
                   ("poles", f.f2)):
        found, missing = _roots(P, ctx)
        for x, k in found:
            report[key].append({"point": show_point(x, lambda r, P=P: P(r) == 0), "norm": show_norm(x.val, p), "multiplicity": k})
        if missing:
            report[key].append({"outside_Qp": missing})
    if args.format == "json":
        out.write(dumps(report))
        return EXIT_OK
    out.write(f"map        {report['map']} over Q_{p}\n")
    out.write(f"degree     {f.degree}\n")
    out.write(f"resultant  valuation {report['resultant_valuation']}; good reduction: {report['good_reduction']}\n")
    for c in report["cycles"]:
        if "outside_Qp" in c:
            out.write(f"period {c['period']}: {c['outside_Qp']} points of period dividing {c['period']} outside Q_{p}\n")
        else:
            kind = "repelling" if c["repelling"] else "non-repelling"
            out.write(f"cycle of period {c['period']} through {c['point']}  |multiplier| = {c['multiplier_norm']} ({kind})\n")
    for key, label in (("critical_points", "critical point"), ("critical_values", "critical value"),
                       ("poles", "pole")):
        for c in report[key]:
            if "outside_Qp" in c:
                out.write(f"{label}: {c['outside_Qp']} outside Q_{p}\n")
            else:
                out.write(f"{label}: {c['point']}  |.| = {c['norm']}\n")
    return EXIT_OK


def _certify(args, spec):
    config = CertifyConfig(q_max=args.qmax, depth_cap=args.depth_cap,
                           precision=args.precision or spec.precision)
    return j_stability_certificate(spec.f, spec.p, config)


def _write_summary(cert, out):
    p = cert.p
    out.write(f"status  {cert.status}" + (f" ({cert.reason}: {cert.detail})" if cert.reason else "") + "\n")
    if not cert.certified:
        return
    out.write(f"lambda  {show_norm(cert.lam_exp, p)}  (exponent {format_exponent(cert.lam_exp)})\n")
    out.write(f"delta   {show_norm(cert.delta_exp, p)}  (exponent {format_exponent(cert.delta_exp)})\n")
    out.write(f"mu      {show_norm(cert.mu_exp, p)}  (exponent {format_exponent(cert.mu_exp)})\n")
    out.write(f"eta     {show_norm(cert.eta_exp, p)}\n")
    out.write(f"seed    period {cert.seed.period} cycle {[show_point(x, lambda r: _returns(cert.f, r, cert.seed.period)) for x in cert.seed.cycle]}\n")
    for B in cert.omega.balls:
        out.write(f"Omega   {B}\n")
    b = cert.bounds
    out.write("bounds  |eps_i| < " + ", ".join(show_norm(e, p) for e in b.numerator_exps) + "\n")
    out.write("        |kappa_j| < " + ", ".join(show_norm(e, p) for e in b.denominator_exps) + "\n")


def cmd_certify(args, out) -> int:
    spec = load_map_spec(args.map)
    cert = _certify(args, spec)
    data = certificate_to_json(cert)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dumps(data))
    if args.format == "json":
        out.write(dumps(data))
    else:
        _write_summary(cert, out)
    if cert.certified:
        return EXIT_OK
    return REASON_EXIT.get(cert.reason, EXIT_NEGATIVE)


def _certified_or_exit(args, spec, out):
    cert = _certify(args, spec)
    if not cert.certified:
        out.write(f"map not certified: {cert.reason}: {cert.detail}\n")
        return None, REASON_EXIT.get(cert.reason, EXIT_NEGATIVE)
    return cert, EXIT_OK


def cmd_julia(args, out) -> int:
    spec = load_map_spec(args.map)
    cert, code = _certified_or_exit(args, spec, out)
    if cert is None:
        return code
    seq = omega_sequence(spec.f, cert.omega, args.depth)
    if args.format == "json":
        data = [{"level": m, "balls": [{"center": str(B.center), "radius_exp": format_exponent(B.exp)}
                                      for B in cover.balls]} for m, cover in enumerate(seq)]
        out.write(dumps(data))
        return EXIT_OK
    for m, cover in enumerate(seq):
        out.write(f"Omega_{m}: {len(cover)} balls\n")
        for B in cover.balls:
            out.write(f"  {B}\n")
    return EXIT_OK


def cmd_conjugate(args, out) -> int:
    fspec, gspec = load_map_spec(args.map), load_map_spec(args.gmap)
    if fspec.p != gspec.p:
        out.write("the two maps use different primes\n")
        return EXIT_USAGE
    cert, code = _certified_or_exit(args, fspec, out)
    if cert is None:
        return code
    ok, why = g_admissible(cert, gspec.f)
    if not ok:
        out.write(f"GOutsideCertifiedNeighborhood: {why}\n")
        return EXIT_NEGATIVE
    f, g, p = fspec.f, gspec.f, fspec.p
    z = parse_rational(args.point, "--point")
    conj = Conjugacy.for_depth(f, g, cert.mu_exp, cert.lam_exp, cert.omega, args.depth + 1)
    value, bound = conjugate_point(f, g, z, args.depth, cert.mu_exp, cert.lam_exp, cert.omega, conj)
    T = min(value.prec, int(bound))
    out.write(f"g accepted: {why}\n")
    out.write(f"h_{args.depth}({z}) = {value.truncate(T)} mod {p}^{T}\n")
    out.write(f"|h_inf({z}) - h_{args.depth}({z})| <= {show_norm(bound, p)}\n")
    if args.verify:
        rng = random.Random(args.seed)
        pts = sample_points(cert.omega, args.samples, rng, conj.ctx)
        rep = verify_semiconjugacy(conj, pts, args.depth)
        worst = min(rep.residuals) if rep.residuals else INF
        out.write(f"semiconjugacy on {len(pts)} points: worst residual {show_norm(worst, p)}, "
                  f"bound {show_norm(rep.bound_exp, p)}: {'PASS' if rep.passed else 'FAIL'}\n")
        if not rep.passed:
            return EXIT_NEGATIVE
    return EXIT_OK


def cmd_check(args, out) -> int:
    cert = load_certificate(args.certificate)
    spec = load_map_spec(args.map)
    rng = random.Random(args.seed)
    problems = check_certificate(cert, spec.f, rng, args.samples)
    if cert.p != spec.p:
        problems.insert(0, f"certificate prime {cert.p} differs from the map file's {spec.p}")
    for line in problems:
        out.write(f"FAIL {line}\n")
    if problems:
        return EXIT_NEGATIVE
    out.write("PASS certificate reproduced\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padicstab", description="J-stability certificates for p-adic rational maps")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--qmax", type=int, default=6)
        sp.add_argument("--depth-cap", type=int, default=20)
        sp.add_argument("--precision", type=int, default=None,
                        help="absolute precision (default: the map file's, else 128)")
        sp.add_argument("--degree-cap", type=int, default=4096)
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("analyze", help="degree, reduction, cycles, critical data")
    sp.add_argument("map")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("certify", help="run the stability pipeline")
    sp.add_argument("map")
    sp.add_argument("-o", "--output", help="write the certificate JSON here")
    common(sp)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("julia", help="list the covers Omega_0..Omega_k")
    sp.add_argument("map")
    sp.add_argument("--depth", type=int, default=3)
    common(sp)
    sp.set_defaults(func=cmd_julia)

    sp = sub.add_parser("conjugate", help="evaluate the conjugacy h_k at a point")
    sp.add_argument("map")
    sp.add_argument("gmap")
    sp.add_argument("--point", required=True)
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_conjugate)

    sp = sub.add_parser("check", help="re-verify a certificate against a map")
    sp.add_argument("certificate")
    sp.add_argument("map")
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_check)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args, out)
    except (OSError, SpecError) as err:
        out.write(f"error: {err}\n")
        return EXIT_USAGE
    except (MemoryCapExceeded, DegreeCapExceeded) as err:
        out.write(f"{type(err).__name__}: {err}\n")
        return EXIT_CAP
    except ExtensionFieldRequired as err:
        out.write(f"ExtensionFieldRequired: {err}\n")
        return EXIT_EXTENSION
    except PadicError as err:
        out.write(f"{type(err).__name__}: {err}\n")
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
