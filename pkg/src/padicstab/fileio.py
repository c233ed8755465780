"""JSON map specifications and certificates.

Every number in these files is an exact rational written as a string;
floats are rejected on input and never produced.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import BallCover, PeriodicPoint
from .newton import ClosedBall
from .padic import PadicContext, PadicNumber, format_exponent, parse_exponent
from .poly import RationalMap
from .stability import PerturbationBounds, StabilityCertificate, SupNormConstants

SCHEMA = 1


class SpecError(ValueError):
    """A map or certificate file that does not parse."""


@dataclass
class MapSpec:
    f: RationalMap
    p: int
    precision: int = 128
    labels: dict = field(default_factory=dict)


def parse_rational(s, where: str = "") -> Fraction:
    if isinstance(s, bool) or isinstance(s, float):
        raise SpecError(f"{where}: {s!r} is not an exact rational (write it as a string)")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise SpecError(f"{where}: expected a rational string, got {type(s).__name__}")
    text = s.strip().replace("−", "-")
    if "." in text or "e" in text.lower():
        raise SpecError(f"{where}: {s!r} is not of the form a or a/b")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise SpecError(f"{where}: cannot parse {s!r} as a rational") from err


def _loads(text: str, name: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(f"{name}:{err.lineno}:{err.colno}: {err.msg}") from err


def parse_map_spec(text: str, name: str = "<map>") -> MapSpec:
    data = _loads(text, name)
    if not isinstance(data, dict):
        raise SpecError(f"{name}: top level must be an object")
    for key in ("p", "numerator"):
        if key not in data:
            raise SpecError(f"{name}: missing field {key!r}")
    p = data["p"]
    if not isinstance(p, int) or isinstance(p, bool):
        raise SpecError(f"{name}: p must be an integer")
    precision = data.get("precision", 128)
    if not isinstance(precision, int) or isinstance(precision, bool) or precision < 1:
        raise SpecError(f"{name}: precision must be a positive integer")
    num = [parse_rational(c, f"{name}: numerator[{i}]") for i, c in enumerate(data["numerator"])]
    den = [parse_rational(c, f"{name}: denominator[{i}]") for i, c in enumerate(data.get("denominator", ["1"]))]
    try:
        PadicContext(p, precision)
        f = RationalMap(num, den)
    except ValueError as err:
        raise SpecError(f"{name}: {err}") from err
    return MapSpec(f, p, precision, data.get("labels", {}))


def load_map_spec(path: str) -> MapSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_map_spec(fh.read(), path)


def map_to_json(f: RationalMap, p: int, precision: int) -> dict:
    return {
        "p": p,
        "precision": precision,
        "numerator": [str(Fraction(c)) for c in f.f1.coeffs],
        "denominator": [str(Fraction(c)) for c in f.f2.coeffs],
    }


# -- certificates -------------------------------------------------------

def _exp(t):
    return None if t is None else format_exponent(t)


def _unexp(s):
    return None if s is None else parse_exponent(s)


def ball_to_json(B: ClosedBall) -> dict:
    return {"center": str(B.center), "modulus_exp": str(math.ceil(B.exp)), "radius_exp": format_exponent(B.exp)}


def ball_from_json(d: dict, ctx: PadicContext) -> ClosedBall:
    return ClosedBall(ctx, Fraction(d["center"]), parse_exponent(d["radius_exp"]))


def point_to_json(x) -> dict:
    if isinstance(x, PadicNumber):
        if x.exact:
            return {"residue": "0", "precision": "inf"}
        return {"residue": str(x.lift()), "precision": str(x.prec)}
    return {"residue": str(Fraction(x)), "precision": "inf"}


def point_from_json(d: dict, ctx: PadicContext):
    r = Fraction(d["residue"])
    if d["precision"] == "inf":
        return ctx.from_rational(r) if r else ctx.exact_zero()
    x = ctx.from_rational(r)
    N = int(d["precision"])
    if x.exact:
        return ctx.zero(N)
    return ctx._make(x.unit, x.val, N) if not x.is_zero() else ctx.zero(N)


def certificate_to_json(cert: StabilityCertificate) -> dict:
    out = {
        "schema": SCHEMA,
        "map": map_to_json(cert.f, cert.p, cert.precision),
        "status": cert.status,
        "reason": cert.reason,
        "detail": cert.detail,
        "lambda_exp": _exp(cert.lam_exp),
        "delta_exp": _exp(cert.delta_exp),
        "mu_exp": _exp(cert.mu_exp),
        "eta_exp": _exp(cert.eta_exp),
        "omega": None if cert.omega is None else [ball_to_json(B) for B in cert.omega.balls],
        "seed": None,
        "bounds": None,
        "notes": list(cert.notes),
    }
    if cert.seed is not None:
        out["seed"] = {
            "period": cert.seed.period,
            "multiplier_exp": _exp(cert.seed.multiplier_exp),
            "cycle": [point_to_json(x) for x in cert.seed.cycle],
        }
    if cert.bounds is not None:
        b = cert.bounds
        out["bounds"] = {
            "numerator_exps": [_exp(e) for e in b.numerator_exps],
            "denominator_exps": [_exp(e) for e in b.denominator_exps],
            "r_exp": _exp(b.r_exp),
            "s_exp": _exp(b.s_exp),
            "eta_exp": _exp(b.eta_exp),
            "literal_numerator_exps": [_exp(e) for e in b.literal_numerator_exps],
            "literal_denominator_exps": [_exp(e) for e in b.literal_denominator_exps],
        }
        if b.constants is not None:
            out["bounds"]["constants"] = {k: _exp(v) for k, v in vars(b.constants).items()}
    return out


def certificate_from_json(data: dict) -> StabilityCertificate:
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        raise SpecError(f"not a schema-{SCHEMA} certificate")
    try:
        spec = parse_map_spec(json.dumps(data["map"]), "certificate map")
        ctx = PadicContext(spec.p, spec.precision)
        omega = None
        if data["omega"] is not None:
            omega = BallCover([ball_from_json(d, ctx) for d in data["omega"]], 0)
        seed = None
        if data["seed"] is not None:
            s = data["seed"]
            cycle = [point_from_json(d, ctx) for d in s["cycle"]]
            seed = PeriodicPoint(cycle[0], s["period"], _unexp(s["multiplier_exp"]), cycle)
        bounds = None
        if data["bounds"] is not None:
            b = data["bounds"]
            consts = b.get("constants")
            bounds = PerturbationBounds(
                [_unexp(e) for e in b["numerator_exps"]],
                [_unexp(e) for e in b["denominator_exps"]],
                _unexp(b["r_exp"]), _unexp(b["s_exp"]), _unexp(b["eta_exp"]), spec.p,
                None if consts is None else SupNormConstants(**{k: _unexp(v) for k, v in consts.items()}),
                [_unexp(e) for e in b["literal_numerator_exps"]],
                [_unexp(e) for e in b["literal_denominator_exps"]],
            )
        return StabilityCertificate(
            spec.f, spec.p, spec.precision, data["status"], data["reason"], data.get("detail", ""),
            _unexp(data["lambda_exp"]), _unexp(data["delta_exp"]), _unexp(data["mu_exp"]),
            _unexp(data["eta_exp"]), omega, bounds, seed, tuple(data.get("notes", ())),
        )
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, SpecError):
            raise
        raise SpecError(f"malformed certificate: {type(err).__name__}: {err}") from err


def dumps(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def load_certificate(path: str) -> StabilityCertificate:
    with open(path, encoding="utf-8") as fh:
        return certificate_from_json(_loads(fh.read(), path))
