from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicstab import INF, INFINITY, PadicContext, chordal_distance
from padicstab.errors import ContextMismatch, DivisionByIndistinguishableZero, InsufficientPrecision
from padicstab.padic import format_exponent, parse_exponent, rational_reconstruction, vp

C2 = PadicContext(2, 40)
C3 = PadicContext(3, 40)


def test_addition_keeps_valuation():
    s = C2(2) + C2(4)
    assert s == C2(6)
    assert s.val == 1


def test_cancellation_gives_indistinguishable_zero():
    s = C2(2) + C2(-2)
    assert s.is_zero() and not s.exact
    assert s.val == INF


def test_fraction_arithmetic():
    assert C3(Fraction(1, 3)) + 1 == C3(Fraction(4, 3))
    assert C3(Fraction(1, 3)).val == -1


def test_valuations():
    assert (C2(6) * C2(10)).val == 2
    assert C2(Fraction(3, 4)).val == -2
    assert C3(Fraction(9, 2)).val == 2
    assert vp(Fraction(3, 4), 2) == -2
    assert vp(0, 5) == INF


def test_exact_zero():
    ctx = PadicContext(5, 20)
    z = ctx.from_rational(0, 5)
    assert z.exact and z.is_zero()
    assert (z * ctx(7)).exact
    assert z + ctx(7) == ctx(7)


def test_division_by_zero_raises():
    with pytest.raises(DivisionByIndistinguishableZero):
        C2(1) / (C2(2) - C2(2))


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        C2(1) + C3(1)


def test_non_prime_rejected():
    with pytest.raises(ValueError):
        PadicContext(6, 10)


def test_truncate_beyond_precision():
    x = PadicContext(2, 8)(Fraction(1, 3))
    assert x.truncate(4) == 11  # 1/3 = ...01011 in Z_2
    with pytest.raises(InsufficientPrecision):
        x.truncate(9)


def test_chordal_examples():
    assert chordal_distance(C3(0), INFINITY) == 0
    assert chordal_distance(C3(0), C3(3)) == 1
    assert chordal_distance(C3(3), C3(Fraction(1, 3))) == 0
    assert chordal_distance(INFINITY, INFINITY) == INF


def test_exponent_formatting_round_trip():
    for t in (Fraction(0), Fraction(-1), Fraction(3, 2), INF):
        assert parse_exponent(format_exponent(t)) == t


def test_rational_reconstruction():
    assert rational_reconstruction(C3(Fraction(-5, 7))) == Fraction(-5, 7)
    assert rational_reconstruction(C2(Fraction(3, 8))) == Fraction(3, 8)
    assert rational_reconstruction(C2(0)) == 0


rationals = st.fractions(max_denominator=50).filter(lambda x: abs(x.numerator) < 10**6)
nonzero = rationals.filter(lambda x: x != 0)
primes = st.sampled_from([2, 3, 5, 7])


@settings(max_examples=200, deadline=None)
@given(primes, nonzero, nonzero)
def test_ultrametric_inequality(p, a, b):
    if a + b == 0:
        return
    assert vp(a + b, p) >= min(vp(a, p), vp(b, p))
    if vp(a, p) != vp(b, p):
        assert vp(a + b, p) == min(vp(a, p), vp(b, p))


@settings(max_examples=200, deadline=None)
@given(primes, nonzero, nonzero)
def test_valuation_is_multiplicative(p, a, b):
    ctx = PadicContext(p, 30)
    assert (ctx(a) * ctx(b)).val == ctx(a).val + ctx(b).val == vp(a * b, p)


@settings(max_examples=200, deadline=None)
@given(primes, rationals, rationals)
def test_rational_embedding_is_a_ring_homomorphism(p, a, b):
    ctx = PadicContext(p, 30)
    assert ctx(a) + ctx(b) == ctx(a + b)
    assert ctx(a) * ctx(b) == ctx(a * b)
    assert ctx(a) - ctx(b) == ctx(a - b)
    if b:
        assert ctx(a) / ctx(b) == ctx(a / b)


@settings(max_examples=200, deadline=None)
@given(primes, st.lists(st.one_of(st.none(), rationals), min_size=3, max_size=3, unique=True))
def test_chordal_strong_triangle(p, pts):
    ctx = PadicContext(p, 30)
    z, w, u = (INFINITY if x is None else ctx(x) for x in pts)
    # distances are p^-t: the strong triangle inequality is t(z,u) >= min(t(z,w), t(w,u))
    assert chordal_distance(z, u) >= min(chordal_distance(z, w), chordal_distance(w, u))
    assert chordal_distance(z, w) == chordal_distance(w, z)
    assert chordal_distance(z, w) >= 0
