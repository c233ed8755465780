import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicstab import BallCover, ClosedBall, PadicContext, RationalMap
from padicstab.dynamics import check_membership, sample_points
from padicstab.errors import CriticalPointMeetsCover, OrbitEscapedOmega
from padicstab.stability import (
    CertifyConfig,
    Conjugacy,
    check_certificate,
    conjugate_point,
    delta_from_separation,
    expansion_constant_exponent,
    g_admissible,
    j_stability_certificate,
    mu_from_delta,
    perturbation_bounds,
    sample_perturbation,
    separation_exponent,
    sup_difference_exponent,
    verify_semiconjugacy,
)

C2 = PadicContext(2, 64)
UNIT = BallCover([ClosedBall(C2, 0, 0)])


def plus(f, c):
    return RationalMap([f.f1.coeff(0) + c * f.f2.coeff(0)] + list(f.f1.coeffs[1:]), f.f2)


def test_expansion_constant():
    assert expansion_constant_exponent(2) == 1
    assert expansion_constant_exponent(3) == Fraction(1, 2)
    assert mu_from_delta(0, 2) == 1


def test_separation_of_worked_map(worked):
    # critical point 1/2 sits at distance 2, critical value -1/8 at distance 8
    assert separation_exponent(worked, UNIT.balls) == -1
    assert delta_from_separation(worked, UNIT) == 0


def test_separation_detects_critical_point_inside():
    with pytest.raises(CriticalPointMeetsCover):
        separation_exponent(RationalMap([0, 0, 1]), UNIT.balls)


def test_worked_certificate(worked_cert):
    c = worked_cert
    assert c.certified
    assert (c.lam_exp, c.delta_exp, c.mu_exp, c.eta_exp) == (-1, 0, 1, 0)
    assert c.omega.balls == UNIT.balls
    assert c.bounds.numerator_exps == [2, 2, 2]
    assert c.bounds.denominator_exps == [3, 3, 3]
    assert c.bounds.literal_numerator_exps == [0, 0, 0]
    assert c.bounds.literal_denominator_exps == [1, 1, 1]


def test_refusals():
    assert j_stability_certificate(RationalMap([0, 0, 1]), 3).reason == "GoodReduction"
    assert j_stability_certificate(RationalMap([1, 2]), 3).reason == "DegreeTooSmall"


def test_certificate_recomputes(worked, worked_cert):
    assert check_certificate(worked_cert, worked, random.Random(0), 10) == []


def test_tampered_certificate_is_caught(worked, worked_cert):
    from dataclasses import replace
    bad = replace(worked_cert, lam_exp=Fraction(-2))
    assert check_certificate(bad, worked)


def test_boundary_perturbations(worked, worked_cert):
    ok, _ = g_admissible(worked_cert, plus(worked, 2))
    assert ok
    ok, msg = g_admissible(worked_cert, plus(worked, 1))
    assert not ok and "2^" in msg


def test_sup_difference(worked):
    assert sup_difference_exponent(worked, plus(worked, 2), UNIT) == 1
    assert sup_difference_exponent(worked, plus(worked, 4), UNIT) == 2
    assert sup_difference_exponent(worked, plus(worked, Fraction(1, 4)), UNIT) == -2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**30))
def test_sampled_perturbations_satisfy_the_sup_bounds(worked_cert, seed):
    f = worked_cert.f
    rng = random.Random(seed)
    g = sample_perturbation(f, worked_cert.bounds, rng)
    assert worked_cert.bounds.contains(f, g)
    assert sup_difference_exponent(f, g, UNIT) > worked_cert.bounds.r_exp
    check_membership(g, worked_cert.lam_exp, UNIT)


def test_bounds_monotone_in_r(worked):
    a = perturbation_bounds(worked, UNIT, 0, 1, -1)
    b = perturbation_bounds(worked, UNIT, 0, 3, -1)
    assert all(x <= y for x, y in zip(a.numerator_exps, b.numerator_exps))


@pytest.fixture(scope="module")
def conj(worked):
    return Conjugacy.for_depth(worked, plus(worked, 2), 1, -1, UNIT, 12)


def test_conjugacy_first_levels(conj):
    assert conj.h(0, 0) == C2(0)
    assert conj.h(0, 1).truncate(5) == 20
    # h_l(z) lies within mu of z at every level
    for l in range(6):
        assert (conj.h(0, l) - conj.point(0)).val >= 1


def test_conjugacy_converges_geometrically(conj):
    tr = conj.trace(C2(5), 10)
    for l in range(10):
        d = tr[l + 1] - tr[l]
        assert d.is_zero() or d.val >= conj.bound_exponent(l + 1)


def test_conjugate_point_bound(worked):
    v, bound = conjugate_point(worked, plus(worked, 2), 0, 5, 1, -1, UNIT)
    assert bound == 6 and v.truncate(6) == 28


def test_semiconjugacy_residual(conj):
    pts = sample_points(UNIT, 15, random.Random(3), conj.ctx)
    rep = verify_semiconjugacy(conj, pts, 8)
    assert rep.passed


def test_orbit_leaving_cover(conj):
    with pytest.raises(OrbitEscapedOmega):
        conj.h(Fraction(1, 2), 2)
