from fractions import Fraction

import pytest

from padicstab import (
    BallCover,
    ClosedBall,
    PadicContext,
    RationalMap,
    build_omega,
    check_membership,
    find_repelling_in_omega,
    good_reduction,
    itinerary,
    multiplier_norm,
    omega_sequence,
    periodic_points,
)
from padicstab.errors import EscapedCover, MembershipFailure, MemoryCapExceeded, NotFoundWithinPeriodCap

C2 = PadicContext(2, 64)
UNIT = ClosedBall(C2, 0, 0)


@pytest.fixture(scope="module")
def seq(worked):
    return omega_sequence(worked, BallCover([UNIT]), 8)


def test_fixed_points(worked):
    pts = periodic_points(worked, 1, C2, ClosedBall(C2, 0, -2))
    assert sorted(pt.point.lift() for pt in pts) == [0, 3]
    assert all(pt.multiplier_exp == -1 for pt in pts)


def test_two_cycle(worked):
    pts = periodic_points(worked, 2, C2, ClosedBall(C2, 0, -2))
    assert len(pts) == 4
    cyc = [pt for pt in pts if pt.point.lift() not in (0, 3)]
    assert len(cyc) == 2
    for pt in cyc:
        x = pt.point
        assert x * x + x + 2 == 0
        assert pt.multiplier_exp == -2


def test_multiplier_norm(worked):
    assert multiplier_norm(worked, [C2(0)]) == -1
    with pytest.raises(ValueError):
        multiplier_norm(worked, [C2(0), C2(1)])
    assert multiplier_norm(RationalMap([0, 0, 1]), [C2(1)]) == 1


def test_good_reduction(worked):
    assert good_reduction(RationalMap([0, 0, 1]), 3)
    assert not good_reduction(worked, 2)


def test_build_omega(worked):
    om = build_omega(worked, [C2(0)], Fraction(0), C2)
    assert om.balls == [UNIT]


def test_generation_sizes(seq):
    assert [len(c) for c in seq[:4]] == [1, 2, 4, 8]
    assert [c.radius_exponents() for c in seq[:4]] == [[0], [1], [2], [3]]


def test_generations_nest_and_are_disjoint(seq):
    for prev, cur in zip(seq, seq[1:]):
        for b in cur.balls:
            assert prev.contains_ball(b)
        for i, a in enumerate(cur.balls):
            for b in cur.balls[i + 1:]:
                assert a.disjoint(b)


def test_constant_sequence_for_squaring():
    seq = omega_sequence(RationalMap([0, 0, 1]), BallCover([UNIT]), 4)
    assert all(c.balls == [UNIT] for c in seq)


def test_memory_cap(worked):
    with pytest.raises(MemoryCapExceeded):
        omega_sequence(worked, BallCover([UNIT]), 30)


def test_membership(worked):
    w = check_membership(worked, -1, BallCover([UNIT]))
    assert w.derivative_exps == [-1]
    with pytest.raises(MembershipFailure):
        check_membership(RationalMap([0, 0, 1]), -1, BallCover([UNIT]))


def test_repelling_seed(worked):
    pt = find_repelling_in_omega(worked, BallCover([UNIT]), q_max=1)
    assert pt.point.is_zero() and pt.period == 1
    with pytest.raises(NotFoundWithinPeriodCap):
        find_repelling_in_omega(worked, BallCover([UNIT]), q_max=0)
    with pytest.raises(ValueError):
        find_repelling_in_omega(worked, BallCover([]), q_max=1)


def test_itineraries(worked, seq):
    om1 = seq[1]
    assert itinerary(worked, C2(0), om1, 6) == (0,) * 6
    assert itinerary(worked, C2(3), om1, 6) == (1,) * 6
    # 2 -> 1 -> 0 -> 0
    assert itinerary(worked, C2(2), om1, 5) == (0, 1, 0, 0, 0)
    with pytest.raises(EscapedCover):
        itinerary(worked, C2(Fraction(1, 2)), om1, 3)


def test_itinerary_determines_deep_ball(worked, seq):
    # points of one Omega_k ball share their first k itinerary symbols
    om1, om6 = seq[1], seq[6]
    for b in om6.balls[:16]:
        x = C2(b.center)
        y = C2(b.center + 2**6 * 5)
        assert itinerary(worked, x, om1, 6) == itinerary(worked, y, om1, 6)


def test_iterate_has_the_same_cover(worked, seq):
    f2 = worked.iterate(2)
    seq2 = omega_sequence(f2, BallCover([UNIT]), 2)
    assert seq2[1].same_point_set(seq[2])
    assert seq2[2].same_point_set(seq[4])
