"""Certified J-stability for rational maps over the p-adic numbers."""
from .dynamics import (
    BallCover,
    build_omega,
    check_membership,
    find_repelling_in_omega,
    good_reduction,
    itinerary,
    multiplier_norm,
    omega_sequence,
    periodic_points,
)
from .newton import (
    ClosedBall,
    constant_norm_on_ball,
    count_roots_in_ball,
    hensel_lift,
    image_of_ball,
    maximal_term_index,
    pullback_ball,
    roots_in_ball,
)
from .padic import INF, INFINITY, PadicContext, PadicNumber, chordal_distance, norm
from .poly import Polynomial, RationalMap, gauss_norm
from .stability import (
    CertifyConfig,
    Conjugacy,
    conjugate_point,
    delta_from_separation,
    expansion_constant_exponent,
    j_stability_certificate,
    mu_from_delta,
    perturbation_bounds,
)

__all__ = [name for name in dir() if not name.startswith("_")]
