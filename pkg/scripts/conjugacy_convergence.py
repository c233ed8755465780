"""Successive differences |h_{l+1}(z) - h_l(z)| for g = f + 2 against mu / lambda^(l+1)."""
import argparse
import random

from padicstab import BallCover, ClosedBall, PadicContext, RationalMap
from padicstab.dynamics import sample_points
from padicstab.stability import Conjugacy, difference_exponent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--depth", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    f = RationalMap([0, -1, 1], [2])
    g = RationalMap([4, -1, 1], [2])
    omega = BallCover([ClosedBall(PadicContext(2, 128), 0, 0)])
    conj = Conjugacy.for_depth(f, g, 1, -1, omega, args.depth)
    for z in sample_points(omega, args.points, random.Random(args.seed), conj.ctx):
        tr = conj.trace(z, args.depth)
        exps = [difference_exponent(tr[l + 1], tr[l]) for l in range(args.depth)]
        print(f"z = {z.truncate(12)} mod 2^12")
        print("  observed exponents:", [str(e) for e in exps])
        print("  bound exponents:   ", [str(conj.bound_exponent(l + 1)) for l in range(args.depth)])


if __name__ == "__main__":
    main()
