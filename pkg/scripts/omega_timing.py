"""Time the nested covers Omega_k of the worked example for k up to --max-k."""
import argparse
import time

from padicstab import BallCover, ClosedBall, PadicContext, RationalMap, omega_sequence


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-k", type=int, default=14)
    args = ap.parse_args()
    f = RationalMap([0, -1, 1], [2])
    omega = BallCover([ClosedBall(PadicContext(2, 128), 0, 0)])
    for k in range(args.max_k + 1):
        t0 = time.perf_counter()
        seq = omega_sequence(f, omega, k)
        print(f"k={k:2d}  balls={len(seq[-1]):6d}  radius exp={[str(t) for t in seq[-1].radius_exponents()]}  "
              f"{time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
