"""Compare the ladder and empirical averages of phi(n)/n with 6/pi^2."""

import argparse
import math

from densimean import engine as E


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-max", type=int, default=30)
    parser.add_argument("--x", type=int, nargs="+", default=[10**3, 10**4, 10**5, 10**6])
    args = parser.parse_args()

    spec, ladder = E.euler_ratio_spec(), E.make_ladder("lcm-integers")
    target = 6 / math.pi**2
    print(f"{'t':>3} {'L_t':>16} {'A_t':>12} {'A_t - 6/pi^2':>14}")
    for t in range(1, args.t_max + 1):
        a = E.A_t(spec, ladder, t)
        print(f"{t:>3} {ladder.term(t):>16} {a:>12.8f} {a - target:>14.2e}")
    print()
    for x, s in zip(args.x, E.empirical_averages(spec, args.x)):
        print(f"S({x}) = {s:.8f}  (diff {s - target:+.2e})")


if __name__ == "__main__":
    main()
