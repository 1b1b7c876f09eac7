"""Primitive-density ladder for one q, with the log-mean bracket and witnesses."""

import argparse
import math

from densimean import engine as E
from densimean import fields as F
from densimean import numtheory as nt


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=int, default=2)
    parser.add_argument("--t-max", type=int, default=8)
    parser.add_argument("--depth", type=int, default=10**4)
    parser.add_argument("--prime-limit", type=int, default=10**6)
    parser.add_argument("--k-max", type=int, default=6)
    parser.add_argument("--factor-budget", type=int, default=10**6)
    args = parser.parse_args()

    nt.configure(factor_budget=args.factor_budget)
    report = E.mean_value_report(F.primitive_spec(args.q), E.make_ladder("lcm-integers"),
                                 args.t_max, allow_partial=True, with_variance=False)
    for t, L, a in zip(report.t_values, report.ladder_terms, report.A_t_values):
        print(f"t={t:<2} L_t={L:<10} A_t={a:.8f}")
    if report.stopped_early:
        print(f"stopped early: {report.stopped_early}")

    lower, upper = F.primitive_log_mean_bracket(args.q, args.depth, prime_limit=args.prime_limit)
    print(f"log mean to {args.depth}: [{lower:.6f}, {upper:.6f}]  exp: [{math.exp(lower):.6f}, {math.exp(upper):.6f}]")
    print(f"trivial upper bound for the mean: {F.rho_mean_trivial_upper(args.q):.6f}")
    for k in range(1, args.k_max + 1):
        alpha, e, bound = F.rho_mean_upper_witness(args.q, k)
        print(f"k={k}: alpha={alpha} e={e} bound={bound:.6f}")


if __name__ == "__main__":
    main()
