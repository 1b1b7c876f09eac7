"""Show the normal-density ladder against its mean-value window for several q."""

import argparse

from densimean import engine as E
from densimean import fields as F


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=int, nargs="+", default=[4, 5, 7, 8, 9])
    parser.add_argument("--t-max", type=int, default=8)
    args = parser.parse_args()

    for q in args.q:
        lower, upper = F.normal_mean_bounds(q)
        report = E.mean_value_report(F.normal_spec(q), E.make_ladder("lcm-q-powers", q=q),
                                     args.t_max, allow_partial=True)
        print(f"q={q}: window ({lower:.5f}, {upper:.5f}], variance bound {F.normal_variance_bound(q):.5f}")
        for t, a in zip(report.t_values, report.A_t_values):
            mark = "ok" if lower < a <= upper else "OUTSIDE"
            print(f"  t={t:<2} A_t={a:.8f} {mark}")
        print(f"  variance estimate {report.variance_estimate:.6f}")
        if report.stopped_early:
            print(f"  stopped early: {report.stopped_early}")


if __name__ == "__main__":
    main()
