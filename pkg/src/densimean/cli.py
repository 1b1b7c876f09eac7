"""Command-line front end.

    densimean mean --family euler-ratio --t-max 30 --format json
    densimean density --family normal --q 2 --n-range 1..6
    densimean oracle --q 2 --n 3
    densimean bounds normal-big --q 4
    densimean bounds proportion --q 1681 --style corollary-threshold
    densimean witness rho-liminf --q 2 --k-max 6
    densimean cache stats

Data goes to stdout as CSV (with a header) or JSON; diagnostics go to
stderr.  Exit status is 0 on success, 2 for usage and domain errors and 3
when a cap or the factoring budget is hit.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import engine, fields, oracle
from . import numtheory as nt
from .cache import FactorCache, default_cache_path
from .errors import DensimeanError, ResourceError

log = logging.getLogger("densimean")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(DensimeanError):
    pass


@dataclass
class RunConfig:
    factor_budget: int = 10**8
    divisor_cap: int = 10**6
    enum_cap: int = 2**16
    cache_path: Path = field(default_factory=default_cache_path)
    output_format: str = "csv"
    seed: int = 0

    def __post_init__(self) -> None:
        self.cache_path = Path(self.cache_path)
        for name in ("factor_budget", "divisor_cap", "enum_cap"):
            if int(getattr(self, name)) <= 0:
                raise UsageError(f"{name} must be positive")
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"output_format must be csv or json, not {self.output_format!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def as_params(self) -> dict[str, Any]:
        return {
            "factor_budget": self.factor_budget,
            "divisor_cap": self.divisor_cap,
            "enum_cap": self.enum_cap,
            "seed": self.seed,
        }


# -- output -----------------------------------------------------------------


def _cell(value: Any) -> Any:
    """JSON-ready value: ints become decimal strings, floats stay numbers."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return float(format(value, ".17g"))
    return value


def _csv_text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit(result: dict, fmt: str, out) -> None:
    rows = [{k: _cell(v) for k, v in row.items()} for row in result["rows"]]
    if fmt == "json":
        payload = {
            "command": result["command"],
            "params": {k: _cell(v) for k, v in result["params"].items()},
            "rows": rows,
        }
        if "report" in result:
            payload["report"] = result["report"]
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    columns: list[str] = []
    for row in rows:
        columns += [k for k in row if k not in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_text(row.get(c)) for c in columns])
    out.write(buf.getvalue())


# -- commands ---------------------------------------------------------------


def _family_spec(family: str, q: int | None) -> tuple[engine.DensityLikeSpec, engine.Ladder]:
    if family == "euler-ratio":
        return engine.euler_ratio_spec(), engine.make_ladder("lcm-integers")
    if q is None:
        raise UsageError(f"--q is required for the {family} family")
    if family == "primitive":
        return fields.primitive_spec(q), engine.make_ladder("lcm-integers")
    return fields.normal_spec(q), engine.make_ladder("lcm-q-powers", q=q)


def cmd_mean(args, cfg: RunConfig) -> dict:
    spec, ladder = _family_spec(args.family, args.q)
    depth = args.depth
    exact_log = args.family != "primitive"
    report = engine.mean_value_report(
        spec,
        ladder,
        args.t_max,
        alpha=args.alpha,
        empirical_xs=args.empirical_x or (),
        log_mean_depth=depth if exact_log else None,
        allow_partial=args.partial,
    )
    if not exact_log:
        lower, upper = fields.primitive_log_mean_bracket(args.q, depth, args.prime_limit)
        report.log_mean_depth = depth
        report.truncated_log_mean = upper
        report.log_mean_lower = lower
        report.geometric_lower = math.exp(upper)
    if report.stopped_early:
        log.warning("trajectory stopped early: %s", report.stopped_early)
    rows: list[dict] = []
    for i, t in enumerate(report.t_values):
        row = {"kind": "trajectory", "t": t, "L_t": report.ladder_terms[i], "A_t": report.A_t_values[i]}
        if report.second_moments:
            row["A2_t"] = report.second_moments[i]
        rows.append(row)
    for d in report.diagnostics:
        rows.append({"kind": "empirical", "x": d.x, "S_x": d.empirical, "t_x": d.t, "A_t_x": d.ladder_value, "gap": d.gap})
    rows.append(
        {
            "kind": "summary",
            "log_mean_depth": report.log_mean_depth,
            "truncated_log_mean": report.truncated_log_mean,
            "log_mean_lower": report.log_mean_lower,
            "geometric_lower": report.geometric_lower,
            "variance": report.variance_estimate,
        }
    )
    params = {"family": args.family, "q": args.q, "t_max": args.t_max, "alpha": args.alpha,
              "empirical_x": " ".join(map(str, args.empirical_x or [])), "depth": depth}
    return {"command": "mean", "params": params, "rows": rows, "report": _json_report(report)}


def _json_report(report: engine.MeanValueReport) -> dict:
    d = report.to_dict()
    for key, value in d.items():
        if isinstance(value, float):
            d[key] = _cell(value)
    return d


def _parse_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError as exc:
        raise UsageError(f"--n-range expects A..B, got {text!r}") from exc
    if lo < 1 or hi < lo:
        raise UsageError(f"bad range {text!r}")
    return lo, hi


def cmd_density(args, cfg: RunConfig) -> dict:
    lo, hi = _parse_range(args.n_range)
    pp = fields.prime_power(args.q)
    rows = []
    for n in range(lo, hi + 1):
        if args.family == "primitive":
            count = fields.primitive_count(pp, n)
            f_totient = count / (pp.q**n - 1)
            product = math.prod(fields.g_q(pp, d) for d in nt.divisors(n))
            density = count / pp.q**n
        else:
            count = fields.phi_poly_xn_minus_1(pp, n)
            f_totient = count / pp.q**n
            product = fields.mu_q(pp, n)
            density = f_totient
        rel = abs(product - f_totient) / f_totient
        rows.append({"q": pp.q, "n": n, "count": count, "density": density,
                     "formula": f_totient, "product": product, "rel_err": rel, "match": rel <= 1e-10})
    return {"command": "density", "params": {"family": args.family, "q": pp.q, "n_range": args.n_range}, "rows": rows}


def cmd_oracle(args, cfg: RunConfig) -> dict:
    pp = fields.prime_power(args.q)
    tower = oracle.build_tower(pp.p, pp.m, args.n, cap=cfg.enum_cap)
    prim = oracle.count_primitive(tower)
    prim_f = nt.euler_phi(tower.size - 1)
    norm = oracle.count_normal(tower)
    norm_f = fields.phi_poly_xn_minus_1(pp, args.n)
    row = {"q": pp.q, "n": args.n, "primitive": prim, "primitive_formula": prim_f,
           "normal": norm, "normal_formula": norm_f, "match": prim == prim_f and norm == norm_f}
    return {"command": "oracle", "params": {"q": pp.q, "n": args.n}, "rows": [row]}


def _bounds_sigma0(args) -> list[dict]:
    if args.m:
        rows = []
        for m in args.m:
            lhs, rhs = nt.sigma0_bound_holds(m)
            rows.append({"m": m, "sigma0": nt.sigma0(m), "log_sigma0": lhs, "log_bound": rhs,
                         "margin": rhs - lhs, "holds": lhs < rhs})
        return rows
    counts = nt.sigma0_table(args.m_max)
    ms = range(3, args.m_max + 1)
    worst_m, worst, failures = 0, math.inf, 0
    for m in ms:
        lhs = math.log(int(counts[m]))
        rhs = 1.1 * math.log(m) / math.log(math.log(m))
        if rhs - lhs < worst:
            worst, worst_m = rhs - lhs, m
        failures += lhs >= rhs
    return [{"m_max": args.m_max, "checked": len(ms), "failures": failures,
             "tightest_m": worst_m, "min_log_margin": worst}]


def _bounds_trajectory(args, with_variance: bool) -> list[dict]:
    pp = fields.prime_power(args.q)
    lower, upper = fields.normal_mean_bounds(pp)
    spec = fields.normal_spec(pp)
    ladder = engine.make_ladder("lcm-q-powers", q=pp.q)
    report = engine.mean_value_report(spec, ladder, args.t_max, allow_partial=True)
    rows = []
    vbound = fields.normal_variance_bound(pp)
    for i, t in enumerate(report.t_values):
        a = report.A_t_values[i]
        row = {"q": pp.q, "t": t, "L_t": report.ladder_terms[i], "A_t": a}
        if with_variance:
            var = report.second_moments[i] - a * a
            row.update({"A2_t": report.second_moments[i], "variance": var, "bound": vbound,
                        "below_bound": var < vbound})
        else:
            row.update({"lower": lower, "upper": upper, "inside": lower < a <= upper})
        rows.append(row)
    return rows


def _bounds_proportion(args) -> list[dict]:
    pp = fields.prime_power(args.q)
    if args.style == "explicit":
        if args.T is None:
            raise UsageError("--T is required with --style explicit")
        T = args.T
    else:
        T = 1 / math.sqrt(pp.q)
    C, frac = fields.proportion_bound(pp, T)
    return [{"q": pp.q, "T": T, "C_qT": C, "exceptional_fraction": frac,
             "meets_0.95": C >= 0.95, "positive": C > 0}]


def _bounds_sqj(args) -> list[dict]:
    pp = fields.prime_power(args.q)
    rows = []
    j = 1
    while pp.q**j <= args.limit:
        prof = fields.s_q(pp, j)
        sig = nt.sigma0(nt.factorize_power_minus_one(pp.q, j))
        root = pp.q ** (j / 2)
        rows.append({"q": pp.q, "j": j, "order_j_divisors": len(prof.divisors_with_order_j),
                     "s_q_j": prof.s_q_j, "delta_q_j": prof.delta_q_j, "sigma0": sig,
                     "q_half_j": root, "below_sqrt": prof.s_q_j <= root, "below_sigma0": prof.s_q_j <= sig})
        j += 1
    return rows


def cmd_bounds(args, cfg: RunConfig) -> dict:
    which = args.which
    if which == "sigma0":
        rows = _bounds_sigma0(args)
        params = {"m_max": args.m_max, "m": " ".join(map(str, args.m or []))}
    elif which in ("normal-big", "variance"):
        rows = _bounds_trajectory(args, with_variance=which == "variance")
        params = {"q": args.q, "t_max": args.t_max}
    elif which == "proportion":
        rows = _bounds_proportion(args)
        params = {"q": args.q, "style": args.style, "T": args.T}
    else:
        rows = _bounds_sqj(args)
        params = {"q": args.q, "limit": args.limit}
    return {"command": f"bounds {which}", "params": params, "rows": rows}


def cmd_witness(args, cfg: RunConfig) -> dict:
    rows = []
    for k in range(1, args.k_max + 1):
        alpha, e, bound = fields.rho_mean_upper_witness(args.q, k)
        rows.append({"k": k, "alpha_k": alpha, "e_k": e, "bound": bound})
    return {"command": "witness rho-liminf", "params": {"q": args.q, "k_max": args.k_max}, "rows": rows}


def cmd_cache(args, cfg: RunConfig) -> dict:
    store = FactorCache(cfg.cache_path)
    if args.action == "clear":
        before = len(store)
        store.clear()
        rows = [{"path": str(cfg.cache_path), "cleared": before}]
    else:
        rows = [store.stats()]
    return {"command": f"cache {args.action}", "params": {"cache_path": str(cfg.cache_path)}, "rows": rows}


# -- argument parsing -------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--config", type=Path, default=None, help="JSON file with RunConfig keys")
    common.add_argument("--factor-budget", type=_positive_int, default=None)
    common.add_argument("--divisor-cap", type=_positive_int, default=None)
    common.add_argument("--enum-cap", type=_positive_int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cache", type=Path, default=None, help="factorization cache file")
    common.add_argument("--no-cache", action="store_true")

    parser = argparse.ArgumentParser(prog="densimean", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", parents=[common], help="ladder trajectory and mean-value report")
    p.add_argument("--family", choices=("euler-ratio", "primitive", "normal"), required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--t-max", type=_positive_int, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--empirical-x", type=_positive_int, nargs="+")
    p.add_argument("--depth", type=_positive_int, default=10**4, help="terms in the truncated log mean")
    p.add_argument("--prime-limit", type=_positive_int, default=10**6,
                   help="sieve bound for the primitive log-mean bracket")
    p.add_argument("--partial", action="store_true", help="stop at the last computable t")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("density", parents=[common], help="per-n densities with formula cross-checks")
    p.add_argument("--family", choices=("primitive", "normal"), required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n-range", required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("oracle", parents=[common], help="exhaustive counts against formulas")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bounds", parents=[common], help="margin tables for the quantitative bounds")
    p.add_argument("which", choices=("sigma0", "normal-big", "variance", "proportion", "sqj"))
    p.add_argument("--q", type=int)
    p.add_argument("--t-max", type=_positive_int, default=8)
    p.add_argument("--m-max", type=_positive_int, default=10**6)
    p.add_argument("--m", type=_positive_int, nargs="+")
    p.add_argument("--T", type=float)
    p.add_argument("--style", choices=("explicit", "corollary-threshold", "half"), default="corollary-threshold")
    p.add_argument("--limit", type=_positive_int, default=10**4)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("witness", parents=[common], help="witnesses for small mean primitive density")
    p.add_argument("which", choices=("rho-liminf",))
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k-max", type=_positive_int, required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("cache", parents=[common], help="factorization cache maintenance")
    p.add_argument("action", choices=("stats", "clear"))
    p.set_defaults(func=cmd_cache)
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {
        "factor_budget": args.factor_budget,
        "divisor_cap": args.divisor_cap,
        "enum_cap": args.enum_cap,
        "seed": args.seed,
        "output_format": args.format,
        "cache_path": args.cache,
    }
    return dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def _needs_q(args) -> None:
    if getattr(args, "which", None) in ("normal-big", "variance", "proportion", "sqj") and args.q is None:
        raise UsageError(f"bounds {args.which} needs --q")


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("densimean: %(levelname)s: %(message)s"))
    root = logging.getLogger("densimean")
    root.handlers[:] = [handler]
    root.propagate = False
    saved = dataclasses.replace(nt.limits)
    store = None
    try:
        cfg = _config_from_args(args)
        _needs_q(args)
        nt.configure(factor_budget=cfg.factor_budget, divisor_cap=cfg.divisor_cap, seed=cfg.seed)
        if not args.no_cache and args.command != "cache":
            store = FactorCache(cfg.cache_path)
            nt.set_factor_store(store)
        result = args.func(args, cfg)
        result["params"].update(cfg.as_params())
        emit(result, cfg.output_format, stdout)
        return EXIT_OK
    except ResourceError as exc:
        print(f"densimean: resource limit: {exc}", file=stderr)
        return EXIT_RESOURCE
    except (UsageError, ValueError) as exc:
        print(f"densimean: error: {exc}", file=stderr)
        return EXIT_USAGE
    except DensimeanError as exc:
        print(f"densimean: error: {exc}", file=stderr)
        return EXIT_FAIL
    finally:
        nt.set_factor_store(None)
        nt.configure(**dataclasses.asdict(saved))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
