import csv
import io
import json
import math

import pytest

from densimean import cli, fields
from densimean import numtheory as nt
from densimean.cache import FactorCache


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def json_rows(text):
    return json.loads(text)["rows"]


# -- documented invocations -------------------------------------------------------


def test_mean_euler_ratio_json():
    code, out, _ = call("mean", "--family", "euler-ratio", "--t-max", "30", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    report = payload["report"]
    assert 0.6079 <= report["A_t_values"][-1] <= 0.66
    assert payload["params"]["t_max"] == "30"
    assert payload["params"]["factor_budget"] == str(10**8)
    a = report["A_t_values"]
    assert all(y <= x + 1e-12 for x, y in zip(a, a[1:]))


def test_oracle_row():
    code, out, _ = call("oracle", "--q", "2", "--n", "3")
    assert code == 0
    (row,) = csv_rows(out)
    assert row == {"q": "2", "n": "3", "primitive": "6", "primitive_formula": "6",
                   "normal": "3", "normal_formula": "3", "match": "true"}


def test_normal_big_window():
    code, out, _ = call("bounds", "normal-big", "--q", "4")
    assert code == 0
    rows = csv_rows(out)
    assert rows and all(float(r["lower"]) == 0.25 and float(r["upper"]) == 0.75 for r in rows)
    assert all(r["inside"] == "true" for r in rows)


def test_proportion_threshold():
    code, out, _ = call("bounds", "proportion", "--q", "1681", "--style", "corollary-threshold")
    (row,) = csv_rows(out)
    assert code == 0 and row["meets_0.95"] == "true"
    assert float(row["C_qT"]) == pytest.approx(0.950625, abs=1e-6)


def test_proportion_explicit_needs_T():
    assert call("bounds", "proportion", "--q", "9", "--style", "explicit")[0] == 2
    code, out, _ = call("bounds", "proportion", "--q", "9", "--style", "explicit", "--T", "0.1")
    assert code == 0
    assert float(csv_rows(out)[0]["C_qT"]) == pytest.approx(1 - 1 / 9 - 1 / 3 - 0.1)


def test_witness_rows():
    code, out, _ = call("witness", "rho-liminf", "--q", "2", "--k-max", "2")
    rows = csv_rows(out)
    assert code == 0
    assert [(r["alpha_k"], r["e_k"]) for r in rows] == [("3", "2"), ("15", "4")]
    assert [round(float(r["bound"]), 4) for r in rows] == [0.6667, 0.5333]


def test_density_normal_table():
    code, out, _ = call("density", "--family", "normal", "--q", "2", "--n-range", "1..6")
    rows = csv_rows(out)
    assert code == 0
    mus = [float(r["density"]) for r in rows]
    counts = [int(r["count"]) for r in rows]
    assert mus[:4] == [0.5, 0.5, 0.375, 0.5]
    assert counts == [1, 2, 3, 8, 15, 24]
    assert all(m == c / 2**n for n, (m, c) in enumerate(zip(mus, counts), 1))
    assert all(r["match"] == "true" for r in rows)


def test_density_primitive_table():
    code, out, _ = call("density", "--family", "primitive", "--q", "3", "--n-range", "1..12")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 12
    assert all(r["match"] == "true" for r in rows)
    assert int(rows[1]["count"]) == 4


def test_sigma0_and_sqj_tables():
    code, out, _ = call("bounds", "sigma0", "--m-max", "20000")
    (row,) = csv_rows(out)
    assert code == 0 and row["failures"] == "0"
    code, out, _ = call("bounds", "sigma0", "--m", "720720")
    (row,) = csv_rows(out)
    assert row["sigma0"] == "240" and row["holds"] == "true"
    code, out, _ = call("bounds", "sqj", "--q", "4")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 6
    assert all(r["below_sqrt"] == "true" and r["below_sigma0"] == "true" for r in rows)


def test_variance_table():
    code, out, _ = call("bounds", "variance", "--q", "9", "--t-max", "5")
    rows = csv_rows(out)
    assert code == 0
    assert all(r["below_bound"] == "true" for r in rows)


def test_mean_primitive_reports_bracket():
    code, out, _ = call("mean", "--family", "primitive", "--q", "2", "--t-max", "5",
                        "--depth", "100", "--prime-limit", "10000", "--format", "json")
    assert code == 0
    report = json.loads(out)["report"]
    assert report["log_mean_lower"] <= report["truncated_log_mean"] <= 0
    assert report["geometric_lower"] == pytest.approx(math.exp(report["truncated_log_mean"]))


# -- exit codes -------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ["mean", "--family", "bogus", "--t-max", "3"],
    ["mean", "--family", "euler-ratio"],
    ["frobnicate"],
    ["bounds", "normal-big", "--q", "3"],
    ["bounds", "normal-big"],
    ["density", "--family", "normal", "--q", "6", "--n-range", "1..3"],
    ["density", "--family", "normal", "--q", "2", "--n-range", "5..1"],
    ["mean", "--family", "normal", "--t-max", "3"],
    ["oracle", "--q", "2", "--n", "0"],
])
def test_usage_errors_exit_2(argv):
    code, out, _ = call(*argv)
    assert code == 2
    assert out == ""


def test_resource_errors_exit_3():
    code, out, err = call("oracle", "--q", "2", "--n", "12", "--enum-cap", "1000")
    assert code == 3 and out == "" and "resource" in err
    code, out, err = call("mean", "--family", "euler-ratio", "--t-max", "20", "--divisor-cap", "100")
    assert code == 3 and out == ""


def test_budget_error_exit_3():
    code, out, err = call("density", "--family", "primitive", "--q", "2", "--n-range", "101..101",
                          "--factor-budget", "10000", "--no-cache")
    assert code == 3 and out == ""
    assert "cofactor" in err


def test_limits_restored_after_run():
    before = nt.limits.factor_budget
    call("witness", "rho-liminf", "--q", "3", "--k-max", "2", "--factor-budget", "77")
    assert nt.limits.factor_budget == before


# -- output invariants ----------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ["mean", "--family", "normal", "--q", "5", "--t-max", "5", "--empirical-x", "100", "1000"],
    ["density", "--family", "primitive", "--q", "2", "--n-range", "1..20"],
    ["bounds", "sqj", "--q", "9"],
    ["witness", "rho-liminf", "--q", "5", "--k-max", "4"],
])
def test_csv_and_json_payloads_agree(argv):
    _, as_csv, _ = call(*argv, "--format", "csv")
    _, as_json, _ = call(*argv, "--format", "json")
    crow, jrow = csv_rows(as_csv), json_rows(as_json)
    assert len(crow) == len(jrow)
    for c, j in zip(crow, jrow):
        for key, jv in j.items():
            cv = c[key]
            if isinstance(jv, float):
                assert float(cv) == jv
            elif isinstance(jv, bool):
                assert cv == ("true" if jv else "false")
            elif jv is None:
                assert cv == ""
            else:
                assert cv == str(jv)


def test_json_round_trip_is_bit_exact():
    argv = ["mean", "--family", "euler-ratio", "--t-max", "12", "--empirical-x", "500", "--format", "json"]
    _, first, _ = call(*argv)
    _, second, _ = call(*argv)
    assert first == second
    payload = json.loads(first)
    assert json.dumps(payload, indent=2) + "\n" == first
    for value in payload["report"]["A_t_values"]:
        assert float(repr(value)) == value


def test_integers_are_emitted_as_strings():
    _, out, _ = call("density", "--family", "normal", "--q", "9", "--n-range", "40..40", "--format", "json")
    (row,) = json_rows(out)
    assert isinstance(row["count"], str)
    assert int(row["count"]) == fields.phi_poly_xn_minus_1(9, 40) > 2**53


# -- cache ------------------------------------------------------------------------


def test_warm_cache_matches_cold(tmp_path):
    path = tmp_path / "c.jsonl"
    argv = ["density", "--family", "primitive", "--q", "3", "--n-range", "30..40", "--cache", str(path)]
    nt.clear_memo()
    _, cold, _ = call(*argv)
    assert path.exists() and FactorCache(path).stats()["entries"] > 0
    nt.clear_memo()
    _, warm, _ = call(*argv)
    assert warm == cold
    nt.clear_memo()
    _, nocache, _ = call(*argv[:-2], "--no-cache")
    assert nocache == cold


def test_env_var_sets_cache_path(tmp_path, monkeypatch):
    path = tmp_path / "env.jsonl"
    monkeypatch.setenv("DENSIMEAN_CACHE", str(path))
    nt.clear_memo()
    assert call("density", "--family", "primitive", "--q", "2", "--n-range", "60..60")[0] == 0
    assert path.exists()
    code, out, _ = call("cache", "stats")
    (row,) = csv_rows(out)
    assert row["path"] == str(path) and int(row["entries"]) >= 1
    code, out, _ = call("cache", "clear")
    assert code == 0 and not path.exists()


def test_corrupt_cache_lines_are_skipped(tmp_path):
    path = tmp_path / "bad.jsonl"
    lines = [
        '{"n": "15", "factors": [["3", 1], ["5", 1]]}',
        "not json",
        '{"n": "16", "factors": [["2", 3]]}',          # does not reconstruct
        '{"n": "21", "factors": [["21", 1]]}',          # composite "prime"
        '{"n": "35", "factors": [["5", 1], ["7", 1]], "x": 1}',
        '{"n": "77", "factors": [["7", 1], ["11", 1]]}',
    ]
    path.write_text("\n".join(lines) + "\n")
    store = FactorCache(path)
    assert store.skipped == 4
    assert store.get(15) == [(3, 1), (5, 1)] and store.get(77) == [(7, 1), (11, 1)]
    assert store.get(16) is None
    code, out, _ = call("cache", "stats", "--cache", str(path))
    assert code == 0 and csv_rows(out)[0]["skipped"] == "4"


def test_cache_entries_never_change(tmp_path):
    path = tmp_path / "c.jsonl"
    store = FactorCache(path)
    store.put(15, [(3, 1), (5, 1)])
    store.put(15, [(15, 1)])
    assert path.read_text().count("\n") == 1
    assert FactorCache(path).get(15) == [(3, 1), (5, 1)]


# -- config -----------------------------------------------------------------------


def test_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"output_format": "json", "seed": 3, "factor_budget": 5000}))
    code, out, _ = call("witness", "rho-liminf", "--q", "2", "--k-max", "1", "--config", str(cfg))
    assert code == 0
    params = json.loads(out)["params"]
    assert params["seed"] == "3" and params["factor_budget"] == "5000"


@pytest.mark.parametrize("content", ['{"colour": "red"}', '{"divisor_cap": 0}', "not json",
                                     '{"output_format": "xml"}'])
def test_bad_config_rejected(tmp_path, content):
    cfg = tmp_path / "run.json"
    cfg.write_text(content)
    code, out, err = call("witness", "rho-liminf", "--q", "2", "--k-max", "1", "--config", str(cfg))
    assert code == 2 and out == ""


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "densimean", "oracle", "--q", "3", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "3,2,4,4,4,4,true"
