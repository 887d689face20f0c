import csv
import io
import json
import math
import subprocess
import sys

import pytest

from genairy.cli import EXIT_CODES, RunConfig, execute, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        else:
            lines.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    return meta, rows


class TestSubcommands:
    def test_semigroup(self, capsys):
        code, out, _ = run_cli(capsys, "semigroup", "--potential", "pow:2", "--t", "2")
        assert code == 0
        _, rows = parse_csv(out)
        assert float(rows[0]["log_norm"]) == pytest.approx(-2.0 / 3.0, abs=1e-12)
        assert float(rows[0]["log_norm"]) == pytest.approx(-0.666667, abs=1e-6)

    def test_profile_positional(self, capsys):
        code, out, _ = run_cli(capsys, "profile", "pow:2", "--lambda", "9")
        assert code == 0
        _, rows = parse_csv(out)
        assert float(rows[0]["x_lambda"]) == pytest.approx(3.0, abs=1e-10)
        assert float(rows[0]["f_at_xlambda"]) == pytest.approx(18.0, abs=1e-10)

    def test_resolvent_two_rows_ordered(self, capsys):
        code, out, _ = run_cli(capsys, "resolvent", "--potential", "pow:2", "--lambda", "4,9")
        assert code == 0
        meta, rows = parse_csv(out)
        assert len(rows) == 2
        assert meta["potential"] == "pow:2"
        for row in rows:
            lo, mid, hi = (float(row[k]) for k in ("log_witness_lower", "log_numeric", "log_schur_upper"))
            assert lo <= mid <= hi
            assert row["guard"] == "false"

    def test_resolvent_guard_column(self, capsys):
        code, out, _ = run_cli(capsys, "resolvent", "--potential", "pow:2", "--lambda", "40")
        assert code == 0
        _, rows = parse_csv(out)
        assert rows[0]["log_numeric"] == ""
        assert rows[0]["guard"] == "true"

    def test_validate(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "--potential", "logpow:1")
        assert code == 0
        meta, rows = parse_csv(out)
        assert meta["all_passed"] == "true"
        assert all(r["passed"] == "true" for r in rows)

    def test_levelcurve_real_has_davies_column(self, capsys):
        code, out, _ = run_cli(capsys, "levelcurve", "--kind", "real", "--param", "2", "--epsilon", "1e-3", "--range", "1e6,1e8", "--n", "5")
        assert code == 0
        meta, rows = parse_csv(out)
        assert len(rows) == 5
        assert meta["leading_order"] == "true"
        assert float(rows[0]["value"]) == pytest.approx(685.8751860391154, rel=1e-12)
        assert float(rows[0]["value_davies"]) == pytest.approx(668.1151216682465, rel=1e-12)

    def test_levelcurve_damped_pow_conjectured(self, capsys):
        code, out, _ = run_cli(capsys, "levelcurve", "--kind", "dw-pow", "--param", "1", "--epsilon", "1e-2", "--range", "1e4,1e5", "--n", "3")
        assert code == 0
        meta, _ = parse_csv(out)
        assert meta["conjectured"] == "true"

    def test_laplace(self, capsys):
        code, out, _ = run_cli(capsys, "laplace", "--potential", "pow:2", "--lambda", "25", "--M", "2")
        assert code == 0
        _, rows = parse_csv(out)
        assert 0.9 <= float(rows[0]["ratio"]) <= 1.1

    def test_weyl(self, capsys):
        code, out, _ = run_cli(capsys, "weyl", "--p", "1", "--grid-n", "2000", "--k-max", "12", "--L", "10")
        assert code == 0
        meta, rows = parse_csv(out)
        assert len(rows) == 12
        assert float(meta["expected_slope"]) == 1.0


class TestFormats:
    def test_json_round_trip_matches_csv(self, capsys):
        _, out_csv, _ = run_cli(capsys, "profile", "--potential", "logpow:1", "--lambda", "1,2")
        _, out_json, _ = run_cli(capsys, "profile", "--potential", "logpow:1", "--lambda", "1,2", "--format", "json")
        _, rows = parse_csv(out_csv)
        payload = json.loads(out_json)
        assert payload["metadata"]["potential"] == "logpow:1"
        for r_csv, r_json in zip(rows, payload["rows"]):
            for key in payload["columns"]:
                assert float(r_csv[key]) == r_json[key]

    def test_deterministic(self, capsys):
        argv = ["resolvent", "--potential", "pow:1", "--lambda", "2", "--seed", "3"]
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        code, out, _ = run_cli(capsys, "semigroup", "--potential", "pow:1", "--t", "1,2", "--format", "json", "--output", str(path))
        assert code == 0 and out == ""
        assert len(json.loads(path.read_text())["rows"]) == 2

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"potential": "pow:2", "t_list": [2.0], "output_format": "json"}))
        code, out, _ = run_cli(capsys, "semigroup", "--config", str(cfg))
        assert code == 0
        assert json.loads(out)["rows"][0]["log_norm"] == pytest.approx(-2.0 / 3.0, abs=1e-12)

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"potential": "pow:2", "t_list": [2.0]}))
        _, out, _ = run_cli(capsys, "semigroup", "--config", str(cfg), "--t", "4")
        _, rows = parse_csv(out)
        assert float(rows[0]["t"]) == 4.0

    def test_execute_returns_table(self):
        table = execute(RunConfig(subcommand="semigroup", potential="pow:2", t_list=[2.0]))
        assert table.columns == ["t", "log_norm", "maximizer"]


class TestErrors:
    @pytest.mark.parametrize(
        "argv,kind",
        [
            (["profile", "--potential", "cubic:2", "--lambda", "4"], "potential_spec"),
            (["profile", "--potential", "pow:2", "--lambda", "0.5"], "below_threshold"),
            (["resolvent", "--potential", "pow:2", "--lambda", "40", "--require-numeric"], "overflow_guard"),
            (["semigroup", "--potential", "pow:2", "--t", "-1"], "invalid_value"),
            (["profile", "--potential", "pow:2"], "config"),
            (["levelcurve", "--kind", "real", "--range", "1,10"], "config"),
            (["semigroup", "--potential", "pow:2", "--t", "1", "--output", "/nonexistent/dir/out.csv"], "output"),
        ],
    )
    def test_exit_codes(self, capsys, argv, kind):
        code, out, err = run_cli(capsys, *argv)
        assert code == EXIT_CODES[kind]
        payload = json.loads(err)
        assert payload["error"] == kind and payload["exit_code"] == code

    def test_unknown_config_field(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        code, _, err = run_cli(capsys, "semigroup", "--config", str(cfg))
        assert code == EXIT_CODES["config"]
        assert "bogus" in err

    def test_unknown_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["nonsense"])
        assert exc.value.code == EXIT_CODES["usage"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "genairy", "semigroup", "--potential", "pow:2", "--t", "2", "--format", "json"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert math.isclose(json.loads(proc.stdout)["rows"][0]["log_norm"], -2.0 / 3.0, abs_tol=1e-12)
