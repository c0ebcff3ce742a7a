"""CLI contracts: exit codes, report round-trips, CSV export, suite determinism."""

import csv
import io
import json
from contextlib import redirect_stdout

import numpy as np
import pytest

from bloch_wco import blochspace
from bloch_wco.cli import main
from bloch_wco.engine import SupConfig
from bloch_wco.fixtures import FIXTURES, format_table, run_suite

FAST_SUP = {
    "n_uniform": 3000,
    "n_boundary": 3000,
    "n_shell": 600,
    "refine_iters": 20,
    "min_shell_points": 80,
    "mutations_per_round": 256,
}


def write_config(tmp_path, name="cfg.json", **overrides):
    cfg = {
        "domain": {"kind": "disk", "dim": 1},
        "psi": "1",
        "phi": ["z1"],
        "target": "bloch",
        "checks": ["bounded", "compact", "norm_bounds", "fields"],
        "sup": dict(FAST_SUP),
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run_cli(args):
    out = io.StringIO()
    with redirect_stdout(out):
        code = main(args)
    return code, out.getvalue()


class TestAnalyze:
    def test_identity_report(self, tmp_path):
        path = write_config(tmp_path)
        code, text = run_cli(["analyze", "--config", path])
        assert code == 0
        report = json.loads(text)
        assert report["checks"]["bounded"]["verdict"] == "yes"
        assert report["checks"]["compact"]["verdict"] == "no"
        assert report["checks"]["norm_bounds"]["lower"] == pytest.approx(1.0, abs=1e-6)
        assert report["checks"]["norm_bounds"]["upper"] == pytest.approx(1.0, abs=1e-6)
        assert report["self_map_check"]["pass"] is True
        assert report["engine"]["seed"] == 42
        assert any("sigma" in row for row in report["checks"]["fields"])

    def test_report_round_trips(self, tmp_path):
        path = write_config(tmp_path)
        code, text = run_cli(["analyze", "--config", path])
        assert code == 0
        report = json.loads(text)
        assert json.loads(json.dumps(report)) == report

    def test_out_file(self, tmp_path):
        path = write_config(tmp_path)
        out = tmp_path / "report.json"
        code, _ = run_cli(["analyze", "--config", path, "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["checks"]["bounded"]["verdict"] == "yes"

    def test_seed_override_echoed(self, tmp_path):
        path = write_config(tmp_path, checks=["bounded"])
        code, text = run_cli(["analyze", "--config", path, "--seed", "7"])
        assert code == 0
        assert json.loads(text)["engine"]["seed"] == 7

    def test_env_seed(self, tmp_path, monkeypatch):
        cfg = {
            "domain": {"kind": "disk", "dim": 1},
            "psi": "1",
            "phi": ["z1"],
            "checks": ["bounded"],
            "sup": dict(FAST_SUP),
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        monkeypatch.setenv("BLOCH_WCO_SEED", "99")
        code, text = run_cli(["analyze", "--config", str(path)])
        assert code == 0
        assert json.loads(text)["engine"]["seed"] == 99

    def test_log_weight_report_flags_divergent_psi(self, tmp_path):
        # bounded operator whose weight itself is unbounded
        path = write_config(
            tmp_path,
            domain={"kind": "ball", "dim": 2},
            psi="0.5*plog(1 - hdot((1, 0)))",
            phi=["(1 - z1)/2", "-z2/2"],
            checks=["bounded"],
            sup={},  # needs full refinement depth to certify the divergence
        )
        code, text = run_cli(["analyze", "--config", path])
        assert code == 0
        rep = json.loads(text)
        assert rep["checks"]["bounded"]["verdict"] == "yes"
        assert rep["checks"]["bounded"]["psi_hinf"]["verdict"] == "divergent"

    def test_interior_singular_weight_exits_3(self, tmp_path, capsys):
        path = write_config(tmp_path, psi="1/(z1 - z1)", checks=["bounded"])
        assert main(["analyze", "--config", path]) == 3
        assert "singular" in capsys.readouterr().err

    def test_analyze_deterministic_modulo_timing(self, tmp_path):
        path = write_config(tmp_path, checks=["bounded", "norm_bounds"])
        reports = []
        for _ in range(2):
            code, text = run_cli(["analyze", "--config", path])
            assert code == 0
            rep = json.loads(text)
            rep.pop("timing_seconds")
            reports.append(rep)
        assert reports[0] == reports[1]

    def test_hinf_target(self, tmp_path):
        path = write_config(
            tmp_path,
            domain={"kind": "ball", "dim": 2},
            psi="1",
            phi=["0.9*z1", "0.9*z2"],
            target="hinf",
            checks=["bounded", "compact"],
        )
        code, text = run_cli(["analyze", "--config", path])
        assert code == 0
        rep = json.loads(text)["checks"]["hinf"]
        assert rep["bounded"] == "yes"
        assert rep["norm"] == pytest.approx(float(np.arctanh(0.9)), abs=1e-3)
        assert rep["compact"] == "yes"


    def test_hinf_polydisk_reports_sum_criterion(self, tmp_path):
        # squared weight: the sum criterion decays like gap*log(1/gap), which
        # is decisive at the default shell depth
        path = write_config(
            tmp_path,
            domain={"kind": "polydisk", "dim": 2},
            psi="(1 - z1)^2",
            phi=["(1 + z1)/2", "0"],
            target="hinf",
            checks=["bounded", "compact"],
        )
        code, text = run_cli(["analyze", "--config", path])
        assert code == 0
        rep = json.loads(text)["checks"]["hinf"]
        assert rep["bounded"] == "yes"
        assert rep["norm"] is None
        assert rep["eta_sum"] is not None
        assert rep["compact"] == "yes"

    def test_hinf_polydisk_slow_decay_stays_inconclusive(self, tmp_path):
        # with a first-order weight the innermost shell still carries ~4e-2,
        # and uncertainty is reported rather than collapsed into a verdict
        path = write_config(
            tmp_path,
            domain={"kind": "polydisk", "dim": 2},
            psi="1 - z1",
            phi=["(1 + z1)/2", "0"],
            target="hinf",
            checks=["bounded", "compact"],
        )
        code, text = run_cli(["analyze", "--config", path])
        assert code == 0
        rep = json.loads(text)["checks"]["hinf"]
        assert rep["bounded"] == "yes"
        assert rep["compact"] == "inconclusive"


class TestExitCodes:
    def test_bad_expression_exits_2(self, tmp_path, capsys):
        path = write_config(tmp_path, psi="z9")
        assert main(["analyze", "--config", path]) == 2
        assert "position" in capsys.readouterr().err

    def test_bad_json_exits_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["analyze", "--config", str(path)]) == 2

    def test_missing_file_exits_2(self):
        assert main(["analyze", "--config", "/nonexistent/cfg.json"]) == 2

    def test_wrong_component_count_exits_2(self, tmp_path):
        path = write_config(tmp_path, phi=["z1", "z1"])
        assert main(["analyze", "--config", path]) == 2

    def test_unknown_check_exits_2(self, tmp_path):
        path = write_config(tmp_path, checks=["bounded", "spectrum"])
        assert main(["analyze", "--config", path]) == 2

    def test_empty_checks_exits_2(self, tmp_path):
        path = write_config(tmp_path, checks=[])
        assert main(["analyze", "--config", path]) == 2

    def test_unknown_sup_key_exits_2(self, tmp_path):
        path = write_config(tmp_path, sup={"n_uniform": 100, "threads": 4})
        assert main(["analyze", "--config", path]) == 2

    def test_hinf_rejects_bloch_only_checks(self, tmp_path):
        path = write_config(
            tmp_path,
            domain={"kind": "ball", "dim": 2},
            phi=["z1/2", "z2/2"],
            target="hinf",
            checks=["norm_bounds"],
        )
        assert main(["analyze", "--config", path]) == 2

    def test_unwritable_out_exits_2(self, tmp_path):
        path = write_config(tmp_path, checks=["bounded"])
        assert main(["analyze", "--config", path, "--out", "/nonexistent/dir/report.json"]) == 2

    def test_non_self_map_exits_3(self, tmp_path, capsys):
        path = write_config(tmp_path, phi=["2*z1"])
        assert main(["analyze", "--config", path]) == 3
        assert "self-map" in capsys.readouterr().err

    def test_parse_check_ok(self, capsys):
        assert main(["parse-check", "--expr", "1 - z1", "--dim", "2"]) == 0
        assert capsys.readouterr().out.startswith("ok:")

    def test_parse_check_error(self, capsys):
        assert main(["parse-check", "--expr", "z3", "--dim", "2"]) == 2
        assert "position" in capsys.readouterr().err


class TestFieldsCsv:
    def test_disk_grid(self, tmp_path):
        path = write_config(tmp_path)
        out = tmp_path / "fields.csv"
        code, _ = run_cli(["fields", "--config", path, "--grid", "21", "--out", str(out)])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        xs = np.linspace(-1, 1, 21)
        inside = sum(1 for x in xs for y in xs if np.hypot(x, y) < 1 - 1e-12)
        assert len(rows) == inside
        assert all(float(r["sigma"]) == 0.0 for r in rows)
        assert all(abs(float(r["tau_upper"]) - 1.0) < 1e-9 for r in rows)
        assert "s_disk" in rows[0]

    def test_polydisk_grid_columns(self, tmp_path):
        path = write_config(
            tmp_path,
            domain={"kind": "polydisk", "dim": 2},
            psi="z1*z2",
            phi=["z1/2", "z2/2"],
        )
        out = tmp_path / "fields.csv"
        code, _ = run_cli(["fields", "--config", path, "--grid", "11", "--out", str(out)])
        assert code == 0
        with open(out) as fh:
            header = fh.readline().strip().split(",")
        assert header[:4] == ["re_z1", "im_z1", "re_z2", "im_z2"]
        assert "zc_log" in header and "zc_jac" in header

    def test_grid_too_small_exits_2(self, tmp_path):
        path = write_config(tmp_path)
        assert main(["fields", "--config", path, "--grid", "1", "--out", str(tmp_path / "x.csv")]) == 2

    def test_dim3_exits_2(self, tmp_path):
        path = write_config(
            tmp_path, domain={"kind": "ball", "dim": 3}, phi=["z1", "z2", "z3"]
        )
        assert main(["fields", "--config", path, "--grid", "11", "--out", str(tmp_path / "x.csv")]) == 2


class TestPaperSuite:
    def test_filter_runs_subset(self):
        cfg = SupConfig(**FAST_SUP)
        rows, passed = run_suite("identity_disk", cfg)
        assert passed
        assert all(r.fixture == "identity_disk" for r in rows)

    def test_cli_filter_exit_zero(self):
        code, text = run_cli(["paper-suite", "--filter", "self_map_guard"])
        assert code == 0
        assert "PASS" in text

    def test_suite_table_deterministic(self):
        cfg = SupConfig(**FAST_SUP)
        a = format_table(run_suite("identity_disk", cfg)[0])
        b = format_table(run_suite("identity_disk", cfg)[0])
        assert a.encode() == b.encode()

    def test_decay_tolerance_negative_control(self, monkeypatch):
        # inflating the decay tolerance flips the log fixture to a failure
        monkeypatch.setattr(blochspace, "TOL_DECAY", blochspace.TOL_DECAY * 1e3)
        cfg = SupConfig(**FAST_SUP)
        rows, passed = run_suite("gradient_decay_log_disk", cfg)
        assert not passed

    def test_fixture_names_unique(self):
        names = [name for name, _ in FIXTURES]
        assert len(names) == len(set(names))
