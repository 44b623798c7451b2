"""Command-line driver: exit codes, precedence, golden fixture."""
import json

import pytest

from osbd.cli import golden_report, main


def test_list_prints_registry(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in (f"E{i}" for i in range(1, 9)):
        assert f"{name}  " in out
    assert "desk:" in out


def test_golden_report_all_pass():
    report = golden_report()
    assert set(report) == {"profile", "reflected_value", "geodesic_jumps",
                           "tail_constant"}
    assert all(rec["passed"] for rec in report.values())
    assert report["profile"]["got"] == [0, 1, 3, 4, 5, 6, 8, 9]
    assert report["reflected_value"]["got"] == 9


def test_golden_command_writes_json(tmp_path, capsys):
    assert main(["golden", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
    assert "all checks passed" in out
    body = json.loads((tmp_path / "golden.json").read_text())
    assert all(body[name]["passed"] for name in body)


def test_validate_config_accepts_good_file(tmp_path, capsys):
    path = tmp_path / "ok.ini"
    path.write_text("[run]\nexperiment = E5\n[params]\nreplicas = 1000\n",
                    encoding="utf-8")
    assert main(["validate-config", "--config", str(path)]) == 0
    assert "OK" in capsys.readouterr().out


@pytest.mark.parametrize("body", [
    "[params]\nreplicas = 10\n",               # no experiment named
    "[run]\nexperiment = E5\n[params]\nwidth = 3\n",   # unknown key
    "[run]\nexperiment = E5\n[params]\nt_k2 = 9.0\n",  # not overridable
])
def test_validate_config_rejects(tmp_path, capsys, body):
    path = tmp_path / "bad.ini"
    path.write_text(body, encoding="utf-8")
    assert main(["validate-config", "--config", str(path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_unknown_experiment_is_usage_error(capsys):
    assert main(["run", "E9"]) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_run_flags_override_config_file(tmp_path, capsys):
    path = tmp_path / "run.ini"
    path.write_text("[run]\n"
                    "experiment = E1\n"
                    "seed = 1\n"
                    "[params]\n"
                    "t = 5.0\n"
                    "k = 4\n"
                    "replicas = 40\n",
                    encoding="utf-8")
    out_dir = tmp_path / "out"
    code = main(["run", "E1", "--config", str(path),
                 "--seed", "7", "--out", str(out_dir)])
    assert code == 0
    text = capsys.readouterr().out
    assert "exact_match: PASS" in text
    body = json.loads((out_dir / "summary.json").read_text())
    assert body["config"]["seed"] == 7          # flag beats file
    assert body["config"]["t"] == 5.0           # file param survives
    assert body["passed"] is True


def test_run_failing_check_exits_1(tmp_path, capsys):
    # nothing at |z| >= 50 on either side, so the skew check cannot pass
    code = main(["run", "E5", "--out", str(tmp_path),
                 "--seed", "7", "--threads", "2"] + _tiny_e5(tmp_path))
    assert code == 1
    assert "FAIL" in capsys.readouterr().out
    body = json.loads((tmp_path / "summary.json").read_text())
    assert body["passed"] is False


def _tiny_e5(tmp_path):
    path = tmp_path / "e5.ini"
    path.write_text("[params]\nt = 100.0\nreplicas = 200\nx_values = 50.0\n",
                    encoding="utf-8")
    return ["--config", str(path)]
