import json

import pytest

from flatlab.cli import EXIT_OK, EXIT_REGIME, EXIT_VALIDATION, main


def test_closed_form(capsys):
    assert main(["closed-form", "--dim", "2"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["computed"]["S"] == pytest.approx(-3.0)
    assert out["computed"]["J"] == pytest.approx(out["exact"]["J"])


def test_closed_form_bad_xi(capsys):
    assert main(["closed-form", "--dim", "2", "--xi", "1", "0"]) == EXIT_VALIDATION


def _write(tmp_path, body):
    p = tmp_path / "cfg.toml"
    p.write_text(body)
    return str(p)


def test_sweep_ok(tmp_path, capsys):
    csv = tmp_path / "out.csv"
    cfg = _write(
        tmp_path,
        f'name = "t"\nquantities = ["MK"]\nsamples = 1024\n[grid]\nlog_d = [-60]\n'
        f'[output]\ncsv = "{csv}"\n',
    )
    assert main(["sweep", "--config", cfg]) == EXIT_OK
    assert csv.read_text().startswith("row,log_d")


def test_sweep_regime_failure(tmp_path):
    cfg = _write(tmp_path, 'quantities = ["MK"]\nsamples = 512\n[grid]\nlog_d = [-20]\n')
    assert main(["sweep", "--config", cfg]) == EXIT_REGIME


def test_sweep_bad_config(tmp_path):
    cfg = _write(tmp_path, "[grid]\nlog_d = [-20, -10]\n")
    assert main(["sweep", "--config", cfg]) == EXIT_VALIDATION


def test_certify(tmp_path, capsys):
    cfg = _write(tmp_path, "samples = 1024\n[grid]\nlog_d = [-100]\nepsilon = [0.2]\ndelta = [0.2]\n")
    assert main(["certify", "--config", cfg]) == EXIT_OK
    line = json.loads(capsys.readouterr().out.strip())
    assert line["frac_inner"] == 1.0 and line["passed"]
    cfg = _write(tmp_path, "samples = 1024\n[grid]\nlog_d = [-2.3]\nepsilon = [0.2]\ndelta = [0.2]\n")
    assert main(["certify", "--config", cfg]) == EXIT_REGIME


def test_verify_fast(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "--level", "fast", "--json", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["passed"] and report["level"] == "fast"
    assert "[PASS]" in capsys.readouterr().err
