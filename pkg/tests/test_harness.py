import math

import numpy as np
import pytest

from flatlab.config import load_config, parse_config
from flatlab.errors import ConfigError
from flatlab.geometry import ConeCurve, HartogsFlat
from flatlab.harness import (
    COLUMNS,
    ladder_tightening,
    parameter_for_depth,
    run_sweep,
    trend,
)
from flatlab.profile import Profile


def bracket_cfg(**over):
    data = {
        "name": "unit",
        "domain": {"kind": "hartogs", "n": 1, "m": 1},
        "curve": {"schedule": "normal"},
        "grid": {
            "log_d": [-60, -100],
            "epsilon": [0.1, 0.3],
            "delta": [0.05, 0.2],
            "xi": [["1", "0"], ["0", "1"]],
        },
        "quantities": ["MK", "normalizers"],
        "samples": 2048,
    }
    for key, val in over.items():
        data[key] = val
    return parse_config(data)


def test_sweep_rows_and_columns():
    res = run_sweep(bracket_cfg(), write=False)
    assert len(res.rows) == 2 * 2 * 2 * 2
    assert all(list(r) == COLUMNS for r in res.rows)
    assert not any(r["error"] for r in res.rows)
    assert all(r["MK_contains_one"] for r in res.rows)
    assert res.summary["bracket_contains_one"] is True
    header = res.csv_text().split("\n")[0]
    assert header == ",".join(COLUMNS)


def test_sweep_deterministic_csv(tmp_path):
    texts = []
    for name in ("a", "b"):
        cfg = bracket_cfg(output={"csv": str(tmp_path / f"{name}.csv")})
        run_sweep(cfg)
        texts.append((tmp_path / f"{name}.csv").read_bytes())
    assert texts[0] == texts[1]


def test_workers_do_not_change_output():
    one = run_sweep(bracket_cfg(), write=False).csv_text()
    many = run_sweep(bracket_cfg(workers=3), write=False).csv_text()
    assert one == many


def test_normalizer_matches_closed_form():
    res = run_sweep(bracket_cfg(quantities=["normalizers"]), write=False)
    for r in res.rows:
        assert r["dstar"] == pytest.approx(math.sqrt(-1 / r["log_d"]), rel=1e-10)
        assert r["dstar_closed_form_ratio"] == pytest.approx(1.0, abs=1e-10)


def test_regime_error_keeps_row():
    cfg = bracket_cfg(grid={"log_d": [-20], "epsilon": [0.1], "delta": [0.2], "xi": [["1", "0"]]})
    (row,) = run_sweep(cfg, write=False).rows
    assert row["certified"] and "RegimeError" in row["error"]
    assert row["dstar"] is not None and row["MK_lower_ratio"] is None


def test_uncertified_row_reports_error():
    cfg = bracket_cfg(grid={"log_d": [-20], "epsilon": [0.1], "delta": [0.05], "xi": [["1", "0"]]})
    (row,) = run_sweep(cfg, write=False).rows
    assert row["certified"] is False and row["frac_inner"] < 1
    assert row["error"].startswith("CertificationError")


def test_product_sweep_exact():
    cfg = parse_config(
        {
            "domain": {"kind": "product", "n": 2},
            "grid": {"log_d": [0.0], "xi": [["1", "0", "0"], ["0.3", "0.4j", "0.1"]]},
            "quantities": ["J", "R", "S", "MF", "MK"],
        }
    )
    for r in run_sweep(cfg, write=False).rows:
        assert r["J_ratio"] == pytest.approx(1, abs=1e-12)
        assert r["R_value"] == pytest.approx(-1, abs=1e-12)
        assert r["S_value"] == pytest.approx(-3, abs=1e-12)
        assert r["MF_ratio"] == pytest.approx(1, abs=1e-12)
        assert r["MK_lower_ratio"] == r["MK_upper_ratio"] == 1.0


def test_parameter_for_depth():
    dom = HartogsFlat(Profile(1), n=1)
    assert parameter_for_depth(dom, ConeCurve(schedule="normal"), -30) == pytest.approx(math.exp(-30))
    from flatlab.frames import build_frame

    curve = ConeCurve(alpha=1.0, N=2.0, schedule="default")
    t = parameter_for_depth(dom, curve, -40.0)
    assert build_frame(dom, curve, t).log_d == pytest.approx(-40.0, abs=1e-9)


def test_trend():
    assert trend([1.3, 1.2, 1.1, 1.05], 1.0)["ok"]
    assert trend([1.5, 1.015, 1.019, 1.012], 1.0)["ok"]
    assert not trend([1.0, 1.1, 1.2, 1.3], 1.0)["ok"]


def test_ladder():
    cfg = bracket_cfg(
        grid={
            "log_d": [-60, -100, -200],
            "epsilon": [0.1, 0.3],
            "delta": [0.05, 0.2],
            "xi": [["1", "0"]],
            "ladder": [[0.3, 0.2, -60], [0.1, 0.05, -200]],
        }
    )
    rows = run_sweep(cfg, write=False).rows
    assert ladder_tightening(cfg, rows)


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"grid": {"log_d": [-20, -10]}}, "decreasing"),
        ({"grid": {"log_d": [-20], "epsilon": [1.5]}}, "epsilon"),
        ({"grid": {"log_d": [-20], "xi": [["1"]]}}, "entries"),
        ({"grid": {"log_d": [-20], "xi": [["0", "0"]]}}, "nonzero"),
        ({"grid": {"log_d": [-20]}, "quantities": ["Q"]}, "unknown"),
        ({"grid": {"log_d": [-20], "xi": [["one", "0"]]}}, "complex"),
        ({"domain": {"kind": "torus"}, "grid": {"log_d": [-20]}}, "domain.kind"),
        ({"grid": {"log_d": [-20], "ladder": [[0.5, 0.05, -20]]}}, "ladder"),
        ({"grid": {"log_d": [-20]}, "engine": {"dmax": -1}}, "dmax"),
        ({}, "grid"),
    ],
)
def test_config_validation(patch, message):
    data = {"domain": {"kind": "hartogs"}}
    data.update(patch)
    with pytest.raises(ConfigError, match=message):
        parse_config(data)


def test_load_config(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('name = "x"\n[grid]\nlog_d = [-40]\nxi = [["1", "0.5j"]]\n')
    cfg = load_config(path)
    assert cfg.name == "x" and cfg.xi == ((1 + 0j, 0.5j),)
    path.write_text("[grid\n")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
