import json
import math
from pathlib import Path

import numpy as np
import pytest

from spectra_inv import cli
from spectra_inv.acceptance import CriterionResult


def write_config(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def test_parse_config_applies_defaults(tmp_path):
    p = write_config(tmp_path, {"potential": {"preset": "zero", "params": []}})
    cfg = cli.parse_config(p, command="eig")
    assert cfg.grid_n == 2000
    assert cfg.alpha == 0.0
    assert cfg.k_max == 5
    assert cfg.out_dir == "out"


def test_parse_config_rejects_unknown_key(tmp_path):
    p = write_config(
        tmp_path, {"potential": {"preset": "zero", "params": []}, "alpha2": 1.0}
    )
    with pytest.raises(cli.ConfigError, match="alpha2"):
        cli.parse_config(p, command="eig")


def test_parse_config_rejects_missing_required(tmp_path):
    p = write_config(tmp_path, {"potential": {"preset": "zero", "params": []}})
    with pytest.raises(cli.ConfigError, match="missing required"):
        cli.parse_config(p, command="invert")


def test_parse_config_rejects_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"potential": ')
    with pytest.raises(cli.ConfigError, match="line"):
        cli.parse_config(p, command="eig")


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(cli.ConfigError, match="not found"):
        cli.parse_config(tmp_path / "absent.json", command="eig")


def test_parse_config_names_missing_csv(tmp_path):
    p = write_config(tmp_path, {"potential": {"csv": str(tmp_path / "nope.csv")}})
    with pytest.raises(cli.ConfigError, match="nope.csv"):
        cli.parse_config(p, command="eig")


def test_parse_config_command_mismatch(tmp_path):
    p = write_config(
        tmp_path, {"command": "eig", "potential": {"preset": "zero", "params": []}}
    )
    with pytest.raises(cli.ConfigError, match="command"):
        cli.parse_config(p, command="invert")


def test_parse_config_validates_fields(tmp_path):
    base = {"potential": {"preset": "zero", "params": []}, "k": 1, "lambda": 1.0}
    p = write_config(tmp_path, {**base, "delta": 3})
    with pytest.raises(cli.ConfigError, match="delta"):
        cli.parse_config(p, command="solve-np")
    p = write_config(tmp_path, {"potential": {"preset": "zero", "params": []}, "grid_n": 8})
    with pytest.raises(cli.ConfigError, match="grid_n"):
        cli.parse_config(p, command="eig")
    p = write_config(
        tmp_path, {"potential": {"preset": "zero", "params": []}, "lambda_grid": []}
    )
    with pytest.raises(cli.ConfigError, match="lambda_grid"):
        cli.parse_config(p, command="nodal-scan")


def test_main_exit_code_two_on_config_error(tmp_path, capsys):
    p = write_config(
        tmp_path, {"potential": {"preset": "zero", "params": []}, "bogus": 1}
    )
    rc = cli.main(["eig", "--config", str(p)])
    assert rc == 2
    assert "bogus" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# commands (coarser grids keep these fast; ~1e-6 accuracy is plenty here)
# ---------------------------------------------------------------------------


def test_eig_free_operator(tmp_path):
    p = write_config(
        tmp_path,
        {"potential": {"preset": "zero", "params": []}, "k_max": 5, "grid_n": 400},
    )
    rc = cli.main(["eig", "--config", str(p), "--out", str(tmp_path / "out")])
    assert rc == 0
    rows = (tmp_path / "out" / "spectrum.csv").read_text().strip().splitlines()
    assert rows[0] == "k,lambda"
    lams = [float(r.split(",")[1]) for r in rows[1:]]
    assert np.allclose(lams, [1, 4, 9, 16, 25], atol=1e-6)
    for k in range(1, 6):
        assert (tmp_path / "out" / f"phi_{k}.csv").exists()


def test_eig_deterministic_bytes(tmp_path):
    p = write_config(
        tmp_path,
        {
            "potential": {"preset": "random_fourier", "params": [3.0, 6]},
            "seed": 11,
            "k_max": 3,
            "grid_n": 400,
        },
    )
    cli.main(["eig", "--config", str(p), "--out", str(tmp_path / "a")])
    cli.main(["eig", "--config", str(p), "--out", str(tmp_path / "b")])
    for name in ("spectrum.csv", "phi_1.csv", "phi_2.csv", "phi_3.csv", "eig.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_solve_np_found_and_not_found(tmp_path):
    base = {
        "potential": {"preset": "zero", "params": []},
        "k": 1,
        "grid_n": 400,
    }
    p = write_config(tmp_path, {**base, "lambda": 2.0, "delta": -1})
    rc = cli.main(["solve-np", "--config", str(p), "--out", str(tmp_path / "ok")])
    assert rc == 0
    payload = json.loads((tmp_path / "ok" / "solution.json").read_text())
    assert payload["found"] is True
    assert (tmp_path / "ok" / "u_hat.csv").exists()

    p = write_config(tmp_path, {**base, "lambda": 2.0, "delta": 1}, name="nf.json")
    rc = cli.main(["solve-np", "--config", str(p), "--out", str(tmp_path / "nf")])
    assert rc == 1
    payload = json.loads((tmp_path / "nf" / "solution.json").read_text())
    assert payload["found"] is False


def test_invert_trivial(tmp_path):
    p = write_config(
        tmp_path,
        {
            "potential": {"preset": "zero", "params": []},
            "k": 1,
            "lambda": 1.0,
            "grid_n": 400,
        },
    )
    rc = cli.main(["invert", "--config", str(p), "--out", str(tmp_path / "out")])
    assert rc == 0
    payload = json.loads((tmp_path / "out" / "invert.json").read_text())
    assert payload["explicit"]["distance"] <= 1e-10
    assert payload["direct"]["distance"] <= 1e-10
    assert "optimality_residual_explicit" not in payload


def test_invert_and_round_trip_through_eig(tmp_path):
    p = write_config(
        tmp_path,
        {
            "potential": {"preset": "zero", "params": []},
            "k": 1,
            "lambda": 2.0,
            "grid_n": 400,
        },
    )
    rc = cli.main(["invert", "--config", str(p), "--out", str(tmp_path / "out")])
    assert rc == 0
    payload = json.loads((tmp_path / "out" / "invert.json").read_text())
    assert payload["optimality_residual_explicit"] <= 1e-6
    assert payload["explicit"]["diagnostics"]["feasibility"] <= 1e-6

    # feed the written minimizer back through the forward command
    q_hat_csv = tmp_path / "out" / "explicit_q_hat.csv"
    p2 = write_config(
        tmp_path,
        {"potential": {"csv": str(q_hat_csv)}, "k_max": 1, "grid_n": 400},
        name="back.json",
    )
    rc = cli.main(["eig", "--config", str(p2), "--out", str(tmp_path / "back")])
    assert rc == 0
    eig_payload = json.loads((tmp_path / "back" / "eig.json").read_text())
    assert abs(eig_payload["eigenvalues"][0] - 2.0) <= 1e-6


def test_nodal_scan(tmp_path):
    p = write_config(
        tmp_path,
        {
            "potential": {"preset": "zero", "params": []},
            "lambda": 5.0,
            "l_max": 4,
            "grid_n": 400,
        },
    )
    rc = cli.main(["nodal-scan", "--config", str(p), "--out", str(tmp_path / "out")])
    assert rc == 0
    payload = json.loads((tmp_path / "out" / "nodal_scan.json").read_text())
    found = {tuple(x) for x in payload["levels"][0]["found_node_counts"]}
    assert found == {(-1, 0), (-1, 1), (1, 2), (1, 3)}
    rows = (tmp_path / "out" / "multiplicity.csv").read_text().strip().splitlines()
    assert len(rows) == 5  # header + four solutions


def test_nodal_scan_rejects_spectral_level(tmp_path):
    p = write_config(
        tmp_path,
        {
            "potential": {"preset": "zero", "params": []},
            "lambda": 4.0,
            "grid_n": 400,
        },
    )
    rc = cli.main(["nodal-scan", "--config", str(p), "--out", str(tmp_path / "out")])
    assert rc == 1


def test_check_report_wiring(tmp_path, monkeypatch):
    fake = [
        CriterionResult("01 something", True, {"x": 1.0}),
        CriterionResult("02 other", True, {}),
    ]
    monkeypatch.setattr(cli.acceptance, "run_all", lambda grid_n: fake)
    p = write_config(tmp_path, {})
    rc = cli.main(["check", "--config", str(p), "--out", str(tmp_path / "out")])
    assert rc == 0
    payload = json.loads((tmp_path / "out" / "check_report.json").read_text())
    assert payload["all_passed"] is True
    assert len(payload["criteria"]) == 2

    fake[1] = CriterionResult("02 other", False, {})
    rc = cli.main(["check", "--config", str(p), "--out", str(tmp_path / "out2")])
    assert rc == 1
