import json
import math

import numpy as np
import pytest

from goursat_spde.cli import main
from goursat_spde.io import read_columns_csv, read_field_csv


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out


def test_solve_linear_exact(tmp_path, capsys):
    out = tmp_path / "solve"
    code, _ = _run(capsys, "solve", "--grid", "100", "--domain", "2", "--source", "affine:alpha=1",
                   "--bc", "linear-exact:c1=1,c2=0,alpha=1", "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "completed"
    assert summary["value_at_corner"] == pytest.approx(53.290, abs=5e-3)
    field, meta = read_field_csv(str(out / "field.csv"))
    assert field.values[-1, -1] == summary["value_at_corner"]
    assert meta["seed"] == 0
    assert (out / "config.ini").exists()


def test_config_file_then_flag_override(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[grid]\nn_x = 20\nn_t = 20\n[source]\nname = affine\nalpha = -1\n[boundary]\nkind = constant\nvalue = 1\n")
    code, _ = _run(capsys, "solve", "--config", str(ini), "--grid", "10,5", "--out", str(tmp_path / "o"))
    assert code == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["grid"]["n_x"] == 10 and summary["grid"]["n_t"] == 5
    assert summary["config"]["source_params"] == {"alpha": -1.0}


def test_singular_run_reports_site(tmp_path, capsys):
    out = tmp_path / "exp"
    code, _ = _run(capsys, "solve", "--grid", "200", "--domain", "5", "--source", "exponential",
                   "--bc", "1", "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "singular"
    assert summary["value_at_corner"] is None
    assert "nan" in (out / "field.csv").read_text()


def test_single_noiseless_trial_matches_solve(tmp_path, capsys):
    common = ["--grid", "30", "--domain", "3", "--source", "sine-gordon", "--bc", "0.5"]
    _run(capsys, "solve", *common, "--out", str(tmp_path / "s"))
    _run(capsys, "ensemble", *common, "--trials", "1", "--out", str(tmp_path / "e"))
    body = lambda p: [ln for ln in p.read_text().splitlines() if not ln.startswith("#")]  # noqa: E731
    assert body(tmp_path / "s" / "field.csv") == body(tmp_path / "e" / "mean.csv")


def test_ensemble_csvs_identical_across_threads(tmp_path, capsys):
    blobs = []
    for th in (1, 4, 8):
        out = tmp_path / f"t{th}"
        code, _ = _run(capsys, "ensemble", "--grid", "40", "--domain", "2", "--source", "affine:alpha=-1",
                       "--bc", "1", "--sigma", "0.3", "--trials", "21", "--seed", "4", "--threads", str(th),
                       "--out", str(out))
        assert code == 0
        blobs.append(((out / "mean.csv").read_bytes(), (out / "sd.csv").read_bytes()))
    assert all(b == blobs[0] for b in blobs)


def test_ensemble_slices(tmp_path, capsys):
    out = tmp_path / "sl"
    code, _ = _run(capsys, "ensemble", "--grid", "50", "--domain", "5", "--bc", "0.1", "--source", "quadratic",
                   "--sigma", "0.05", "--trials", "10", "--record", "slices:t=5,x=2.5;points=5:5", "--out", str(out))
    assert code == 0
    cols = read_columns_csv(str(out / "slice_t5.csv"))
    assert len(cols["x"]) == 51
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_completed"] + summary["n_singular"] == 10
    assert summary["points"][0]["count"] <= summary["n_completed"]
    assert not (out / "mean.csv").exists()


def test_sheet_command(tmp_path, capsys):
    out = tmp_path / "sheet"
    code, _ = _run(capsys, "sheet", "--grid", "20", "--domain", "1", "--sigma", "3", "--trials", "400",
                   "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exact_sd_at_corner"] == 3.0
    assert summary["points"][0]["sd"] == pytest.approx(3.0, rel=0.15)


def test_exact_tables(tmp_path, capsys):
    code, _ = _run(capsys, "exact", "--kind", "linear", "--c1", "0.5", "--c2", "3", "--alpha", "-2",
                   "--out", str(tmp_path / "lin"))
    assert code == 0
    field, _ = read_field_csv(str(tmp_path / "lin" / "exact.csv"))
    assert field.values[-1, -1] == pytest.approx(3.5 * math.exp(-1), rel=1e-14)
    code, _ = _run(capsys, "exact", "--kind", "kink", "--u", "0.3", "--grid", "10", "--domain", "6",
                   "--x-min", "-6", "--out", str(tmp_path / "k"))
    assert code == 0
    assert json.loads((tmp_path / "k" / "exact.json").read_text())["max"] < 2 * math.pi
    code, _ = _run(capsys, "exact", "--kind", "breather", "--omega", "1.5", "--out", str(tmp_path / "b"))
    assert code == 2


def test_peaks_on_wave_slice(tmp_path, capsys):
    code, out = _run(capsys, "peaks", "--grid", "500", "--domain", "40", "--source", "affine:alpha=-1",
                     "--bc", "1", "--threshold", "0", "--out", str(tmp_path / "pk"))
    assert code == 0
    result = json.loads(out.out)
    assert result["n_peaks"] == 12
    assert 0 < result["indicator_fraction"] < 1


def test_peaks_from_field_file(tmp_path, capsys):
    _run(capsys, "solve", "--grid", "500", "--domain", "40", "--source", "affine:alpha=-1", "--bc", "1",
         "--out", str(tmp_path / "s"))
    code, out = _run(capsys, "peaks", "--field", str(tmp_path / "s" / "field.csv"))
    assert code == 0 and json.loads(out.out)["n_peaks"] == 12


@pytest.mark.parametrize("argv", [
    ["solve", "--grid", "0"],
    ["solve", "--source", "quartic"],
    ["solve", "--sigma", "-1"],
    ["solve", "--config", "/nonexistent/run.ini"],
    ["ensemble", "--trials", "0"],
])
def test_bad_input_exits_2(argv, tmp_path, capsys):
    code, out = _run(capsys, *argv, "--out", str(tmp_path / "x"))
    assert code == 2
    assert "error" in out.err


def test_validate(capsys):
    code, out = _run(capsys, "validate")
    assert code == 0
    assert out.out.count("[PASS]") == 5


def test_validate_negative_control(capsys):
    code, out = _run(capsys, "validate", "--perturb")
    assert code == 1
    assert "[FAIL]" in out.out
