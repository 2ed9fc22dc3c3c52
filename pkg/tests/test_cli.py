import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from levywalks.cli import EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OK, EXIT_THRESHOLD, GridSpec, main, read_table
from levywalks.densities import radial_cdf
from levywalks.errors import DomainError
from levywalks.model import make_params


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def density_csv(tmp_path, capsys, *extra, name="t.csv"):
    path = tmp_path / name
    code, _, err = run(["density", "--kind", "standard", "--alpha", "0.3", "--dim", "3",
                        "--grid", "0.01:0.99:99", "-o", str(path), *extra], capsys)
    assert code == EXIT_OK, err
    return path


def test_density_table(tmp_path, capsys):
    path = density_csv(tmp_path, capsys)
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    rows = list(csv.DictReader(raw.decode().splitlines()))
    assert raw.decode().splitlines()[0] == "r,phi_r,route,kind,alpha,dim"
    assert len(rows) == 99
    assert all(float(r["phi_r"]) >= 0 for r in rows)
    assert rows[0]["alpha"] == "0.3" and rows[0]["kind"] == "standard"


def test_density_csv_round_trip(tmp_path, capsys):
    path = density_csv(tmp_path, capsys)
    table = read_table(path)
    for row, y in zip(csv.DictReader(path.read_text().splitlines()), table.values):
        assert format(y, ".17g") == row["phi_r"]
    # 17 significant digits reproduce the binary value exactly
    params = make_params("standard", 0.3, 3)
    from levywalks.densities import phi_r
    assert np.array_equal(table.values, phi_r(params, table.grid))


def test_density_routes_agree(tmp_path, capsys):
    hyper = read_table(density_csv(tmp_path, capsys, "--route", "hyper", name="h.csv"))
    elem = read_table(density_csv(tmp_path, capsys, "--route", "elementary", name="e.csv"))
    assert np.max(np.abs(hyper.values - elem.values)) <= 1e-8


def test_density_axis_json(capsys):
    code, out, _ = run(["density", "--kind", "overshoot", "--alpha", "0.6", "--dim", "4", "--mode", "axis",
                        "--grid", "0:3:7", "--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schemaVersion"] == 1 and doc["mode"] == "axis" and len(doc["values"]) == 7
    assert doc["grid"][0] == doc["clampMargin"]


@pytest.mark.parametrize("argv", [
    ["density", "--kind", "standard", "--alpha", "0.3", "--dim", "1"],
    ["density", "--kind", "standard", "--alpha", "1.3", "--dim", "3"],
    ["density", "--kind", "sideways", "--alpha", "0.3", "--dim", "3"],
    ["density", "--kind", "standard", "--alpha", "0.3", "--dim", "3", "--grid", "0:2:5"],
    ["density", "--kind", "standard", "--alpha", "0.3", "--dim", "3", "--grid", "0:1"],
    ["density", "--kind", "standard", "--alpha", "0.3", "--dim", "4", "--route", "elementary"],
    ["simulate", "--kind", "standard", "--alpha", "0.3", "--dim", "3", "--scale", "5", "--samples", "10"],
    ["compare", "--kind", "standard"],
    ["frobnicate"],
])
def test_domain_errors_exit_2(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    assert code == EXIT_DOMAIN


def test_numeric_failure_exit_3(capsys, monkeypatch):
    import levywalks.densities as dens

    # clamped grids keep every route finite, so the failure is injected
    real = dens.phi1
    monkeypatch.setattr(dens, "phi1", lambda p, x, route="hyper": np.where(np.asarray(x) > 0.3, np.nan,
                                                                             real(p, x, route)))
    code, _, err = run(["density", "--kind", "overshoot", "--alpha", "0.6", "--dim", "3", "--mode", "axis",
                        "--grid", "0:0.5:3"], capsys)
    assert code == EXIT_NUMERIC
    assert "first failing abscissa 0.5" in err


def test_grid_parsing():
    g = GridSpec.parse("0:1:5")
    assert g.values().tolist() == [0, 0.25, 0.5, 0.75, 1]
    for bad in ("1:0:5", "0:1:1", "a:b:c", "-1:1:3"):
        with pytest.raises(DomainError):
            GridSpec.parse(bad)


SIM = ["simulate", "--dim", "3", "--alpha", "0.6", "--scale", "1000", "--samples", "20000", "--seed", "42"]


def test_simulate_deterministic(capsys):
    _, a, _ = run(SIM + ["--kind", "standard", "--threads", "1"], capsys)
    _, b, _ = run(SIM + ["--kind", "standard", "--threads", "4"], capsys)
    da, db = json.loads(a), json.loads(b)
    assert da.pop("runtime")["threads"] == 1
    db.pop("runtime")
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)
    assert da["schemaVersion"] == 1 and da["maxRadius"] <= 1.0 and da["seed"] == 42


def test_simulate_overshoot_fraction(capsys):
    code, out, _ = run(SIM + ["--kind", "overshoot", "--scale", "100000"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK
    assert abs(doc["fractionAboveOne"] - doc["analyticFractionAboveOne"]) <= 3 * doc["fractionAboveOneStdErr"]
    assert doc["analyticFractionAboveOne"] == pytest.approx(
        1 - radial_cdf(make_params("overshoot", 0.6, 3), 1 + 1e-6), rel=1e-12)


def test_simulate_csv(tmp_path, capsys):
    path = tmp_path / "ens.csv"
    run(["simulate", "--kind", "undershoot", "--dim", "2", "--alpha", "0.6", "--scale", "50",
         "--samples", "10", "--format", "csv", "-o", str(path)], capsys)
    lines = path.read_text().splitlines()
    assert lines[0] == "radius,first_coord,kind,alpha,dim,scale,seed" and len(lines) == 11


def _files(tmp_path, capsys, table_alpha, ens_alpha):
    table = tmp_path / "table.csv"
    ens = tmp_path / "ens.json"
    run(["density", "--kind", "undershoot", "--alpha", str(table_alpha), "--dim", "2",
         "--grid", "0:1:20", "-o", str(table)], capsys)
    run(["simulate", "--kind", "undershoot", "--alpha", str(ens_alpha), "--dim", "2", "--scale", "10000",
         "--samples", "20000", "--seed", "1", "--include-samples", "-o", str(ens)], capsys)
    return table, ens


def test_compare_matched(tmp_path, capsys):
    table, ens = _files(tmp_path, capsys, 0.6, 0.6)
    code, out, _ = run(["compare", "--table", str(table), "--ensemble", str(ens)], capsys)
    report = json.loads(out)
    assert code == EXIT_OK, report
    assert report["passed"] and report["parameterMismatch"] == []


def test_compare_mismatched_alpha(tmp_path, capsys):
    table, ens = _files(tmp_path, capsys, 0.3, 0.9)
    code, out, _ = run(["compare", "--table", str(table), "--ensemble", str(ens)], capsys)
    report = json.loads(out)
    assert code == EXIT_THRESHOLD
    assert report["checks"]["ksRadius"]["value"] > 5 * report["checks"]["ksRadius"]["threshold"]
    assert report["parameterMismatch"] == ["alpha"]


def test_compare_missing_file(tmp_path, capsys):
    code, _, err = run(["compare", "--table", str(tmp_path / "nope.csv"), "--ensemble", str(tmp_path / "x.csv")],
                       capsys)
    assert code == EXIT_DOMAIN and "nope.csv" in err


def test_compare_from_parameters(capsys):
    code, out, _ = run(["compare", "--kind", "undershoot", "--alpha", "0.6", "--dim", "3", "--scale", "10000",
                        "--samples", "20000", "--seed", "5"], capsys)
    report = json.loads(out)
    assert code == EXIT_OK, report
    assert report["checks"]["routeAgreement"]["value"] <= 1e-8


def test_selftest(capsys):
    code, out, _ = run(["selftest"], capsys)
    assert code == EXIT_OK
    assert out.count("PASS") == 8 and "FAIL" not in out


def test_selftest_fault_injection(capsys):
    code, out, _ = run(["selftest", "--inject-fault", "gamma-constant", "--format", "json"], capsys)
    assert code == EXIT_THRESHOLD
    failed = {r["name"] for r in json.loads(out)["results"] if not r["passed"]}
    assert failed == {"closed_form_d3_standard", "closed_form_d3_undershoot",
                      "closed_form_d3_overshoot_inner", "closed_form_d3_overshoot_outer"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "levywalks", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "selftest" in proc.stdout
