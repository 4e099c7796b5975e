"""End-to-end checks of the palasso command line tool.

Usage: test_cli.py PALASSO_BINARY FIT_REPORT_SCHEMA
"""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

BIN = sys.argv[1]
SCHEMA = json.loads(Path(sys.argv[2]).read_text())
failures = []


def run(*args):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)


def check(name, cond, detail=""):
    print(f"{'ok  ' if cond else 'FAIL'} {name} {detail}")
    if not cond:
        failures.append(name)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    data, truth = tmp / "toy.csv", tmp / "truth.csv"
    r = run("simulate", "--n", 300, "--p", 12, "--active", 3, "--coef-scale", 3, "--seed", 4,
            "--out", data, "--truth", truth)
    check("simulate exits 0", r.returncode == 0, r.stderr)

    report = tmp / "fit.json"
    r = run("fit", "--data", data, "--tau", "0.025N", "--holdout", 0, "--out", report)
    check("fit exits 0", r.returncode == 0, r.stderr)
    rep = json.loads(report.read_text())
    try:
        jsonschema.validate(rep, SCHEMA)
        check("report matches schema", True)
    except jsonschema.ValidationError as e:
        check("report matches schema", False, e.message)
    zeros = [c["name"] for c in rep["coefficients"] if c["zero"]]
    check("exact zeros listed", sorted(zeros) == sorted(rep["zero_coefficients"]) and len(zeros) > 0,
          str(rep["zero_coefficients"]))
    check("zero values are exactly zero",
          all(c["value"] == 0.0 for c in rep["coefficients"] if c["zero"]))
    with truth.open() as f:
        true_nz = {row["name"] for row in csv.DictReader(f) if float(row["true_beta"]) != 0.0}
    fitted_nz = {c["name"] for c in rep["coefficients"] if not c["zero"]}
    check("true signals kept", true_nz <= fitted_nz, f"{true_nz} vs {fitted_nz}")

    r = run("fit", "--data", data, "--tau", "1e6N", "--holdout", 0, "--out", report)
    rep = json.loads(report.read_text())
    check("huge tau zeros all", r.returncode == 0 and rep["nonzero_count"] == 0)

    bad = tmp / "bad.csv"
    bad.write_text("x0,y\n1,2\n3,oops\n")
    r = run("fit", "--data", bad)
    check("malformed csv exits 2", r.returncode == 2, f"got {r.returncode}")

    cfg = tmp / "cfg.json"
    cfg.write_text(json.dumps({"optimizer": {"stepsize": 0.1}}))
    r = run("fit", "--data", data, "--config", cfg)
    check("unknown config key exits 1", r.returncode == 1 and "optimizer.stepsize" in r.stderr,
          f"got {r.returncode}")
    r = run("fit", "--data", data, "--no-such-flag")
    check("unknown flag exits 1", r.returncode == 1, f"got {r.returncode}")

    r = run("fit", "--data", data, "--holdout", 0, "--family", "poisson")
    check("poisson on real-valued response exits 2", r.returncode == 2, f"got {r.returncode}")

    path_csv = tmp / "path.csv"
    r = run("path", "--data", data, "--tau-grid", "1N,0.3N,0.1N,0.03N,0.01N", "--median-window", 3,
            "--out", path_csv)
    check("path exits 0", r.returncode == 0, r.stderr)
    with path_csv.open() as f:
        rows = list(csv.DictReader(f))
    check("path has one row per tau", len(rows) == 5)
    check("path marks one selection", sum(row["selected"] == "1" for row in rows) == 1)

    r = run("penalty-profile", "--tau", 1, "--max", 2, "--n", 5)
    check("penalty-profile exits 0", r.returncode == 0 and r.stdout.startswith("abs_beta,lambda_star"))
    r = run("gradcheck", "--instances", 2)
    check("gradcheck passes", r.returncode == 0, r.stderr)

sys.exit(1 if failures else 0)
