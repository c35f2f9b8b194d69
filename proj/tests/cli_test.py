#!/usr/bin/env python3
"""End-to-end checks of the chiplattice executable: exit codes, output formats, schemas."""

import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

BIN = sys.argv[1]
ROOT = Path(sys.argv[2])
SCHEMAS = ROOT / "schemas"
ENV = dict(os.environ, CHIPLATTICE_TIMESTAMP="2000-01-01T00:00:00Z")

# Small enough to run every command in a few seconds.
SMALL = {
    "dynamics": {"N": 40, "hold_ms": 1.0, "heat_N": 20, "heat_steps": 5, "heat_hold_ms": 1.0},
    "analysis": {
        "phase_trials": 5,
        "potential": {
            "x": {"min_lambda": -1.0, "max_lambda": 1.0, "count": 5},
            "y": {"min_lambda": 0.0, "max_lambda": 0.0, "count": 1},
            "z": {"min_lambda": 0.0, "max_lambda": 1.0, "count": 4},
        },
    },
}

failures = []
tmp = Path(tempfile.mkdtemp(prefix="chiplattice_cli_"))


def config(name, content):
    p = tmp / f"{name}.json"
    p.write_text(json.dumps(content))
    return str(p)


def run(*args):
    return subprocess.run([BIN, *args], capture_output=True, env=ENV)


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    if not ok:
        failures.append(name)


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


small = config("small", SMALL)

r = run("--help")
text = r.stdout.decode()
check("help", r.returncode == 0 and "Exit codes" in text and "13  unknown method" in text)

commands = ["potential", "analyze", "compare", "phase-scan", "misalign", "heat-scan", "capture", "drsc"]
for cmd in commands:
    r = run(cmd, "--config", small, "--format", "json", "--grid", "6", "--seed", "3")
    if r.returncode != 0:
        check(f"{cmd} json", False, r.stderr.decode())
        continue
    doc = json.loads(r.stdout)
    try:
        jsonschema.validate(doc, schema("envelope"))
        jsonschema.validate(doc["payload"], schema(cmd))
        check(f"{cmd} json schema", doc["command"] == cmd)
    except jsonschema.ValidationError as e:
        check(f"{cmd} json schema", False, e.message)
    again = run(cmd, "--config", small, "--format", "json", "--grid", "6", "--seed", "3")
    check(f"{cmd} rerun byte-identical", again.stdout == r.stdout)

r = run("capture", "--config", small, "--seed", "3")
s = run("capture", "--config", small, "--seed", "4")
check("seed changes dynamics", r.returncode == 0 and json.loads(r.stdout)["config"]["dynamics"]["seed"] == 3
      and r.stdout != s.stdout)

for cmd in ["potential", "misalign", "heat-scan"]:
    r = run(cmd, "--config", small, "--format", "csv")
    lines = r.stdout.decode().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    check(f"{cmd} csv", r.returncode == 0 and any(l.startswith("# units=") for l in meta)
          and any(l.startswith("# config_hash=") for l in meta) and len(body) >= 2)
    if cmd == "potential":
        check("potential csv rows", len(body) == 1 + 5 * 1 * 4, f"{len(body)} lines")
        check("potential csv header", body[0] == "x_m,y_m,z_m,U_j,U_uk")

r = run("potential", "--config", small, "--grid", "1", "--format", "json")
check("one-point grid", r.returncode == 0 and len(json.loads(r.stdout)["payload"]["values_j"]) == 1)

out = tmp / "analyze.json"
r = run("analyze", "--config", small, "--out", str(out))
check("--out writes file", r.returncode == 0 and r.stdout == b"" and json.loads(out.read_text())["command"] == "analyze")


def expect_error(name, code, *args):
    r = run(*args)
    ok = r.returncode == code
    try:
        err = json.loads(r.stderr.decode().strip().splitlines()[-1])
        jsonschema.validate(err, schema("error"))
        ok = ok and err["error"]["exit_code"] == code
    except (ValueError, IndexError, jsonschema.ValidationError):
        ok = False
    check(name, ok, f"exit {r.returncode}")


expect_error("zero intensity -> empty_result", 5, "analyze", "--config",
             config("zero", {"lattice": {"intensity_w_m2": 0.0}}))
expect_error("blue detuning -> empty_result", 5, "analyze", "--config",
             config("blue", {"laser": {"detuning_ghz": 13.25}}))
expect_error("mismatched angle -> compare_failed", 8, "compare", "--config",
             config("angle", {"lattice": {"angle_of_incidence_deg": 50.0}}), "--grid", "8")
expect_error("unknown key -> usage", 2, "analyze", "--config", config("bogus", {"lattice": {"power_w": 1}}))
expect_error("bad format -> usage", 2, "analyze", "--config", small, "--format", "xml")
expect_error("csv-less command -> usage", 2, "drsc", "--config", small, "--format", "csv")
expect_error("unknown command -> usage", 2, "frobnicate", "--config", small)
expect_error("missing config -> io", 9, "analyze", "--config", str(tmp / "absent.json"))
expect_error("unwritable --out -> io", 9, "drsc", "--config", small, "--out", str(tmp / "no" / "such" / "dir.json"))
expect_error("unknown capture method", 13, "capture", "--config",
             config("method", {"dynamics": {"capture_method": "guess", "N": 10}}))

r = subprocess.run([BIN, "compare", "--config", small, "--grid", "8"], capture_output=True,
                   env=dict(ENV, CHIPLATTICE_THREADS="3"))
base = run("compare", "--config", small, "--grid", "8")
check("thread count does not change output", r.returncode == 0 and r.stdout == base.stdout)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
