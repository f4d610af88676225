"""Acceptance criteria A1-A7, from two full desk-profile runs of `hdl verify all`."""
import json
import subprocess
import sys

import pytest

from hdl.registry import validate

CRITERIA = {
    "A1": "first fiber condition implies the second over Y_i (n=5,6)",
    "A2": "same-basepoint intersection is the double-Fermat locus (n=5,6)",
    "A3": "projection image of the two-step DL variety",
    "A4": "n=6 intersection catalog",
    "A5": "open ν2∩ν2 decomposes into relative-position strata",
    "A6": "invariant suites",
    "A7": "two full runs are byte-identical",
}


def _verify_all(path):
    cmd = [sys.executable, "-m", "hdl.cli", "verify", "all", "--profile", "desk", "--format", "json", "--out", str(path)]
    r = subprocess.run(cmd, capture_output=True, text=True)
    assert r.returncode in (0, 1), r.stderr
    return path.read_bytes()


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("accept")
    return _verify_all(d / "run1.json"), _verify_all(d / "run2.json")


def _failed_checks(rep):
    out = []
    for c in rep["cases"]:
        out += [f"{c['case']}: {k['name']}" for k in c["checks"] if not k["pass"]]
    return out


def _verdict(doc, crit, raw):
    reps = [r for r in doc["reports"] if r["criterion"] == crit]
    ok = bool(reps) and all(r["verdict"] == "pass" for r in reps)
    detail = []
    if crit == "A1":
        for r in reps:
            c = r["counts"]
            ok = ok and c["cdphi1"] == c["cdphi1_and_cdphi2"]
            detail.append(f"n={r['params']['n']}: Y={c['y_points']} cdphi1={c['cdphi1']} both={c['cdphi1_and_cdphi2']}")
    if crit == "A7":
        ok = ok and raw[0] == raw[1]
        detail.append(f"{len(raw[0])} bytes, identical={raw[0] == raw[1]}")
    for r in reps:
        detail += _failed_checks(r)
    return ok, detail


@pytest.mark.parametrize("crit", sorted(CRITERIA))
def test_criterion(crit, runs, capsys):
    doc = json.loads(runs[0])
    validate(doc)
    ok, detail = _verdict(doc, crit, runs)
    with capsys.disabled():
        print(f"\n{crit} {'PASS' if ok else 'FAIL'}: {CRITERIA[crit]}" + "".join(f"\n    {d}" for d in detail))
    assert ok, detail
