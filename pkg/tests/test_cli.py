import csv
import io
import json
import subprocess
import sys

import pytest

from hdl.cli import main, parse_twists
from hdl.flags import FlagType
from hdl.registry import REGISTRY, validate


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dl_stratum_rows_and_count_last(capsys):
    code, out, _ = run(["enumerate", "dl-stratum", "--n", "4", "--dims", "3", "--twists", "1:[1]", "--q", "2", "--k", "1"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert json.loads(lines[-1]) == {"count": 45, "complete": True}
    assert len(lines) == 45 + 2
    for line in lines:
        validate(json.loads(line))


def test_dl_stratum_csv(capsys):
    code, out, _ = run(["enumerate", "dl-stratum", "--n", "4", "--dims", "3", "--twists", "1:[1]", "--format", "csv"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["index", "kind", "point", "extra"]
    assert rows[-1] == ["count", "45", "complete"]
    assert len(rows) == 47


def test_component_nu1(capsys):
    code, out, _ = run(["enumerate", "component", "nu1", "--n", "4", "--q", "2", "--k", "1"], capsys)
    assert code == 0 and json.loads(out.strip().splitlines()[-1])["count"] == 45


def test_intersection_targets(capsys):
    code, out, _ = run(["enumerate", "nur-intersection", "--fixture", "0,2"], capsys)
    assert code == 0 and json.loads(out.strip().splitlines()[-1])["count"] == 1
    code, out, _ = run(["enumerate", "intersection", "--i", "1", "--i2", "1", "--fixture", "0,1"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and json.loads(lines[-1])["count"] == 1
    assert json.loads(lines[1])["extra"] == {"j1": 0, "j2": 0, "relation": "="}


@pytest.mark.parametrize("spec", ["1:[x]", "1:[1,1,2,3]", "[1]", "0:[1]", "1:[s7]"])
def test_invalid_twist_is_usage_error(spec, capsys):
    code, _, err = run(["enumerate", "dl-stratum", "--n", "4", "--dims", "3", "--twists", spec], capsys)
    assert code == 2 and err.startswith("hdl:")


def test_twist_parser():
    ft = FlagType(4, (1,))
    tw = parse_twists("1:[1]; 2:<=[s1]; 3:[1]", ft)
    assert [t.e for t in tw] == [1, 2, 3]
    assert [t.closure for t in tw] == [False, True, False]
    assert tw[1].target.rep == (2, 1, 3, 4)


def test_usage_errors(capsys):
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["enumerate", "dl-stratum", "--n", "4"], capsys)[0] == 2
    assert run(["field-info", "--q", "6"], capsys)[0] == 2


def test_unknown_check(capsys):
    code, _, err = run(["verify", "unknown-id"], capsys)
    assert code == 2 and "unknown check" in err


def test_budget_exit(capsys, monkeypatch):
    code, out, _ = run(["enumerate", "dl-stratum", "--n", "4", "--dims", "2", "--twists", "1:[1]", "--budget", "5"], capsys)
    assert code == 3 and json.loads(out.strip().splitlines()[-1])["complete"] is False
    monkeypatch.setenv("HDL_BUDGET", "5")
    assert run(["enumerate", "component", "nu1", "--n", "4"], capsys)[0] == 3
    # flags beat the environment
    assert run(["enumerate", "component", "nu1", "--n", "4", "--budget", "1000"], capsys)[0] == 0


def test_verify_budget_gives_partial_report(capsys):
    code, out, _ = run(["verify", "thm-pZi-redundancy", "--n", "5", "--budget", "10", "--format", "json"], capsys)
    doc = json.loads(out)
    validate(doc)
    assert code == 3 and doc["reports"][0]["partial"] and doc["verdict"] == "budget"


def test_threads_do_not_change_output(capsys, monkeypatch):
    args = ["enumerate", "dl-stratum", "--n", "4", "--dims", "1,3", "--twists", "1:[1]"]
    _, single, _ = run(args, capsys)
    _, multi, _ = run(args + ["--threads", "2"], capsys)
    monkeypatch.setenv("HDL_THREADS", "2")
    _, env, _ = run(args, capsys)
    assert single == multi == env


def test_field_info(capsys):
    code, out, _ = run(["field-info", "--q", "2", "--k", "2", "--format", "json"], capsys)
    info = json.loads(out)
    assert code == 0 and info["order"] == 16 and info["modulus"] == [1, 1, 0, 0, 1]


def test_verify_quick_redundancy_json(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, text, _ = run(["verify", "thm-pZi-redundancy", "--n", "5", "--i", "2", "--q", "2", "--k", "1", "--format", "json", "--out", str(out_file)], capsys)
    doc = json.loads(out_file.read_text())
    validate(doc)
    assert code == 0 and doc["verdict"] == "pass" and "PASS" in text
    assert doc["reports"][0]["counts"]["cdphi1"] == doc["reports"][0]["counts"]["cdphi1_and_cdphi2"] == 19305


def test_paper_anchor(capsys):
    code, out, _ = run(["verify", "projection-image", "--profile", "quick", "--paper-anchor"], capsys)
    assert code == 0 and out.startswith("projection-image (A3, inclusion):")


def test_registry_covers_all_criteria():
    assert sorted(e.criterion for e in REGISTRY.values()) == [f"A{k}" for k in range(1, 8)]
    assert len(set(REGISTRY)) == len(REGISTRY)


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "hdl.cli", "verify", "nope"], capture_output=True, text=True)
    assert r.returncode == 2
