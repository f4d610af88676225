"""Named verification checks, their parameter profiles and the RunReport format."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

from . import __version__
from .components import standard_basepoint, xi_condition_redundancy_check
from .ff import Field, gf
from .flags import projection_image_report
from .intersections import (
    CaseReport,
    catalog_nu1_nu1,
    catalog_nu1_nu2,
    catalog_nu2_nu2,
    catalog_nu3,
    fiber_equation_check,
    lattice_witness,
    same_basepoint_intersection,
)
from .linalg import BudgetExceeded

SCHEMA_VERSION = "1.0"


class UnknownCheck(KeyError):
    pass


def field_of(q: int, k: int) -> Field:
    """F_{q^{2k}}, the field carrying the hermitian structure over F_q."""
    if q < 2 or k < 1:
        raise ValueError("need q >= 2 and k >= 1")
    F = gf(q ** (2 * k))
    if F is None or F.order != q ** (2 * k):
        raise ValueError(f"q={q} is not a prime power")
    return F


@dataclass
class RunReport:
    check: str
    criterion: str
    anchor: str
    kind: str
    params: dict
    verdict: str = "pass"
    counts: dict = dc_field(default_factory=dict)
    field_tower: list = dc_field(default_factory=list)
    witnesses: list = dc_field(default_factory=list)
    cases: list = dc_field(default_factory=list)
    elapsed_s: Optional[float] = None
    seed: int = 0
    partial: bool = False
    tool_version: str = __version__

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "criterion": self.criterion,
            "anchor": self.anchor,
            "kind": self.kind,
            "params": self.params,
            "verdict": self.verdict,
            "counts": self.counts,
            "field_tower": self.field_tower,
            "witnesses": self.witnesses,
            "cases": self.cases,
            "elapsed_s": self.elapsed_s,
            "seed": self.seed,
            "partial": self.partial,
            "tool_version": self.tool_version,
        }

    def absorb(self, reps: list[CaseReport]) -> None:
        for r in reps:
            self.cases.append(r.to_dict())
            if not r.passed:
                self.verdict = "fail"


@dataclass
class CheckEntry:
    id: str
    criterion: str
    anchor: str
    kind: str  # set-equality | inclusion | count | bijection
    run: Callable[[RunReport, dict, Optional[int]], None]
    profiles: dict  # profile name -> list of parameter dicts


# ------------------------------------------------------------ check bodies


def _redundancy(rr: RunReport, p: dict, budget) -> None:
    F = field_of(p["q"], p["k"])
    rr.field_tower = [repr(F)]
    r = xi_condition_redundancy_check(standard_basepoint(F, p["n"]), p["i"], p["q"], budget)
    rr.counts = {"y_points": r.y_points, "triples": r.triples, "cdphi1": r.cdphi1, "cdphi1_and_cdphi2": r.both}
    rr.witnesses = [{"E+": lattice_witness(a), "E-": lattice_witness(b), "W": W.rows.tolist()} for a, b, W in r.counterexamples]
    rr.verdict = "pass" if r.passed else "fail"


def _same_basepoint(rr: RunReport, p: dict, budget) -> None:
    F = field_of(p["q"], p["k"])
    rr.field_tower = [repr(F)]
    rep = same_basepoint_intersection(standard_basepoint(F, p["n"]), 2, 1, p["q"], budget)
    rr.counts = dict(rep.counts)
    rr.absorb([rep])


def _projection_image(rr: RunReport, p: dict, budget) -> None:
    q = p["q"]
    F = field_of(q, p["k"])
    F2 = field_of(q, p["k_witness"])
    rr.field_tower = [repr(F), repr(F2)]
    fwd = projection_image_report(p["d"], p["i"], F, q, forward=True, budget=budget)
    wit = projection_image_report(p["d"], p["i"], F2, q, forward=False, budget=budget)
    for name, r in [("forward and witnesses", fwd), ("witnesses", wit)]:
        cr = CaseReport(f"projection image: {name}", {"d": p["d"], "i": p["i"], "field": r["field"], "q": q})
        cr.counts = {k: r[k] for k in ("open_points", "witnessed", "flags", "forward_failures", "forward_failures_dual") if k in r}
        cr.add("every open point has a witness flag projecting to it", r["witnessed"] == r["open_points"], r["witnessed"], r["open_points"])
        if "flags" in r:
            cr.add("projection of every flag lies in the closed stratum", r["forward_failures"] == 0, r["forward_failures"], 0)
            cr.add("second projection lies in its closed stratum", r["forward_failures_dual"] == 0, r["forward_failures_dual"], 0)
        cr.witnesses = r["counterexamples"]
        rr.absorb([cr])
    rr.counts = {"open_points_base": fwd["open_points"], "open_points_ext": wit["open_points"], "flags": fwd["flags"]}


def _catalog(rr: RunReport, p: dict, budget) -> None:
    F = field_of(p["q"], p["k"])
    rr.field_tower = [repr(F)]
    q = p["q"]
    reps = catalog_nu1_nu1(F, q) + catalog_nu1_nu2(F, q)
    reps.append(fiber_equation_check(standard_basepoint(F, 6), q, budget))
    reps += catalog_nu3(F, q)
    rr.absorb(reps)
    rr.counts = {"cases": len(reps), "failed": sum(not r.passed for r in reps)}


def _decomposition(rr: RunReport, p: dict, budget) -> None:
    F = field_of(p["q"], p["k"])
    rr.field_tower = [repr(F)]
    fx = [tuple(d) for d in p["fixtures"]]
    reps = catalog_nu2_nu2(F, p["q"], fx)
    rr.absorb(reps)
    rr.counts = {"fixtures": len(reps), "failed": sum(not r.passed for r in reps)}


def _invariants(rr: RunReport, p: dict, budget) -> None:
    from . import invariants as inv

    reps = [
        inv.field_axioms(p["field_limit"]),
        inv.gaussian_counts(p["max_n"], p["max_k"], tuple(p["qs"])),
        inv.duality_algebra(2, p["exhaustive_n"], p["sampled_n"], p["samples"], rr.seed),
        inv.pair_length_identity(),
        inv.closure_identities(p["closure_d"]),
        inv.bruhat_oracle(p["bruhat_d"], p["parabolic_d"]),
    ]
    rr.field_tower = ["GF(2^2)"]
    rr.absorb(reps)
    rr.counts = {"suites": len(reps), "failed": sum(not r.passed for r in reps)}


def _determinism(rr: RunReport, p: dict, budget) -> None:
    outs = []
    for _ in range(2):
        reps = [run_check(cid, dict(prm), budget) for cid, prm in p["inner"]]
        outs.append(canonical_json({"reports": [r.to_dict() for r in reps]}))
    same = outs[0] == outs[1]
    cr = CaseReport("repeat runs", {"inner": [c for c, _ in p["inner"]]})
    cr.counts = {"bytes": len(outs[0])}
    cr.add("two runs are byte-identical", same, same, True)
    rr.absorb([cr])
    rr.counts = dict(cr.counts)


REGISTRY: dict[str, CheckEntry] = {}


def _register(e: CheckEntry) -> None:
    if e.id in REGISTRY:
        raise ValueError(f"duplicate check id {e.id}")
    REGISTRY[e.id] = e


_register(CheckEntry(
    "thm-pZi-redundancy", "A1",
    "non-minuscule component: over Y_i, the first fiber condition implies the second",
    "set-equality", _redundancy,
    {"desk": [{"n": 5, "i": 2, "q": 2, "k": 1}, {"n": 6, "i": 2, "q": 2, "k": 1}],
     "quick": [{"n": 5, "i": 2, "q": 2, "k": 1}]},
))
_register(CheckEntry(
    "same-basepoint-bijection", "A2",
    "same basepoint, i=2: closure meets the smaller component in {Φ^-1(E+) = E}, a double-Fermat locus",
    "bijection", _same_basepoint,
    {"desk": [{"n": 5, "q": 2, "k": 1}, {"n": 6, "q": 2, "k": 1}],
     "quick": [{"n": 5, "q": 2, "k": 1}]},
))
_register(CheckEntry(
    "projection-image", "A3",
    "image of the two-step DL variety under projection to its first member",
    "inclusion", _projection_image,
    {"desk": [{"d": 6, "i": 2, "q": 2, "k": 1, "k_witness": 2}],
     "quick": [{"d": 4, "i": 2, "q": 2, "k": 1, "k_witness": 2}]},
))
_register(CheckEntry(
    "n6-catalog", "A4",
    "n=6 intersection catalog: ν1∩ν1, ν1∩ν2, ν3∩ν3, ν_i∩ν3 and the fiber equation",
    "count", _catalog,
    {"desk": [{"q": 2, "k": 1}], "quick": [{"q": 2, "k": 1}]},
))
_register(CheckEntry(
    "intersection-decomposition", "A5",
    "open ν2∩ν2 at two basepoints = disjoint union of (j1,j2) relative-position strata",
    "set-equality", _decomposition,
    {"desk": [{"q": 2, "k": 1, "fixtures": [[0, 1], [0, 2], [1, 1], [0, 3], [1, 2]]}],
     "quick": [{"q": 2, "k": 1, "fixtures": [[0, 3], [1, 2]]}]},
))
_register(CheckEntry(
    "invariant-suites", "A6",
    "field axioms, Gaussian counts, duality, d1+d2=l, closure identities, Bruhat order",
    "set-equality", _invariants,
    {"desk": [{"field_limit": 256, "max_n": 6, "max_k": 3, "qs": [2, 3], "exhaustive_n": 3, "sampled_n": 6,
               "samples": 60, "closure_d": 5, "bruhat_d": 6, "parabolic_d": 4}],
     "quick": [{"field_limit": 64, "max_n": 5, "max_k": 2, "qs": [2, 3], "exhaustive_n": 2, "sampled_n": 4,
                "samples": 10, "closure_d": 4, "bruhat_d": 5, "parabolic_d": 3}]},
))
_register(CheckEntry(
    "determinism", "A7",
    "repeated runs of a check produce byte-identical reports",
    "set-equality", _determinism,
    {"desk": [{"inner": [["thm-pZi-redundancy", {"n": 5, "i": 2, "q": 2, "k": 1}], ["invariant-suites", {}]]}],
     "quick": [{"inner": [["thm-pZi-redundancy", {"n": 5, "i": 2, "q": 2, "k": 1}]]}]},
))


# ------------------------------------------------------------ running


def param_sets(cid: str, profile: str = "desk") -> list[dict]:
    e = REGISTRY.get(cid)
    if e is None:
        raise UnknownCheck(cid)
    if profile not in e.profiles:
        raise ValueError(f"unknown profile {profile!r}")
    return [dict(p) for p in e.profiles[profile]]


def run_check(cid: str, params: dict, budget: Optional[int] = None, timing: bool = False) -> RunReport:
    e = REGISTRY.get(cid)
    if e is None:
        raise UnknownCheck(cid)
    full = dict(params) if params else dict(e.profiles["quick"][0])
    rr = RunReport(cid, e.criterion, e.anchor, e.kind, full)
    t0 = time.perf_counter()
    try:
        e.run(rr, full, budget)
    except BudgetExceeded as exc:
        rr.verdict = "budget"
        rr.partial = True
        rr.counts["budget_error"] = str(exc)
    if timing:
        rr.elapsed_s = round(time.perf_counter() - t0, 3)
    return rr


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_default) + "\n"


def _default(x):
    import numpy as np

    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return str(x)


def report_document(reports: list[RunReport], profile: Optional[str]) -> dict:
    verdict = "pass"
    if any(r.verdict == "budget" for r in reports):
        verdict = "budget"
    elif any(r.verdict != "pass" for r in reports):
        verdict = "fail"
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "profile": profile,
        "verdict": verdict,
        "reports": [r.to_dict() for r in reports],
    }


def load_schema() -> dict:
    from importlib.resources import files

    return json.loads(files("hdl").joinpath("schemas/runreport.schema.json").read_text(encoding="utf-8"))


def validate(doc: dict) -> None:
    """Raise jsonschema.ValidationError unless doc matches the published schema."""
    import jsonschema

    jsonschema.validate(doc, load_schema())
