"""Command-line interface: `hdl enumerate|verify|n6-report|field-info`.

Exit codes: 0 success or pass, 1 verification failed, 2 usage error or
unknown check id, 3 enumeration budget exceeded (partial output is marked).
Settings resolve as flags, then HDL_* environment variables, then defaults.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterator

import numpy as np

from . import __version__
from .ff import _embedding_root, gf
from .flags import FlagType, Twist, batch_to_flag, dl_mask, flag_batches, relpos_of_perm, simple, identity
from .linalg import BudgetExceeded, default_budget
from .registry import (
    REGISTRY,
    UnknownCheck,
    canonical_json,
    field_of,
    param_sets,
    report_document,
    run_check,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# ------------------------------------------------------------ parsing helpers


def parse_dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise UsageError(f"bad --dims {text!r}")
    if not dims:
        raise UsageError("--dims is empty")
    return dims


_TWIST = re.compile(r"^\s*(\d+)\s*:\s*(<=)?\s*\[([^\]]*)\]\s*$")


def parse_perm(spec: str, d: int) -> tuple:
    spec = spec.strip()
    if spec in ("", "1", "e"):
        return identity(d)
    m = re.fullmatch(r"s_?(\d+)", spec)
    if m:
        j = int(m.group(1))
        if not 1 <= j < d:
            raise UsageError(f"s_{j} is not a simple reflection of S_{d}")
        return simple(d, j)
    try:
        w = tuple(int(x) for x in spec.replace(" ", ",").split(",") if x)
    except ValueError:
        raise UsageError(f"bad permutation {spec!r}")
    if sorted(w) != list(range(1, d + 1)):
        raise UsageError(f"{spec!r} is not a permutation of 1..{d}")
    return w


def parse_twists(text: str, ftype: FlagType) -> list[Twist]:
    """'1:[1];2:<=[s1];3:[2,1,3,4]' -> twist conditions (e, position, closure)."""
    out = []
    for part in text.split(";"):
        if not part.strip():
            continue
        m = _TWIST.match(part)
        if not m:
            raise UsageError(f"bad twist spec {part!r}; expected e:[w] or e:<=[w]")
        e = int(m.group(1))
        if e < 1:
            raise UsageError("twist exponent must be positive")
        w = parse_perm(m.group(3), ftype.d)
        out.append(Twist(e, relpos_of_perm(w, ftype.dims, ftype.twisted(e).dims), m.group(2) is not None))
    if not out:
        raise UsageError("no twist given")
    return out


def parse_fixture(text: str) -> tuple[int, int]:
    try:
        d1, d2 = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad --fixture {text!r}; expected d1,d2")
    return d1, d2


def resolve_int(value, env: str, default: int) -> int:
    if value is not None:
        return value
    raw = os.environ.get(env)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{env}={raw!r} is not an integer")


# ------------------------------------------------------------ serialization


def space_rows(V, field) -> list[list[str]]:
    return [[field.fmt(int(c)) for c in row] for row in V.rows]


def lattice_rows(E) -> dict:
    f = E.field
    return {"n": E.n, "N": E.N, "rows": [[f.fmt(int(c)) for c in r] for r in E.rows]}


def _matrix_cell(rows: list[list[str]]) -> str:
    return ";".join(" ".join(r) for r in rows)


class PointWriter:
    """Streams points as JSON lines or CSV, with the count line last."""

    def __init__(self, out, fmt: str, header: dict):
        self.out = out
        self.fmt = fmt
        self.n = 0
        if fmt == "csv":
            self.w = csv.writer(out, lineterminator="\n")
            self.w.writerow(["index", "kind", "point", "extra"])
        else:
            out.write(json.dumps({"header": header}, sort_keys=True) + "\n")

    def flag(self, fl) -> None:
        f = fl.spaces[0].field if fl.spaces else None
        mats = [space_rows(V, f) for V in fl.spaces]
        if self.fmt == "csv":
            self.w.writerow([self.n, "flag", "|".join(_matrix_cell(m) for m in mats), ""])
        else:
            self.out.write(json.dumps({"index": self.n, "flag": mats}) + "\n")
        self.n += 1

    def lattice(self, E, extra: dict | None = None) -> None:
        d = lattice_rows(E)
        if self.fmt == "csv":
            self.w.writerow([self.n, f"lattice n={d['n']} N={d['N']}", _matrix_cell(d["rows"]), json.dumps(extra or {}, sort_keys=True)])
        else:
            rec = {"index": self.n, "lattice": d}
            if extra:
                rec["extra"] = extra
            self.out.write(json.dumps(rec, sort_keys=True) + "\n")
        self.n += 1

    def finish(self, complete: bool, note: str = "") -> None:
        if self.fmt == "csv":
            row = ["count", self.n, "complete" if complete else "partial"]
            if note:
                row.append(note)
            self.w.writerow(row)
        else:
            rec = {"count": self.n, "complete": complete}
            if note:
                rec["note"] = note
            self.out.write(json.dumps(rec, sort_keys=True) + "\n")


# ------------------------------------------------------------ enumeration


def _mask_chunk(args):
    batch, ftype, twists, order, q = args
    return dl_mask(batch, ftype, twists, gf(order), q)


def dl_stratum_flags(ftype: FlagType, twists: list[Twist], field, q: int, budget: int, threads: int) -> Iterator:
    """Flags of the stratum in enumeration order; chunks may be masked by a worker pool."""
    need = ftype.count(field.order)
    if need > budget:
        raise BudgetExceeded(need, budget, "flags")
    batches = flag_batches(ftype.d, ftype.dims, field.order, field=field)
    if threads <= 1:
        for b in batches:
            for j in np.flatnonzero(dl_mask(b, ftype, twists, field, q)):
                yield batch_to_flag(b[j], ftype, field)
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        held = []

        def jobs():
            for b in batches:
                held.append(b)
                yield (b, ftype, twists, field.order, q)

        # map preserves submission order, so the merge is deterministic
        for mask in pool.map(_mask_chunk, jobs()):
            b = held.pop(0)
            for j in np.flatnonzero(mask):
                yield batch_to_flag(b[j], ftype, field)


def cmd_enumerate(a, out) -> int:
    from .components import enumerate_component, standard_basepoint
    from .intersections import nur_intersection, open_intersection, pair_fixture, same_basepoint_intersection

    field = field_of(a.q, a.k)
    budget = resolve_int(a.budget, "HDL_BUDGET", default_budget())
    threads = resolve_int(a.threads, "HDL_THREADS", 1)
    header = {"target": a.target, "field": repr(field), "q": a.q, "k": a.k, "version": __version__}
    if a.target == "dl-stratum":
        if a.n is None or a.dims is None or a.twists is None:
            raise UsageError("dl-stratum needs --n, --dims and --twists")
        ftype = FlagType(a.n, parse_dims(a.dims))
        twists = parse_twists(a.twists, ftype)
        for t in twists:
            t.check_type(ftype)
        header.update(n=a.n, dims=list(ftype.dims), twists=a.twists)
        w = PointWriter(out, a.format, header)
        try:
            for fl in dl_stratum_flags(ftype, twists, field, a.q, budget, threads):
                w.flag(fl)
        except BudgetExceeded as exc:
            w.finish(False, str(exc))
            return EXIT_BUDGET
        w.finish(True)
        return EXIT_OK

    if a.target == "component":
        variant = a.variant or "nu1"
        n = a.n if a.n is not None else 4
        i = a.i if a.i is not None else 2
        header.update(variant=variant, n=n, i=i)
        w = PointWriter(out, a.format, header)
        bp = standard_basepoint(field, n)
        try:
            for pt in enumerate_component(variant, bp, i, a.q, budget):
                w.lattice(pt.E)
        except BudgetExceeded as exc:
            w.finish(False, str(exc))
            return EXIT_BUDGET
        w.finish(True)
        return EXIT_OK

    if a.target in ("intersection", "nur-intersection"):
        n = a.n if a.n is not None else 6
        d1, d2 = parse_fixture(a.fixture or "0,1")
        fx = pair_fixture(field, n, d1, d2)
        header.update(n=n, fixture=[d1, d2])
        try:
            if a.target == "intersection":
                i = a.i if a.i is not None else 1
                i2 = a.i2 if a.i2 is not None else 2
                header.update(i=i, i2=i2)
                rep = open_intersection(fx, i, i2, a.q, budget)
                pts = sorted(rep.data["points"], key=lambda p: p[0].rows.tobytes())
                w = PointWriter(out, a.format, header)
                for E, j1, j2, _, rel in pts:
                    w.lattice(E, {"j1": j1, "j2": j2, "relation": rel})
            else:
                rep = nur_intersection(fx, a.q, budget)
                w = PointWriter(out, a.format, header)
                for E in rep.data["points"]:
                    w.lattice(E)
        except BudgetExceeded as exc:
            PointWriter(out, a.format, header).finish(False, str(exc))
            return EXIT_BUDGET
        w.finish(True)
        return EXIT_OK

    if a.target == "inti2":
        n = a.n if a.n is not None else 5
        header.update(n=n, i=2, s=1)
        try:
            rep = same_basepoint_intersection(standard_basepoint(field, n), 2, 1, a.q, budget)
        except BudgetExceeded as exc:
            PointWriter(out, a.format, header).finish(False, str(exc))
            return EXIT_BUDGET
        w = PointWriter(out, a.format, header)
        for E in rep.data["points"]:
            w.lattice(E)
        w.finish(True)
        return EXIT_OK
    raise UsageError(f"unknown target {a.target!r}")


# ------------------------------------------------------------ verify


def _overrides(a) -> dict:
    out = {}
    for key in ("n", "i", "q", "k"):
        v = getattr(a, key)
        if v is not None:
            out[key] = v
    return out


def _human(doc: dict) -> str:
    lines = []
    for r in doc["reports"]:
        prm = " ".join(f"{k}={v}" for k, v in sorted(r["params"].items()) if not isinstance(v, (list, dict)))
        cnt = " ".join(f"{k}={v}" for k, v in sorted(r["counts"].items()))
        lines.append(f"{r['verdict'].upper():6s} {r['criterion']} {r['check']} {prm} [{cnt}]")
        for c in r["cases"]:
            if not c["pass"]:
                bad = [ch["name"] for ch in c["checks"] if not ch["pass"]]
                lines.append(f"       failed case {c['case']}: {'; '.join(bad)}")
    lines.append(f"verdict: {doc['verdict']}")
    return "\n".join(lines) + "\n"


def cmd_verify(a, out) -> int:
    profile = a.profile
    budget = resolve_int(a.budget, "HDL_BUDGET", default_budget())
    ids = sorted(REGISTRY, key=lambda c: REGISTRY[c].criterion) if a.check == "all" else [a.check]
    for cid in ids:
        if cid not in REGISTRY:
            raise UnknownCheck(cid)
    if a.paper_anchor:
        for cid in ids:
            e = REGISTRY[cid]
            out.write(f"{cid} ({e.criterion}, {e.kind}): {e.anchor}\n")
    reports = []
    for cid in ids:
        sets = param_sets(cid, profile)
        ov = _overrides(a) if a.check != "all" else {}
        if ov:
            sets = [{**sets[0], **ov}]
        for p in sets:
            rr = run_check(cid, p, budget, timing=a.timing)
            reports.append(rr)
            if rr.verdict == "budget":
                break
    doc = report_document(reports, profile)
    text = canonical_json(doc) if a.format == "json" else _human(doc)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(doc) if a.format == "json" or a.out.endswith(".json") else text)
        out.write(_human(doc))
    else:
        out.write(text)
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "budget": EXIT_BUDGET}[doc["verdict"]]


# ------------------------------------------------------------ n6 report


def cmd_n6_report(a, out) -> int:
    from .intersections import n6_catalog

    field = field_of(a.q, a.k)
    try:
        reps = n6_catalog(field, a.q)
    except BudgetExceeded as exc:
        out.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    sections = [r.to_dict() for r in reps]
    ok = all(s["pass"] for s in sections)
    if a.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "params", "pass", "counts", "failed_checks"])
        for s in sections:
            failed = ";".join(c["name"] for c in s["checks"] if not c["pass"])
            w.writerow([s["case"], json.dumps(s["params"], sort_keys=True, ensure_ascii=False), int(s["pass"]),
                        json.dumps(s["counts"], sort_keys=True), failed])
        text = buf.getvalue()
    else:
        text = canonical_json({"schema_version": "1.0", "tool_version": __version__, "field": repr(field), "q": a.q,
                               "verdict": "pass" if ok else "fail", "sections": sections})
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        for s in sections:
            out.write(f"{'PASS' if s['pass'] else 'FAIL'} {s['case']}\n")
    else:
        out.write(text)
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------ field info


def cmd_field_info(a, out) -> int:
    F = field_of(a.q, a.k)
    base = gf(a.q)
    info = {
        "field": repr(F),
        "order": F.order,
        "characteristic": F.p,
        "degree": F.m,
        "modulus": F.modulus,
        "generator": F.fmt(F.gen),
        "q": a.q,
        "k": a.k,
        "base_field": repr(base),
        "base_embedding_root": F.fmt(_embedding_root(base, F)) if base.m > 1 else None,
        "subfield_degrees": [d for d in range(1, F.m + 1) if F.m % d == 0],
    }
    if a.format == "json":
        out.write(json.dumps(info, sort_keys=True, indent=2) + "\n")
    else:
        for k in sorted(info):
            out.write(f"{k}: {info[k]}\n")
    return EXIT_OK


# ------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hdl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, fmt_default="json"):
        p.add_argument("--q", type=int, default=2, help="base field size (prime power)")
        p.add_argument("--k", type=int, default=1, help="work over F_{q^{2k}}")
        p.add_argument("--format", choices=["json", "csv", "text"], default=fmt_default)
        p.add_argument("--out", help="write the main output to this file")
        p.add_argument("--threads", type=int, help="worker processes (env HDL_THREADS)")
        p.add_argument("--budget", type=int, help="cap on visited objects (env HDL_BUDGET)")

    p = sub.add_parser("enumerate", help="list the points of a stratum, component or intersection")
    p.add_argument("target", choices=["dl-stratum", "component", "intersection", "inti2", "nur-intersection"])
    p.add_argument("variant", nargs="?", choices=["nu1", "nur", "nonminuscule"], help="component variant")
    p.add_argument("--n", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--i2", type=int)
    p.add_argument("--dims")
    p.add_argument("--twists", help="e.g. '1:[1];2:<=[s1];3:[1]'")
    p.add_argument("--fixture", help="pair invariants d1,d2 of the second basepoint")
    common(p)

    p = sub.add_parser("verify", help="run a named check, or 'all'")
    p.add_argument("check")
    p.add_argument("--n", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--profile", choices=["desk", "quick"], default="desk")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--paper-anchor", action="store_true", help="print what each check verifies")
    p.add_argument("--timing", action="store_true", help="record elapsed seconds (breaks byte-identity)")

    p = sub.add_parser("n6-report", help="the n=6 intersection catalog")
    common(p)

    p = sub.add_parser("field-info", help="describe F_{q^{2k}}")
    common(p, "text")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    out = sys.stdout
    try:
        if a.cmd == "enumerate":
            if a.format == "text":
                a.format = "json"
            if a.out:
                with open(a.out, "w", encoding="utf-8", newline="") as fh:
                    return cmd_enumerate(a, fh)
            return cmd_enumerate(a, out)
        if a.cmd == "verify":
            return cmd_verify(a, out)
        if a.cmd == "n6-report":
            return cmd_n6_report(a, out)
        return cmd_field_info(a, out)
    except UnknownCheck as exc:
        sys.stderr.write(f"hdl: unknown check id {exc.args[0]!r}; known: {', '.join(sorted(REGISTRY))}\n")
        return EXIT_USAGE
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"hdl: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
