"""Command-line workbench around the builder, the cover calculus, and
the certificate engine.

Exit codes: 0 means the requested check passed, 1 means it ran and
failed, 2 means the input documents were unusable, 3 means a
precondition was violated.  All artifacts are JSON written atomically;
``ASDIM_FORGE_THREADS`` caps how many worker threads batch commands may
use (default 1, and results keep their input order either way).
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from pathlib import Path

from .amalgam import AmalgamationSpec, BuildResult, build
from .covers import exact_min_bound, greedy_witness
from .errors import ConfigError, PreconditionError
from .graphs import FiniteGraph, INF, MetricView, load_graph, relabel_sorted
from .groups import compute_automorphisms, vertex_orbits
from .jsonio import dumps, read_json, write_json
from .theorem import ProofParameters, projection_fit, run_certificate, theorem_bound

FIT_SIZE_CAP = 500
SAMPLED_PAIRS = 2000


def thread_budget() -> int:
    raw = os.environ.get("ASDIM_FORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map, threaded only when the budget allows it."""
    items = list(items)
    workers = thread_budget()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# -- input loading ------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _graph_from_file(path: str) -> FiniteGraph:
    return load_graph(_read_text(path))


def _spec_from_file(path: str) -> AmalgamationSpec:
    return AmalgamationSpec.from_json_str(_read_text(path))


def _emit(doc, out: str | None, quiet: bool = False):
    if out:
        write_json(out, doc)
    elif not quiet:
        sys.stdout.write(dumps(doc))


# -- shared measurements -------------------------------------------------------


def projection_report(br: BuildResult, seed: int, exhaustive: bool) -> dict:
    """Check the copy-to-node projection never increases distances.

    Every pair is checked on small builds; large ones get a seeded
    sample unless exhaustive checking is forced.
    """
    H = br.sum.graph
    tree = br.tree
    verts = list(H.vertices)
    full = exhaustive or len(verts) <= FIT_SIZE_CAP
    failures = []
    checked = 0
    if full:
        for x in verts:
            dist = H.distances_from(x)
            nx = br.sum.node_of(x)
            for y in verts:
                if y <= x:
                    continue
                checked += 1
                if tree.distance(nx, br.sum.node_of(y)) > dist.get(y, INF):
                    failures.append([x, y])
    else:
        rng = random.Random(seed)
        sources = rng.sample(verts, min(len(verts), SAMPLED_PAIRS // 10))
        for x in sources:
            dist = H.distances_from(x)
            nx = br.sum.node_of(x)
            for y in rng.sample(verts, 10):
                if y == x:
                    continue
                checked += 1
                if tree.distance(nx, br.sum.node_of(y)) > dist.get(y, INF):
                    failures.append([x, y])
    return {"mode": "exhaustive" if full else "sampled",
            "pairs": checked,
            "seed": None if full else seed,
            "ok": not failures,
            "failures": failures[:10]}


def build_report(br: BuildResult, seed: int, exhaustive: bool) -> dict:
    report = br.report_dict()
    report["projection"] = projection_report(br, seed, exhaustive)
    if len(br.sum.graph) <= FIT_SIZE_CAP:
        report["projection_fit"] = projection_fit(br).to_json_dict()
    else:
        report["projection_fit"] = None
    return report


def _witness_doc(w, valid: bool) -> dict:
    doc = w.to_json_dict()
    doc["D"] = doc.pop("bound")
    doc["valid"] = valid
    return doc


# -- subcommands ---------------------------------------------------------------


def cmd_build(args) -> int:
    spec = _spec_from_file(args.spec)
    br = build(spec, args.depth)
    report = build_report(br, args.seed, args.exhaustive)
    _emit(report, args.out)
    ok = report["projection"]["ok"] and report["atlas"]["ok"]
    print(f"{'PASS' if ok else 'FAIL'} build {spec.name}: "
          f"sum={report['sum_vertices']} amalgam={report['amalgam_vertices']} "
          f"trivial={report['trivial']}")
    return 0 if ok else 1


def cmd_witness(args) -> int:
    g = _graph_from_file(args.spec)
    res = greedy_witness(MetricView(g), args.r, args.n)
    if not res.ok:
        print(f"FAIL witness: {res.detail}")
        return 1
    problems = res.witness.violations()
    _emit(_witness_doc(res.witness, not problems), args.out)
    if problems:
        print(f"FAIL witness: {problems[0]}")
        return 1
    print(f"PASS D={res.witness.bound}")
    return 0


def cmd_oracle(args) -> int:
    g = _graph_from_file(args.spec)
    w = exact_min_bound(MetricView(g), args.r, args.n).as_witness()
    problems = w.violations()
    _emit(_witness_doc(w, not problems), args.out)
    print(f"D={w.bound}")
    print("PASS" if not problems else f"FAIL oracle: {problems[0]}")
    return 0 if not problems else 1


def cmd_aut(args) -> int:
    g = _graph_from_file(args.spec)
    action = compute_automorphisms(g)
    orbits = vertex_orbits(action)
    doc = {"order": len(action),
           "vertex_orbits": [sorted(o) for o in orbits],
           "elements": action.to_json_dict()["elements"]}
    _emit(doc, args.out, quiet=not args.exhaustive)
    print(f"order={len(action)} orbits={len(orbits)}")
    return 0


def cmd_verify_theorem(args) -> int:
    spec = _spec_from_file(args.spec)
    depth = spec.depth if args.depth is None else args.depth
    params = ProofParameters(R=args.R, r=args.r, depth=depth)
    br = build(spec, depth)
    cert = run_certificate(br, params, seed=args.seed)
    out = args.out or "cert.json"
    write_json(out, cert.to_json_dict())
    for st in cert.stages:
        print(f"  {st.name}: {'ok' if st.verdict else 'FAIL'}")
    print(f"{cert.verdict} bound={cert.bound} -> {out}")
    return 0 if cert.passed() else 1


def cmd_iterate(args) -> int:
    outdir = Path(args.out or "artifacts")
    prev: BuildResult | None = None
    names = []
    bound = 1
    for idx, path in enumerate(args.spec):
        raw = read_json(path)
        if not isinstance(raw, dict):
            raise ConfigError(f"stage document {path} must be a JSON object")
        if idx > 0:
            factors = raw.get("factors")
            if not factors or factors[0] != "previous":
                raise ConfigError(
                    f"stage {idx + 1} must name its first factor \"previous\"")
            renamed, _ = relabel_sorted(prev.amalgam.graph)
            raw = dict(raw)
            raw["factors"] = [renamed.to_json_dict()] + list(factors[1:])
        spec = AmalgamationSpec.from_json_dict(raw)
        br = build(spec, args.depth)
        report = build_report(br, args.seed, args.exhaustive)
        report["stage"] = idx + 1
        write_json(outdir / f"stage{idx + 1:02d}_{spec.name}.json", report)
        decl = spec.declared_asdim
        bound = max(bound, theorem_bound(decl.get("factor1", 0),
                                         decl.get("factor2", 0),
                                         decl.get("adhesion", 0)))
        names.append(spec.name)
        prev = br
    write_json(outdir / "iterate_summary.json",
               {"stages": names, "bound": bound})
    print(f"PASS stages={len(names)} bound={bound} -> {outdir}")
    return 0


_ROW_FIELDS = ("file", "kind", "name", "verdict", "bound")


def _report_row(path: Path) -> dict:
    doc = read_json(path)
    row = {"file": path.name, "kind": "other", "name": "-",
           "verdict": "-", "bound": "-"}
    if not isinstance(doc, dict):
        return row
    if "stages" in doc and "verdict" in doc:
        row.update(kind="certificate", name=doc.get("name", "-"),
                   verdict=doc["verdict"], bound=doc.get("bound", "-"))
    elif "D" in doc and "families" in doc:
        row.update(kind="witness",
                   verdict="PASS" if doc.get("valid") else "FAIL",
                   bound=doc["D"])
    elif "sum_vertices" in doc:
        ok = doc.get("projection", {}).get("ok", False) and \
            doc.get("atlas", {}).get("ok", False)
        row.update(kind="build", name=doc.get("name", "-"),
                   verdict="PASS" if ok else "FAIL",
                   bound=doc.get("amalgam_vertices", "-"))
    elif "stages" in doc and "bound" in doc:
        row.update(kind="summary", bound=doc["bound"], verdict="PASS")
    return row


def cmd_report(args) -> int:
    where = Path(args.artifacts)
    if not where.is_dir():
        raise ConfigError(f"not a directory: {where}")
    files = sorted(where.glob("*.json"))
    rows = parallel_map(_report_row, files)
    widths = {f: max([len(f)] + [len(str(r[f])) for r in rows])
              for f in _ROW_FIELDS}
    header = "  ".join(f.ljust(widths[f]) for f in _ROW_FIELDS)
    print(header.rstrip())
    print("  ".join("-" * widths[f] for f in _ROW_FIELDS))
    for r in rows:
        print("  ".join(str(r[f]).ljust(widths[f]) for f in _ROW_FIELDS).rstrip())
    if args.out:
        write_json(args.out, {"rows": rows})
    return 0


# -- argument wiring -----------------------------------------------------------


def _add_common(sub, spec=True, radii=False, n=False, depth=True):
    if spec:
        sub.add_argument("--spec", required=True, help="input document path")
    if radii:
        sub.add_argument("--R", type=int, default=0, help="shell radius")
        sub.add_argument("--r", type=int, required=True, help="block/scale radius")
    if n:
        sub.add_argument("--n", type=int, default=1, help="extra family budget")
    if depth:
        sub.add_argument("--depth", type=int, default=None,
                         help="truncation depth override")
    sub.add_argument("--out", default=None, help="artifact output path")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for sampled spot checks")
    sub.add_argument("--exhaustive", action="store_true",
                     help="force exhaustive checking regardless of size")


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="asdimforge",
        description="Build glued tree-of-copies truncations and certify "
                    "their block decompositions.")
    subs = p.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("build", help="run one truncation build and report it")
    _add_common(sub)
    sub.set_defaults(handler=cmd_build)

    sub = subs.add_parser("witness", help="greedy block families on a graph")
    _add_common(sub, depth=False)
    sub.add_argument("--r", type=int, required=True, help="separation scale")
    sub.add_argument("--n", type=int, default=1, help="extra family budget")
    sub.set_defaults(handler=cmd_witness)

    sub = subs.add_parser("oracle", help="exact minimal block bound (small graphs)")
    _add_common(sub, depth=False)
    sub.add_argument("--r", type=int, required=True, help="separation scale")
    sub.add_argument("--n", type=int, default=1, help="extra family budget")
    sub.set_defaults(handler=cmd_oracle)

    sub = subs.add_parser("aut", help="symmetries of a graph document")
    _add_common(sub, depth=False)
    sub.set_defaults(handler=cmd_aut)

    sub = subs.add_parser("verify-theorem",
                          help="build, decompose, and certify one document")
    _add_common(sub, radii=True)
    sub.set_defaults(handler=cmd_verify_theorem)

    sub = subs.add_parser("iterate", help="feed each amalgam into the next stage")
    sub.add_argument("--spec", action="append", required=True,
                     help="stage document (repeat per stage, in order)")
    sub.add_argument("--depth", type=int, default=None)
    sub.add_argument("--out", default=None, help="artifact directory")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--exhaustive", action="store_true")
    sub.set_defaults(handler=cmd_iterate)

    sub = subs.add_parser("report", help="tabulate a directory of artifacts")
    sub.add_argument("artifacts", help="directory holding JSON artifacts")
    sub.add_argument("--out", default=None, help="write the table as JSON too")
    sub.set_defaults(handler=cmd_report)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
