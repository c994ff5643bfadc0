"""Acceptance gate: one test per shipped guarantee.

Each test prints a single PASS/FAIL line (with its measured runtime)
before asserting, so a bare ``pytest tests/test_acceptance.py -v -s``
reads as a checklist of everything this package promises.
"""

import itertools
import random
import time
from pathlib import Path

import networkx as nx

import asdimforge as af
from asdimforge import cli
from asdimforge.covers import exact_min_bound, exact_min_families
from asdimforge.fixtures import chain_spec_doc, emit_all, next_stage_doc
from asdimforge.jsonio import write_json
from asdimforge.theorem import ProofParameters, run_certificate

from conftest import line_graph


def _report(label: str, ok: bool, elapsed: float, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'} {label} [{elapsed:.2f}s] {detail}".rstrip()
    print(line)
    assert ok, line


# -- 1: exact oracle fixtures ---------------------------------------------------


def test_a1_exact_oracle_fixtures(path10_view):
    t0 = time.monotonic()
    two_families = exact_min_bound(path10_view, 3, 1)
    t_two = time.monotonic() - t0
    t0 = time.monotonic()
    one_family = exact_min_bound(path10_view, 3, 0)
    t_one = time.monotonic() - t0
    ok = (two_families.bound == 1 and one_family.bound == 9
          and t_two < 10 and t_one < 10)
    _report("acceptance-1 exact-oracle-fixtures", ok, t_two + t_one,
            f"bound(r=3,n=1)={two_families.bound} bound(r=3,n=0)={one_family.bound}")


# -- 2: greedy agrees with the oracle on every tiny connected graph --------------


def test_a2_greedy_oracle_agreement():
    t0 = time.monotonic()
    cases = failures = 0
    graphs = 0
    for G in nx.graph_atlas_g():
        n_v = G.number_of_nodes()
        if n_v == 0 or n_v > 7 or not nx.is_connected(G):
            continue
        graphs += 1
        g = af.FiniteGraph([f"v{i}" for i in G.nodes],
                           [(f"v{a}", f"v{b}") for a, b in G.edges])
        space = af.MetricView(g)
        for r in (2, 3):
            cases += 1
            n = exact_min_families(space, r)
            res = af.greedy_witness(space, r, n)
            if not (res.ok and res.witness.violations() == []
                    and res.witness.bound >= exact_min_bound(space, r, n).bound):
                failures += 1
    elapsed = time.monotonic() - t0
    ok = graphs == 996 and failures == 0 and elapsed < 60
    _report("acceptance-2 greedy-oracle-agreement", ok, elapsed,
            f"graphs={graphs} cases={cases} failures={failures}")


# -- 3: projection distortion stays (2, 2) on both shipped examples --------------


def _safe_core_projection(br, margin):
    tree = br.tree
    keep = [u for u in tree.nodes if tree.node_depth(u) <= tree.depth - margin]
    target = af.MetricView(af.tree_graph(tree), list(tree.nodes))
    points = sorted(br.sum.vertices_over(keep))
    source = af.MetricView(br.sum.graph, points)
    return af.VertexMap(source, target, {v: br.sum.node_of(v) for v in points})


def test_a3_projection_distortion_both_examples(chain40, triangle8):
    t0 = time.monotonic()
    rows = []
    ok = True
    for br in (chain40, triangle8):
        fit = af.projection_fit(br, margin=4)
        best = fit.best_within(2)
        direct = af.check_quasi_isometry(_safe_core_projection(br, 4), 2, 2)
        good = (fit.feasible and best is not None
                and best[0] <= 2 and best[1] <= 2 and direct)
        rows.append(f"{br.spec.name}: gamma={best[0]} c={best[1]} recheck={direct}")
        ok = ok and good
    _report("acceptance-3 projection-distortion", ok,
            time.monotonic() - t0, "; ".join(rows))


# -- 4: the flagship certificate, with its four audited sub-claims ---------------


def test_a4_flagship_certificate():
    t0 = time.monotonic()
    br = af.build(af.AmalgamationSpec.from_json_dict(chain_spec_doc(40)))
    n = af.theorem_bound(0, 0, 0)
    cert = run_certificate(br, ProofParameters(R=2, r=10, depth=40))
    stage = {s.name: s for s in cert.stages}
    covers = (stage["partition"].data["missing"] == []
              and stage["partition"].data["overlap_faults"] == [])
    triple = stage["separation"].data["at_least_triple_radius"]
    mult = stage["transported_cover"].data["multiplicity"]
    leb = stage["lebesgue"].data
    elapsed = time.monotonic() - t0
    ok = (cert.verdict == "PASS" and covers and triple and n == 1
          and mult <= n and leb["paper"] > 2 and leb["standard"] > 2
          and elapsed < 60)
    _report("acceptance-4 flagship-certificate", ok, elapsed,
            f"verdict={cert.verdict} covers={covers} separation3R={triple} "
            f"mult={mult}<=n={n} lebesgue={leb['paper']}/{leb['standard']}>2")


# -- 5: strip collapses stay uniformly small on the branching example ------------


def test_a5_strip_collapse_uniform_constants(triangle8):
    t0 = time.monotonic()
    ok = True
    rows = []
    for m in range(1, 5):
        strip = af.lemma_strip(triangle8.sum, "t1", m, 4)
        best = None if strip.fit is None else strip.fit.best_within(2)
        good = strip.ok and best is not None and best[0] <= 2 and best[1] <= 4
        rows.append(f"m={m}: size={strip.strip_size} "
                    f"fit={None if best is None else tuple(map(str, best))}")
        ok = ok and good
    _report("acceptance-5 strip-collapse", ok, time.monotonic() - t0,
            "; ".join(rows))


# -- 6: construction invariants over 1,000 randomized cases ----------------------


def _random_connected_doc(rng, prefix, n_v):
    names = [f"{prefix}{i}" for i in range(n_v)]
    edges = [(names[rng.randrange(i)], names[i]) for i in range(1, n_v)]
    for a, b in itertools.combinations(names, 2):
        if (a, b) not in edges and rng.random() < 0.25:
            edges.append((a, b))
    return {"vertices": names, "edges": [[a, b] for a, b in edges]}


def _random_build_doc(rng, idx):
    f1 = _random_connected_doc(rng, "a", rng.randint(2, 5))
    f2 = _random_connected_doc(rng, "b", rng.randint(2, 5))
    p1, p2 = rng.choice([1, 2]), rng.choice([1, 2])
    s = 2 if (rng.random() < 0.4
              and len(f1["vertices"]) >= 2 * p1
              and len(f2["vertices"]) >= 2 * p2) else 1
    picks1 = rng.sample(f1["vertices"], p1 * s)
    picks2 = rng.sample(f2["vertices"], p2 * s)
    adh1 = {f"s{i}": picks1[i * s:(i + 1) * s] for i in range(p1)}
    adh2 = {f"t{i}": picks2[i * s:(i + 1) * s] for i in range(p2)}
    atlas = []
    for k in adh1:
        for l in adh2:
            image = list(adh2[l])
            rng.shuffle(image)
            atlas.append({"left": k, "right": l,
                          "pairs": [[x, y] for x, y in zip(adh1[k], image)]})
    return {
        "name": f"rand{idx}", "factors": [f1, f2],
        "adhesions": [adh1, adh2], "atlas": atlas,
        "tree": {"p1": p1, "p2": p2, "depth": rng.randint(1, 3)},
        "actions": {"mode": "trivial"},
        "asdim": {"factor1": 0, "factor2": 0, "adhesion": 0},
    }


def _labeling_complete(tree) -> bool:
    for u in tree.nodes:
        if u in tree.frontier:
            continue
        incident = list(tree.children.get(u, ()))
        if tree.parent.get(u):
            incident.append(tree.parent[u])
        seen = sorted(tree.out_label[(u, v)] for v in incident)
        want = tree.labels1 if tree.node_side[u] == 1 else tree.labels2
        if seen != sorted(want):
            return False
    return True


def _atlas_inverse_paired(spec) -> bool:
    report = af.validate_bonding_atlas(spec.atlas, spec.adh1, spec.adh2)
    if not report.ok:
        return False
    for k in spec.adh1.labels:
        for l in spec.adh2.labels:
            fwd = spec.atlas.map_for(k, l)
            back = spec.atlas.map_for(l, k)
            if any(back[y] != x for x, y in fwd.items()):
                return False
    return True


def _orientation_free(br) -> bool:
    spec = br.spec
    fwd = af.build_sum_graph(spec.g1, spec.g2, spec.adh1, spec.adh2,
                             spec.atlas, br.tree)
    rev = af.build_sum_graph(spec.g1, spec.g2, spec.adh1, spec.adh2,
                             spec.atlas, br.tree, flip_orientations=True)
    return fwd.graph.same_as(rev.graph) and fwd.bridges == rev.bridges


def _projection_nonincreasing(br) -> bool:
    H = br.sum.graph
    tg = af.tree_graph(br.tree)
    tree_dist = {u: tg.distances_from(u) for u in br.tree.nodes}
    verts = list(H.vertices)
    for i, u in enumerate(verts):
        du = H.distances_from(u)
        nu = br.sum.node_of(u)
        for v in verts[i + 1:]:
            if tree_dist[nu][br.sum.node_of(v)] > du[v]:
                return False
    return True


def _interior_boundary_partition(br, rng) -> bool:
    H = br.sum.graph
    k = rng.randint(1, len(H.vertices))
    subset = frozenset(rng.sample(list(H.vertices), k))
    inside, edge = H.interior(subset), H.boundary(subset)
    return inside | edge == subset and not (inside & edge)


def test_a6_construction_invariants():
    t0 = time.monotonic()
    rng = random.Random(20260816)
    cases = failures = 0
    for idx in range(200):
        doc = _random_build_doc(rng, idx)
        try:
            br = af.build(af.AmalgamationSpec.from_json_dict(doc))
            checks = (_labeling_complete(br.tree),
                      _atlas_inverse_paired(br.spec),
                      _orientation_free(br),
                      _projection_nonincreasing(br),
                      _interior_boundary_partition(br, rng))
        except Exception:
            checks = (False,) * 5
        cases += len(checks)
        failures += sum(not c for c in checks)
    ok = cases == 1000 and failures == 0
    _report("acceptance-6 construction-invariants", ok, time.monotonic() - t0,
            f"cases={cases} failures={failures}")


# -- 7: witness transport through verified low-distortion maps -------------------


def test_a7_witness_transport_fixtures():
    t0 = time.monotonic()
    source = af.MetricView(line_graph(20))
    target_graph = line_graph(40, prefix="t")
    res = af.greedy_witness(source, 8, 1)
    assert res.ok and len(res.witness.families[0]) == 2
    failures = 0
    for case in range(100):
        rng = random.Random(1000 + case)
        mapping, at = {}, rng.randint(0, 1)
        for i in range(20):
            mapping[f"p{i}"] = f"t{at}"
            at += rng.randint(1, 2)
        vm = af.VertexMap(source, af.MetricView(target_graph), mapping)
        if not af.check_quasi_isometry(vm, 2, 1):
            failures += 1
            continue
        moved = af.transport_witness(res.witness, vm, 2, 1)
        if not (moved.r_out == 3
                and moved.claimed_bound == 2 * res.witness.bound + 1
                and moved.witness.violations() == []):
            failures += 1
    ok = failures == 0
    _report("acceptance-7 witness-transport", ok, time.monotonic() - t0,
            f"fixtures=100 failures={failures} r_out=3")


# -- 8: the full shipped suite is byte-for-byte deterministic --------------------


def _run_shipped_suite(root: Path):
    specs, art = root / "specs", root / "art"
    art.mkdir(parents=True)
    emit_all(specs)
    stage1 = af.build(af.AmalgamationSpec.from_json_dict(chain_spec_doc(6)))
    write_json(specs / "stage2.json", next_stage_doc(stage1))
    runs = [
        ["build", "--spec", str(specs / "chain_k2.json"),
         "--out", str(art / "build_chain_k2.json")],
        ["build", "--spec", str(specs / "c3_k2.json"),
         "--out", str(art / "build_c3_k2.json")],
        ["witness", "--spec", str(specs / "path10.json"), "--r", "3", "--n", "1",
         "--out", str(art / "witness_path10.json")],
        ["oracle", "--spec", str(specs / "path10.json"), "--r", "3", "--n", "1",
         "--out", str(art / "oracle_path10.json")],
        ["aut", "--spec", str(specs / "cycle7.json"),
         "--out", str(art / "aut_cycle7.json")],
        ["verify-theorem", "--spec", str(specs / "chain_k2.json"),
         "--R", "2", "--r", "10", "--out", str(art / "cert_chain_k2.json")],
        ["verify-theorem", "--spec", str(specs / "c3_k2.json"),
         "--R", "0", "--r", "4", "--out", str(art / "cert_c3_k2.json")],
        ["iterate", "--spec", str(specs / "chain_k2.json"),
         "--spec", str(specs / "stage2.json"), "--depth", "6",
         "--out", str(art / "iter")],
        ["report", str(art / "iter"), "--out", str(root / "report.json")],
    ]
    for argv in runs:
        rc = cli.main(argv)
        assert rc == 0, f"suite command failed ({rc}): {argv}"


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_a8_shipped_suite_deterministic(tmp_path):
    t0 = time.monotonic()
    one, two = tmp_path / "run1", tmp_path / "run2"
    _run_shipped_suite(one)
    _run_shipped_suite(two)
    left, right = _tree_bytes(one), _tree_bytes(two)
    same_names = sorted(left) == sorted(right)
    diffs = [name for name in left if same_names and left[name] != right[name]]
    ok = same_names and not diffs and len(left) >= 12
    _report("acceptance-8 deterministic-artifacts", ok, time.monotonic() - t0,
            f"files={len(left)} mismatched={len(diffs)}")
