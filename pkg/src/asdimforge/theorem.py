"""Certificate engine for the finite-stage dimension bound.

Everything here lives inside one glued truncation H produced by the
builder.  The engine carves H into a central block plus translated
copies, measures the shells where blocks meet, builds boundary covers,
transports them by factor symmetries, and records every measurement in
a fixed-order certificate whose verdicts downstream tooling can
re-audit from the raw numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .amalgam import ROOT, BuildResult, ConnectingTree, SumGraph, copy_vertex
from .covers import (Cover, band_witness, check_rd_dim, greedy_witness,
                     lebesgue_number, multiplicity)
from .errors import PreconditionError
from .graphs import (INF, FiniteGraph, MetricView, QiFit, VertexMap,
                     fit_qi_constants, nearest_point_map)

STRIP_PAIR_CAP = 60


# -- parameters ---------------------------------------------------------------


@dataclass(frozen=True)
class ProofParameters:
    """Radii driving one certificate run.

    ``R`` is the shell radius around the glued core, ``r`` the tree
    radius of one block.  The block radius must be even (so block
    centers land on first-factor nodes) and strictly larger than four
    shell radii (so neighbouring shells cannot touch).  ``margin``
    controls which vertices count as the safe core; it defaults to
    ``r`` so every safe vertex has its full block neighbourhood inside
    the truncation.
    """

    R: int
    r: int
    depth: int
    margin: int | None = None

    def __post_init__(self):
        if self.R < 0:
            raise PreconditionError("shell radius must be nonnegative")
        if self.r < 2 or self.r % 2 != 0:
            raise PreconditionError("block radius must be a positive even number")
        if self.r <= 4 * self.R:
            raise PreconditionError(
                "block radius must exceed four times the shell radius")
        if self.depth < 0:
            raise PreconditionError("truncation depth must be nonnegative")
        if self.margin is not None and self.margin < 0:
            raise PreconditionError("safe-core margin must be nonnegative")

    @property
    def core_margin(self) -> int:
        return self.r if self.margin is None else self.margin

    def require_certificate_grade(self):
        if self.depth < 2 * self.r:
            raise PreconditionError(
                "truncation too shallow: depth must be at least twice the block radius")

    def to_json_dict(self) -> dict:
        return {"R": self.R, "r": self.r, "depth": self.depth,
                "margin": self.core_margin}


def translation_sites(tree: ConnectingTree, params: ProofParameters) -> tuple[str, ...]:
    """Nodes at full block-radius multiples from the root, with room below.

    The root itself is always a site; a deeper node qualifies when a
    whole extra block still fits under it inside the truncation.
    """
    out = [u for u in tree.nodes
           if tree.node_depth(u) % params.r == 0
           and tree.node_depth(u) + params.r <= tree.depth]
    if ROOT not in out:
        out.append(ROOT)
    return tuple(sorted(out, key=lambda u: (tree.node_depth(u), u)))


def safe_nodes(tree: ConnectingTree, params: ProofParameters) -> tuple[str, ...]:
    keep = tree.depth - params.core_margin
    return tuple(u for u in tree.nodes if tree.node_depth(u) <= keep)


def safe_vertices(h: SumGraph, params: ProofParameters) -> frozenset[str]:
    return h.vertices_over(safe_nodes(h.tree, params))


# -- strata and strips --------------------------------------------------------


def strata(h: SumGraph, t: str, m: int) -> tuple[MetricView, MetricView]:
    """Ambient views of the copies exactly / at most m tree-steps from t."""
    h.tree.require_node(t)
    if m < 0:
        raise PreconditionError("stratum index must be nonnegative")
    at = h.tree.nodes_at(t, m)
    if not at:
        raise PreconditionError(f"stratum {m} around {t!r} lies beyond the truncation")
    exact = MetricView(h.graph, sorted(h.vertices_over(at)))
    within = MetricView(h.graph, sorted(h.vertices_over(h.tree.nodes_within(t, m))))
    return exact, within


def _path_toward(tree: ConnectingTree, a: str, b: str) -> list[str]:
    """Tree nodes from a to b, endpoints included."""
    up_a = [a]
    while tree.parent.get(up_a[-1]) is not None:
        up_a.append(tree.parent[up_a[-1]])
    up_b = [b]
    while tree.parent.get(up_b[-1]) is not None:
        up_b.append(tree.parent[up_b[-1]])
    on_a = set(up_a)
    meet = next(x for x in up_b if x in on_a)
    head = up_a[:up_a.index(meet) + 1]
    tail = up_b[:up_b.index(meet)]
    return head + tail[::-1]


@dataclass(frozen=True)
class LemmaStrip:
    """One stratum-to-stratum collapse check around a tree node."""

    site: str
    index: int
    radius: int
    strip_size: int
    below_empty: bool
    fit: QiFit | None
    separations: tuple[tuple[str, str, int | float], ...]
    min_separation: int | float

    @property
    def ok(self) -> bool:
        if self.below_empty:
            return False
        if self.fit is None or not self.fit.feasible:
            return False
        return self.min_separation > self.radius

    def to_json_dict(self) -> dict:
        return {
            "site": self.site,
            "index": self.index,
            "radius": self.radius,
            "strip_size": self.strip_size,
            "below_empty": self.below_empty,
            "fit": None if self.fit is None else self.fit.to_json_dict(),
            "separations": [[u, v, d] for u, v, d in self.separations],
            "min_separation": self.min_separation,
            "ok": self.ok,
        }


def lemma_strip(h: SumGraph, t: str, m: int, r: int) -> LemmaStrip:
    """Check that stratum m collapses onto stratum m-1 with small distortion.

    The strip is the part of stratum m within distance r of stratum
    m-1; it is retracted by the nearest-point map and the distortion
    table recorded.  Additionally, distinct copies inside stratum m
    must stay far apart once their pivot copy (the first node both
    tree paths toward t share) is deleted: the construction needs
    every connection between them to run through that pivot.
    """
    if m < 1:
        raise PreconditionError("strip index must be at least 1")
    if r < 1:
        raise PreconditionError("strip radius must be positive")
    exact, _ = strata(h, t, m)
    below_nodes = h.tree.nodes_at(t, m - 1)
    below = sorted(h.vertices_over(below_nodes))
    H = h.graph
    if not below:
        return LemmaStrip(t, m, r, 0, True, None, (), INF)
    reach = H.distances_to_set(below)
    strip = sorted(v for v in exact.points if reach.get(v, INF) <= r)
    fit = None
    if strip:
        fit = fit_qi_constants(nearest_point_map(
            MetricView(H, strip), MetricView(H, below)))
    nodes = sorted(h.tree.nodes_at(t, m))
    pairs = [(nodes[i], nodes[j])
             for i in range(len(nodes)) for j in range(i + 1, len(nodes))]
    if len(pairs) > STRIP_PAIR_CAP:
        step = len(pairs) / STRIP_PAIR_CAP
        pairs = [pairs[int(i * step)] for i in range(STRIP_PAIR_CAP)]
    seps = []
    lowest = INF
    for u, v in pairs:
        path_u = _path_toward(h.tree, u, t)
        on_v = set(_path_toward(h.tree, v, t))
        pivot = next(x for x in path_u if x in on_v)
        cut = set(h.copy_vertices(pivot))
        keep = [x for x in H.vertices if x not in cut]
        sub = H.induced(keep)
        a = [x for x in h.copy_vertices(u) if x in sub.vertex_set]
        b = [x for x in h.copy_vertices(v) if x in sub.vertex_set]
        d = sub.set_distance(a, b)
        seps.append((u, v, d))
        lowest = min(lowest, d)
    return LemmaStrip(t, m, r, len(strip), False, fit, tuple(seps), lowest)


# -- blocks -------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    """A named vertex set with its own edge list (not always induced)."""

    name: str
    vertices: frozenset[str]
    edges: tuple[tuple[str, str], ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def view(self, ambient: FiniteGraph) -> MetricView:
        return MetricView(ambient, sorted(self.vertices))

    def to_json_dict(self) -> dict:
        return {"name": self.name, "vertices": len(self.vertices),
                "edges": len(self.edges)}


def _edges_inside(graph: FiniteGraph, members: frozenset[str]) -> tuple[tuple[str, str], ...]:
    return tuple((a, b) for a, b in graph.edges if a in members and b in members)


@dataclass(frozen=True)
class BaseBlocks:
    """Core, shell, and the untranslated blocks around the root copy."""

    core: frozenset[str]
    shell: frozenset[str]
    w0: Block
    u_r: Block
    w_r: Block
    core_fit: QiFit | None
    shell_fit: QiFit | None


def base_blocks(br: BuildResult, params: ProofParameters) -> BaseBlocks:
    """Carve the root block out of the glued truncation.

    The core is the union of representative boundary copies at the
    root.  The main block takes everything over the tree ball of
    radius r-1 that stays R away from the core, plus, for each node at
    tree distance exactly r, the part of its copy within ambient
    distance R of the recentering map's image of the core -- exactly
    the material the block recentered at that node leaves out.  The
    working block then forgets edges running inside the shell, so that
    translated blocks can only interface through shell material.

    Frontier nodes therefore need recentering maps; the same
    precondition failures as ``build_symmetry_map`` apply when the
    symmetry data cannot be transported that far.
    """
    h, tree, H = br.sum, br.tree, br.sum.graph
    R, r = params.R, params.r
    pieces = [h.adhesion_copy(ROOT, k) for k in br.reps1]
    if not pieces:
        raise PreconditionError("no representative boundary copies at the root")
    core = frozenset().union(*pieces)
    shell = H.shell(core, R)
    reach = H.distances_to_set(core)
    main = {v for v in h.vertices_over(tree.nodes_within(ROOT, r - 1))
            if reach.get(v, INF) >= R}
    fringe: set[str] = set()
    for v in tree.nodes_at(ROOT, r):
        if tree.node_side[v] != 1:
            raise PreconditionError(
                "fringe nodes must carry the first factor; is the block radius even?")
        anchor, _ = build_symmetry_map(br, v).carry(core)
        fringe |= H.ball(anchor, R) & frozenset(h.copy_vertices(v))
    u_vertices = frozenset(main) | fringe
    u_edges = _edges_inside(H, u_vertices)
    w_edges = tuple(e for e in u_edges
                    if not (e[0] in shell and e[1] in shell))
    w0_vertices = H.ball(core, R)
    w0 = Block("W0", w0_vertices, _edges_inside(H, w0_vertices))
    core_view = MetricView(H, sorted(core))
    core_fit = fit_qi_constants(nearest_point_map(
        MetricView(H, sorted(w0_vertices)), core_view))
    shell_fit = None
    if shell:
        shell_fit = fit_qi_constants(nearest_point_map(
            MetricView(H, sorted(shell)), core_view))
    return BaseBlocks(core, shell, w0,
                      Block("U", u_vertices, u_edges),
                      Block("W", u_vertices, w_edges),
                      core_fit, shell_fit)


# -- symmetry transport -------------------------------------------------------


@dataclass(frozen=True)
class SymmetryMap:
    """A label-respecting partial isomorphism recentering the picture at a site.

    ``node_map`` sends tree nodes near the root to tree nodes near the
    site; ``vertex_map`` refines it vertex-by-vertex using one factor
    symmetry per node.  Nodes whose image would fall outside the
    truncation are simply absent, so the map may be partial.
    """

    site: str
    node_map: Mapping[str, str]
    vertex_map: Mapping[str, str]
    edge_ok: bool
    injective: bool
    detail: str

    def carry(self, vids: Iterable[str]) -> tuple[frozenset[str], int]:
        """Image of a vertex set plus how many inputs fell off the domain."""
        out = set()
        missing = 0
        for v in vids:
            w = self.vertex_map.get(v)
            if w is None:
                missing += 1
            else:
                out.add(w)
        return frozenset(out), missing


def _neighbor_by_label(tree: ConnectingTree, u: str, label: str) -> str | None:
    if tree.return_label(u) == label:
        return tree.parent[u]
    child = f"{u}/{label}"
    return child if child in tree.node_set else None


def build_symmetry_map(br: BuildResult, t: str) -> SymmetryMap:
    """Recenter the root picture at node t, one factor symmetry per node.

    Starting from a symmetry that carries the representative boundary
    set onto the set t enters through, the builder walks the tree:
    across each edge it reads off where the current symmetry sends the
    edge's boundary set, follows the like-labeled edge on the image
    side, and extends the walk with a symmetry of the next factor that
    matches the bonding transfer.  No such symmetry means the declared
    actions cannot support the translation and the builder raises.
    """
    tree, h = br.tree, br.sum
    tree.require_node(t)
    H = h.graph
    actions = (br.spec.action1, br.spec.action2)
    adhesions = (br.spec.adh1, br.spec.adh2)
    if t == ROOT:
        vmap = {v: v for v in H.vertices}
        return SymmetryMap(t, {u: u for u in tree.nodes}, vmap,
                           True, True, "identity")
    if tree.node_side[t] != 1:
        raise PreconditionError("translation sites must carry the first factor")
    m_t = tree.return_label(t)
    rho = br.rep_map1.get(m_t)
    if rho is None:
        raise PreconditionError(f"no orbit representative recorded for label {m_t!r}")
    adh1 = adhesions[0]
    target = adh1[m_t]
    g_root = None
    for g in actions[0]:
        if frozenset(g[x] for x in adh1[rho]) == target:
            g_root = g
            break
    if g_root is None:
        raise PreconditionError(
            f"no factor symmetry carries the {rho!r} boundary set onto the {m_t!r} set")
    node_map: dict[str, str] = {ROOT: t}
    elem: dict[str, Mapping[str, str]] = {ROOT: g_root}
    queue = [ROOT]
    dropped = 0
    while queue:
        u = queue.pop(0)
        g_u = elem[u]
        u_img = node_map[u]
        side_u = tree.node_side[u]
        adh_u = adhesions[side_u - 1]
        for w in tree.children.get(u, ()):
            k = tree.out_label[(u, w)]
            ell = tree.out_label[(w, u)]
            image_set = frozenset(g_u[x] for x in adh_u[k])
            k_img = None
            for lab in adh_u.labels:
                if adh_u[lab] == image_set:
                    k_img = lab
                    break
            if k_img is None:
                raise PreconditionError(
                    "no label-respecting tree map exists: a boundary set's "
                    f"image at {u!r} is not itself a boundary set")
            w_img = _neighbor_by_label(tree, u_img, k_img)
            if w_img is None:
                dropped += 1
                continue
            ell_img = tree.out_label[(w_img, u_img)]
            beta = br.spec.atlas.map_for(k, ell)
            beta_img = br.spec.atlas.map_for(k_img, ell_img)
            transfer = {beta[x]: beta_img[g_u[x]] for x in adh_u[k]}
            side_w = tree.node_side[w]
            g_w = None
            for cand in actions[side_w - 1]:
                if all(cand[y] == transfer[y] for y in transfer):
                    g_w = cand
                    break
            if g_w is None:
                raise PreconditionError(
                    "consistency witnesses missing: no factor symmetry "
                    f"extends the bonding transfer into {w!r}")
            node_map[w] = w_img
            elem[w] = g_w
            queue.append(w)
    vmap: dict[str, str] = {}
    for u, u_img in node_map.items():
        g_u = elem[u]
        side = tree.node_side[u]
        for x in h.factors[side - 1].vertices:
            vmap[copy_vertex(u, x)] = copy_vertex(u_img, g_u[x])
    injective = len(set(vmap.values())) == len(vmap)
    edge_ok = True
    detail = f"mapped {len(node_map)} nodes, skipped {dropped} truncated subtrees"
    for a, b in H.edges:
        fa = vmap.get(a)
        fb = vmap.get(b)
        if fa is None or fb is None:
            continue
        if fb not in H.adjacency[fa]:
            edge_ok = False
            detail = f"edge ({a}, {b}) maps to a non-edge ({fa}, {fb})"
            break
    return SymmetryMap(t, node_map, vmap, edge_ok, injective, detail)


# -- partition ----------------------------------------------------------------


def _ordered(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class PartitionData:
    """Translated blocks plus the shells where they are allowed to meet."""

    members: tuple[Block, ...]
    shells: Mapping[str, frozenset[str]]
    shell_union: frozenset[str]
    safe: frozenset[str]
    missing: frozenset[str]
    overlap_faults: tuple[tuple[str, str], ...]
    boundary_matches_shells: bool

    @property
    def covers_safe(self) -> bool:
        return not self.missing

    @property
    def interiors_disjoint(self) -> bool:
        return not self.overlap_faults


def assemble_partition(br: BuildResult, params: ProofParameters,
                       base: BaseBlocks,
                       maps: Iterable[SymmetryMap]) -> PartitionData:
    """Translate the working block to every site and audit the result.

    Coverage is demanded only on the safe core.  Every pairwise block
    overlap must sit inside the union of translated shells; that is
    exactly the statement that block interiors are pairwise disjoint.
    """
    h, tree, H = br.sum, br.tree, br.sum.graph
    members = [base.w0]
    shells: dict[str, frozenset[str]] = {}
    for sm in maps:
        region = h.vertices_over(tree.separated_region(sm.site))
        image = {}
        for v in base.w_r.vertices:
            w = sm.vertex_map.get(v)
            if w is not None and w in region:
                image[v] = w
        verts = frozenset(image.values())
        edges = tuple(sorted(_ordered(image[a], image[b])
                             for a, b in base.w_r.edges
                             if a in image and b in image))
        members.append(Block(f"W@{sm.site}", verts, edges))
        shell_img, _ = sm.carry(base.shell)
        shells[sm.site] = shell_img & region
    shell_union = frozenset().union(*shells.values()) if shells else frozenset()
    safe = safe_vertices(h, params)
    covered = frozenset().union(*(b.vertices for b in members))
    missing = safe - covered
    faults = []
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            meet = members[i].vertices & members[j].vertices
            if meet - shell_union:
                faults.append((members[i].name, members[j].name))
    boundary_union = frozenset().union(
        *(H.boundary(s) for s in shells.values() if s)) if shells else frozenset()
    return PartitionData(tuple(members), shells, shell_union, safe,
                         missing, tuple(faults),
                         boundary_union == shell_union)


@dataclass(frozen=True)
class SeparationReport:
    """Pairwise ambient distances between translated shells."""

    pairs: tuple[tuple[str, str, int | float], ...]
    min_distance: int | float
    empty_sites: tuple[str, ...]

    def all_beyond(self, bound: int) -> bool:
        return self.min_distance > bound

    def all_at_least(self, bound: int) -> bool:
        return self.min_distance >= bound

    def to_json_dict(self) -> dict:
        return {"pairs": [[a, b, d] for a, b, d in self.pairs],
                "min_distance": self.min_distance,
                "empty_sites": list(self.empty_sites)}


def verify_separation(H: FiniteGraph, shells: Mapping[str, frozenset[str]]) -> SeparationReport:
    sites = sorted(shells)
    live = [s for s in sites if shells[s]]
    empty = tuple(s for s in sites if not shells[s])
    pairs = []
    lowest = INF
    for i in range(len(live)):
        for j in range(i + 1, len(live)):
            d = H.set_distance(shells[live[i]], shells[live[j]])
            pairs.append((live[i], live[j], d))
            lowest = min(lowest, d)
    return SeparationReport(tuple(pairs), lowest, empty)


def theorem_bound(factor1_dim: int, factor2_dim: int, adhesion_dim: int) -> int:
    """Dimension bound the construction certifies from the declared inputs."""
    for value in (factor1_dim, factor2_dim, adhesion_dim):
        if value < 0:
            raise PreconditionError("declared dimensions must be nonnegative")
    return max(factor1_dim, factor2_dim, adhesion_dim + 1)


# -- certificate --------------------------------------------------------------


@dataclass(frozen=True)
class Stage:
    name: str
    verdict: bool
    data: dict

    def to_json_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "data": self.data}


@dataclass(frozen=True)
class TheoremCertificate:
    """Fixed-order audit trail for one block-decomposition run."""

    name: str
    params: ProofParameters
    n: int
    declared: dict
    seed: int
    stages: tuple[Stage, ...]
    bound: int
    verdict: str

    def passed(self) -> bool:
        return self.verdict == "PASS"

    def stage(self, name: str) -> Stage:
        for st in self.stages:
            if st.name == name:
                return st
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.params.to_json_dict(),
            "target_families": self.n,
            "declared_dimensions": dict(sorted(self.declared.items())),
            "seed": self.seed,
            "stage_order": [st.name for st in self.stages],
            "stages": {st.name: st.to_json_dict() for st in self.stages},
            "bound": self.bound,
            "verdict": self.verdict,
        }


def _fit_entry(fit: QiFit | None) -> dict | None:
    return None if fit is None else fit.to_json_dict()


def _fit_small(fit: QiFit | None, cap: int) -> bool:
    """Feasible with additive error at most cap (on top of exactness elsewhere)."""
    if fit is None or not fit.feasible:
        return False
    return fit.c <= cap


def _witness_for(view: MetricView, r: int, n: int):
    """Greedy block witness with the always-valid banded fallback."""
    g = greedy_witness(view, r, n)
    if g.ok:
        return g.witness, "block-greedy"
    return band_witness(view, r, n), "distance-bands"


def run_certificate(br: BuildResult, params: ProofParameters,
                    seed: int = 0) -> TheoremCertificate:
    """Instantiate the whole block construction and measure every claim.

    Stages run in a fixed order and later stages consume earlier
    results, so a structural failure early on shows up as explicit
    short-circuit verdicts rather than exceptions.  The final verdict
    is PASS exactly when every stage verdict holds.
    """
    params.require_certificate_grade()
    if params.depth != br.tree.depth:
        raise PreconditionError("parameters disagree with the built truncation depth")
    h, tree, H = br.sum, br.tree, br.sum.graph
    decl = br.spec.declared_asdim
    n = theorem_bound(decl.get("factor1", 0), decl.get("factor2", 0),
                      decl.get("adhesion", 0))
    R, r = params.R, params.r
    sites = translation_sites(tree, params)
    stages: list[Stage] = []

    stages.append(Stage("parameters", True, {
        "R": R, "r": r, "depth": params.depth, "margin": params.core_margin,
        "sites": list(sites), "safe_nodes": len(safe_nodes(tree, params)),
        "target_families": n, "seed": seed, "sampling": "exhaustive",
    }))

    base = base_blocks(br, params)
    base_ok = (bool(base.shell)
               and _fit_small(base.core_fit, R)
               and _fit_small(base.shell_fit, R))
    stages.append(Stage("base_blocks", base_ok, {
        "core_size": len(base.core),
        "shell_size": len(base.shell),
        "w0": base.w0.to_json_dict(),
        "u_block": base.u_r.to_json_dict(),
        "w_block": base.w_r.to_json_dict(),
        "shell_edges_removed": len(base.u_r.edges) - len(base.w_r.edges),
        "core_fit": _fit_entry(base.core_fit),
        "shell_fit": _fit_entry(base.shell_fit),
    }))

    maps = [build_symmetry_map(br, t) for t in sites]
    maps_ok = all(sm.edge_ok and sm.injective for sm in maps)
    stages.append(Stage("symmetry_maps", maps_ok, {
        "per_site": {sm.site: {"nodes": len(sm.node_map),
                               "vertices": len(sm.vertex_map),
                               "edge_ok": sm.edge_ok,
                               "injective": sm.injective,
                               "detail": sm.detail}
                     for sm in maps},
    }))

    part = assemble_partition(br, params, base, maps)
    stages.append(Stage("partition", part.covers_safe and part.interiors_disjoint, {
        "members": {b.name: b.to_json_dict() for b in part.members},
        "member_vertices": {b.name: sorted(b.vertices) for b in part.members},
        "safe_vertices": len(part.safe),
        "missing": sorted(part.missing),
        "overlap_faults": [list(p) for p in part.overlap_faults],
        "shell_union_size": len(part.shell_union),
        "boundary_matches_shells": part.boundary_matches_shells,
    }))

    uniform_rows = {}
    uniform_ok = True
    common_bound: int | float = 0
    for b in part.members:
        if not b.vertices:
            uniform_rows[b.name] = {"strategy": "none", "valid": False,
                                    "detail": "empty block"}
            uniform_ok = False
            continue
        w, strategy = _witness_for(b.view(H), r, n)
        problems = w.violations()
        valid = not problems and len(w.families) == n + 1
        uniform_rows[b.name] = {"strategy": strategy, "bound": w.bound,
                                "families": len(w.families), "valid": valid}
        if problems:
            uniform_rows[b.name]["problems"] = problems
        uniform_ok = uniform_ok and valid
        common_bound = max(common_bound, w.bound)
    stages.append(Stage("uniform_asdim_blocks", uniform_ok, {
        "per_block": uniform_rows,
        "common_bound": common_bound,
        "scale": r,
        "families": n + 1,
    }))

    boundary_ok = False
    boundary_data: dict = {"detail": "empty shell"}
    fattened: list[frozenset[str]] = []
    if base.shell:
        shell_view = MetricView(H, sorted(base.shell))
        u_w, strategy = _witness_for(shell_view, 2 * R + 1, max(n - 1, 0))
        raw = [m for fam in u_w.families for m in fam]
        fattened = sorted({frozenset(H.ball(m, R) & base.shell) for m in raw},
                          key=sorted)
        u_cover = Cover(shell_view, fattened)
        u_mult = multiplicity(u_cover)
        boundary_ok = u_mult <= n
        boundary_data = {
            "strategy": strategy,
            "scale": 2 * R + 1,
            "members": len(fattened),
            "member_lists": [sorted(m) for m in fattened],
            "max_diameter": u_cover.max_diameter(),
            "multiplicity": u_mult,
            "lebesgue_paper": lebesgue_number(u_cover, "paper"),
            "lebesgue_standard": lebesgue_number(u_cover, "standard"),
        }
    stages.append(Stage("boundary_cover", boundary_ok, boundary_data))

    transported_ok = False
    trans_data: dict = {"detail": "no boundary cover"}
    z_cover = None
    if fattened and part.shell_union:
        v_members = set(fattened)
        for sm in maps:
            if sm.site == ROOT:
                continue
            shell_t = part.shells[sm.site]
            if not shell_t:
                continue
            for u in fattened:
                img, _ = sm.carry(u)
                piece = img & shell_t
                if piece:
                    v_members.add(piece)
        ordered = sorted(v_members, key=sorted)
        z_view = MetricView(H, sorted(part.shell_union))
        try:
            z_cover = Cover(z_view, ordered)
        except PreconditionError as exc:
            trans_data = {"detail": str(exc), "members": len(ordered)}
        if z_cover is not None:
            v_mult = multiplicity(z_cover)
            transported_ok = v_mult <= n
            trans_data = {
                "members": len(ordered),
                "multiplicity": v_mult,
                "multiplicity_within_strict_budget": v_mult <= n - 1,
                "max_diameter": z_cover.max_diameter(),
            }
    stages.append(Stage("transported_cover", transported_ok, trans_data))

    sep = verify_separation(H, part.shells)
    stages.append(Stage("separation", sep.all_beyond(R), {
        "pairs": [[a, b, d] for a, b, d in sep.pairs],
        "min_distance": sep.min_distance,
        "beyond_shell_radius": sep.all_beyond(R),
        "at_least_triple_radius": sep.all_at_least(3 * R),
        "empty_sites": list(sep.empty_sites),
    }))

    leb_ok = False
    leb_data: dict = {"detail": "no transported cover"}
    leb_paper: int | float | None = None
    if z_cover is not None:
        leb_paper = lebesgue_number(z_cover, "paper")
        leb_standard = lebesgue_number(z_cover, "standard")
        leb_ok = leb_paper > R and leb_standard > R
        leb_data = {"paper": leb_paper, "standard": leb_standard,
                    "threshold": R}
    stages.append(Stage("lebesgue", leb_ok, leb_data))

    rd_ok = False
    rd_data: dict = {"detail": "no transported cover"}
    if z_cover is not None and leb_paper is not None:
        v_mult = multiplicity(z_cover)
        diam = z_cover.max_diameter()
        rd_ok = v_mult <= n and leb_paper > R and diam < INF
        rd_data = {"multiplicity": v_mult, "max_diameter": diam,
                   "lebesgue_paper": leb_paper, "shell_radius": R,
                   "families_budget": n}
        if R >= 1 and diam < INF:
            strict = check_rd_dim(z_cover, R, int(max(diam, 1)), n - 1)
            rd_data["strict_recheck"] = strict
            rd_ok = rd_ok and strict
    stages.append(Stage("rd_dim", rd_ok, rd_data))

    verdict = "PASS" if all(st.verdict for st in stages) else "FAIL"
    return TheoremCertificate(br.spec.name, params, n, dict(decl), seed,
                              tuple(stages),
                              theorem_bound(decl.get("factor1", 0),
                                            decl.get("factor2", 0),
                                            decl.get("adhesion", 0)),
                              verdict)


# -- projection bookkeeping ---------------------------------------------------


def tree_graph(tree: ConnectingTree) -> FiniteGraph:
    """The connecting tree itself as a finite metric graph."""
    return FiniteGraph(list(tree.nodes), list(tree.edges()))


def projection_fit(br: BuildResult, margin: int = 0) -> QiFit:
    """Distortion table of the copy-to-node projection, on the safe core.

    Vertices over nodes deeper than depth minus margin are excluded so
    every measured distance agrees with the untruncated picture.
    """
    if margin < 0:
        raise PreconditionError("margin must be nonnegative")
    tree = br.tree
    keep = [u for u in tree.nodes if tree.node_depth(u) <= tree.depth - margin]
    if not keep:
        raise PreconditionError("margin leaves no safe nodes")
    target = MetricView(tree_graph(tree), list(tree.nodes))
    points = sorted(br.sum.vertices_over(keep))
    source = MetricView(br.sum.graph, points)
    vm = VertexMap(source, target, {v: br.sum.node_of(v) for v in points})
    return fit_qi_constants(vm)
