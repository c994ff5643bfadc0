"""Tree-glued graph construction: labeled trees, sum graphs, contraction.

The pipeline: a finite truncation of a (p1,p2)-semiregular tree carries
one factor copy per node; matched boundary sets of adjacent copies are
joined by bridging edges (the sum graph); contracting every bridging
edge yields the glued graph together with its projection.

Truncations are canonical: node ids are label paths like
``t1/a/x/b`` — each component is the label of the edge leaving the
parent — so two builds of the same input are byte-identical.  The cut
happens at a fixed radius around the root, and downstream checks stay
inside a safe core where the truncation is indistinguishable from the
infinite object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, PreconditionError
from .graphs import FiniteGraph, load_graph
from .groups import (GroupAction, Perm, compose, compute_automorphisms, invert)

ROOT = "t1"
WITNESS_SEARCH_CAP = 10_000


class AdhesionFamily:
    """Labeled boundary sets of one factor graph."""

    def __init__(self, graph: FiniteGraph, sets: Mapping[str, Iterable[str]]):
        self.graph = graph
        self.labels = tuple(sorted(sets))
        if not self.labels:
            raise ConfigError("empty adhesion family")
        packed = {}
        for k in self.labels:
            if "/" in k or ":" in k:
                raise ConfigError(f"adhesion label {k!r} may not contain '/' or ':'")
            members = graph.require_members(sets[k])
            if not members:
                raise ConfigError(f"adhesion set {k!r} is empty")
            packed[k] = members
        self.sets = packed

    def __getitem__(self, label: str) -> frozenset[str]:
        try:
            return self.sets[label]
        except KeyError:
            raise ConfigError(f"unknown adhesion label {label!r}") from None

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def cardinality(self) -> int:
        return len(self.sets[self.labels[0]])

    def to_json_dict(self) -> dict:
        return {k: sorted(v) for k, v in sorted(self.sets.items())}


# -- the connecting tree ----------------------------------------------------


class ConnectingTree:
    """A rooted, edge-labeled truncation of a semiregular bipartite tree.

    ``node_side[u]`` is 1 or 2; ``out_label[(u, v)]`` is the label the
    directed edge u->v consumes at u.  Every non-frontier node uses each
    of its side's labels exactly once across its incident edges.
    """

    def __init__(self, labels1, labels2, depth, nodes, node_side, parent,
                 children, out_label, type2_J=None):
        self.labels1 = labels1
        self.labels2 = labels2
        self.depth = depth
        self.nodes = nodes
        self.node_side = node_side
        self.parent = parent
        self.children = children
        self.out_label = out_label
        self.type2_J = type2_J
        self.node_set = frozenset(nodes)
        self.frontier = frozenset(u for u in nodes if self.node_depth(u) == depth)

    @property
    def p1(self) -> int:
        return len(self.labels1)

    @property
    def p2(self) -> int:
        return len(self.labels2)

    @property
    def second_root(self) -> str | None:
        kids = self.children.get(ROOT, ())
        return kids[0] if kids else None

    def node_depth(self, u: str) -> int:
        return u.count("/")

    def require_node(self, u: str):
        if u not in self.node_set:
            raise PreconditionError(f"unknown tree node {u!r}")

    def edges(self):
        """Parent-child pairs in sorted child order."""
        for u in self.nodes:
            p = self.parent.get(u)
            if p is not None:
                yield (p, u)

    def return_label(self, u: str) -> str | None:
        """Label of the edge from u toward its parent."""
        p = self.parent.get(u)
        if p is None:
            return None
        return self.out_label[(u, p)]

    def entry_label(self, u: str) -> str | None:
        """Label of the edge from u's parent into u."""
        p = self.parent.get(u)
        if p is None:
            return None
        return self.out_label[(p, u)]

    def distance(self, u: str, v: str) -> int:
        self.require_node(u)
        self.require_node(v)
        if u == v:
            return 0
        pu = u.split("/")
        pv = v.split("/")
        common = 0
        for a, b in zip(pu, pv):
            if a != b:
                break
            common += 1
        return (len(pu) - common) + (len(pv) - common)

    def nodes_within(self, center: str, radius: int) -> tuple[str, ...]:
        self.require_node(center)
        return tuple(u for u in self.nodes if self.distance(center, u) <= radius)

    def nodes_at(self, center: str, radius: int) -> tuple[str, ...]:
        self.require_node(center)
        return tuple(u for u in self.nodes if self.distance(center, u) == radius)

    def separated_region(self, t: str) -> frozenset[str]:
        """Nodes that t separates from the root (t's own subtree); all of T for the root."""
        self.require_node(t)
        if t == ROOT:
            return self.node_set
        pref = t + "/"
        return frozenset(u for u in self.nodes if u == t or u.startswith(pref))

    def is_semiregular(self) -> tuple[bool, str]:
        for u in self.nodes:
            if u in self.frontier:
                continue
            want = self.labels1 if self.node_side[u] == 1 else self.labels2
            got = sorted(self.out_label[(u, w)] for w in self._incident(u))
            if got != sorted(want):
                return False, f"node {u!r} uses labels {got}, wanted each of {sorted(want)} once"
        return True, ""

    def _incident(self, u: str):
        out = list(self.children.get(u, ()))
        p = self.parent.get(u)
        if p is not None:
            out.append(p)
        return out

    def to_json_dict(self) -> dict:
        return {
            "p1": self.p1, "p2": self.p2, "depth": self.depth,
            "nodes": list(self.nodes),
            "type2_J": sorted(self.type2_J) if self.type2_J is not None else None,
        }


def build_connecting_tree(p1: int, p2: int, depth: int,
                          type2_J: Iterable[str] | None = None,
                          labels1: Sequence[str] | None = None,
                          labels2: Sequence[str] | None = None) -> ConnectingTree:
    """Truncate the canonical labeled (p1,p2)-semiregular tree at a radius.

    The truncation is the full ball of the given radius around the root,
    which keeps the root at full degree.  Toward its parent a node uses
    the least label still allowed (the least label outright, or the
    least of the forced class when an alternating class set is given);
    the remaining labels go to its children in sorted order.
    """
    if p1 < 1 or p2 < 1:
        raise PreconditionError("need p1, p2 >= 1")
    if depth < 0:
        raise PreconditionError("need depth >= 0")
    labels1 = tuple(labels1) if labels1 is not None else tuple(str(i) for i in range(p1))
    labels2 = tuple(labels2) if labels2 is not None else tuple(str(i) for i in range(p2))
    if len(labels1) != p1 or len(labels2) != p2:
        raise ConfigError("label list length must match the side's degree")
    for k in labels1 + labels2:
        if "/" in k or ":" in k:
            raise ConfigError(f"tree label {k!r} may not contain '/' or ':'")
    J: frozenset[str] | None = None
    if type2_J is not None:
        if p1 != p2 or sorted(labels1) != sorted(labels2):
            raise ConfigError("alternating class sets need equal label sets on both sides")
        J = frozenset(type2_J)
        if not J <= frozenset(labels1):
            raise ConfigError("alternating class escapes the label set")
        if not J or J == frozenset(labels1):
            raise ConfigError("alternating class must be a proper nonempty label subset")

    side_labels = {1: tuple(sorted(labels1)), 2: tuple(sorted(labels2))}
    nodes = [ROOT]
    node_side = {ROOT: 1}
    parent: dict[str, str] = {}
    children: dict[str, tuple[str, ...]] = {}
    out_label: dict[tuple[str, str], str] = {}

    def sprout(u: str, side: int, level: int, toward_parent: str | None):
        mine = side_labels[side]
        if toward_parent is None:
            free = mine
        else:
            if J is None:
                back = mine[0]
            else:
                entry = out_label[(parent[u], u)]
                allowed = sorted(frozenset(mine) - J if entry in J else J)
                if not allowed:
                    raise ConfigError("alternating condition unsatisfiable at a node")
                back = allowed[0]
            out_label[(u, toward_parent)] = back
            free = tuple(k for k in mine if k != back)
        if level == depth:
            children[u] = ()
            return
        kids = []
        other = 2 if side == 1 else 1
        for k in free:
            w = f"{u}/{k}"
            nodes.append(w)
            node_side[w] = other
            parent[w] = u
            out_label[(u, w)] = k
            kids.append(w)
        children[u] = tuple(kids)
        for w in kids:
            sprout(w, other, level + 1, u)

    sprout(ROOT, 1, 0, None)
    nodes.sort()
    return ConnectingTree(tuple(sorted(labels1)), tuple(sorted(labels2)), depth,
                          tuple(nodes), node_side, parent, children, out_label, J)


# -- bonding atlas -----------------------------------------------------------


class BondingAtlas:
    """Bijections between boundary sets, one per stored (left, right) pair.

    ``map_for(k, l)`` resolves either a stored map or the inverse of the
    reverse entry, so orientation never matters to callers.
    """

    def __init__(self, entries: Mapping[tuple[str, str], Mapping[str, str]]):
        self.entries = {pair: dict(m) for pair, m in entries.items()}

    def pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self.entries))

    def has(self, k: str, l: str) -> bool:
        return (k, l) in self.entries or (l, k) in self.entries

    def map_for(self, k: str, l: str) -> dict[str, str]:
        if (k, l) in self.entries:
            return dict(self.entries[(k, l)])
        if (l, k) in self.entries:
            return invert(self.entries[(l, k)])
        raise ConfigError(f"no bonding map between labels {k!r} and {l!r}")

    @classmethod
    def from_json_list(cls, doc: Sequence[Mapping]) -> "BondingAtlas":
        entries = {}
        for item in doc:
            try:
                k, l = str(item["left"]), str(item["right"])
                pairs = item["pairs"]
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"malformed atlas entry: {exc}") from exc
            m = {}
            for xy in pairs:
                if len(xy) != 2:
                    raise ConfigError(f"malformed atlas pair {xy!r}")
                x, y = str(xy[0]), str(xy[1])
                if x in m:
                    raise ConfigError(f"atlas entry ({k!r},{l!r}) maps {x!r} twice")
                m[x] = y
            if (k, l) in entries:
                raise ConfigError(f"duplicate atlas entry ({k!r},{l!r})")
            entries[(k, l)] = m
        return cls(entries)

    def to_json_list(self) -> list:
        return [{"left": k, "right": l,
                 "pairs": [[x, self.entries[(k, l)][x]] for x in sorted(self.entries[(k, l)])]}
                for k, l in self.pairs()]


@dataclass(frozen=True)
class AtlasReport:
    ok: bool
    problems: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {"ok": self.ok, "problems": list(self.problems)}


def validate_bonding_atlas(atlas: BondingAtlas, adh1: AdhesionFamily,
                           adh2: AdhesionFamily,
                           type2_J: frozenset[str] | None = None) -> AtlasReport:
    """Check bijectivity, inverse pairing, cardinalities, and pair coverage.

    Violations are collected into the report rather than raised, so a
    bad atlas can be inspected wholesale.
    """
    problems = []
    card = {len(s) for s in adh1.sets.values()} | {len(s) for s in adh2.sets.values()}
    if len(card) > 1:
        problems.append(f"adhesion sets have mixed cardinalities {sorted(card)}")
    for (k, l), m in sorted(atlas.entries.items()):
        try:
            src = adh1[k] if k in adh1.sets else adh2[k]
            dst = adh2[l] if l in adh2.sets else adh1[l]
        except ConfigError as exc:
            problems.append(str(exc))
            continue
        if set(m) != set(src):
            problems.append(f"map ({k!r},{l!r}) domain differs from the {k!r} set")
        vals = list(m.values())
        if len(set(vals)) != len(vals) or set(vals) != set(dst):
            problems.append(f"map ({k!r},{l!r}) is not onto the {l!r} set")
        if (l, k) in atlas.entries:
            if atlas.entries[(l, k)] != invert(m):
                problems.append(f"maps ({k!r},{l!r}) and ({l!r},{k!r}) are not mutually inverse")
    if type2_J is None:
        wanted = [(k, l) for k in adh1.labels for l in adh2.labels]
    else:
        labels = adh1.labels
        wanted = [(k, l) for k in labels for l in labels
                  if (k in type2_J) != (l in type2_J)]
    for k, l in wanted:
        if not atlas.has(k, l):
            problems.append(f"missing bonding map between {k!r} and {l!r}")
    return AtlasReport(not problems, tuple(problems))


# -- sum graph ---------------------------------------------------------------


def copy_vertex(node: str, orig: str) -> str:
    return f"{node}:{orig}"


def split_copy_vertex(vid: str) -> tuple[str, str]:
    node, _, orig = vid.partition(":")
    return node, orig


class SumGraph:
    """Disjoint factor copies on the tree nodes plus bridging edges."""

    def __init__(self, graph: FiniteGraph, tree: ConnectingTree,
                 factors: tuple[FiniteGraph, FiniteGraph],
                 adhesions: tuple[AdhesionFamily, AdhesionFamily],
                 bridges: tuple[tuple[str, str], ...]):
        self.graph = graph
        self.tree = tree
        self.factors = factors
        self.adhesions = adhesions
        self.bridges = bridges
        self.bridge_set = frozenset(bridges)

    def node_of(self, vid: str) -> str:
        return split_copy_vertex(vid)[0]

    def origin_of(self, vid: str) -> str:
        return split_copy_vertex(vid)[1]

    def copy_vertices(self, node: str) -> tuple[str, ...]:
        self.tree.require_node(node)
        side = self.tree.node_side[node]
        return tuple(copy_vertex(node, x) for x in self.factors[side - 1].vertices)

    def adhesion_copy(self, node: str, label: str) -> frozenset[str]:
        self.tree.require_node(node)
        side = self.tree.node_side[node]
        return frozenset(copy_vertex(node, x) for x in self.adhesions[side - 1][label])

    def project_to_tree(self, vids: Iterable[str]) -> frozenset[str]:
        return frozenset(self.node_of(v) for v in vids)

    def vertices_over(self, nodes: Iterable[str]) -> frozenset[str]:
        nodes = frozenset(nodes)
        return frozenset(v for v in self.graph.vertices if self.node_of(v) in nodes)


def build_sum_graph(g1: FiniteGraph, g2: FiniteGraph, adh1: AdhesionFamily,
                    adh2: AdhesionFamily, atlas: BondingAtlas,
                    tree: ConnectingTree, flip_orientations: bool = False) -> SumGraph:
    """Lay one factor copy on each tree node and bridge adjacent copies.

    For a tree edge whose side-1 end sends label k and side-2 end sends
    label l, each vertex x in the side-1 copy's k-set is joined to the
    (k,l)-map image of x in the side-2 copy.  ``flip_orientations``
    builds every bridge from the side-2 end instead; because stored and
    reverse maps are mutually inverse the edge set must come out equal,
    and tests pin that down.
    """
    if sorted(adh1.labels) != sorted(tree.labels1) or sorted(adh2.labels) != sorted(tree.labels2):
        raise ConfigError("tree labels differ from adhesion labels")
    factors = (g1, g2)
    vertices = []
    edges = []
    annotations = {}
    for node in tree.nodes:
        g = factors[tree.node_side[node] - 1]
        for x in g.vertices:
            vid = copy_vertex(node, x)
            vertices.append(vid)
            annotations[vid] = {"node": node, "origin": x}
        for x, y in g.edges:
            edges.append((copy_vertex(node, x), copy_vertex(node, y)))
    bridges = []
    for u, v in tree.edges():
        one, two = (u, v) if tree.node_side[u] == 1 else (v, u)
        k = tree.out_label[(one, two)]
        l = tree.out_label[(two, one)]
        if flip_orientations:
            m = atlas.map_for(l, k)
            for x in sorted(adh2[l]):
                bridges.append((copy_vertex(two, x), copy_vertex(one, m[x])))
        else:
            m = atlas.map_for(k, l)
            for x in sorted(adh1[k]):
                bridges.append((copy_vertex(one, x), copy_vertex(two, m[x])))
    graph = FiniteGraph(vertices, edges + bridges, annotations=annotations)
    canon = tuple(sorted((a, b) if a <= b else (b, a) for a, b in bridges))
    return SumGraph(graph, tree, factors, (adh1, adh2), canon)


# -- contraction --------------------------------------------------------------


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: str, y: str):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


class AmalgamGraph:
    """The contraction of a sum graph along its bridging edges."""

    def __init__(self, graph: FiniteGraph, sum_graph: SumGraph,
                 projection: dict[str, str], fibers: dict[str, frozenset[str]]):
        self.graph = graph
        self.sum = sum_graph
        self.projection = projection
        self.fibers = fibers

    def project(self, vid: str) -> str:
        try:
            return self.projection[vid]
        except KeyError:
            raise PreconditionError(f"unknown sum-graph vertex {vid!r}") from None

    def project_set(self, vids: Iterable[str]) -> frozenset[str]:
        return frozenset(self.project(v) for v in vids)

    def fiber(self, amid: str) -> frozenset[str]:
        try:
            return self.fibers[amid]
        except KeyError:
            raise PreconditionError(f"unknown glued vertex {amid!r}") from None

    def preimage(self, amids: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for a in amids:
            out |= self.fiber(a)
        return frozenset(out)

    def identification_nodes(self, amid: str) -> frozenset[str]:
        return frozenset(self.sum.node_of(v) for v in self.fiber(amid))

    def tree_projection(self, amid: str) -> str:
        """Least tree node carrying the fiber (the canonical tree tag)."""
        return min(self.identification_nodes(amid))


def contract_to_amalgam(h: SumGraph) -> AmalgamGraph:
    """Contract every bridging edge; fibers become the glued vertices.

    Contraction of a simple graph can create loops and parallel edges;
    both are dropped (loops cannot actually occur here because each
    fiber meets every copy at most once, and edge de-duplication is a
    set union).  Each glued vertex is named after its least member.
    """
    uf = _UnionFind(h.graph.vertices)
    for a, b in h.bridges:
        uf.union(a, b)
    fibers: dict[str, set[str]] = {}
    for v in h.graph.vertices:
        fibers.setdefault(uf.find(v), set()).add(v)
    projection = {}
    packed = {}
    for root, members in fibers.items():
        amid = min(members)
        packed[amid] = frozenset(members)
        for v in members:
            projection[v] = amid
    edges = set()
    for x, y in h.graph.edges:
        px, py = projection[x], projection[y]
        if px != py:
            edges.add((px, py) if px <= py else (py, px))
    annotations = {amid: {"fiber_size": len(members)}
                   for amid, members in packed.items()}
    graph = FiniteGraph(sorted(packed), sorted(edges), annotations=annotations)
    return AmalgamGraph(graph, h, projection, packed)


def identification_sizes(a: AmalgamGraph) -> tuple[dict[str, int], int]:
    """Per glued vertex, how many tree nodes its fiber spans; plus the max."""
    sizes = {amid: len(a.identification_nodes(amid)) for amid in a.graph.vertices}
    return sizes, max(sizes.values(), default=0)


def check_trivial(a: AmalgamGraph) -> bool:
    """True when one copy already surjects onto the glued graph."""
    total = len(a.graph)
    for node in a.sum.tree.nodes:
        copy = a.sum.copy_vertices(node)
        if len(copy) != total:
            continue
        if len({a.project(v) for v in copy}) == total:
            return True
    return False


# -- action-respecting checks -------------------------------------------------


def select_orbit_representatives(adhesions: AdhesionFamily,
                                 action: GroupAction) -> tuple[tuple[str, ...], dict[str, str]]:
    """One least-label representative per orbit of boundary sets.

    The group must permute the family setwise; two labels with the same
    underlying set share every orbit.  Returns the representative labels
    and a label -> representative map.
    """
    if action.graph is not adhesions.graph and action.graph.vertices != adhesions.graph.vertices:
        raise PreconditionError("action and adhesion family live on different graphs")
    set_of = {k: adhesions[k] for k in adhesions.labels}
    all_sets = set(set_of.values())
    for p in action.elements:
        for k in adhesions.labels:
            img = frozenset(p[v] for v in set_of[k])
            if img not in all_sets:
                raise PreconditionError(
                    f"group element moves the {k!r} set off the adhesion family")
    rep_of: dict[str, str] = {}
    for k in adhesions.labels:
        if k in rep_of:
            continue
        orbit_sets = action.set_orbit(set_of[k])
        orbit_labels = sorted(l for l in adhesions.labels if set_of[l] in orbit_sets)
        rep = orbit_labels[0]
        for l in orbit_labels:
            rep_of[l] = rep
    reps = tuple(sorted(set(rep_of.values())))
    return reps, rep_of


def _search_cap(action: GroupAction):
    if len(action) > WITNESS_SEARCH_CAP:
        raise PreconditionError(
            f"witness search capped at group order {WITNESS_SEARCH_CAP}")


def check_consistent(atlas: BondingAtlas, target_action: GroupAction,
                     target_adhesions: AdhesionFamily,
                     k: str, l: str, l2: str) -> Perm | None:
    """Find a target-side group element sending the (k,l2)-map to the (k,l)-map.

    Exhaustive over the group: returns the first element (in canonical
    order) whose composition with the (k,l2)-map equals the (k,l)-map
    on the whole k-set, or None.
    """
    _search_cap(target_action)
    m1 = atlas.map_for(k, l)
    m2 = atlas.map_for(k, l2)
    for lab in (l, l2):
        if lab not in target_adhesions.sets:
            raise ConfigError(f"label {lab!r} is not on the target side")
    for p in target_action.elements:
        if all(p[m2[x]] == m1[x] for x in m2):
            return dict(p)
    return None


@dataclass(frozen=True)
class RespectsWitness:
    label_permutation: dict[str, str]
    per_label: dict[str, tuple[str, Perm]]


def _set_image(p: Perm, members: frozenset[str]) -> frozenset[str]:
    return frozenset(p[v] for v in members)


def check_respects(gamma: Perm, atlas: BondingAtlas,
                   own_adhesions: AdhesionFamily, other_adhesions: AdhesionFamily,
                   other_action: GroupAction) -> RespectsWitness | None:
    """Witness that one factor automorphism is compatible with the gluing data.

    Searches for a permutation of the factor's labels matching where
    gamma moves each boundary set, and, per label k, for a partner
    label l and a stabilizer element tau with
    ``map(k,l) = tau . map(pi(k),l) . gamma`` on the k-set.  Equal
    boundary sets make the label permutation ambiguous, so candidates
    are tried by backtracking; the first full witness wins.
    """
    _search_cap(other_action)
    labels = own_adhesions.labels
    candidates: dict[str, list[str]] = {}
    for k in labels:
        img = _set_image(gamma, own_adhesions[k])
        cands = [l for l in labels if own_adhesions[l] == img]
        if not cands:
            return None
        candidates[k] = cands

    stab_cache: dict[str, GroupAction] = {}

    def stab(l: str) -> GroupAction:
        if l not in stab_cache:
            stab_cache[l] = other_action.setwise_stabilizer(other_adhesions[l])
        return stab_cache[l]

    def partner_for(k: str, pk: str) -> tuple[str, Perm] | None:
        for l in other_adhesions.labels:
            if not (atlas.has(k, l) and atlas.has(pk, l)):
                continue
            mkl = atlas.map_for(k, l)
            mpkl = atlas.map_for(pk, l)
            want = {x: mkl[x] for x in own_adhesions[k]}
            base = {x: mpkl[gamma[x]] for x in own_adhesions[k]}
            for tau in stab(l).elements:
                if all(tau[base[x]] == want[x] for x in base):
                    return l, dict(tau)
        return None

    order = sorted(labels)

    def assign(idx: int, pi: dict[str, str], used: set[str],
               found: dict[str, tuple[str, Perm]]) -> RespectsWitness | None:
        if idx == len(order):
            return RespectsWitness(dict(pi), dict(found))
        k = order[idx]
        for pk in candidates[k]:
            if pk in used:
                continue
            partner = partner_for(k, pk)
            if partner is None:
                continue
            pi[k] = pk
            used.add(pk)
            found[k] = partner
            hit = assign(idx + 1, pi, used, found)
            if hit is not None:
                return hit
            del pi[k]
            used.discard(pk)
            del found[k]
        return None

    return assign(0, {}, set(), {})


@dataclass(frozen=True)
class TypeReport:
    classification: str  # "type1" | "type2" | "neither"
    checks: tuple[tuple[str, bool, str], ...]

    def passed(self, name: str) -> bool:
        for n, ok, _ in self.checks:
            if n == name:
                return ok
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {"classification": self.classification,
                "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in self.checks]}


def _consistency_check(atlas: BondingAtlas, action: GroupAction,
                       adhesions: AdhesionFamily, sources: Sequence[str],
                       targets: Sequence[str]) -> tuple[bool, str]:
    """All maps out of each source label into the target labels agree up to the group."""
    for k in sources:
        for i, l in enumerate(targets):
            for l2 in targets[i + 1:]:
                if check_consistent(atlas, action, adhesions, k, l, l2) is None:
                    return False, f"maps ({k!r},{l!r}) and ({k!r},{l2!r}) differ beyond the group"
    return True, ""


def _respects_check(atlas: BondingAtlas, own: AdhesionFamily, other: AdhesionFamily,
                    own_action: GroupAction, other_action: GroupAction) -> tuple[bool, str]:
    for gamma in own_action.elements:
        if check_respects(gamma, atlas, own, other, other_action) is None:
            moved = sorted(v for v in gamma if gamma[v] != v)
            tag = f"moving {moved[0]!r}" if moved else "identity"
            return False, f"no witness for the element {tag}"
    return True, ""


def classify_type(g1: FiniteGraph, g2: FiniteGraph, adh1: AdhesionFamily,
                  adh2: AdhesionFamily, atlas: BondingAtlas,
                  action1: GroupAction, action2: GroupAction,
                  type2_J: frozenset[str] | None = None) -> TypeReport:
    """Decide which gluing discipline the data satisfies, with per-check detail.

    Without an alternating class the candidate is the two-factor form:
    the atlas must be complete and valid, maps out of every label must
    be consistent up to the opposite group, and every group element on
    either side needs a compatibility witness.  With an alternating
    class J the same checks run on one factor, with consistency
    demanded between J and its complement.  Any failed check demotes
    the classification to "neither".
    """
    checks: list[tuple[str, bool, str]] = []
    atlas_report = validate_bonding_atlas(atlas, adh1, adh2, type2_J)
    checks.append(("atlas_valid", atlas_report.ok, "; ".join(atlas_report.problems)))
    if type2_J is None:
        kind = "type1"
        if atlas_report.ok:
            ok, why = _consistency_check(atlas, action2, adh2,
                                         list(adh1.labels), list(adh2.labels))
            checks.append(("consistency_forward", ok, why))
            ok2, why2 = _consistency_check(atlas, action1, adh1,
                                           list(adh2.labels), list(adh1.labels))
            checks.append(("consistency_backward", ok2, why2))
            ok3, why3 = _respects_check(atlas, adh1, adh2, action1, action2)
            checks.append(("respects_side1", ok3, why3))
            ok4, why4 = _respects_check(atlas, adh2, adh1, action2, action1)
            checks.append(("respects_side2", ok4, why4))
    else:
        kind = "type2"
        labels = frozenset(adh1.labels)
        proper = bool(type2_J) and type2_J < labels
        checks.append(("alternating_class_proper", proper,
                       "" if proper else f"class {sorted(type2_J)} of {sorted(labels)}"))
        if atlas_report.ok and proper:
            inside = sorted(type2_J)
            outside = sorted(labels - type2_J)
            ok, why = _consistency_check(atlas, action2, adh2, inside, outside)
            checks.append(("consistency_from_class", ok, why))
            ok2, why2 = _consistency_check(atlas, action1, adh1, outside, inside)
            checks.append(("consistency_into_class", ok2, why2))
            ok3, why3 = _respects_check(atlas, adh1, adh2, action1, action2)
            checks.append(("respects", ok3, why3))
    if all(ok for _, ok, _ in checks):
        return TypeReport(kind, tuple(checks))
    return TypeReport("neither", tuple(checks))


# -- the assembled input document ---------------------------------------------


def _parse_actions(doc, g1: FiniteGraph, g2: FiniteGraph,
                   same_factor: bool) -> tuple[GroupAction, GroupAction]:
    if doc is None:
        doc = {"mode": "full"}
    mode = doc.get("mode", "generators")
    if mode == "full":
        a1 = compute_automorphisms(g1)
        a2 = a1 if same_factor else compute_automorphisms(g2)
        return a1, a2
    if mode == "trivial":
        a1 = GroupAction.trivial(g1)
        a2 = a1 if same_factor else GroupAction.trivial(g2)
        return a1, a2
    if mode == "generators":
        gens1 = doc.get("factor1", [])
        a1 = GroupAction.from_generators(g1, [dict(g) for g in gens1])
        if same_factor and "factor2" not in doc:
            return a1, a1
        gens2 = doc.get("factor2", [])
        a2 = GroupAction.from_generators(g2, [dict(g) for g in gens2])
        return a1, a2
    raise ConfigError(f"unknown actions mode {mode!r}")


class AmalgamationSpec:
    """Parsed input document: factors, boundary data, tree shape, actions."""

    def __init__(self, name: str, g1: FiniteGraph, g2: FiniteGraph,
                 adh1: AdhesionFamily, adh2: AdhesionFamily, atlas: BondingAtlas,
                 depth: int, type2_J: frozenset[str] | None,
                 action1: GroupAction, action2: GroupAction,
                 declared_asdim: dict | None = None):
        self.name = name
        self.g1, self.g2 = g1, g2
        self.adh1, self.adh2 = adh1, adh2
        self.atlas = atlas
        self.depth = depth
        self.type2_J = type2_J
        self.action1, self.action2 = action1, action2
        self.declared_asdim = dict(declared_asdim or {})

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "AmalgamationSpec":
        try:
            name = str(doc.get("name", "unnamed"))
            factor_docs = doc["factors"]
            adhesion_docs = doc["adhesions"]
            tree_doc = doc["tree"]
        except KeyError as exc:
            raise ConfigError(f"amalgamation document missing {exc.args[0]!r}") from exc
        type2_raw = tree_doc.get("type2_J")
        if not isinstance(factor_docs, Sequence) or not 1 <= len(factor_docs) <= 2:
            raise ConfigError("factors must list one or two graph documents")
        if len(factor_docs) == 1 and type2_raw is None:
            raise ConfigError("a single factor needs tree.type2_J")
        g1 = load_graph(factor_docs[0])
        same_factor = len(factor_docs) == 1
        g2 = g1 if same_factor else load_graph(factor_docs[1])
        if not isinstance(adhesion_docs, Sequence) or len(adhesion_docs) != len(factor_docs):
            raise ConfigError("adhesions must match the factors list")
        adh1 = AdhesionFamily(g1, adhesion_docs[0])
        adh2 = adh1 if same_factor else AdhesionFamily(g2, adhesion_docs[1])
        try:
            p1 = int(tree_doc["p1"])
            p2 = int(tree_doc["p2"])
            depth = int(tree_doc["depth"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"tree parameters malformed: {exc}") from exc
        if p1 != len(adh1) or p2 != len(adh2):
            raise ConfigError(
                f"tree degrees ({p1},{p2}) must equal the adhesion counts "
                f"({len(adh1)},{len(adh2)})")
        type2_J = None
        if type2_raw is not None:
            if not same_factor:
                raise ConfigError("type2_J requires a single shared factor")
            type2_J = frozenset(str(k) for k in type2_raw)
        atlas = BondingAtlas.from_json_list(doc.get("atlas", []))
        action1, action2 = _parse_actions(doc.get("actions"), g1, g2, same_factor)
        declared = doc.get("asdim")
        if declared is not None:
            allowed = {"factor1", "factor2", "adhesion"}
            if not set(declared) <= allowed:
                raise ConfigError(f"asdim declarations limited to {sorted(allowed)}")
            declared = {k: int(v) for k, v in declared.items()}
        return cls(name, g1, g2, adh1, adh2, atlas, depth, type2_J,
                   action1, action2, declared)

    @classmethod
    def from_json_str(cls, text: str) -> "AmalgamationSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("amalgamation document must be a JSON object")
        return cls.from_json_dict(doc)

    def labels_shared(self) -> bool:
        return self.type2_J is not None


@dataclass(frozen=True)
class BuildResult:
    """Everything one truncation build produces, ready for reporting."""

    spec: AmalgamationSpec
    tree: ConnectingTree
    sum: SumGraph
    amalgam: AmalgamGraph
    atlas_report: AtlasReport
    reps1: tuple[str, ...]
    reps2: tuple[str, ...]
    rep_map1: dict[str, str]
    rep_map2: dict[str, str]
    id_sizes: dict[str, int]
    max_id_size: int
    trivial: bool

    def report_dict(self) -> dict:
        semi_ok, semi_why = self.tree.is_semiregular()
        return {
            "name": self.spec.name,
            "tree": self.tree.to_json_dict(),
            "tree_semiregular": {"ok": semi_ok, "detail": semi_why},
            "atlas": self.atlas_report.to_json_dict(),
            "sum_vertices": len(self.sum.graph),
            "bridges": len(self.sum.bridges),
            "amalgam_vertices": len(self.amalgam.graph),
            "amalgam_edges": len(self.amalgam.graph.edges),
            "identification_max": self.max_id_size,
            "trivial": self.trivial,
            "orbit_representatives": {"factor1": list(self.reps1),
                                      "factor2": list(self.reps2)},
        }


def build(spec: AmalgamationSpec, depth: int | None = None) -> BuildResult:
    """Run the whole pipeline at one truncation radius.

    A bad atlas stops the build (the bridging step would dereference
    missing maps); everything else is measured and reported.
    """
    d = spec.depth if depth is None else depth
    tree = build_connecting_tree(
        len(spec.adh1), len(spec.adh2), d,
        type2_J=spec.type2_J,
        labels1=spec.adh1.labels, labels2=spec.adh2.labels)
    atlas_report = validate_bonding_atlas(spec.atlas, spec.adh1, spec.adh2, spec.type2_J)
    if not atlas_report.ok:
        raise ConfigError("bonding atlas invalid: " + "; ".join(atlas_report.problems))
    h = build_sum_graph(spec.g1, spec.g2, spec.adh1, spec.adh2, spec.atlas, tree)
    amalgam = contract_to_amalgam(h)
    reps1, rep_map1 = select_orbit_representatives(spec.adh1, spec.action1)
    reps2, rep_map2 = select_orbit_representatives(spec.adh2, spec.action2)
    sizes, max_size = identification_sizes(amalgam)
    return BuildResult(spec, tree, h, amalgam, atlas_report,
                       reps1, reps2, rep_map1, rep_map2,
                       sizes, max_size, check_trivial(amalgam))
