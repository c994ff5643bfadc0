"""Finite graphs with shortest-path metrics, vertex subsets, and map-distortion checks.

Vertices are strings throughout.  Every derived iteration runs in sorted
id order so repeated runs produce byte-identical output.  Distances are
hop counts; unreachable pairs and distances to the empty set are
``math.inf``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import GraphFormatError, PreconditionError

INF = math.inf

#: Stretch factors tried by fit_qi_constants, smallest first.
GAMMA_GRID = (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4))


def _edge_key(x: str, y: str) -> tuple[str, str]:
    return (x, y) if x <= y else (y, x)


class FiniteGraph:
    """Immutable simple undirected graph.

    ``annotations`` carries optional per-vertex metadata (copy tags and
    the like); it never affects the metric.  BFS results are cached per
    source, which is safe to share across threads because entries are
    only ever added whole.
    """

    __slots__ = ("vertices", "vertex_set", "edges", "adjacency",
                 "annotations", "max_degree", "_bfs_cache")

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]],
                 annotations: Mapping[str, dict] | None = None):
        vs = tuple(str(v) for v in vertices)
        if len(set(vs)) != len(vs):
            raise GraphFormatError("duplicate vertex id")
        vset = frozenset(vs)
        canon = set()
        for x, y in edges:
            x, y = str(x), str(y)
            if x == y:
                raise GraphFormatError(f"loop at {x!r}")
            if x not in vset or y not in vset:
                raise GraphFormatError(f"edge endpoint {x!r}/{y!r} not a vertex")
            canon.add(_edge_key(x, y))
        adjacency: dict[str, list[str]] = {v: [] for v in vs}
        for x, y in canon:
            adjacency[x].append(y)
            adjacency[y].append(x)
        self.vertices = vs
        self.vertex_set = vset
        self.edges = tuple(sorted(canon))
        self.adjacency = {v: tuple(sorted(ns)) for v, ns in adjacency.items()}
        if annotations:
            bad = [v for v in annotations if v not in vset]
            if bad:
                raise GraphFormatError(f"annotation for unknown vertex {bad[0]!r}")
            self.annotations = {v: dict(annotations[v]) for v in annotations}
        else:
            self.annotations = {}
        self.max_degree = max((len(ns) for ns in self.adjacency.values()), default=0)
        self._bfs_cache: dict[str, dict[str, int]] = {}

    # -- basic structure ------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: str) -> bool:
        return v in self.vertex_set

    def same_as(self, other: "FiniteGraph") -> bool:
        return self.vertices == other.vertices and self.edges == other.edges

    def require_members(self, vs: Iterable[str]) -> frozenset[str]:
        members = frozenset(vs)
        stray = members - self.vertex_set
        if stray:
            raise GraphFormatError(f"unknown vertex {sorted(stray)[0]!r}")
        return members

    # -- metric ---------------------------------------------------------

    def distances_from(self, source: str) -> dict[str, int]:
        """Hop counts to every vertex reachable from ``source`` (cached)."""
        if source not in self.vertex_set:
            raise GraphFormatError(f"unknown vertex {source!r}")
        hit = self._bfs_cache.get(source)
        if hit is not None:
            return hit
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            dv = dist[v]
            for w in self.adjacency[v]:
                if w not in dist:
                    dist[w] = dv + 1
                    queue.append(w)
        self._bfs_cache[source] = dist
        return dist

    def distance(self, x: str, y: str) -> int | float:
        if y not in self.vertex_set:
            raise GraphFormatError(f"unknown vertex {y!r}")
        return self.distances_from(x).get(y, INF)

    def distances_to_set(self, targets: Iterable[str]) -> dict[str, int]:
        """Multi-source BFS: hop count from each vertex to the set."""
        seeds = sorted(self.require_members(targets))
        dist = {v: 0 for v in seeds}
        queue = deque(seeds)
        while queue:
            v = queue.popleft()
            dv = dist[v]
            for w in self.adjacency[v]:
                if w not in dist:
                    dist[w] = dv + 1
                    queue.append(w)
        return dist

    def set_distance(self, a: Iterable[str], b: Iterable[str]) -> int | float:
        """d(A, B); the distance to an empty set is infinite."""
        aset = self.require_members(a)
        bset = self.require_members(b)
        if not aset or not bset:
            return INF
        if aset & bset:
            return 0
        dist = self.distances_to_set(bset)
        best = min((dist[v] for v in aset if v in dist), default=INF)
        return best

    def ball(self, centers: Iterable[str], radius: int) -> frozenset[str]:
        """All vertices within ``radius`` of the center set."""
        if radius < 0:
            raise PreconditionError("radius must be >= 0")
        centers = self.require_members(centers)
        if not centers:
            return frozenset()
        dist = self.distances_to_set(centers)
        return frozenset(v for v, d in dist.items() if d <= radius)

    def shell(self, centers: Iterable[str], radius: int) -> frozenset[str]:
        """Vertices at distance exactly ``radius`` from the center set."""
        if radius < 0:
            raise PreconditionError("radius must be >= 0")
        centers = self.require_members(centers)
        if not centers:
            return frozenset()
        dist = self.distances_to_set(centers)
        return frozenset(v for v, d in dist.items() if d == radius)

    def diameter(self) -> int | float:
        best = 0
        for v in self.vertices:
            dist = self.distances_from(v)
            if len(dist) != len(self.vertices):
                return INF
            best = max(best, max(dist.values()))
        return best

    # -- subsets ----------------------------------------------------------

    def boundary(self, members: Iterable[str]) -> frozenset[str]:
        """Members with at least one neighbour outside the set."""
        members = self.require_members(members)
        return frozenset(v for v in members
                         if any(w not in members for w in self.adjacency[v]))

    def interior(self, members: Iterable[str]) -> frozenset[str]:
        members = self.require_members(members)
        return members - self.boundary(members)

    def induced(self, members: Iterable[str]) -> "FiniteGraph":
        """Induced subgraph.  The result may be disconnected."""
        members = self.require_members(members)
        if not members:
            raise PreconditionError("induced subgraph of an empty set")
        verts = [v for v in self.vertices if v in members]
        edges = [e for e in self.edges if e[0] in members and e[1] in members]
        notes = {v: self.annotations[v] for v in verts if v in self.annotations}
        return FiniteGraph(verts, edges, annotations=notes)

    def components(self) -> tuple[frozenset[str], ...]:
        seen: set[str] = set()
        comps = []
        for v in sorted(self.vertices):
            if v in seen:
                continue
            comp = frozenset(self.distances_from(v))
            seen |= comp
            comps.append(comp)
        return tuple(comps)

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(len(self.adjacency[v]) for v in self.vertices))

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        doc: dict = {"vertices": list(self.vertices),
                     "edges": [list(e) for e in self.edges]}
        if self.annotations:
            doc["annotations"] = {v: self.annotations[v] for v in sorted(self.annotations)}
        return doc

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for x, y in self.edges:
            lines.append(f'  "{x}" -- "{y}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def relabel_sorted(graph: FiniteGraph, prefix: str = "v") -> tuple[FiniteGraph, dict[str, str]]:
    """Rename vertices to prefix000, prefix001, ... in sorted-id order.

    Annotations are dropped: they describe the old ids.  Returns the
    renamed graph together with the old-to-new mapping.
    """
    width = max(3, len(str(max(len(graph.vertices) - 1, 0))))
    names = {old: f"{prefix}{i:0{width}d}"
             for i, old in enumerate(sorted(graph.vertices))}
    renamed = FiniteGraph([names[v] for v in sorted(graph.vertices)],
                          [(names[x], names[y]) for x, y in graph.edges])
    return renamed, names


@dataclass(frozen=True)
class VertexSubset:
    """A set of vertices remembering which graph it lives in."""

    graph: FiniteGraph
    members: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "members", self.graph.require_members(self.members))

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: str) -> bool:
        return v in self.members

    def ball(self, radius: int) -> "VertexSubset":
        return VertexSubset(self.graph, self.graph.ball(self.members, radius))

    def boundary(self) -> "VertexSubset":
        return VertexSubset(self.graph, self.graph.boundary(self.members))

    def interior(self) -> "VertexSubset":
        return VertexSubset(self.graph, self.graph.interior(self.members))

    def induced(self) -> FiniteGraph:
        return self.graph.induced(self.members)


def load_graph(doc: dict | str) -> FiniteGraph:
    """Read a graph document and insist on connectivity.

    Accepts the JSON object form ``{"vertices": [...], "edges": [[a, b], ...]}``
    (as a dict or a JSON string) or plain text with one ``"id id"`` edge
    per line; blank lines and ``#`` comments are ignored in the text form.
    """
    if isinstance(doc, str):
        stripped = doc.lstrip()
        if stripped.startswith("{"):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"bad JSON graph document: {exc}") from exc
        else:
            doc = _parse_edge_list(doc)
    if not isinstance(doc, dict):
        raise GraphFormatError("graph document must be a JSON object or edge list")
    try:
        vertices = doc["vertices"]
        edges = doc["edges"]
    except KeyError as exc:
        raise GraphFormatError(f"graph document missing {exc.args[0]!r}") from exc
    pairs = []
    for e in edges:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise GraphFormatError(f"malformed edge {e!r}")
        pairs.append((str(e[0]), str(e[1])))
    seen = set()
    for x, y in pairs:
        key = _edge_key(x, y)
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}")
        seen.add(key)
    g = FiniteGraph(vertices, pairs, annotations=doc.get("annotations"))
    if len(g) and not g.is_connected():
        raise GraphFormatError("graph document is disconnected")
    return g


def _parse_edge_list(text: str) -> dict:
    vertices: list[str] = []
    edges = []
    seen = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"bad edge line {line!r}")
        for p in parts:
            if p not in seen:
                seen.add(p)
                vertices.append(p)
        edges.append(parts)
    return {"vertices": vertices, "edges": edges}


class MetricView:
    """A vertex set carrying the ambient shortest-path metric.

    ``points`` restricts attention to a subset; distances are still
    measured through the whole graph.  Use ``graph.induced(...)`` first
    when the intrinsic metric of the subset is wanted instead.
    """

    __slots__ = ("graph", "points", "point_set")

    def __init__(self, graph: FiniteGraph, points: Iterable[str] | None = None):
        self.graph = graph
        if points is None:
            member_set = graph.vertex_set
        else:
            member_set = graph.require_members(points)
        self.points = tuple(sorted(member_set))
        self.point_set = frozenset(member_set)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, v: str) -> bool:
        return v in self.point_set

    def distance(self, x: str, y: str) -> int | float:
        if x not in self.point_set or y not in self.point_set:
            raise PreconditionError(f"{x!r} or {y!r} outside this view")
        return self.graph.distance(x, y)

    def pairs(self):
        pts = self.points
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                yield pts[i], pts[j]

    def diameter(self) -> int | float:
        best = 0
        for x in self.points:
            dist = self.graph.distances_from(x)
            for y in self.points:
                d = dist.get(y, INF)
                if d > best:
                    best = d
                    if best is INF:
                        return INF
        return best

    def subview(self, points: Iterable[str]) -> "MetricView":
        members = frozenset(points)
        if not members <= self.point_set:
            raise PreconditionError("subview points escape the view")
        return MetricView(self.graph, members)

    def same_space(self, other: "MetricView") -> bool:
        return self.graph is other.graph and self.point_set == other.point_set


# -- vertex maps and distortion ------------------------------------------


@dataclass(frozen=True)
class VertexMap:
    """A map between metric views, given pointwise."""

    source: MetricView
    target: MetricView
    mapping: Mapping[str, str]

    def __post_init__(self):
        missing = [v for v in self.source.points if v not in self.mapping]
        if missing:
            raise PreconditionError(f"map undefined at {missing[0]!r}")
        stray = [v for v in self.source.points if self.mapping[v] not in self.target.point_set]
        if stray:
            raise PreconditionError(f"image of {stray[0]!r} escapes the target view")

    def __call__(self, v: str) -> str:
        return self.mapping[v]

    def image(self, members: Iterable[str]) -> frozenset[str]:
        return frozenset(self.mapping[v] for v in members)


def nearest_point_map(source: MetricView, target: MetricView) -> VertexMap:
    """Send each source point to its nearest target point (ties: least id).

    Both views must live in the same ambient graph.
    """
    if source.graph is not target.graph:
        raise PreconditionError("nearest-point map needs a shared ambient graph")
    if not target.points:
        raise PreconditionError("empty target")
    nearest: dict[str, str] = {}
    for v in source.points:
        if v in target.point_set:
            nearest[v] = v
            continue
        best: tuple[float, str] | None = None
        dv = source.graph.distances_from(v)
        for w in target.points:
            d = dv.get(w, INF)
            if best is None or d < best[0]:
                best = (d, w)
        nearest[v] = best[1]
    return VertexMap(source, target, nearest)


def _pair_bounds(vm: VertexMap):
    """Yield (d_source, d_target) over unordered point pairs."""
    pts = vm.source.points
    tdist_cache: dict[str, dict[str, int]] = {}
    for i, x in enumerate(pts):
        sx = vm.source.graph.distances_from(x)
        fx = vm.mapping[x]
        tx = tdist_cache.get(fx)
        if tx is None:
            tx = vm.target.graph.distances_from(fx)
            tdist_cache[fx] = tx
        for y in pts[i + 1:]:
            ds = sx.get(y, INF)
            dt = tx.get(vm.mapping[y], INF)
            yield ds, dt


def check_quasi_isometry(vm: VertexMap, gamma: Fraction | int, c: Fraction | int) -> bool:
    """Two-sided distortion check: d/gamma - c <= d' <= gamma*d + c for all pairs."""
    gamma = Fraction(gamma)
    c = Fraction(c)
    if gamma < 1 or c < 0:
        raise PreconditionError("need gamma >= 1 and c >= 0")
    for ds, dt in _pair_bounds(vm):
        if ds is INF:
            if dt is not INF:
                return False
            continue
        if dt is INF:
            return False
        if dt > gamma * ds + c or ds / gamma - c > dt:
            return False
    return True


@dataclass(frozen=True)
class QiFit:
    """Result of fitting distortion constants over the gamma grid.

    ``table`` holds, for each grid stretch, the least additive constant
    that makes both inequalities hold (None when no finite constant
    works).  ``gamma``/``c`` give the selected witness: the feasible
    entry with the smallest constant, ties resolved toward the smaller
    stretch.  An entry is feasible when its constant does not exceed the
    larger of the two diameters.
    """

    table: tuple[tuple[Fraction, Fraction | None], ...]
    gamma: Fraction | None
    c: Fraction | None

    @property
    def feasible(self) -> bool:
        return self.gamma is not None

    def __iter__(self):
        if not self.feasible:
            raise PreconditionError("no feasible distortion constants to unpack")
        return iter((self.gamma, self.c))

    def best_within(self, gamma_cap: Fraction | int) -> tuple[Fraction, Fraction] | None:
        """Least-constant feasible entry with stretch at most ``gamma_cap``."""
        cap = Fraction(gamma_cap)
        best = None
        for g, c in self.table:
            if g > cap or c is None:
                continue
            if best is None or (c, g) < best:
                best = (c, g)
        if best is None:
            return None
        return best[1], best[0]

    def to_json_dict(self) -> dict:
        return {
            "table": [[str(g), None if c is None else str(c)] for g, c in self.table],
            "gamma": None if self.gamma is None else str(self.gamma),
            "c": None if self.c is None else str(self.c),
        }


def fit_qi_constants(vm: VertexMap, grid: tuple[Fraction, ...] = GAMMA_GRID) -> QiFit:
    """Fit distortion constants for ``vm`` over a fixed stretch grid.

    For each stretch the binding constraints are linear in the additive
    constant, so the least constant is a max over pairs; selection picks
    the smallest constant over the grid (then the smallest stretch), and
    infeasible fits (constant beyond both diameters) are dropped.
    """
    grid = tuple(Fraction(g) for g in grid)
    worst: list[Fraction | None] = [Fraction(0) for _ in grid]
    for ds, dt in _pair_bounds(vm):
        if ds is INF and dt is INF:
            continue
        for i, g in enumerate(grid):
            if worst[i] is None:
                continue
            if ds is INF or dt is INF:
                worst[i] = None  # one side infinite: no finite constant fixes it
                continue
            need = max(Fraction(ds) / g - dt, Fraction(dt) - g * Fraction(ds))
            if need > worst[i]:
                worst[i] = need
    cap = max(vm.source.diameter(), vm.target.diameter())
    table = tuple(zip(grid, worst))
    best = None
    for g, c in table:
        if c is None or c > cap:
            continue
        if best is None or (c, g) < best:
            best = (c, g)
    if best is None:
        return QiFit(table, None, None)
    return QiFit(table, best[1], best[0])


def check_coarse_equivalence(vm: VertexMap, rho_lower: list, rho_upper: list) -> bool:
    """Check rho_lower(d) <= d' <= rho_upper(d) with monotone step tables.

    Tables are indexed by source distance and must be non-decreasing and
    long enough to cover every finite distance in the source view.
    """
    for name, table in (("rho_lower", rho_lower), ("rho_upper", rho_upper)):
        if any(table[i] > table[i + 1] for i in range(len(table) - 1)):
            raise PreconditionError(f"{name} is not monotone")
        if not table:
            raise PreconditionError(f"{name} is empty")
    for ds, dt in _pair_bounds(vm):
        if ds is INF:
            if dt is not INF:
                return False
            continue
        if dt is INF:
            return False
        if ds >= len(rho_lower) or ds >= len(rho_upper):
            raise PreconditionError("step table shorter than the source diameter")
        if not (rho_lower[ds] <= dt <= rho_upper[ds]):
            return False
    return True
