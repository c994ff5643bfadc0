"""Cover calculus: multiplicity, Lebesgue numbers, disjoint witness families.

A Family is a list of nonempty vertex sets inside one MetricView; a
Cover is a Family whose union is the whole view.  WitnessFamilies holds
the layered form (n+1 families, each r-disjoint, all members D-bounded,
union covering) that certifies a dimension bound at one scale r.

Two Lebesgue formulas coexist: ``paper`` takes, for each cover member,
the largest distance from any point of the space to that member's
complement and then minimizes over members; ``standard`` maximizes over
members per point first and minimizes over points.  Certificates report
both.  Openness plays no role in a uniformly discrete space, so every
vertex set counts as open.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError
from .graphs import INF, FiniteGraph, MetricView, VertexMap

Member = frozenset


class Family:
    """Nonempty vertex sets in one ambient view (union may be partial)."""

    def __init__(self, space: MetricView, members: Iterable[Iterable[str]]):
        self.space = space
        packed = []
        for m in members:
            mset = frozenset(m)
            if not mset:
                raise PreconditionError("empty family member")
            if not mset <= space.point_set:
                stray = sorted(mset - space.point_set)[0]
                raise PreconditionError(f"member vertex {stray!r} outside the space")
            packed.append(mset)
        self.members = tuple(packed)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def max_diameter(self) -> int | float:
        best = 0
        for m in self.members:
            for x in m:
                dist = self.space.graph.distances_from(x)
                for y in m:
                    d = dist.get(y, INF)
                    if d > best:
                        best = d
        return best

    def is_uniformly_bounded(self, bound: int) -> bool:
        return self.max_diameter() <= bound

    def is_r_disjoint(self, r: int) -> bool:
        if r <= 0:
            raise PreconditionError("need r > 0")
        g = self.space.graph
        for a, b in itertools.combinations(self.members, 2):
            if g.set_distance(a, b) < r:
                return False
        return True

    def to_json_dict(self) -> dict:
        return {"members": [sorted(m) for m in self.members]}


class Cover(Family):
    """A Family whose members together exhaust the space."""

    def __init__(self, space: MetricView, members: Iterable[Iterable[str]]):
        super().__init__(space, members)
        covered = frozenset().union(*self.members) if self.members else frozenset()
        if covered != space.point_set:
            missing = sorted(space.point_set - covered)[0]
            raise PreconditionError(f"cover misses vertex {missing!r}")


def multiplicity(cover: Family) -> int:
    """Largest number of members sharing one point."""
    tally: dict[str, int] = {}
    best = 0
    for m in cover.members:
        for v in m:
            tally[v] = tally.get(v, 0) + 1
            if tally[v] > best:
                best = tally[v]
    return best


def max_diameter(family: Family) -> int | float:
    return family.max_diameter()


def is_r_disjoint(family: Family, r: int) -> bool:
    return family.is_r_disjoint(r)


def refines(u: Cover, v: Cover) -> bool:
    """True when every member of u sits inside some member of v."""
    if not u.space.same_space(v.space):
        raise PreconditionError("refinement needs a shared ambient space")
    return all(any(m <= w for w in v.members) for m in u.members)


def refinement_witness(u: Cover, v: Cover) -> dict[int, int | None]:
    """For each member index of u, the index of a containing member of v."""
    if not u.space.same_space(v.space):
        raise PreconditionError("refinement needs a shared ambient space")
    out: dict[int, int | None] = {}
    for i, m in enumerate(u.members):
        out[i] = next((j for j, w in enumerate(v.members) if m <= w), None)
    return out


def _complement_reach(cover: Family) -> list[dict[str, int] | None]:
    """Per member, distances to its complement (None when complement empty)."""
    out = []
    for m in cover.members:
        comp = cover.space.point_set - m
        if not comp:
            out.append(None)
        else:
            out.append(cover.space.graph.distances_to_set(comp))
    return out


def lebesgue_number(cover: Cover, formula: str = "paper") -> int | float:
    """Lebesgue number under either formula; d(x, empty set) counts as +inf."""
    if formula not in ("paper", "standard"):
        raise PreconditionError(f"unknown Lebesgue formula {formula!r}")
    reach = _complement_reach(cover)
    points = cover.space.points
    if formula == "paper":
        best = INF
        for dist in reach:
            if dist is None:
                continue  # complement empty: this member contributes +inf
            worst = max(dist.get(x, INF) for x in points)
            if worst < best:
                best = worst
        return best
    best = INF
    for x in points:
        here = 0
        for dist in reach:
            d = INF if dist is None else dist.get(x, INF)
            if d > here:
                here = d
                if here is INF:
                    break
        if here < best:
            best = here
    return best


def check_rd_dim(cover: Cover, r: int, d: int, n: int) -> bool:
    """d-bounded, multiplicity <= n+1, Lebesgue (paper formula) > r."""
    if r <= 0 or d <= 0:
        raise PreconditionError("need r > 0 and d > 0")
    return (cover.max_diameter() <= d
            and multiplicity(cover) <= n + 1
            and lebesgue_number(cover, "paper") > r)


# -- layered witness families ---------------------------------------------


@dataclass(frozen=True)
class WitnessFamilies:
    """n+1 families of r-disjoint, bound-limited sets covering the space."""

    space: MetricView
    r: int
    families: tuple[tuple[Member, ...], ...]
    bound: int

    @property
    def n(self) -> int:
        return len(self.families) - 1

    def all_members(self) -> tuple[Member, ...]:
        return tuple(m for fam in self.families for m in fam)

    def violations(self) -> list[str]:
        problems = []
        if self.r <= 0:
            problems.append("r must be positive")
        if not self.families:
            problems.append("no families")
        covered: set[str] = set()
        for j, fam in enumerate(self.families):
            famobj = Family(self.space, fam) if fam else None
            if famobj is not None:
                if not famobj.is_r_disjoint(self.r):
                    problems.append(f"family {j} is not {self.r}-disjoint")
                dm = famobj.max_diameter()
                if dm > self.bound:
                    problems.append(f"family {j} has a member of diameter {dm} > {self.bound}")
            for m in fam:
                covered |= m
        if covered != self.space.point_set:
            problems.append(f"{len(self.space.point_set) - len(covered & self.space.point_set)} points uncovered")
        return problems

    def require_valid(self) -> "WitnessFamilies":
        problems = self.violations()
        if problems:
            raise PreconditionError("invalid witness: " + "; ".join(problems))
        return self

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "n": self.n,
            "bound": self.bound,
            "families": [[sorted(m) for m in fam] for fam in self.families],
        }


def witnesses_to_cover(w: WitnessFamilies) -> Cover:
    """Flatten validated families into one cover and re-check multiplicity."""
    w.require_valid()
    cover = Cover(w.space, w.all_members())
    if multiplicity(cover) > w.n + 1:
        raise PreconditionError("families overlap inside a layer")  # unreachable for r >= 1
    return cover


# -- exact oracle -----------------------------------------------------------

EXACT_CAP = 12


def _cluster(points: Iterable[str], graph: FiniteGraph, r: int) -> list[frozenset[str]]:
    """Group points by the transitive closure of ambient distance < r."""
    todo = sorted(points)
    clusters: list[set[str]] = []
    for v in todo:
        dist_v = graph.distances_from(v)
        hits = [c for c in clusters if any(dist_v.get(u, INF) < r for u in c)]
        if not hits:
            clusters.append({v})
        else:
            hits[0].add(v)
            for extra in hits[1:]:
                hits[0] |= extra
                clusters.remove(extra)
    return [frozenset(c) for c in clusters]


@dataclass(frozen=True)
class ExactWitness:
    """Oracle output: the least achievable bound and one optimal layering."""

    space: MetricView
    r: int
    n: int
    bound: int
    families: tuple[tuple[Member, ...], ...]

    def as_witness(self) -> WitnessFamilies:
        return WitnessFamilies(self.space, self.r, self.families, self.bound)


def exact_min_bound(space: MetricView, r: int, n: int) -> ExactWitness:
    """Least D so that n+1 r-disjoint D-bounded families cover the space.

    Exhaustive over vertex colorings (the first vertex is pinned to
    family 0 since families are interchangeable); each color class is
    grouped into clusters by transitive distance < r and D is the worst
    cluster diameter.  Branches are cut as soon as a partial coloring
    already reaches the best complete value found.
    """
    if len(space) > EXACT_CAP:
        raise PreconditionError(f"oracle capped at {EXACT_CAP} vertices, got {len(space)}")
    if r <= 0 or n < 0:
        raise PreconditionError("need r > 0 and n >= 0")
    if not space.points:
        raise PreconditionError("empty space")
    pts = space.points
    g = space.graph
    dist = {v: g.distances_from(v) for v in pts}

    def pair_d(x: str, y: str) -> int | float:
        return dist[x].get(y, INF)

    best_bound: int | float = INF
    best_families: tuple[tuple[Member, ...], ...] | None = None

    # state: per color, list of (cluster frozenset, diameter)
    def place(v: str, state, color):
        merged = set([v])
        diam = 0
        rest = []
        for cluster, cdiam in state[color]:
            if any(pair_d(v, u) < r for u in cluster):
                merged |= cluster
                diam = max(diam, cdiam)
            else:
                rest.append((cluster, cdiam))
        for u in merged:
            du = dist[u]
            for w in merged:
                d = du.get(w, INF)
                if d > diam:
                    diam = d
        new_state = list(state)
        new_state[color] = rest + [(frozenset(merged), diam)]
        return new_state, diam

    def worst(state) -> int:
        return max((cd for fam in state for _, cd in fam), default=0)

    def walk(idx: int, state):
        nonlocal best_bound, best_families
        if idx == len(pts):
            w = worst(state)
            if w < best_bound:
                best_bound = w
                best_families = tuple(
                    tuple(sorted((c for c, _ in fam), key=sorted))
                    for fam in state)
            return
        v = pts[idx]
        for color in range(n + 1):
            new_state, diam = place(v, state, color)
            if max(diam, worst(new_state)) >= best_bound and best_bound is not INF:
                continue
            walk(idx + 1, new_state)

    first_state, _ = place(pts[0], [[] for _ in range(n + 1)], 0)
    walk(1, first_state)
    assert best_families is not None
    return ExactWitness(space, r, n, int(best_bound), best_families)


def exact_min_families(space: MetricView, r: int) -> int:
    """Least n with exact_min_bound(space, r, n) below r.

    Always terminates: with one family per vertex every cluster is a
    singleton and the bound is 0.
    """
    for n in range(len(space)):
        if exact_min_bound(space, r, n).bound < r:
            return n
    return len(space) - 1


# -- greedy search -----------------------------------------------------------


@dataclass(frozen=True)
class GreedyResult:
    """Outcome of the block strategy; ``ok`` False means colors ran out."""

    ok: bool
    witness: WitnessFamilies | None
    net: tuple[str, ...]
    blocks: tuple[Member, ...]
    colors_needed: int
    detail: str = ""


def _block_partition(space: MetricView, r: int):
    """Greedy r-net over sorted ids, then nearest-net cells (ties: earlier net point)."""
    g = space.graph
    net: list[str] = []
    for v in space.points:
        dv = g.distances_from(v)
        if all(dv.get(u, INF) >= r for u in net):
            net.append(v)
    blocks: list[set[str]] = [set() for _ in net]
    for v in space.points:
        dv = g.distances_from(v)
        best = None
        for i, u in enumerate(net):
            d = dv.get(u, INF)
            if best is None or d < best[0]:
                best = (d, i)
        blocks[best[1]].add(v)
    return net, [frozenset(b) for b in blocks]


def _set_diameter(g, vertices) -> int:
    """Largest ambient distance between two vertices of the set."""
    worst = 0
    for v in vertices:
        dv = g.distances_from(v)
        for u in vertices:
            d = dv.get(u, INF)
            if d > worst:
                worst = d
    return worst


def greedy_witness(space: MetricView, r: int, n: int) -> GreedyResult:
    """Block strategy: cells of a greedy r-net, first-fit colored with n+1 colors.

    Cells are colored in order of their net point's distance from the
    first net point (then net order), which keeps the first-fit frontier
    geometrically contiguous.  Same-colored cells are pairwise >= r
    apart by construction, and every unmerged cell has diameter
    <= 2(r-1).

    When first-fit runs out of colors and n >= 1, the first blocked
    cell is merged into whichever earlier-colored conflicting cell
    keeps the union's diameter smallest (ties: earliest in coloring
    order) and the coloring restarts.  Every round removes one cell,
    so the loop terminates; merged cells may exceed the 2(r-1) plain
    cell diameter, and the reported bound is whatever actually shipped.
    With a single slot (n = 0) no repair is attempted: a collision
    between net cells is reported as failure together with the color
    count first-fit wanted.  The result's ``net`` and ``blocks``
    always describe the original unmerged partition.
    """
    if r <= 0 or n < 0:
        raise PreconditionError("need r > 0 and n >= 0")
    if not space.points:
        raise PreconditionError("empty space")
    g = space.graph
    net, blocks = _block_partition(space, r)
    root_dist = g.distances_from(net[0])
    # working cells carry their anchor net index; a merge keeps the
    # surviving cell's anchor so the coloring order stays stable
    cells: list[tuple[int, Member]] = list(enumerate(blocks))
    while True:
        order = sorted(
            range(len(cells)),
            key=lambda i: (root_dist.get(net[cells[i][0]], INF), cells[i][0]))
        # pairwise cell distances via one multi-source sweep per cell
        sep = {}
        for i, (_, b) in enumerate(cells):
            dist = g.distances_to_set(b)
            for j, (_, b2) in enumerate(cells):
                if j != i:
                    sep[i, j] = min((dist.get(v, INF) for v in b2), default=INF)
        colors: dict[int, int] = {}
        needed = 0
        blocked = None
        for i in order:
            used = set()
            for j, cj in colors.items():
                if sep[i, j] < r:
                    used.add(cj)
            c = 0
            while c in used:
                c += 1
            colors[i] = c
            needed = max(needed, c + 1)
            if c > n and blocked is None:
                blocked = i
        if blocked is None:
            families: list[list[Member]] = [[] for _ in range(n + 1)]
            for i, c in colors.items():
                families[c].append(cells[i][1])
            fams = tuple(tuple(sorted(fam, key=sorted)) for fam in families)
            bound = Family(space, [m for fam in fams for m in fam]).max_diameter()
            witness = WitnessFamilies(space, r, fams, int(bound)).require_valid()
            return GreedyResult(True, witness, tuple(net), tuple(blocks), needed)
        if n == 0:
            return GreedyResult(False, None, tuple(net), tuple(blocks), needed,
                                detail=f"first-fit needed {needed} colors for {n + 1} slots")
        pos = {i: k for k, i in enumerate(order)}
        partners = [j for j in order
                    if pos[j] < pos[blocked] and sep[blocked, j] < r]
        best = min(partners, key=lambda j: (
            _set_diameter(g, cells[j][1] | cells[blocked][1]), pos[j]))
        merged = (cells[best][0],
                  frozenset(cells[best][1] | cells[blocked][1]))
        cells = [merged if k == best else cell
                 for k, cell in enumerate(cells) if k != blocked]


def band_witness(space: MetricView, r: int, n: int) -> WitnessFamilies:
    """Distance-band fallback: levels from the least point, bands of width r.

    Band b (levels in [br, br+r)) goes to family b mod (n+1); each
    family's points are then regrouped into transitive <r clusters, so
    the result is always a valid witness — only the bound is at the
    mercy of the space's shape.
    """
    if r <= 0 or n < 0:
        raise PreconditionError("need r > 0 and n >= 0")
    if not space.points:
        raise PreconditionError("empty space")
    g = space.graph
    root = space.points[0]
    level = g.distances_from(root)
    buckets: list[set[str]] = [set() for _ in range(n + 1)]
    for v in space.points:
        lv = level.get(v)
        if lv is None:
            raise PreconditionError(f"point {v!r} unreachable from {root!r}")
        buckets[(lv // r) % (n + 1)].add(v)
    fams = []
    for bucket in buckets:
        fams.append(tuple(sorted(_cluster(bucket, g, r), key=sorted)) if bucket else ())
    all_members = [m for fam in fams for m in fam]
    bound = Family(space, all_members).max_diameter() if all_members else 0
    return WitnessFamilies(space, r, tuple(fams), int(bound)).require_valid()


@dataclass(frozen=True)
class UniformResult:
    """check_uniform_asdim outcome: one bound good for every subspace."""

    ok: bool
    common_bound: int | None
    results: tuple[GreedyResult, ...]
    failing: tuple[int, ...] = ()


def check_uniform_asdim(subspaces: Sequence[MetricView], n: int, r: int) -> UniformResult:
    """Run the greedy strategy on each subspace; the common bound is the max."""
    results = []
    failing = []
    worst = 0
    for i, sub in enumerate(subspaces):
        res = greedy_witness(sub, r, n)
        results.append(res)
        if not res.ok:
            failing.append(i)
        else:
            worst = max(worst, res.witness.bound)
    if failing:
        return UniformResult(False, None, tuple(results), tuple(failing))
    return UniformResult(True, worst, tuple(results))


# -- witness surgery ---------------------------------------------------------


def restrict_witness(w: WitnessFamilies, points: Iterable[str]) -> WitnessFamilies:
    """Trace a witness onto a subset; r, n and the bound carry over unchanged."""
    keep = frozenset(points)
    if not keep <= w.space.point_set:
        raise PreconditionError("restriction points escape the witness space")
    sub = w.space.subview(keep)
    fams = tuple(
        tuple(sorted((m & keep for m in fam if m & keep), key=sorted))
        for fam in w.families)
    return WitnessFamilies(sub, w.r, fams, w.bound)


@dataclass(frozen=True)
class TransportedWitness:
    witness: WitnessFamilies
    r_out: int
    claimed_bound: Fraction


def transport_witness(w: WitnessFamilies, vm: VertexMap,
                      gamma: Fraction | int, c: Fraction | int) -> TransportedWitness:
    """Push a witness through a distortion-checked map and re-cluster.

    The output scale is floor(r/gamma - c); callers must have verified
    the map's constants first.  Images within one family are regrouped
    into transitive <r' clusters — a no-op when the map's lower bound
    already keeps them apart — and the claimed bound gamma*D + c is
    checked against the measured one.
    """
    gamma = Fraction(gamma)
    c = Fraction(c)
    if not (vm.source.graph is w.space.graph and vm.source.point_set == w.space.point_set):
        raise PreconditionError("map source must be the witness space")
    r_out_frac = Fraction(w.r) / gamma - c
    if r_out_frac < 1:
        raise PreconditionError(f"transported scale {r_out_frac} below 1; nothing to certify")
    r_out = int(r_out_frac // 1)
    image_points = vm.image(vm.source.points)
    tspace = vm.target.subview(image_points)
    fams = []
    for fam in w.families:
        pushed: set[str] = set()
        for m in fam:
            pushed |= vm.image(m)
        fams.append(tuple(sorted(_cluster(pushed, tspace.graph, r_out), key=sorted))
                    if pushed else ())
    all_members = [m for fam in fams for m in fam]
    bound = Family(tspace, all_members).max_diameter() if all_members else 0
    claimed = gamma * w.bound + c
    if bound > claimed:
        raise PreconditionError(
            f"transported bound {bound} exceeds the claimed {claimed}")
    out = WitnessFamilies(tspace, r_out, tuple(fams), int(bound)).require_valid()
    return TransportedWitness(out, r_out, claimed)
