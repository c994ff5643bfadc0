"""Block construction, symmetry transport, and the certificate pipeline."""

from fractions import Fraction

import pytest

import asdimforge as af
from asdimforge import jsonio
from asdimforge.amalgam import ROOT, AmalgamationSpec
from asdimforge.errors import PreconditionError
from asdimforge.fixtures import chain_spec_doc, triangle_spec_doc, type2_spec_doc
from asdimforge.theorem import (ProofParameters, assemble_partition,
                                base_blocks, build_symmetry_map, lemma_strip,
                                projection_fit, run_certificate, safe_nodes,
                                strata, theorem_bound, translation_sites,
                                tree_graph, verify_separation)

from conftest import build_doc


# -- parameters ------------------------------------------------------------------


def test_parameter_validation():
    good = ProofParameters(R=2, r=10, depth=40)
    assert good.core_margin == 10
    assert ProofParameters(R=0, r=2, depth=4, margin=1).core_margin == 1
    with pytest.raises(PreconditionError):
        ProofParameters(R=-1, r=10, depth=40)
    with pytest.raises(PreconditionError):
        ProofParameters(R=2, r=9, depth=40)  # odd block radius
    with pytest.raises(PreconditionError):
        ProofParameters(R=2, r=0, depth=40)
    with pytest.raises(PreconditionError):
        ProofParameters(R=3, r=10, depth=40)  # needs r > 4R
    with pytest.raises(PreconditionError):
        ProofParameters(R=2, r=10, depth=-1)
    with pytest.raises(PreconditionError):
        ProofParameters(R=2, r=10, depth=40, margin=-1)


def test_certificate_grade_needs_depth():
    shallow = ProofParameters(R=2, r=10, depth=19)
    with pytest.raises(PreconditionError):
        shallow.require_certificate_grade()
    ProofParameters(R=2, r=10, depth=20).require_certificate_grade()


def test_translation_sites(chain40):
    params = ProofParameters(R=2, r=10, depth=40)
    sites = translation_sites(chain40.tree, params)
    assert sites[0] == ROOT
    assert len(sites) == 7  # root plus two per usable multiple of r
    depths = sorted({chain40.tree.node_depth(t) for t in sites})
    assert depths == [0, 10, 20, 30]
    assert len(safe_nodes(chain40.tree, params)) == 61  # depth <= 30


def test_theorem_bound():
    assert theorem_bound(0, 0, 0) == 1
    assert theorem_bound(2, 1, 1) == 2
    assert theorem_bound(0, 3, 3) == 4
    with pytest.raises(PreconditionError):
        theorem_bound(-1, 0, 0)


# -- strata and strips --------------------------------------------------------------


def test_strata_sizes(chain40):
    exact0, _ = strata(chain40.sum, ROOT, 0)
    assert len(exact0.points) == 2
    exact1, within1 = strata(chain40.sum, ROOT, 1)
    assert len(exact1.points) == 4
    assert len(within1.points) == 6
    with pytest.raises(PreconditionError):
        strata(chain40.sum, ROOT, -1)
    with pytest.raises(PreconditionError):
        strata(chain40.sum, ROOT, 41)  # beyond the truncation


def test_lemma_strip_on_chain(chain40):
    strip = lemma_strip(chain40.sum, ROOT, 1, 2)
    assert strip.ok
    assert strip.strip_size == 4
    # Distinct branches separate through the root copy, which cutting removes.
    assert strip.min_separation == af.INF
    with pytest.raises(PreconditionError):
        lemma_strip(chain40.sum, ROOT, 0, 2)
    with pytest.raises(PreconditionError):
        lemma_strip(chain40.sum, ROOT, 1, 0)


def test_lemma_strip_on_triangle(triangle8):
    sizes = {}
    for m in (1, 2, 3, 4):
        strip = lemma_strip(triangle8.sum, ROOT, m, 4)
        assert strip.ok
        assert strip.fit is not None and strip.fit.feasible
        sizes[m] = strip.strip_size
    assert sizes == {1: 6, 2: 9, 3: 12, 4: 18}


# -- base blocks --------------------------------------------------------------------


def test_base_blocks_chain(chain20):
    params = ProofParameters(R=2, r=10, depth=20)
    base = base_blocks(chain20, params)
    assert base.core == frozenset({"t1:a"})
    assert len(base.shell) == 2
    assert len(base.w0.vertices) == 5
    assert base.w0.vertices == chain20.sum.graph.ball(base.core, 2)
    # The chain's shell vertices are far apart, so no edges get dropped.
    assert base.w_r.edges == base.u_r.edges
    assert base.core_fit.feasible and base.core_fit.c <= 2
    assert base.shell_fit.feasible and base.shell_fit.c <= 2


def test_base_blocks_zero_radius(chain20):
    params = ProofParameters(R=0, r=2, depth=20)
    base = base_blocks(chain20, params)
    assert base.w0.vertices == base.core
    assert base.shell == base.core


def test_base_blocks_drop_shell_edges(triangle12):
    params = ProofParameters(R=1, r=6, depth=12)
    base = base_blocks(triangle12, params)
    # The R-sphere around a triangle corner contains the opposite edge.
    assert len(base.w_r.edges) < len(base.u_r.edges)


# -- symmetry transport ---------------------------------------------------------------


def test_symmetry_map_identity_at_root(chain40):
    sm = build_symmetry_map(chain40, ROOT)
    assert sm.node_map[ROOT] == ROOT
    assert all(k == v for k, v in sm.vertex_map.items())
    assert sm.edge_ok and sm.injective


def test_symmetry_map_recenters(chain40):
    params = ProofParameters(R=2, r=10, depth=40)
    site = next(t for t in translation_sites(chain40.tree, params)
                if chain40.tree.node_depth(t) == 10)
    assert site == "t1/0/1/1/1/1/1/1/1/1/1"
    sm = build_symmetry_map(chain40, site)
    assert sm.node_map[ROOT] == site
    assert sm.edge_ok and sm.injective
    carried, missing = sm.carry(frozenset({"t1:a", "t1:b"}))
    assert missing == 0
    assert {chain40.sum.node_of(v) for v in carried} == {site}
    # Tree adjacency is preserved nodewise.
    for u, w in chain40.tree.edges():
        if u in sm.node_map and w in sm.node_map:
            assert chain40.tree.distance(sm.node_map[u], sm.node_map[w]) == 1


def test_symmetry_map_needs_witnesses():
    doc = chain_spec_doc(8)
    doc["actions"] = {"mode": "trivial"}
    br = build_doc(doc)
    site = "t1/0/1"
    with pytest.raises(PreconditionError) as err:
        build_symmetry_map(br, site)
    assert "consistency witnesses missing" in str(err.value)


# -- partition audit ---------------------------------------------------------------


def test_partition_covers_and_stays_disjoint(chain20):
    params = ProofParameters(R=2, r=10, depth=20)
    base = base_blocks(chain20, params)
    maps = [build_symmetry_map(chain20, t)
            for t in translation_sites(chain20.tree, params)]
    part = assemble_partition(chain20, params, base, maps)
    assert part.covers_safe
    assert part.interiors_disjoint
    assert part.boundary_matches_shells
    assert part.shell_union
    names = [b.name for b in part.members]
    assert names[0] == "W0" and "W@t1" in names


def test_partition_detects_coverage_gap():
    br = build_doc(chain_spec_doc(22))
    params = ProofParameters(R=2, r=10, depth=22, margin=0)
    base = base_blocks(br, params)
    maps = [build_symmetry_map(br, t) for t in translation_sites(br.tree, params)]
    part = assemble_partition(br, params, base, maps)
    # With no safety margin the deepest vertices fall past every block.
    assert not part.covers_safe
    assert len(part.missing) == 8
    assert part.interiors_disjoint


def test_separation_on_chain(chain40):
    params = ProofParameters(R=2, r=10, depth=40)
    base = base_blocks(chain40, params)
    maps = [build_symmetry_map(chain40, t)
            for t in translation_sites(chain40.tree, params)]
    part = assemble_partition(chain40, params, base, maps)
    sep = verify_separation(chain40.sum.graph, part.shells)
    assert sep.min_distance == 19
    assert sep.all_beyond(2)
    assert sep.all_at_least(6)


# -- certificates ------------------------------------------------------------------


def assert_passing_cert(cert, expected_bound=1):
    assert cert.passed(), [(s.name, s.verdict) for s in cert.stages if not s.verdict]
    assert cert.bound == expected_bound
    order = [s.name for s in cert.stages]
    assert order == ["parameters", "base_blocks", "symmetry_maps", "partition",
                     "uniform_asdim_blocks", "boundary_cover", "transported_cover",
                     "separation", "lebesgue", "rd_dim"]


def test_certificate_chain(chain20):
    cert = run_certificate(chain20, ProofParameters(R=2, r=10, depth=20))
    assert_passing_cert(cert)
    assert cert.stage("separation").data["at_least_triple_radius"]
    assert cert.stage("transported_cover").data["multiplicity"] <= cert.n


def test_certificate_triangle(triangle8):
    cert = run_certificate(triangle8, ProofParameters(R=0, r=4, depth=8))
    assert_passing_cert(cert)


def test_certificate_alternating(type2_6):
    cert = run_certificate(type2_6, ProofParameters(R=0, r=2, depth=6))
    assert_passing_cert(cert)


def test_certificate_depth_must_match(chain20):
    with pytest.raises(PreconditionError):
        run_certificate(chain20, ProofParameters(R=2, r=10, depth=22))


def test_certificate_rejects_shallow_build(chain20):
    with pytest.raises(PreconditionError):
        run_certificate(chain20, ProofParameters(R=2, r=12, depth=20))


def test_certificate_serialization_is_deterministic():
    docs = [chain_spec_doc(20), chain_spec_doc(20)]
    texts = []
    for doc in docs:
        br = af.build(AmalgamationSpec.from_json_dict(doc))
        cert = run_certificate(br, ProofParameters(R=2, r=10, depth=20))
        texts.append(jsonio.dumps(cert.to_json_dict()))
    assert texts[0] == texts[1]
    assert '"verdict": "PASS"' in texts[0]


# -- projection fit -----------------------------------------------------------------


def test_projection_fit_frozen_table(chain40):
    fit = projection_fit(chain40, margin=4)
    assert fit.table == (
        (Fraction(1), Fraction(73)),
        (Fraction(3, 2), Fraction(74, 3)),
        (Fraction(2), Fraction(1, 2)),
        (Fraction(3), Fraction(1, 3)),
        (Fraction(4), Fraction(1, 4)),
    )
    assert fit.best_within(2) == (Fraction(2), Fraction(1, 2))
    gamma, c = fit
    assert (gamma, c) == (Fraction(4), Fraction(1, 4))


def test_projection_fit_margin_errors(chain20):
    with pytest.raises(PreconditionError):
        projection_fit(chain20, margin=-1)
    with pytest.raises(PreconditionError):
        projection_fit(chain20, margin=21)


def test_tree_graph(chain6):
    tg = tree_graph(chain6.tree)
    assert len(tg) == 13
    assert tg.diameter() == 12
