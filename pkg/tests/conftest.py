"""Shared builds and tiny graph constructors for the suite.

Expensive truncation builds are session-scoped: every module measures
the same objects, which also exercises result reuse.
"""

from __future__ import annotations

import pytest

import asdimforge as af
from asdimforge.fixtures import (chain_spec_doc, path_graph_doc,
                                 triangle_spec_doc, type2_spec_doc)


def line_graph(n: int, prefix: str = "p") -> af.FiniteGraph:
    names = [f"{prefix}{i}" for i in range(n)]
    return af.FiniteGraph(names, [(names[i], names[i + 1]) for i in range(n - 1)])


def ring_graph(n: int, prefix: str = "c") -> af.FiniteGraph:
    names = [f"{prefix}{i}" for i in range(n)]
    return af.FiniteGraph(names, [(names[i], names[(i + 1) % n]) for i in range(n)])


def complete_graph(n: int, prefix: str = "k") -> af.FiniteGraph:
    names = [f"{prefix}{i}" for i in range(n)]
    return af.FiniteGraph(names, [(names[i], names[j])
                                  for i in range(n) for j in range(i + 1, n)])


def build_doc(doc, depth=None) -> af.BuildResult:
    return af.build(af.AmalgamationSpec.from_json_dict(doc), depth)


@pytest.fixture(scope="session")
def chain6():
    return build_doc(chain_spec_doc(6))


@pytest.fixture(scope="session")
def chain20():
    return build_doc(chain_spec_doc(20))


@pytest.fixture(scope="session")
def chain40():
    return build_doc(chain_spec_doc(40))


@pytest.fixture(scope="session")
def triangle8():
    return build_doc(triangle_spec_doc(8))


@pytest.fixture(scope="session")
def triangle12():
    return build_doc(triangle_spec_doc(12))


@pytest.fixture(scope="session")
def type2_6():
    return build_doc(type2_spec_doc(6))


@pytest.fixture(scope="session")
def path10():
    return af.load_graph(path_graph_doc(10))


@pytest.fixture()
def path10_view(path10):
    return af.MetricView(path10)
