"""Tests para haces de hipergrafos."""

from __future__ import annotations

from itertools import product

import pytest

from src.core.hypergraph import (
    BaseEdge,
    BundleSpec,
    Edge,
    base_edges,
    boundary,
    bundle_by_base,
    enumerate_bundle,
    fiber,
    parse_edge,
    remove_entry,
)
from src.utils.errors import InvalidParameterError


class TestBundleSpec:
    """Tests para BundleSpec."""

    def test_rectangles(self):
        spec = BundleSpec.rectangles(3, 2)
        assert spec.n == (2, 2, 2)
        assert spec.is_rectangular

    @pytest.mark.parametrize("d,k,n", [(2, 3, (2, 2)), (2, 0, (2, 2)), (2, 2, (2,)), (2, 1, (0, 2))])
    def test_invalid(self, d, k, n):
        with pytest.raises(InvalidParameterError):
            BundleSpec(d=d, k=k, n=n)

    def test_parse(self):
        assert BundleSpec.parse("3.2") == BundleSpec(3, 2, (2, 2, 2))
        assert BundleSpec.parse("2.1/3,1") == BundleSpec(2, 1, (3, 1))
        with pytest.raises(InvalidParameterError):
            BundleSpec.parse("tres")


class TestEnumerateBundle:
    """Tests para enumerate_bundle."""

    def test_d2_k2_rectangles(self):
        edges = enumerate_bundle(BundleSpec.rectangles(2, 2))
        assert edges == [Edge(((1, a), (2, b))) for a, b in product((1, 2), repeat=2)]

    def test_d1_k1(self):
        assert enumerate_bundle(BundleSpec.rectangles(1, 1)) == [Edge(((1, 1),)), Edge(((1, 2),))]

    def test_d3_k2_has_twelve_edges(self):
        assert len(enumerate_bundle(BundleSpec.rectangles(3, 2))) == 12

    def test_size_formula_exhaustive(self):
        for d in range(1, 5):
            for k in range(1, d + 1):
                for n in product((1, 2, 3), repeat=d):
                    spec = BundleSpec(d=d, k=k, n=n)
                    edges = enumerate_bundle(spec)
                    assert len(edges) == spec.expected_size()
                    assert edges == sorted(edges)

    def test_fibers_partition_the_bundle(self):
        spec = BundleSpec(d=3, k=2, n=(2, 3, 1))
        grouped = bundle_by_base(spec)
        for base, edges in grouped.items():
            assert all(edge.projection() == base for edge in edges)
            assert len(edges) == len(fiber(spec, base))
        assert sum(len(edges) for edges in grouped.values()) == len(enumerate_bundle(spec))


class TestBoundaryAndRemoval:
    """Tests para boundary y remove_entry."""

    def test_boundary(self):
        assert boundary(BaseEdge((1, 2))) == [BaseEdge((1,)), BaseEdge((2,))]
        assert boundary(BaseEdge((1, 2, 3))) == [BaseEdge((1, 2)), BaseEdge((1, 3)), BaseEdge((2, 3))]
        assert boundary(BaseEdge((2,))) == [BaseEdge(())]

    def test_remove_entry(self):
        assert remove_entry(Edge(((1, 1), (2, 2))), 1) == Edge(((2, 2),))
        assert remove_entry(Edge(((1, 2), (2, 1), (3, 1))), 2) == Edge(((1, 2), (3, 1)))

    def test_remove_entry_absent_block(self):
        with pytest.raises(InvalidParameterError):
            remove_entry(Edge(((1, 1), (2, 2))), 3)

    def test_removal_matches_boundary(self):
        edge = Edge(((1, 2), (2, 1), (3, 1)))
        projections = sorted(remove_entry(edge, j).projection() for j in edge.projection().blocks)
        assert projections == boundary(edge.projection())

    def test_base_edges_lexicographic(self):
        assert base_edges(3, 2) == [BaseEdge((1, 2)), BaseEdge((1, 3)), BaseEdge((2, 3))]


class TestEdgeText:
    """Tests para la forma textual de aristas."""

    def test_parse_and_format(self):
        d, edge = parse_edge("3.2:[1:2,3:1]")
        assert d == 3
        assert edge == Edge(((1, 2), (3, 1)))
        assert edge.to_text(3) == "3.2:[1:2,3:1]"

    @pytest.mark.parametrize("text", ["3.2:[1:2]", "2.2:[1:1,3:1]", "x", "2.2:[1:1,1:2]"])
    def test_parse_invalid(self, text):
        with pytest.raises(InvalidParameterError):
            parse_edge(text)
