from itertools import combinations, product

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import spider_bipartite, k4_triangle, two_k4
from sqw.graph import (
    AmbiguousLabelingError,
    BipartiteGraph,
    EdgeBijection,
    Graph,
    GraphError,
    RootGraphError,
    build_graph,
    complete_graph,
    cycle_graph,
    edge_bundles,
    find_claw,
    line_graph,
    root_graph_from_two_colorable_partition,
    validate_krausz_partition,
)


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def has_krausz_partition(g: Graph) -> bool:
    """Exhaustive search over clique covers with every vertex in at most two cliques."""
    cliques = [frozenset(c) for c in nx.enumerate_all_cliques(to_nx(g)) if len(c) >= 2]
    edges = list(g.edges)

    def search(i, used, load):
        if i == len(edges):
            return True
        u, v = edges[i]
        if any(u in c and v in c for c in used):
            return search(i + 1, used, load)
        for c in cliques:
            if u in c and v in c:
                if any(len(c & d) > 1 for d in used):
                    continue
                if any(load.get(w, 0) >= 2 for w in c):
                    continue
                new = dict(load)
                for w in c:
                    new[w] = new.get(w, 0) + 1
                if search(i + 1, used + [c], new):
                    return True
        return False

    return search(0, [], {})


class TestBuildGraph:
    def test_single_edge(self):
        g = build_graph(2, [(0, 1)])
        assert g.edges == ((0, 1),)

    def test_cycle(self):
        g = build_graph(10, [(i, (i + 1) % 10) for i in range(10)])
        assert g == cycle_graph(10)
        assert all(len(g.neighbors(v)) == 2 for v in range(10))

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError):
            build_graph(3, [(0, 0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphError):
            build_graph(2, [(0, 2)])

    def test_canonical_and_deduplicated(self):
        g = build_graph(3, [(2, 0), (0, 2), (1, 0)])
        assert g.edges == ((0, 1), (0, 2))

    def test_disconnected_allowed(self):
        g = build_graph(4, [(0, 1), (2, 3)])
        assert not g.is_connected()


class TestLineGraph:
    def test_path(self):
        lg, bij = line_graph(build_graph(3, [(0, 1), (1, 2)]))
        assert lg.n == 2 and lg.edges == ((0, 1),)
        assert bij.backward == ((0, 1), (1, 2))

    def test_triangle(self):
        lg, _ = line_graph(complete_graph(3))
        # brute force: every pair of triangle edges shares an endpoint
        assert lg == complete_graph(3)

    def test_empty_rejected(self):
        with pytest.raises(GraphError):
            line_graph(build_graph(3, []))

    def test_spider_cliques_follow_root_vertices(self):
        bip = spider_bipartite()
        lg, bij = line_graph(bip)
        assert lg.n == 6
        assert bij.backward == ((0, 0), (0, 1), (0, 2), (1, 0), (2, 1), (3, 2))
        xs, ys = edge_bundles(bip, bij)
        assert xs == [[0, 1, 2], [3], [4], [5]]
        assert ys == [[0, 3], [1, 4], [2, 5]]
        maximal = {frozenset(c) for c in nx.find_cliques(to_nx(lg))}
        assert maximal == {frozenset(c) for c in xs + ys if len(c) > 1}

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 8).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.sampled_from(list(combinations(range(n), 2))), min_size=1))))
    def test_matches_networkx(self, data):
        n, edges = data
        g = build_graph(n, edges)
        lg, bij = line_graph(g)
        ref = nx.line_graph(to_nx(g))
        mapped = {tuple(sorted((bij(tuple(sorted(a))), bij(tuple(sorted(b)))))) for a, b in ref.edges}
        assert set(lg.edges) == mapped
        assert lg.n == ref.number_of_nodes()

    def test_bijection_is_identity_both_ways(self):
        _, bij = line_graph(complete_graph(5))
        assert sorted(bij.forward.values()) == list(range(10))
        assert all(bij(bij.edge(k)) == k for k in range(10))

    def test_bijection_rejects_repeats(self):
        with pytest.raises(GraphError):
            EdgeBijection(((0, 1), (0, 1)))


class TestKrausz:
    def test_spider_partition_valid_two_colorable(self):
        bip = spider_bipartite()
        lg, bij = line_graph(bip)
        xs, ys = edge_bundles(bip, bij)
        rep = validate_krausz_partition(lg, xs + ys)
        assert rep.valid and rep.two_colorable

    def test_k4_triangle_partition_valid_not_two_colorable(self):
        g, part = k4_triangle()
        rep = validate_krausz_partition(g, part)
        assert rep.valid
        assert not rep.two_colorable

    def test_missing_edge_reported(self):
        g, part = k4_triangle()
        rep = validate_krausz_partition(g, [c for c in part if c != [2, 4]])
        assert any("(2, 4) uncovered" in v for v in rep.violations)

    def test_double_cover_and_overload_reported(self):
        g = complete_graph(3)
        rep = validate_krausz_partition(g, [[0, 1, 2], [0, 1], [0], [0]])
        assert any("covered 2 times" in v for v in rep.violations)
        assert any("vertex 0 lies in 4" in v for v in rep.violations)

    def test_non_clique_reported(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        rep = validate_krausz_partition(g, [[0, 1, 2]])
        assert any("not a clique" in v for v in rep.violations)

    def test_line_graph_bundles_valid_for_small_roots(self):
        rng = np.random.default_rng(7)
        for n in range(2, 9):
            for _ in range(5):
                pairs = [e for e in combinations(range(n), 2) if rng.random() < 0.5]
                if not pairs:
                    continue
                g = build_graph(n, pairs)
                lg, bij = line_graph(g)
                bundles = [[k for k, e in enumerate(bij.backward) if v in e] for v in range(n)]
                assert validate_krausz_partition(lg, [b for b in bundles if b]).valid


class TestRootGraph:
    def test_spider_recovers_root_and_labels(self):
        bip = spider_bipartite()
        lg, bij = line_graph(bip)
        xs, ys = edge_bundles(bip, bij)
        root, rbij = root_graph_from_two_colorable_partition(lg, xs, ys)
        assert root == bip
        assert rbij.backward == bij.backward

    def test_single_edge(self):
        g = build_graph(2, [(0, 1)])
        root, bij = root_graph_from_two_colorable_partition(g, [[0, 1]], [[0], [1]])
        assert root == BipartiteGraph(1, 2, ((0, 0), (0, 1)))
        assert bij(((0, 1))) == 1

    def test_two_k4_ambiguous(self):
        g, alpha, beta = two_k4()
        with pytest.raises(AmbiguousLabelingError) as info:
            root_graph_from_two_colorable_partition(g, alpha.vertex_sets(), beta.vertex_sets())
        assert (info.value.a_index, info.value.b_index) == (0, 0)
        assert sorted(info.value.shared) == [0, 1]

    def test_missing_vertex(self):
        g = build_graph(2, [(0, 1)])
        with pytest.raises(RootGraphError):
            root_graph_from_two_colorable_partition(g, [[0, 1]], [[0]])

    def test_claw_fails_every_partition(self):
        claw = build_graph(4, [(0, 1), (0, 2), (0, 3)])
        cliques = [frozenset(c) for c in nx.enumerate_all_cliques(to_nx(claw))]
        for r in range(1, 5):
            for part_a in combinations(cliques, r):
                for s in range(1, 5):
                    for part_b in combinations(cliques, s):
                        with pytest.raises(RootGraphError):
                            root_graph_from_two_colorable_partition(claw, part_a, part_b)

    def test_round_trip_bipartite_up_to_six_plus_six(self):
        rng = np.random.default_rng(11)
        checked = 0
        for m, n in product(range(1, 7), repeat=2):
            for _ in range(3):
                edges = tuple(e for e in product(range(m), range(n)) if rng.random() < 0.45)
                if not edges:
                    continue
                bip = BipartiteGraph(m, n, edges)
                lg, bij = line_graph(bip)
                xs, ys = edge_bundles(bip, bij)
                root, _ = root_graph_from_two_colorable_partition(lg, [c for c in xs if c], [c for c in ys if c])
                # compare after dropping isolated vertices, preserving the sides
                a = nx.Graph()
                a.add_nodes_from((("x", x) for x, _ in bip.edges), side=0)
                a.add_nodes_from((("y", y) for _, y in bip.edges), side=1)
                a.add_edges_from((("x", x), ("y", y)) for x, y in bip.edges)
                b = nx.Graph()
                b.add_nodes_from((("x", x) for x in range(root.x_count)), side=0)
                b.add_nodes_from((("y", y) for y in range(root.y_count)), side=1)
                b.add_edges_from((("x", x), ("y", y)) for x, y in root.edges)
                assert nx.is_isomorphic(a, b, node_match=lambda p, q: p["side"] == q["side"])
                checked += 1
        assert checked >= 90


class TestClaw:
    def test_star(self):
        claw = build_graph(4, [(0, 1), (0, 2), (0, 3)])
        assert find_claw(claw) == (0, 1, 2, 3)

    def test_triangle(self):
        assert find_claw(complete_graph(3)) is None

    def test_two_k4_is_claw_free_yet_not_a_line_graph(self):
        g, _, _ = two_k4()
        assert find_claw(g) is None
        assert not has_krausz_partition(g)

    def test_krausz_search_sanity(self):
        g, _ = k4_triangle()
        assert has_krausz_partition(g)
        assert not has_krausz_partition(build_graph(4, [(0, 1), (0, 2), (0, 3)]))

    def test_witness_is_induced(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(4, 10))
            g = build_graph(n, [e for e in combinations(range(n), 2) if rng.random() < 0.4])
            w = find_claw(g)
            if w is None:
                # oracle: no vertex has three pairwise non-adjacent neighbours
                h = to_nx(g)
                for v in h:
                    for trio in combinations(h[v], 3):
                        assert any(h.has_edge(a, b) for a, b in combinations(trio, 2))
            else:
                c, *leaves = w
                assert all(g.has_edge(c, leaf) for leaf in leaves)
                assert not any(g.has_edge(a, b) for a, b in combinations(leaves, 2))

    def test_claw_graphs_are_not_line_graphs(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(4, 8))
            g = build_graph(n, [e for e in combinations(range(n), 2) if rng.random() < 0.5])
            if find_claw(g) is not None:
                assert not has_krausz_partition(g)
