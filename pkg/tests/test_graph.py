"""
Tests for the graph core: validation, matrices, spanning trees, connectivity and I/O.
"""
import pytest

from alphaform.core.errors import GraphError, GraphParseError
from alphaform.core.graph import (
    build_graph,
    connectivity_profile,
    enumerate_spanning_trees,
    flag_sign,
    graph_from_json,
    graph_from_text,
    graph_to_json,
    graph_to_text,
    incidence_full,
    incidence_reduced,
    is_connected,
    laplacian_reduced,
    load_graph,
    loop_number,
    permute_edges,
    reverse_edge,
    subgraph,
    tree_flags,
    tree_sign,
    with_v_star,
)
from alphaform.services.generators import dunce_bridge, dunce_disjoint, dunce_vertex_join


def test_v_star_defaults_to_last_vertex(dunce_cap):
    assert dunce_cap.v_star == 3
    assert dunce_cap.position_vertices == (1, 2)
    assert with_v_star(dunce_cap, 1).position_of(3) == 2


@pytest.mark.parametrize("vertices,edges,v_star", [
    (3, [(1, 1)], None),
    (3, [(1, 4)], None),
    (3, [(1, 2)], 5),
])
def test_invalid_graphs(vertices, edges, v_star):
    with pytest.raises(GraphError):
        build_graph(vertices, edges, v_star)


def test_position_of_v_star_is_rejected(dunce_cap):
    with pytest.raises(ValueError):
        dunce_cap.position_of(3)


def test_incidence_matrices(dunce_cap):
    full = incidence_full(dunce_cap)
    assert full.entries[0] == (1, -1, 0)
    assert full.entries[2] == (0, 1, -1)
    reduced = incidence_reduced(dunce_cap)
    assert reduced.cols == 2
    assert reduced.entries == ((1, -1), (1, 0), (0, 1), (0, 1))


def test_loop_number(dunce_cap, multiedge, path_tree, long_theta):
    assert loop_number(dunce_cap) == 2
    assert loop_number(multiedge) == 1
    assert loop_number(path_tree) == 0
    assert loop_number(long_theta) == 2
    assert loop_number(dunce_disjoint()) == 4


def test_spanning_trees_of_dunce_cap(dunce_cap):
    trees = enumerate_spanning_trees(dunce_cap)
    assert [t.edge_subset for t in trees] == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4)]
    for tree in trees:
        assert abs(tree.det_sign) == 1


def test_tree_sign_table(dunce_cap):
    signs = {t.edge_subset: tree_sign(dunce_cap, t) for t in enumerate_spanning_trees(dunce_cap)}
    order = [(1, 3), (1, 4), (1, 2), (2, 3), (2, 4)]
    assert [signs[t] for t in order] == [-1, 1, 1, 1, -1]


def test_tree_sign_needs_even_loops(multiedge):
    tree = enumerate_spanning_trees(multiedge)[0]
    with pytest.raises(ValueError):
        tree_sign(multiedge, tree)


def test_flags_reproduce_incidence_determinant(dunce_cap, long_theta):
    for graph in (dunce_cap, long_theta):
        for tree in enumerate_spanning_trees(graph)[:20]:
            flags = tree_flags(graph, tree)
            assert set(flags) == set(tree.edge_subset)
            assert graph.v_star not in flags.values()
            assert flag_sign(graph, tree) == tree.det_sign


def test_disconnected_graph_has_no_spanning_trees():
    graph = dunce_disjoint()
    assert not is_connected(graph)
    assert enumerate_spanning_trees(graph) == []


def test_laplacian_entries(dunce_cap):
    laplacian = laplacian_reduced(dunce_cap)
    a1, a2 = dunce_cap.schwinger(1), dunce_cap.schwinger(2)
    diagonal = laplacian[0][0]
    assert diagonal.numerator == a1 + a2
    assert diagonal.denominator == a1 * a2
    off = laplacian[0][1]
    assert off.numerator == -dunce_cap.registry.ring.one
    assert off.denominator == a1


def test_connectivity_profiles(dunce_cap):
    profile = connectivity_profile(dunce_cap)
    assert profile.is_1pi
    assert profile.bridges == ()

    joined = connectivity_profile(dunce_vertex_join())
    assert joined.cut_vertices == (3,)
    assert not joined.is_1pi

    bridged = connectivity_profile(dunce_bridge())
    assert bridged.bridges == (5,)
    assert set(bridged.cut_vertices) == {3, 6}

    split = connectivity_profile(dunce_disjoint())
    assert split.component_vertices == ((1, 2, 3), (4, 5, 6))
    assert len(split.components) == 2


def test_parallel_edges_are_never_bridges(multiedge):
    assert connectivity_profile(multiedge).bridges == ()


def test_subgraph_maps_back_to_parent(dunce_cap):
    part = subgraph(dunce_cap, [3, 4], [2, 3])
    assert part.graph.edges == ((2, 1), (2, 1))
    assert part.edge_map == {1: 3, 2: 4}
    assert part.vertex_map == {1: 2, 2: 3}
    assert part.graph.v_star == 2


def test_convention_transforms(dunce_cap):
    assert reverse_edge(dunce_cap, 1).edges[0] == (1, 2)
    permuted = permute_edges(dunce_cap, [4, 3, 2, 1])
    assert permuted.edges == ((3, 2), (3, 2), (3, 1), (2, 1))
    with pytest.raises(ValueError):
        permute_edges(dunce_cap, [1, 1, 2, 3])


def test_text_format(dunce_cap):
    text = graph_to_text(dunce_cap)
    assert text == "3 4\n2 1\n3 1\n3 2\n3 2\n"
    assert graph_from_text(text) == dunce_cap
    moved = with_v_star(dunce_cap, 1)
    assert graph_from_text(graph_to_text(moved)) == moved


def test_json_format(dunce_cap):
    text = graph_to_json(dunce_cap)
    assert text == '{"vertices": 3, "edges": [[2, 1], [3, 1], [3, 2], [3, 2]]}\n'
    assert graph_from_json(text) == dunce_cap


def test_parse_errors_carry_position():
    with pytest.raises(GraphParseError) as info:
        graph_from_text("3 2\n1 2\n2 x\n")
    assert info.value.line == 3
    assert info.value.column == 3

    with pytest.raises(GraphParseError) as info:
        graph_from_text("3 2\n1 2\n")
    assert info.value.line == 3

    with pytest.raises(GraphParseError):
        graph_from_json('{"vertices": 3, "edges": [[1, 2]')


def test_load_graph_detects_format(tmp_path, dunce_cap):
    json_path = tmp_path / "dunce.json"
    json_path.write_text(graph_to_json(dunce_cap))
    text_path = tmp_path / "dunce.txt"
    text_path.write_text(graph_to_text(dunce_cap))
    assert load_graph(str(json_path)) == load_graph(str(text_path)) == dunce_cap


def test_fingerprint_depends_on_convention(dunce_cap):
    assert dunce_cap.fingerprint() == build_graph(3, [(2, 1), (3, 1), (3, 2), (3, 2)]).fingerprint()
    assert dunce_cap.fingerprint() != reverse_edge(dunce_cap, 1).fingerprint()
