"""
Tests for the α pipelines, the self-wedge check and the structural properties.
"""
from fractions import Fraction

import pytest

from alphaform.core.alpha import (
    FactorizationKind,
    PipelineId,
    alpha_brute,
    alpha_tree_sum,
    compare_alpha,
    edge_bound_check,
    edge_matching_sum,
    factorization_check,
    global_sign,
    integrand_bridge_factor,
    matching_multiplicity,
    p_select,
    pbar_expand,
    pipelines_agree,
    rho_edge,
    tree_terms,
    vstar_invariance,
    wedge_prefactor,
    wedge_self,
)
from alphaform.core.errors import GuardExceeded
from alphaform.core.forms import da, dx
from alphaform.core.poly import VarClass, homogeneous_degree
from alphaform.services.generators import (
    banana,
    dunce_bridge,
    dunce_disjoint,
    dunce_vertex_join,
    k4_doubled,
    theta_subdivided,
)


def word(*edges):
    return tuple(da(e) for e in edges)


def test_rho_edge(dunce_cap):
    x1, x2 = dunce_cap.position(1), dunce_cap.position(2)
    a1 = dunce_cap.schwinger(1)
    rho = rho_edge(dunce_cap, 1)
    assert rho.coefficient(word(1)) == x1 - x2
    assert rho.coefficient((dx(1),)) == -2 * a1
    assert rho.coefficient((dx(2),)) == 2 * a1
    with pytest.raises(ValueError):
        rho_edge(dunce_cap, 5)


def test_p_select_keeps_full_dx_terms(dunce_cap):
    selected = p_select(pbar_expand(dunce_cap), dunce_cap)
    assert selected
    for w in selected.words():
        assert w[-2:] == (dx(1), dx(2))
        assert len(w) == 4


def test_dunce_cap_tree_sum(dunce_cap):
    a1, a2, a3, a4 = (dunce_cap.schwinger(e) for e in range(1, 5))
    alpha = alpha_tree_sum(dunce_cap)
    assert alpha.prefactor.coefficient == Fraction(1, 8)
    assert alpha.prefactor.psi_half == -3
    assert alpha.prefactor.pi_half == 2
    assert alpha.metadata.pipeline == PipelineId.TREE_SUM
    assert alpha.degree == 2
    assert alpha.body.coefficient(word(1, 3)) == a4
    assert alpha.body.coefficient(word(2, 3)) == a4
    assert alpha.body.coefficient(word(1, 4)) == -a3
    assert alpha.body.coefficient(word(2, 4)) == -a3
    assert alpha.body.coefficient(word(3, 4)) == a1 + a2
    assert alpha.body.coefficient(word(1, 2)) == dunce_cap.registry.ring.zero


def test_dunce_cap_pipelines_agree(dunce_cap):
    brute = alpha_brute(dunce_cap)
    tree_sum = alpha_tree_sum(dunce_cap)
    assert brute.metadata.pipeline == PipelineId.BRUTE
    assert brute.prefactor.a_half == ()
    assert compare_alpha(brute, tree_sum).agree
    assert global_sign(brute, tree_sum) == 1


def test_disagreement_names_a_word(dunce_cap):
    alpha = alpha_tree_sum(dunce_cap)
    flipped = alpha.model_copy(update={"body": -alpha.body})
    comparison = compare_alpha(alpha, flipped)
    assert not comparison.agree
    assert comparison.witness_word == "da1∧da3"
    assert global_sign(alpha, flipped) == -1


def test_multiedge_vanishes(multiedge):
    for alpha in (alpha_tree_sum(multiedge), alpha_brute(multiedge)):
        assert alpha.is_zero
        assert alpha.metadata.loop_number == 1
        assert alpha.metadata.note == "odd loop number"
    assert pipelines_agree(multiedge).agree


def test_path_tree_is_a_scalar(path_tree):
    alpha = alpha_tree_sum(path_tree)
    assert alpha.degree == 0
    assert alpha.body.coefficient(()) == path_tree.registry.ring.one
    assert pipelines_agree(path_tree).agree


def test_disconnected_graph_has_zero_alpha():
    graph = dunce_disjoint()
    assert alpha_tree_sum(graph).metadata.note == "disconnected"
    assert alpha_brute(graph).is_zero


def test_brute_guard(dunce_cap):
    with pytest.raises(GuardExceeded):
        alpha_brute(dunce_cap, max_edges=3)


@pytest.mark.parametrize("graph", [
    banana(3),
    theta_subdivided([1, 2, 2]),
    dunce_vertex_join(),
    dunce_bridge(),
], ids=["banana-3", "theta-1-2-2", "vertex-join", "bridge"])
def test_pipelines_agree(graph):
    comparison = pipelines_agree(graph, max_edges=12)
    assert comparison.agree, comparison


def test_tree_terms(dunce_cap):
    terms = tree_terms(dunce_cap)
    assert len(terms) == 5
    names = dunce_cap.registry.names_of(VarClass.SCHWINGER)
    for term in terms:
        assert len(term.cobasis) == 2
        assert term.matching_count == 1
        assert term.multiplicity == 2
        assert term.dodgson_sum == term.matching_sum * 2
        if term.matching_sum:
            assert homogeneous_degree(term.matching_sum, names) == 1


def test_tree_terms_need_even_loops(multiedge):
    with pytest.raises(ValueError):
        tree_terms(multiedge)


def test_matching_counts():
    graph = k4_doubled()
    assert edge_matching_sum(graph, [1, 2])[1] == 1
    assert edge_matching_sum(graph, [1, 2, 3, 4])[1] == 3
    assert edge_matching_sum(graph, [1, 2, 3, 4, 5, 6])[1] == 15
    assert edge_matching_sum(banana(9), range(1, 9))[1] == 105
    assert [matching_multiplicity(n) for n in (2, 4, 6, 8)] == [2, 8, 48, 384]


def test_tree_terms_at_eight_loops():
    terms = tree_terms(banana(9))
    assert len(terms) == 9
    assert all(len(t.cobasis) == 8 for t in terms)
    assert all(t.matching_count == 105 for t in terms)
    assert all(t.multiplicity == 384 for t in terms)


def test_wedge_self_vanishes(dunce_cap):
    coefficients = wedge_self(alpha_tree_sum(dunce_cap))
    assert [c.edge_set for c in coefficients] == [(1, 2, 3, 4)]
    assert all(c.is_zero for c in coefficients)
    assert wedge_prefactor(alpha_tree_sum(dunce_cap)).psi_half == -6


@pytest.mark.parametrize("graph", [dunce_vertex_join(), theta_subdivided([2, 2, 2])], ids=["vertex-join", "theta-2-2-2"])
def test_wedge_self_vanishes_on_corpus(graph):
    assert all(c.is_zero for c in wedge_self(alpha_tree_sum(graph)))


def test_edge_bound():
    assert edge_bound_check(banana(3))
    assert wedge_self(alpha_tree_sum(banana(3))) == []
    assert not edge_bound_check(dunce_vertex_join())


def test_factorization_cut_vertex():
    report = factorization_check(dunce_vertex_join())
    assert report.kind == FactorizationKind.CUT_VERTEX
    assert report.pivot == 3
    assert report.holds
    assert report.sign in (1, -1)
    assert report.pi_half_shift == 0


def test_factorization_bridge():
    report = factorization_check(dunce_bridge())
    assert report.kind == FactorizationKind.BRIDGE
    assert report.pivot == 5
    assert report.holds
    assert report.pi_half_shift == 1
    assert integrand_bridge_factor(dunce_bridge(), report.pivot)


def test_factorization_disconnected_and_1pi(dunce_cap):
    report = factorization_check(dunce_disjoint())
    assert report.kind == FactorizationKind.DISCONNECTED
    assert report.holds
    assert factorization_check(dunce_cap).kind == FactorizationKind.NONE


def test_integrand_bridge_factor(dunce_cap):
    assert integrand_bridge_factor(dunce_bridge(), 5)
    with pytest.raises(ValueError):
        integrand_bridge_factor(dunce_cap, 1)


def test_vstar_invariance(dunce_cap):
    signs = vstar_invariance(dunce_cap)
    assert signs[3] == 1
    assert set(signs.values()) <= {1, -1}
