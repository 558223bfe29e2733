"""
The two α pipelines, the self-wedge verifier and the structural checks.

Both pipelines return an ``AlphaForm``: a scalar prefactor times a body that
only carries da generators. The brute pipeline expands ρ_1∧…∧ρ_|E| and
integrates every x-monomial with Isserlis' theorem; the tree-sum pipeline
sums det(𝕀[T]) times matchings of edge Dodgson polynomials over spanning
trees. The forms are compared after folding the rational coefficient into
the body.
"""
import logging
import math
from collections import defaultdict
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict

from .dodgson import edge_dodgson, symanzik_first, vertex_dodgson
from .errors import GuardExceeded
from .forms import (
    DiffForm,
    GenKind,
    ScalarPrefactor,
    Word,
    canonicalize_mixed_term,
    da,
    dx,
    format_word,
    perfect_matchings,
    wedge,
    wedge_all,
)
from .graph import (
    Graph,
    SpanningTree,
    connectivity_profile,
    enumerate_spanning_trees,
    is_connected,
    loop_number,
    subgraph,
    tree_sign,
    with_v_star,
)
from .poly import MPoly, VarClass, divides, exact_div, poly_to_text, relabel, schwinger_name, to_qq

logger = logging.getLogger(__name__)

PBAR_TERM_LIMIT = 2 ** 20


class PipelineId(str, Enum):
    TREE_SUM = "tree-sum"
    BRUTE = "brute"


class AlphaMetadata(BaseModel):
    model_config = ConfigDict(frozen=True)

    graph_hash: str
    v_star: int
    pipeline: PipelineId
    loop_number: int
    edge_count: int
    note: Optional[str] = None


class AlphaForm(BaseModel):
    """prefactor · body, body a form in the da_e only."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    prefactor: ScalarPrefactor
    body: Any
    metadata: AlphaMetadata

    @property
    def is_zero(self) -> bool:
        return not self.body

    @property
    def degree(self) -> Optional[int]:
        return self.body.degree

    def normalized(self) -> "AlphaForm":
        """Fold a-powers into the body by exact division; they must be whole."""
        a_half = self.prefactor.a_half
        if not any(a_half):
            return self
        ring = self.body.ring
        up, down = ring.one, ring.one
        for edge, doubled in enumerate(a_half, start=1):
            if doubled % 2:
                raise ValueError(f"a{edge} carries a half-integer power {doubled}/2")
            gen = ring.gens[[str(s) for s in ring.symbols].index(schwinger_name(edge))]
            if doubled > 0:
                up *= gen ** (doubled // 2)
            else:
                down *= gen ** (-doubled // 2)
        body = self.body.map_coefficients(lambda c: exact_div(c * up, down))
        prefactor = self.prefactor.model_copy(update={"a_half": ()})
        return self.model_copy(update={"prefactor": prefactor, "body": body})

    def scaled_body(self) -> DiffForm:
        """Body with the rational coefficient multiplied in."""
        factor = to_qq(self.prefactor.coefficient)
        return self.body.map_coefficients(lambda c: c.mul_ground(factor))


def _zero_alpha(graph: Graph, pipeline: PipelineId, note: str) -> AlphaForm:
    return AlphaForm(
        prefactor=ScalarPrefactor(),
        body=DiffForm.zero(graph.registry.ring),
        metadata=_metadata(graph, pipeline, note),
    )


def _metadata(graph: Graph, pipeline: PipelineId, note: Optional[str] = None) -> AlphaMetadata:
    return AlphaMetadata(
        graph_hash=graph.fingerprint(),
        v_star=graph.v_star,
        pipeline=pipeline,
        loop_number=loop_number(graph),
        edge_count=graph.edge_count,
        note=note,
    )


def _incidence_x(graph: Graph, edge: int) -> MPoly:
    """(𝕀x)_e = x_head − x_tail with x_{v_star} = 0."""
    ring = graph.registry.ring
    value = ring.zero
    for vertex, sign in ((graph.head(edge), 1), (graph.tail(edge), -1)):
        if vertex != graph.v_star:
            value += graph.position(vertex) * sign
    return value


def rho_edge(graph: Graph, edge: int) -> DiffForm:
    """ρ_e = (𝕀x)_e da_e − 2a_e (𝕀dx)_e."""
    if not 1 <= edge <= graph.edge_count:
        raise ValueError(f"edge {edge} outside [1, {graph.edge_count}]")
    ring = graph.registry.ring
    terms: List[Tuple[Word, MPoly]] = [((da(edge),), _incidence_x(graph, edge))]
    weight = graph.schwinger(edge) * (-2)
    for vertex, sign in ((graph.head(edge), 1), (graph.tail(edge), -1)):
        if vertex != graph.v_star:
            terms.append(((dx(vertex),), weight * sign))
    return DiffForm.from_terms(ring, terms)


def pbar_expand(graph: Graph) -> DiffForm:
    """P̄ = ρ_1∧…∧ρ_|E|, refused beyond 2^20 expansion terms."""
    size = 2 ** graph.edge_count
    if size > PBAR_TERM_LIMIT:
        raise GuardExceeded("pbar expansion", size, PBAR_TERM_LIMIT)
    ring = graph.registry.ring
    return wedge_all([rho_edge(graph, e) for e in range(1, graph.edge_count + 1)], ring)


def p_select(form: DiffForm, graph: Graph) -> DiffForm:
    """Keep the terms carrying every dx_v, v ≠ v_star."""
    wanted = len(graph.position_vertices)
    return form.select(lambda word: sum(g.kind == GenKind.DX for g in word) == wanted)


def _split_da(word: Word) -> Word:
    return tuple(g for g in word if g.kind == GenKind.DA)


def _isserlis(graph: Graph, factors: Sequence[int]) -> MPoly:
    """Σ over perfect matchings of Π (−1)^{j+k} ψ^{j,k}; zero for odd length."""
    ring = graph.registry.ring
    if len(factors) % 2:
        return ring.zero
    total = ring.zero
    for matching in perfect_matchings(range(len(factors))):
        term = ring.one
        for p, q in matching:
            term *= _signed_vertex_dodgson(graph, factors[p], factors[q])
            if not term:
                break
        total += term
    return total


@lru_cache(maxsize=None)
def _signed_vertex_dodgson(graph: Graph, v: int, w: int) -> MPoly:
    value = vertex_dodgson(graph, v, w)
    return -value if (graph.position_of(v) + graph.position_of(w)) % 2 else value


def _gaussian_body(graph: Graph, selected: DiffForm) -> Dict[Word, MPoly]:
    """Replace every x-monomial by its Isserlis sum; ψ^{−L/2} and 2^{−L/2} stay outside."""
    ring = graph.registry.ring
    registry = graph.registry
    position_index = {
        registry.names.index(name): vertex
        for name, vertex in zip(registry.names_of(VarClass.POSITION), graph.position_vertices)
    }
    cache: Dict[Tuple[int, ...], MPoly] = {}
    body: Dict[Word, MPoly] = defaultdict(lambda: ring.zero)
    for word, coeff in selected.items():
        for monom, value in coeff.terms():
            factors: List[int] = []
            a_part = list(monom)
            for index, vertex in position_index.items():
                factors.extend([vertex] * monom[index])
                a_part[index] = 0
            key = tuple(factors)
            if key not in cache:
                cache[key] = _isserlis(graph, factors)
            if cache[key]:
                body[_split_da(word)] += ring.from_dict({tuple(a_part): value}) * cache[key]
    return body


def alpha_brute(graph: Graph, max_edges: Optional[int] = None) -> AlphaForm:
    """α by symbolic Gaussian integration of P_Γ."""
    if max_edges is not None and graph.edge_count > max_edges:
        raise GuardExceeded("brute-force edge count", graph.edge_count, max_edges)
    if not is_connected(graph):
        logger.warning("graph %s is disconnected; alpha is zero", graph.fingerprint())
        return _zero_alpha(graph, PipelineId.BRUTE, "disconnected")
    loops = loop_number(graph)
    selected = p_select(pbar_expand(graph), graph)
    body = DiffForm(graph.registry.ring, _gaussian_body(graph, selected))
    n = len(graph.position_vertices)
    raw = AlphaForm(
        prefactor=ScalarPrefactor(
            coefficient=Fraction(1, 2 ** (graph.edge_count + loops // 2)),
            pi_half=n,
            psi_half=-(loops + 1),
            a_half=(-2,) * graph.edge_count,
        ),
        body=body,
        metadata=_metadata(graph, PipelineId.BRUTE, "odd loop number" if loops % 2 else None),
    )
    return raw.normalized()


class TreeTerm(BaseModel):
    """One spanning tree's share of the tree-sum: det(𝕀[T]) times matchings over T̄."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tree: SpanningTree
    cobasis: Tuple[int, ...]
    sign: int
    matching_sum: Any
    matching_count: int
    multiplicity: int

    @property
    def dodgson_sum(self) -> MPoly:
        """Σ over all L! permutations of the cobasis, recovered from the matchings."""
        return self.matching_sum * self.multiplicity


def matching_multiplicity(loops: int) -> int:
    """2^{L/2}(L/2)! permutations give the same matching product."""
    return 2 ** (loops // 2) * math.factorial(loops // 2)


def edge_matching_sum(graph: Graph, edges: Sequence[int]) -> Tuple[MPoly, int]:
    """Σ over perfect matchings of Π ψ^{e,f}, and the number of matchings."""
    ring = graph.registry.ring
    total = ring.zero
    count = 0
    for matching in perfect_matchings(sorted(edges)):
        count += 1
        term = ring.one
        for e, f in matching:
            term *= edge_dodgson(graph, e, f)
        total += term
    return total, count


def tree_terms(graph: Graph) -> List[TreeTerm]:
    loops = loop_number(graph)
    if loops % 2:
        raise ValueError(f"tree terms need an even loop number, got L={loops}")
    terms = []
    for tree in enumerate_spanning_trees(graph):
        cobasis = tuple(e for e in range(1, graph.edge_count + 1) if e not in tree.edge_subset)
        matching_sum, count = edge_matching_sum(graph, cobasis)
        terms.append(TreeTerm(
            tree=tree,
            cobasis=cobasis,
            sign=tree_sign(graph, tree),
            matching_sum=matching_sum,
            matching_count=count,
            multiplicity=matching_multiplicity(loops),
        ))
    return terms


def alpha_tree_sum(graph: Graph) -> AlphaForm:
    """α = (−1)^{|V|−1} π^{(|V|−1)/2} Σ_T det(𝕀[T]) M(T̄) da_T̄ / (2^{3L/2} ψ^{(L+1)/2})."""
    if not is_connected(graph):
        logger.warning("graph %s is disconnected; alpha is zero", graph.fingerprint())
        return _zero_alpha(graph, PipelineId.TREE_SUM, "disconnected")
    loops = loop_number(graph)
    if loops % 2:
        logger.info("graph %s has odd loop number %d; alpha is zero", graph.fingerprint(), loops)
        return _zero_alpha(graph, PipelineId.TREE_SUM, "odd loop number")
    ring = graph.registry.ring
    body = DiffForm.from_terms(ring, [
        (tuple(da(e) for e in term.cobasis), term.matching_sum * term.tree.det_sign)
        for term in tree_terms(graph)
    ])
    n = len(graph.position_vertices)
    return AlphaForm(
        prefactor=ScalarPrefactor(
            coefficient=Fraction((-1) ** n, 2 ** (3 * loops // 2)),
            pi_half=n,
            psi_half=-(loops + 1),
        ),
        body=body,
        metadata=_metadata(graph, PipelineId.TREE_SUM),
    )


class PipelineComparison(BaseModel):
    agree: bool
    witness_word: Optional[str] = None
    brute: Optional[str] = None
    tree_sum: Optional[str] = None


def compare_alpha(left: AlphaForm, right: AlphaForm) -> PipelineComparison:
    """Word-by-word cross-multiplied comparison over the shared ψ and π powers."""
    if left.is_zero and right.is_zero:
        return PipelineComparison(agree=True)
    if (left.prefactor.pi_half, left.prefactor.psi_half) != (
        right.prefactor.pi_half, right.prefactor.psi_half
    ) and not (left.is_zero or right.is_zero):
        return PipelineComparison(
            agree=False,
            witness_word="prefactor",
            brute=left.prefactor.render(with_pi=True),
            tree_sum=right.prefactor.render(with_pi=True),
        )
    lhs, rhs = left.scaled_body(), right.scaled_body()
    for word in sorted(set(lhs.words()) | set(rhs.words())):
        if lhs.coefficient(word) != rhs.coefficient(word):
            return PipelineComparison(
                agree=False,
                witness_word=format_word(word),
                brute=poly_to_text(lhs.coefficient(word)),
                tree_sum=poly_to_text(rhs.coefficient(word)),
            )
    return PipelineComparison(agree=True)


def pipelines_agree(graph: Graph, max_edges: Optional[int] = None) -> PipelineComparison:
    return compare_alpha(alpha_brute(graph, max_edges), alpha_tree_sum(graph))


def global_sign(left: AlphaForm, right: AlphaForm) -> Optional[int]:
    """+1 or −1 when the scaled bodies agree up to that sign, 0 when both vanish."""
    lhs, rhs = left.scaled_body(), right.scaled_body()
    if not lhs and not rhs:
        return 0
    if lhs == rhs:
        return 1
    if lhs == -rhs:
        return -1
    return None


class QECoefficient(BaseModel):
    """Coefficient of dE in body∧body, the squared prefactor cleared."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    edge_set: Tuple[int, ...]
    value: Any

    @property
    def is_zero(self) -> bool:
        return not self.value


def wedge_self(alpha: AlphaForm) -> List[QECoefficient]:
    """Every 2L-edge coefficient of α∧α; empty when 2L exceeds |E|."""
    loops = alpha.metadata.loop_number
    square = wedge(alpha.body, alpha.body)
    return [
        QECoefficient(edge_set=subset, value=square.coefficient(tuple(da(e) for e in subset)))
        for subset in combinations(range(1, alpha.metadata.edge_count + 1), 2 * loops)
    ]


def wedge_prefactor(alpha: AlphaForm) -> ScalarPrefactor:
    return alpha.prefactor.square()


def edge_bound_check(graph: Graph) -> bool:
    """True when 2L > |E|, so α∧α has no admissible dE at all."""
    return 2 * loop_number(graph) > graph.edge_count


def relabel_body(body: DiffForm, target: Graph, edge_map: Mapping[int, int]) -> DiffForm:
    """Move a body onto ``target``'s edge labels, sorting words with their signs."""
    name_map = {schwinger_name(local): schwinger_name(edge) for local, edge in edge_map.items()}
    ring = target.registry.ring
    terms = []
    for word, coeff in body.items():
        sign, canonical = canonicalize_mixed_term([(1, da(edge_map[g.index])) for g in word])
        moved = relabel(coeff, ring, name_map)
        terms.append((canonical, moved if sign > 0 else -moved))
    return DiffForm.from_terms(ring, terms)


class FactorizationKind(str, Enum):
    DISCONNECTED = "disconnected"
    CUT_VERTEX = "cut_vertex"
    BRIDGE = "bridge"
    NONE = "none"


class FactorizationReport(BaseModel):
    kind: FactorizationKind
    holds: bool
    sign: Optional[int] = None
    pi_half_shift: int = 0
    pivot: Optional[int] = None
    parts: Tuple[Tuple[int, ...], ...] = ()
    detail: Optional[str] = None


def _side_subgraph(graph: Graph, vertices: Sequence[int], anchor: Optional[int]):
    members = set(vertices)
    edges = [
        e for e, (t, h) in enumerate(graph.edges, start=1) if t in members and h in members
    ]
    part = subgraph(graph, edges, sorted(members))
    local = {v: i for i, v in part.vertex_map.items()}
    if graph.v_star in members:
        return part
    return part._replace(graph=with_v_star(part.graph, local[anchor]))


def _split(graph: Graph, removed_vertex: Optional[int], removed_edge: Optional[int]):
    """Two sides of a cut; the first holds v_star."""
    nx_graph = graph.to_networkx()
    if removed_edge is not None:
        tail, head = graph.edges[removed_edge - 1]
        nx_graph.remove_edge(tail, head, key=removed_edge)
    if removed_vertex is not None:
        nx_graph.remove_node(removed_vertex)
    components = sorted((sorted(c) for c in nx.connected_components(nx_graph)), key=lambda c: c[0])
    first = next((c for c in components if graph.v_star in c), components[0])
    second = sorted(v for c in components if c is not first for v in c)
    if removed_vertex is not None:
        first = sorted(set(first) | {removed_vertex})
        second = sorted(set(second) | {removed_vertex})
    return first, second


def factorization_check(graph: Graph) -> FactorizationReport:
    """Disconnected → 0, cut vertex → ±α₁∧α₂, bridge → ±π^{1/2}·α₁∧α₂.

    The bridge case compares the normalized forms, with the bodies rescaled
    by ψ₁^{L₂/2}ψ₂^{L₁/2}. The 2a_e factor of the bridge lives in the
    integrand P_Γ and is absorbed by the normalization, leaving π^{1/2}.
    ``integrand_bridge_factor`` checks the 2a_e statement itself.
    """
    profile = connectivity_profile(graph)
    alpha = alpha_tree_sum(graph)
    if len(profile.components) > 1:
        return FactorizationReport(
            kind=FactorizationKind.DISCONNECTED,
            holds=alpha.is_zero,
            parts=profile.component_vertices,
        )
    if profile.bridges:
        bridge = profile.bridges[0]
        first, second = _split(graph, None, bridge)
        tail, head = graph.edges[bridge - 1]
        anchor = tail if tail in second else head
        kind, pivot, shift = FactorizationKind.BRIDGE, bridge, 1
    elif profile.cut_vertices:
        pivot = profile.cut_vertices[0]
        first, second = _split(graph, pivot, None)
        anchor, kind, shift = pivot, FactorizationKind.CUT_VERTEX, 0
    else:
        return FactorizationReport(kind=FactorizationKind.NONE, holds=True)

    part_one = _side_subgraph(graph, first, anchor)
    part_two = _side_subgraph(graph, second, anchor)
    alpha_one = alpha_tree_sum(part_one.graph)
    alpha_two = alpha_tree_sum(part_two.graph)
    report = dict(kind=kind, pivot=pivot, parts=(tuple(first), tuple(second)), pi_half_shift=shift)
    if alpha.is_zero or alpha_one.is_zero or alpha_two.is_zero:
        holds = alpha.is_zero and (alpha_one.is_zero or alpha_two.is_zero)
        return FactorizationReport(holds=holds, sign=0 if holds else None, **report)

    ring = graph.registry.ring
    psi = symanzik_first(graph)
    psi_one = relabel(symanzik_first(part_one.graph), ring, _edge_names(part_one.edge_map))
    psi_two = relabel(symanzik_first(part_two.graph), ring, _edge_names(part_two.edge_map))
    if psi != psi_one * psi_two:
        return FactorizationReport(holds=False, detail="psi does not factor", **report)

    loops_one = alpha_one.metadata.loop_number
    loops_two = alpha_two.metadata.loop_number
    product = wedge(
        relabel_body(alpha_one.scaled_body(), graph, part_one.edge_map),
        relabel_body(alpha_two.scaled_body(), graph, part_two.edge_map),
    ).scale(psi_one ** (loops_two // 2) * psi_two ** (loops_one // 2))
    lhs = alpha.scaled_body()
    pi_shift = alpha.prefactor.pi_half - alpha_one.prefactor.pi_half - alpha_two.prefactor.pi_half
    if lhs == product:
        sign = 1
    elif lhs == -product:
        sign = -1
    else:
        return FactorizationReport(holds=False, detail="bodies differ", **report)
    return FactorizationReport(holds=pi_shift == shift, sign=sign, **report)


def _edge_names(edge_map: Mapping[int, int]) -> Dict[str, str]:
    return {schwinger_name(local): schwinger_name(edge) for local, edge in edge_map.items()}


def integrand_bridge_factor(graph: Graph, edge: int) -> bool:
    """Every coefficient of P_Γ is divisible by 2a_e for a bridge e."""
    if edge not in connectivity_profile(graph).bridges:
        raise ValueError(f"edge {edge} is not a bridge")
    factor = graph.schwinger(edge) * 2
    selected = p_select(pbar_expand(graph), graph)
    return all(divides(factor, coeff) for _, coeff in selected.items())


def vstar_invariance(graph: Graph) -> Dict[int, Optional[int]]:
    """Global sign of α under each choice of v_star relative to the graph's own."""
    reference = alpha_tree_sum(graph)
    return {
        v: global_sign(alpha_tree_sum(with_v_star(graph, v)), reference)
        for v in range(1, graph.vertex_count + 1)
    }
