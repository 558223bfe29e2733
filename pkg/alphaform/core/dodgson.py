"""
Symanzik and Dodgson polynomials, their identities, and the parametric emitters.

ψ^{A,B} is the determinant of the expanded Laplacian 𝕄 with rows A and
columns B removed. Vertex labels are user-facing; the offset of vertex rows
by |E| inside 𝕄 happens here and nowhere else. Every identity operation
returns both sides so a failure carries its witness.
"""
import logging
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Any, Dict, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator
from sympy.combinatorics import Permutation

from .errors import IdentityMismatch
from .forms import shuffle_sign
from .graph import (
    Graph,
    enumerate_spanning_trees,
    expanded_laplacian,
    incidence_reduced,
    laplacian_reduced,
    loop_number,
)
from .poly import (
    MPoly,
    PolyMatrix,
    VarClass,
    VarRegistry,
    det_bareiss,
    exact_div,
    homogeneous_degree,
    mass_name,
    momentum_name,
    poly_to_text,
    relabel,
)

logger = logging.getLogger(__name__)


class IndexKind(str, Enum):
    EDGE = "e"
    VERTEX = "v"


class IndexSet(BaseModel):
    """Sorted edge or vertex labels removed from 𝕄."""
    model_config = ConfigDict(frozen=True)

    kind: IndexKind
    indices: Tuple[int, ...] = ()

    @field_validator("indices")
    @classmethod
    def _sorted(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(set(value)) != len(value):
            raise ValueError(f"repeated index in {value}")
        return tuple(sorted(value))

    @classmethod
    def edges(cls, *indices: int) -> "IndexSet":
        return cls(kind=IndexKind.EDGE, indices=indices)

    @classmethod
    def vertices(cls, *indices: int) -> "IndexSet":
        return cls(kind=IndexKind.VERTEX, indices=indices)

    @classmethod
    def parse(cls, text: str) -> "IndexSet":
        """``e:1,2`` or ``v:3``; an empty list after the colon is the empty set."""
        kind, _, body = text.partition(":")
        try:
            indices = tuple(int(t) for t in body.split(",") if t.strip())
            return cls(kind=IndexKind(kind.strip()), indices=indices)
        except ValueError as exc:
            raise ValueError(f"bad index set {text!r}: expected e:1,2 or v:1") from exc

    def __len__(self) -> int:
        return len(self.indices)

    def __str__(self) -> str:
        return f"{self.kind.value}:{','.join(map(str, self.indices))}"


class Convention(BaseModel):
    """Edge order, directions and v_star a Dodgson value depends on."""
    model_config = ConfigDict(frozen=True)

    edges: Tuple[Tuple[int, int], ...]
    v_star: int

    @classmethod
    def of(cls, graph: Graph) -> "Convention":
        return cls(edges=graph.edges, v_star=graph.v_star)


class DodgsonResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Any
    row_set: IndexSet
    col_set: IndexSet
    convention: Convention

    def text(self) -> str:
        return poly_to_text(self.value)


class IdentityCheck(BaseModel):
    """Both sides of an identity; ``holds`` compares them exactly."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    lhs: Any
    rhs: Any

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def assert_holds(self) -> "IdentityCheck":
        if not self.holds:
            raise IdentityMismatch(self.name, poly_to_text(self.lhs), poly_to_text(self.rhs))
        return self


@lru_cache(maxsize=None)
def _expanded(graph: Graph) -> PolyMatrix:
    return expanded_laplacian(graph)


@lru_cache(maxsize=None)
def _minor_det(graph: Graph, rows: Tuple[int, ...], cols: Tuple[int, ...]) -> MPoly:
    return det_bareiss(_expanded(graph).minor(rows, cols))


def _matrix_positions(graph: Graph, index_set: IndexSet) -> Tuple[int, ...]:
    """0-based rows/columns of 𝕄 for an index set."""
    if index_set.kind == IndexKind.EDGE:
        for e in index_set.indices:
            if not 1 <= e <= graph.edge_count:
                raise ValueError(f"edge {e} outside [1, {graph.edge_count}]")
        return tuple(e - 1 for e in index_set.indices)
    positions = []
    for v in index_set.indices:
        if v == graph.v_star:
            raise ValueError(f"vertex {v} is v_star and cannot index a Dodgson polynomial")
        positions.append(graph.edge_count + graph.position_of(v) - 1)
    return tuple(positions)


def dodgson(graph: Graph, rows: IndexSet, cols: IndexSet) -> DodgsonResult:
    """ψ^{A,B} = det 𝕄(A,B)."""
    if len(rows) != len(cols):
        raise ValueError(f"|A| = {len(rows)} differs from |B| = {len(cols)}")
    value = _minor_det(graph, _matrix_positions(graph, rows), _matrix_positions(graph, cols))
    return DodgsonResult(value=value, row_set=rows, col_set=cols, convention=Convention.of(graph))


def edge_dodgson(graph: Graph, e: int, f: int) -> MPoly:
    return dodgson(graph, IndexSet.edges(e), IndexSet.edges(f)).value


def vertex_dodgson(graph: Graph, v: int, w: int) -> MPoly:
    return dodgson(graph, IndexSet.vertices(v), IndexSet.vertices(w)).value


def _vertex_sign(graph: Graph, *vertices: int) -> int:
    return (-1) ** (sum(graph.position_of(v) for v in vertices) % 2)


def symanzik_trees(graph: Graph) -> MPoly:
    """Σ_T Π_{e∉T} a_e."""
    ring = graph.registry.ring
    total = ring.zero
    for tree in enumerate_spanning_trees(graph):
        term = ring.one
        for e in range(1, graph.edge_count + 1):
            if e not in tree.edge_subset:
                term *= graph.schwinger(e)
        total += term
    return total


@lru_cache(maxsize=None)
def symanzik_first(graph: Graph) -> MPoly:
    """ψ = det 𝕄, cross-checked against the spanning-tree sum."""
    check = IdentityCheck(
        name="symanzik det vs tree sum",
        lhs=_minor_det(graph, (), ()),
        rhs=symanzik_trees(graph),
    )
    return check.assert_holds().lhs


def symanzik_kirchhoff(graph: Graph) -> MPoly:
    """ψ = det(𝕃)·Π a_e, clearing the monomial denominators of 𝕃."""
    ring = graph.registry.ring
    size = graph.vertex_count - 1
    product = ring.one
    for e in range(1, graph.edge_count + 1):
        product *= graph.schwinger(e)
    if size == 0:
        return ring.one
    scaled = [
        [entry.numerator * exact_div(product, entry.denominator) for entry in row]
        for row in laplacian_reduced(graph)
    ]
    determinant = det_bareiss(PolyMatrix.from_rows(ring, scaled))
    return exact_div(determinant, product ** (size - 1))


def inverse_laplacian_entry(graph: Graph, j: int, k: int) -> Tuple[MPoly, MPoly]:
    """(𝕃⁻¹)_{jk} as ((−1)^{j+k} ψ^{j,k}, ψ)."""
    numerator = vertex_dodgson(graph, j, k)
    if _vertex_sign(graph, j, k) < 0:
        numerator = -numerator
    return numerator, symanzik_first(graph)


def jacobi_expand(graph: Graph, rows: IndexSet, cols: IndexSet, strict: bool = True) -> IdentityCheck:
    """ψ^{A,B}·ψ^{n−1} = Σ_m sgn(m) Π ψ^{a,b} over matchings of A with B."""
    n = len(rows)
    if n != len(cols):
        raise ValueError(f"|A| = {n} differs from |B| = {len(cols)}")
    if n == 0:
        raise ValueError("jacobi_expand needs at least one index on each side")
    psi = symanzik_first(graph)
    ring = graph.registry.ring
    lhs = dodgson(graph, rows, cols).value * psi ** (n - 1)
    rhs = ring.zero
    for perm in permutations(range(n)):
        term = ring.one
        for i, j in enumerate(perm):
            term *= dodgson(
                graph,
                IndexSet(kind=rows.kind, indices=(rows.indices[i],)),
                IndexSet(kind=cols.kind, indices=(cols.indices[j],)),
            ).value
        rhs += term if Permutation(list(perm)).signature() > 0 else -term
    check = IdentityCheck(name=f"jacobi {rows} {cols}", lhs=lhs, rhs=rhs)
    return check.assert_holds() if strict else check


def forest_expansion(graph: Graph, rows: IndexSet, cols: IndexSet, strict: bool = True) -> IdentityCheck:
    """ψ^{A,B} = Σ_R ε(R)·det 𝕀(R∪A,∅)·det 𝕀(R∪B,∅)·Π_{e∈R} a_e.

    ε(R) is the sign of moving the rows (columns) R to the front of E∖A
    (E∖B); it is 1 whenever A = B or R is empty.
    """
    if rows.kind != IndexKind.EDGE or cols.kind != IndexKind.EDGE:
        raise ValueError("forest expansion takes edge index sets")
    overlap = set(rows.indices) & set(cols.indices)
    if overlap:
        raise ValueError(f"A and B overlap in {sorted(overlap)}")
    ring = graph.registry.ring
    incidence = incidence_reduced(graph)
    all_edges = range(1, graph.edge_count + 1)
    free = [e for e in all_edges if e not in rows.indices and e not in cols.indices]
    size = loop_number(graph) - len(rows)
    total = ring.zero
    if size >= 0:
        for removed in combinations(free, size):
            keep_rows = [e for e in all_edges if e not in rows.indices and e not in removed]
            keep_cols = [e for e in all_edges if e not in cols.indices and e not in removed]
            if len(keep_rows) != incidence.cols:
                continue
            det_rows = incidence.select_rows(keep_rows).det()
            det_cols = incidence.select_rows(keep_cols).det()
            if not det_rows or not det_cols:
                continue
            sign = shuffle_sign(removed, keep_rows) * shuffle_sign(removed, keep_cols)
            term = ring(det_rows * det_cols * sign)
            for e in removed:
                term *= graph.schwinger(e)
            total += term
    check = IdentityCheck(
        name=f"forest expansion {rows} {cols}",
        lhs=dodgson(graph, rows, cols).value,
        rhs=total,
    )
    return check.assert_holds() if strict else check


def vertex_edge_combine(graph: Graph, edge: int, vertex: int, strict: bool = True) -> IdentityCheck:
    """−(−1)^{v1}ψ^{v1,v} + (−1)^{v2}ψ^{v2,v} = (−1)^{e+|E|} a_e ψ^{e,v} for e = v1→v2."""
    if not 1 <= edge <= graph.edge_count:
        raise ValueError(f"edge {edge} outside [1, {graph.edge_count}]")
    graph.position_of(vertex)
    ring = graph.registry.ring
    lhs = ring.zero
    for endpoint, sign in ((graph.tail(edge), -1), (graph.head(edge), 1)):
        if endpoint == graph.v_star:
            continue
        lhs += vertex_dodgson(graph, endpoint, vertex) * (sign * _vertex_sign(graph, endpoint))
    rhs = dodgson(graph, IndexSet.edges(edge), IndexSet.vertices(vertex)).value * graph.schwinger(edge)
    if (edge + graph.edge_count) % 2:
        rhs = -rhs
    check = IdentityCheck(name=f"vertex-edge e{edge} v{vertex}", lhs=lhs, rhs=rhs)
    return check.assert_holds() if strict else check


def edge_edge_combine(graph: Graph, first: int, second: int, strict: bool = True) -> IdentityCheck:
    """Four signed vertex Dodgsons = (−1)^{e1+e2+1} a_{e1} a_{e2} ψ^{e1,e2}."""
    if first == second:
        raise ValueError("edge_edge_combine needs two distinct edges")
    for e in (first, second):
        if not 1 <= e <= graph.edge_count:
            raise ValueError(f"edge {e} outside [1, {graph.edge_count}]")
    v1, v2 = graph.edges[first - 1]
    v3, v4 = graph.edges[second - 1]
    ring = graph.registry.ring
    lhs = ring.zero
    for sign, x, y in ((1, v2, v4), (-1, v1, v4), (1, v1, v3), (-1, v2, v3)):
        if graph.v_star in (x, y):
            continue
        lhs += vertex_dodgson(graph, x, y) * (sign * _vertex_sign(graph, x, y))
    rhs = edge_dodgson(graph, first, second) * graph.schwinger(first) * graph.schwinger(second)
    if (first + second + 1) % 2:
        rhs = -rhs
    check = IdentityCheck(name=f"edge-edge e{first} e{second}", lhs=lhs, rhs=rhs)
    return check.assert_holds() if strict else check


def momentum_registry(graph: Graph, momentum_vertices: Sequence[int]) -> VarRegistry:
    return VarRegistry.for_edges(graph.edge_count, (), momentum_vertices, masses=True)


def symanzik_second(
    graph: Graph,
    momentum_vertices: Optional[Sequence[int]] = None,
    massless: bool = False,
) -> MPoly:
    """φ = ψ·qᵀ𝕃⁻¹q − ψ·Σ a_e μ_e with opaque s_ij = q_i·q_j and μ_e = m_e²."""
    if momentum_vertices is None:
        momentum_vertices = graph.position_vertices
    momentum_vertices = sorted(set(momentum_vertices))
    for v in momentum_vertices:
        graph.position_of(v)
    registry = momentum_registry(graph, momentum_vertices)
    ring = registry.ring
    lift = lambda p: relabel(p, ring, {})
    phi = ring.zero
    for j in momentum_vertices:
        for k in momentum_vertices:
            numerator, _ = inverse_laplacian_entry(graph, j, k)
            phi += registry.gen(momentum_name(j, k)) * lift(numerator)
    if not massless:
        psi = lift(symanzik_first(graph))
        masses = ring.zero
        for e in range(1, graph.edge_count + 1):
            masses += lift(graph.schwinger(e)) * registry.gen(mass_name(e))
        phi -= psi * masses
    return phi


def superficial_degree(graph: Graph, dimension: Fraction, nu: Optional[Sequence[Fraction]] = None) -> Fraction:
    """d_Γ = L·D/2 − Σ ν_e."""
    if nu is None:
        nu = [1] * graph.edge_count
    if len(nu) != graph.edge_count:
        raise ValueError(f"expected {graph.edge_count} propagator powers, got {len(nu)}")
    return Fraction(loop_number(graph)) * Fraction(dimension) / 2 - sum(Fraction(v) for v in nu)


class ParametricIntegrand(BaseModel):
    """Γ(−d)·Π a_e^{ν_e−1}/Γ(ν_e) · φ^{d} / ψ^{d+D/2}, projective form."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    psi: Any
    phi: Any
    degree: Fraction
    dimension: Fraction
    gamma_argument: Fraction
    phi_exponent: Fraction
    psi_exponent: Fraction
    a_exponents: Tuple[Fraction, ...]
    gamma_denominators: Tuple[Fraction, ...]

    def render(self) -> str:
        a_part = " ".join(
            f"a{e}^({x})" for e, x in enumerate(self.a_exponents, start=1) if x
        )
        denominators = " ".join(f"Γ({x})" for x in self.gamma_denominators)
        return (
            f"Γ({self.gamma_argument}) {a_part} / [{denominators}]"
            f" · φ^({self.phi_exponent}) · ψ^({self.psi_exponent})\n"
            f"ψ = {poly_to_text(self.psi)}\n"
            f"φ = {poly_to_text(self.phi)}"
        ).replace("  ", " ")


def parametric_integrand(
    graph: Graph,
    dimension: Fraction,
    nu: Optional[Sequence[Fraction]] = None,
    massless: bool = False,
) -> ParametricIntegrand:
    if nu is None:
        nu = [1] * graph.edge_count
    nu = [Fraction(v) for v in nu]
    dimension = Fraction(dimension)
    degree = superficial_degree(graph, dimension, nu)
    registry = momentum_registry(graph, graph.position_vertices)
    return ParametricIntegrand(
        psi=relabel(symanzik_first(graph), registry.ring, {}),
        phi=symanzik_second(graph, massless=massless),
        degree=degree,
        dimension=dimension,
        gamma_argument=-degree,
        phi_exponent=degree,
        psi_exponent=-(degree + dimension / 2),
        a_exponents=tuple(v - 1 for v in nu),
        gamma_denominators=tuple(nu),
    )


def homogeneity_report(graph: Graph) -> Dict[str, Optional[int]]:
    """Degrees in a of ψ and of the diagonal vertex Dodgsons."""
    names = graph.registry.names_of(VarClass.SCHWINGER)
    report: Dict[str, Optional[int]] = {"psi": homogeneous_degree(symanzik_first(graph), names)}
    for v in graph.position_vertices:
        report[f"psi^{v},{v}"] = homogeneous_degree(vertex_dodgson(graph, v, v), names)
    return report
