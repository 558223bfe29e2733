"""
Directed multigraph model, graph matrices and spanning-tree machinery.

Edges and vertices are 1-based. Edge order and direction are fixed at
construction and drive every sign convention downstream; ``v_star`` is the
vertex whose position variable is set to zero.
"""
import hashlib
import json
import logging
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from sympy.combinatorics import Permutation
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from .errors import GraphError, GraphParseError
from .poly import MPoly, PolyMatrix, VarRegistry, position_name, schwinger_name

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _graph_registry(edge_count: int, position_vertices: Tuple[int, ...]) -> VarRegistry:
    return VarRegistry.for_edges(edge_count, position_vertices)


class Graph(BaseModel):
    """Ordered directed multigraph with a distinguished vertex v_star."""
    model_config = ConfigDict(frozen=True)

    vertex_count: int = Field(gt=0)
    edges: Tuple[Tuple[int, int], ...] = ()
    v_star: Optional[int] = None

    @model_validator(mode="before")
    @classmethod
    def _default_v_star(cls, data):
        if isinstance(data, dict) and data.get("v_star") is None:
            data = dict(data, v_star=data.get("vertex_count"))
        return data

    @model_validator(mode="after")
    def _check_edges(self) -> "Graph":
        n = self.vertex_count
        if not 1 <= self.v_star <= n:
            raise ValueError(f"v_star {self.v_star} outside [1, {n}]")
        for index, (tail, head) in enumerate(self.edges, start=1):
            for v in (tail, head):
                if not 1 <= v <= n:
                    raise ValueError(f"edge {index}: vertex {v} outside [1, {n}]")
            if tail == head:
                raise ValueError(f"edge {index}: self-loop at vertex {tail}")
        return self

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def position_vertices(self) -> Tuple[int, ...]:
        """Vertices carrying a position variable, ascending."""
        return tuple(v for v in range(1, self.vertex_count + 1) if v != self.v_star)

    def position_of(self, vertex: int) -> int:
        """1-based row of ``vertex`` in the reduced incidence matrix."""
        if vertex == self.v_star:
            raise ValueError(f"vertex {vertex} is v_star and has no reduced row")
        if not 1 <= vertex <= self.vertex_count:
            raise ValueError(f"vertex {vertex} outside [1, {self.vertex_count}]")
        return vertex if vertex < self.v_star else vertex - 1

    def tail(self, edge: int) -> int:
        return self.edges[edge - 1][0]

    def head(self, edge: int) -> int:
        return self.edges[edge - 1][1]

    @property
    def registry(self) -> VarRegistry:
        """Schwinger variables and the position variables of this graph."""
        return _graph_registry(self.edge_count, self.position_vertices)

    def schwinger(self, edge: int) -> MPoly:
        return self.registry.gen(schwinger_name(edge))

    def position(self, vertex: int) -> MPoly:
        return self.registry.gen(position_name(vertex))

    def fingerprint(self) -> str:
        payload = json.dumps(
            {"vertices": self.vertex_count, "edges": self.edges, "v_star": self.v_star},
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(range(1, self.vertex_count + 1))
        for index, (tail, head) in enumerate(self.edges, start=1):
            g.add_edge(tail, head, key=index)
        return g


def build_graph(
    vertex_count: int,
    edge_list: Sequence[Sequence[int]],
    v_star: Optional[int] = None,
) -> Graph:
    """Validate and freeze a graph; edge order is the input order."""
    try:
        return Graph(
            vertex_count=vertex_count,
            edges=tuple((int(t), int(h)) for t, h in edge_list),
            v_star=v_star,
        )
    except ValidationError as exc:
        messages = "; ".join(err["msg"] for err in exc.errors())
        raise GraphError(messages) from exc


class IntMatrix(BaseModel):
    """Small integer matrix (incidence matrices and their minors)."""
    model_config = ConfigDict(frozen=True)

    rows: int
    cols: int
    entries: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_shape(self) -> "IntMatrix":
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entries do not match the declared shape")
        return self

    def select_rows(self, indices: Sequence[int]) -> "IntMatrix":
        """Keep the given 1-based rows, in the given order."""
        picked = tuple(self.entries[i - 1] for i in indices)
        return IntMatrix(rows=len(picked), cols=self.cols, entries=picked)

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError(f"determinant of a non-square {self.rows}x{self.cols} matrix")
        if self.rows == 0:
            return 1
        matrix = DomainMatrix(
            [[ZZ(v) for v in row] for row in self.entries], (self.rows, self.cols), ZZ
        )
        return int(matrix.det())


def incidence_full(graph: Graph) -> IntMatrix:
    rows = []
    for tail, head in graph.edges:
        row = [0] * graph.vertex_count
        row[tail - 1] = -1
        row[head - 1] = 1
        rows.append(tuple(row))
    return IntMatrix(rows=graph.edge_count, cols=graph.vertex_count, entries=tuple(rows))


def incidence_reduced(graph: Graph) -> IntMatrix:
    full = incidence_full(graph)
    keep = [v - 1 for v in graph.position_vertices]
    entries = tuple(tuple(row[c] for c in keep) for row in full.entries)
    return IntMatrix(rows=graph.edge_count, cols=len(keep), entries=entries)


class LaplacianEntry(NamedTuple):
    numerator: MPoly
    denominator: MPoly


def laplacian_reduced(graph: Graph) -> Tuple[Tuple[LaplacianEntry, ...], ...]:
    """𝕃 = 𝕀ᵀ𝔻⁻¹𝕀 entrywise as numerator over a monomial denominator."""
    ring = graph.registry.ring
    incidence = incidence_reduced(graph)
    size = incidence.cols
    matrix = []
    for j in range(size):
        row = []
        for k in range(size):
            contributing = [
                (e, incidence.entries[e - 1][j] * incidence.entries[e - 1][k])
                for e in range(1, graph.edge_count + 1)
                if incidence.entries[e - 1][j] and incidence.entries[e - 1][k]
            ]
            denominator = ring.one
            for e, _ in contributing:
                denominator *= graph.schwinger(e)
            numerator = ring.zero
            for e, weight in contributing:
                others = ring.one
                for f, _ in contributing:
                    if f != e:
                        others *= graph.schwinger(f)
                numerator += others * weight
            row.append(LaplacianEntry(numerator, denominator))
        matrix.append(tuple(row))
    return tuple(matrix)


def expanded_laplacian(graph: Graph) -> PolyMatrix:
    """Block matrix [[𝔻, 𝕀], [−𝕀ᵀ, 0]] of size |E|+|V|−1."""
    ring = graph.registry.ring
    incidence = incidence_reduced(graph)
    m, n = incidence.rows, incidence.cols
    rows = []
    for e in range(m):
        diagonal = [graph.schwinger(e + 1) if f == e else ring.zero for f in range(m)]
        rows.append(diagonal + [ring(v) for v in incidence.entries[e]])
    for j in range(n):
        rows.append([ring(-incidence.entries[e][j]) for e in range(m)] + [ring.zero] * n)
    return PolyMatrix.from_rows(ring, rows)


def component_count(graph: Graph) -> int:
    return nx.number_connected_components(graph.to_networkx())


def is_connected(graph: Graph) -> bool:
    return component_count(graph) == 1


def loop_number(graph: Graph) -> int:
    """First Betti number |E| − |V| + #components."""
    return graph.edge_count - graph.vertex_count + component_count(graph)


class SpanningTree(BaseModel):
    model_config = ConfigDict(frozen=True)

    edge_subset: Tuple[int, ...]
    det_sign: int

    @property
    def edges(self) -> Tuple[int, ...]:
        return self.edge_subset


def _is_forest(graph: Graph, subset: Sequence[int]) -> bool:
    components = UnionFind()
    for e in subset:
        tail, head = graph.edges[e - 1]
        if components[tail] == components[head]:
            return False
        components.union(tail, head)
    return True


def enumerate_spanning_trees(graph: Graph) -> List[SpanningTree]:
    """All spanning trees, lexicographic in sorted edge indices."""
    if not is_connected(graph):
        return []
    incidence = incidence_reduced(graph)
    size = graph.vertex_count - 1
    trees = []
    for subset in combinations(range(1, graph.edge_count + 1), size):
        if not _is_forest(graph, subset):
            continue
        det = incidence.select_rows(subset).det()
        if det == 0:
            raise GraphError(f"acyclic subset {subset} has a singular incidence minor")
        trees.append(SpanningTree(edge_subset=subset, det_sign=det))
    logger.debug("graph %s: %d spanning trees", graph.fingerprint(), len(trees))
    return trees


def tree_sign(graph: Graph, tree: SpanningTree) -> int:
    """sgn(T) = (−1)^(Σ_{e∉T} e − L/2) · det(𝕀[T]), defined for even L."""
    loops = loop_number(graph)
    if loops % 2:
        raise ValueError(f"tree sign is defined for even loop number, got L={loops}")
    cobasis_sum = sum(e for e in range(1, graph.edge_count + 1) if e not in tree.edge_subset)
    return tree.det_sign * (-1) ** ((cobasis_sum - loops // 2) % 2)


def tree_flags(graph: Graph, tree: SpanningTree) -> Dict[int, int]:
    """Edge -> the endpoint farther from v_star: the unique flag choice of a tree."""
    g = nx.Graph()
    g.add_nodes_from(range(1, graph.vertex_count + 1))
    for e in tree.edge_subset:
        g.add_edge(*graph.edges[e - 1], edge=e)
    depth = nx.single_source_shortest_path_length(g, graph.v_star)
    flags = {}
    for e in tree.edge_subset:
        tail, head = graph.edges[e - 1]
        flags[e] = tail if depth[tail] > depth[head] else head
    return flags


def flag_sign(graph: Graph, tree: SpanningTree) -> int:
    """det(𝕀[T]) recomputed from the flags: Π 𝕀[e, flag(e)] times the flag permutation sign."""
    flags = tree_flags(graph, tree)
    incidence = incidence_reduced(graph)
    product = 1
    for e in tree.edge_subset:
        product *= incidence.entries[e - 1][graph.position_of(flags[e]) - 1]
    order = [graph.position_of(flags[e]) - 1 for e in tree.edge_subset]
    if not order:
        return product
    return product * Permutation(order).signature()


class Subgraph(NamedTuple):
    graph: Graph
    edge_map: Dict[int, int]
    vertex_map: Dict[int, int]


def subgraph(graph: Graph, edge_indices: Sequence[int], vertices: Sequence[int]) -> Subgraph:
    """Edges and vertices relabeled compactly in their original relative order.

    ``edge_map`` and ``vertex_map`` send local labels to the labels of ``graph``.
    """
    vertices = sorted(set(vertices))
    local_vertex = {v: i for i, v in enumerate(vertices, start=1)}
    edge_indices = sorted(edge_indices)
    edges = [
        (local_vertex[graph.tail(e)], local_vertex[graph.head(e)]) for e in edge_indices
    ]
    v_star = local_vertex.get(graph.v_star)
    return Subgraph(
        graph=build_graph(len(vertices), edges, v_star),
        edge_map={i: e for i, e in enumerate(edge_indices, start=1)},
        vertex_map={i: v for v, i in local_vertex.items()},
    )


class ConnectivityProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    components: Tuple[Graph, ...]
    component_vertices: Tuple[Tuple[int, ...], ...]
    cut_vertices: Tuple[int, ...]
    bridges: Tuple[int, ...]
    isolated_vertices: Tuple[int, ...]
    is_1pi: bool


def _simple_graph(graph: Graph) -> Tuple[nx.Graph, Dict[frozenset, List[int]]]:
    simple = nx.Graph()
    simple.add_nodes_from(range(1, graph.vertex_count + 1))
    parallel: Dict[frozenset, List[int]] = {}
    for index, (tail, head) in enumerate(graph.edges, start=1):
        simple.add_edge(tail, head)
        parallel.setdefault(frozenset((tail, head)), []).append(index)
    return simple, parallel


def connectivity_profile(graph: Graph) -> ConnectivityProfile:
    """Components, cut vertices, bridges and the 1PI verdict."""
    simple, parallel = _simple_graph(graph)
    component_sets = sorted(
        (tuple(sorted(c)) for c in nx.connected_components(simple)), key=lambda c: c[0]
    )
    components = []
    for vertices in component_sets:
        members = set(vertices)
        edges = [e for e, (t, _) in enumerate(graph.edges, start=1) if t in members]
        components.append(subgraph(graph, edges, vertices).graph)

    # nx.bridges refuses multigraphs; a parallel class is never a bridge
    bridges = sorted(
        parallel[frozenset(pair)][0]
        for pair in nx.bridges(simple)
        if len(parallel[frozenset(pair)]) == 1
    )
    cut_vertices = tuple(sorted(nx.articulation_points(simple)))
    isolated = tuple(sorted(nx.isolates(simple)))
    if isolated and graph.vertex_count > 1:
        logger.warning("graph %s has isolated vertices %s", graph.fingerprint(), isolated)
    is_1pi = (
        len(component_sets) == 1
        and graph.edge_count > 0
        and not bridges
        and not cut_vertices
    )
    return ConnectivityProfile(
        components=tuple(components),
        component_vertices=tuple(component_sets),
        cut_vertices=cut_vertices,
        bridges=tuple(bridges),
        isolated_vertices=isolated,
        is_1pi=is_1pi,
    )


def reverse_edge(graph: Graph, edge: int) -> Graph:
    edges = list(graph.edges)
    tail, head = edges[edge - 1]
    edges[edge - 1] = (head, tail)
    return build_graph(graph.vertex_count, edges, graph.v_star)


def permute_edges(graph: Graph, order: Sequence[int]) -> Graph:
    """New edge i is old edge ``order[i-1]``."""
    if sorted(order) != list(range(1, graph.edge_count + 1)):
        raise ValueError(f"{list(order)} is not a permutation of the edge labels")
    return build_graph(graph.vertex_count, [graph.edges[e - 1] for e in order], graph.v_star)


def with_v_star(graph: Graph, v_star: int) -> Graph:
    return build_graph(graph.vertex_count, graph.edges, v_star)


class GraphFile(BaseModel):
    """JSON graph schema."""
    vertices: int
    edges: List[Tuple[int, int]]
    v_star: Optional[int] = None


def graph_to_json(graph: Graph) -> str:
    payload = {"vertices": graph.vertex_count, "edges": [list(e) for e in graph.edges]}
    if graph.v_star != graph.vertex_count:
        payload["v_star"] = graph.v_star
    return json.dumps(payload, separators=(", ", ": ")) + "\n"


def graph_from_json(text: str) -> Graph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(exc.msg, exc.lineno, exc.colno) from exc
    try:
        parsed = GraphFile.model_validate(data)
    except ValidationError as exc:
        raise GraphParseError(exc.errors()[0]["msg"], 1) from exc
    return build_graph(parsed.vertices, parsed.edges, parsed.v_star)


def graph_to_text(graph: Graph) -> str:
    header = f"{graph.vertex_count} {graph.edge_count}"
    if graph.v_star != graph.vertex_count:
        header += f" {graph.v_star}"
    return "\n".join([header] + [f"{t} {h}" for t, h in graph.edges]) + "\n"


def _parse_ints(line: str, line_no: int, expected: Sequence[int]) -> List[int]:
    values = []
    column = 1
    for token in line.split():
        column = line.index(token, column - 1) + 1
        try:
            values.append(int(token))
        except ValueError:
            raise GraphParseError(f"expected an integer, got {token!r}", line_no, column) from None
        column += len(token)
    if len(values) not in expected:
        raise GraphParseError(
            f"expected {' or '.join(map(str, expected))} integers, got {len(values)}",
            line_no,
            max(column, 1),
        )
    return values


def graph_from_text(text: str) -> Graph:
    """Plain text: ``n m [v_star]`` then m lines ``tail head``."""
    lines = text.splitlines()
    if not lines:
        raise GraphParseError("empty graph file", 1)
    header = _parse_ints(lines[0], 1, (2, 3))
    n, m = header[0], header[1]
    v_star = header[2] if len(header) == 3 else None
    edges = []
    for line_no in range(2, m + 2):
        if line_no > len(lines):
            raise GraphParseError(f"expected {m} edge lines, found {len(lines) - 1}", line_no)
        edges.append(_parse_ints(lines[line_no - 1], line_no, (2,)))
    for line_no in range(m + 2, len(lines) + 1):
        if lines[line_no - 1].strip():
            raise GraphParseError("unexpected trailing content", line_no)
    return build_graph(n, edges, v_star)


def load_graph(path: str) -> Graph:
    with open(path) as handle:
        text = handle.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return graph_from_json(text)
    return graph_from_text(text)


def dump_graph(graph: Graph, path: str) -> None:
    text = graph_to_json(graph) if path.endswith(".json") else graph_to_text(graph)
    with open(path, "w") as handle:
        handle.write(text)
