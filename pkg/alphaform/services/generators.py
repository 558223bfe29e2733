"""
Graph families for ``gen`` and the verification corpora.
"""
import logging
import random
from itertools import combinations, combinations_with_replacement
from typing import Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind

from ..core.graph import Graph, build_graph
from ..schemas import GraphFamily

logger = logging.getLogger(__name__)

NamedGraph = Tuple[str, Graph]

DUNCE_EDGES = ((2, 1), (3, 1), (3, 2), (3, 2))


def from_networkx(g: nx.Graph, v_star: Optional[int] = None) -> Graph:
    """Relabel nodes 1..n in sorted order; edges keep networkx order, oriented low to high."""
    labels = {node: i for i, node in enumerate(sorted(g.nodes()), start=1)}
    edges = [tuple(sorted((labels[u], labels[v]))) for u, v in g.edges()]
    return build_graph(len(labels), edges, v_star)


def banana(edge_count: int) -> Graph:
    if edge_count < 1:
        raise ValueError("a banana needs at least one edge")
    return build_graph(2, [(1, 2)] * edge_count)


def theta_subdivided(lengths: Sequence[int]) -> Graph:
    """Paths of the given lengths between a source and a sink.

    The source is vertex 1; the sink is numbered right after the interior
    vertices of the second path, so 5,5,5 gives 14 vertices and sink 10.
    """
    if len(lengths) < 2 or any(k < 1 for k in lengths):
        raise ValueError(f"need at least two paths of positive length, got {list(lengths)}")
    interior_before_sink = (lengths[0] - 1) + (lengths[1] - 1)
    sink = 2 + interior_before_sink
    next_label = 2
    edges: List[Tuple[int, int]] = []
    for index, length in enumerate(lengths):
        if index == 2:
            next_label = sink + 1
        previous = 1
        for _ in range(length - 1):
            edges.append((previous, next_label))
            previous = next_label
            next_label += 1
        edges.append((previous, sink))
    vertex_count = 1 + sum(k - 1 for k in lengths) + 1
    return build_graph(vertex_count, edges)


def wheel(spokes: int) -> Graph:
    if spokes < 3:
        raise ValueError("a wheel needs at least three spokes")
    return from_networkx(nx.wheel_graph(spokes + 1))


def complete(vertex_count: int) -> Graph:
    if vertex_count < 2:
        raise ValueError("a complete graph needs at least two vertices")
    return from_networkx(nx.complete_graph(vertex_count))


def k4_doubled() -> Graph:
    base = complete(4)
    return build_graph(4, base.edges + (base.edges[0],))


def dunce() -> Graph:
    return build_graph(3, DUNCE_EDGES)


def dunce_disjoint() -> Graph:
    return build_graph(6, DUNCE_EDGES + tuple((t + 3, h + 3) for t, h in DUNCE_EDGES))


def dunce_vertex_join() -> Graph:
    """Two dunce's caps sharing vertex 3."""
    shift = {1: 4, 2: 5, 3: 3}
    return build_graph(5, DUNCE_EDGES + tuple((shift[t], shift[h]) for t, h in DUNCE_EDGES))


def dunce_bridge() -> Graph:
    """Two dunce's caps joined by an edge between their vertices 3; the bridge is edge 5."""
    second = tuple((t + 3, h + 3) for t, h in DUNCE_EDGES)
    return build_graph(6, DUNCE_EDGES + ((3, 6),) + second)


def random_connected(vertex_count: int, edge_count: int, seed: int) -> Graph:
    """Random spanning tree plus extra edges; deterministic for a fixed seed."""
    if vertex_count < 2:
        raise ValueError("need at least two vertices")
    if edge_count < vertex_count - 1:
        raise ValueError(f"{edge_count} edges cannot connect {vertex_count} vertices")
    rng = random.Random(seed)
    edges = []
    for v in range(2, vertex_count + 1):
        edges.append((rng.randint(1, v - 1), v))
    pairs = list(combinations(range(1, vertex_count + 1), 2))
    for _ in range(edge_count - len(edges)):
        edges.append(rng.choice(pairs))
    rng.shuffle(edges)
    oriented = [(h, t) if rng.random() < 0.5 else (t, h) for t, h in edges]
    return build_graph(vertex_count, oriented)


def exhaustive_graphs(max_vertices: int, max_edges: int, min_vertices: int = 2) -> Iterator[Graph]:
    """Connected loopless multigraphs as sorted multisets of low-to-high pairs."""
    for n in range(min_vertices, max_vertices + 1):
        pairs = list(combinations(range(1, n + 1), 2))
        produced = 0
        for m in range(n - 1, max_edges + 1):
            for edges in combinations_with_replacement(pairs, m):
                components = UnionFind(range(1, n + 1))
                for u, v in edges:
                    components.union(u, v)
                if len({components[v] for v in range(1, n + 1)}) == 1:
                    produced += 1
                    yield build_graph(n, edges)
        logger.debug("exhaustive corpus: %d connected graphs on %d vertices", produced, n)


def nilpotency_corpus() -> List[NamedGraph]:
    """Shapes the wedge check is run on, plus the edge-bound bananas."""
    corpus: List[NamedGraph] = [
        ("dunce", dunce()),
        ("dunce-vertex-join", dunce_vertex_join()),
        ("dunce-bridge", dunce_bridge()),
        ("dunce-disjoint", dunce_disjoint()),
        ("k4-doubled", k4_doubled()),
        ("wheel-4", wheel(4)),
        ("wheel-5", wheel(5)),
    ]
    for lengths in ((1, 2, 2), (2, 2, 2), (2, 3, 2), (3, 3, 2)):
        corpus.append((f"theta-{'-'.join(map(str, lengths))}", theta_subdivided(lengths)))
    corpus.extend((f"banana-{n}", banana(n)) for n in (3, 4, 5))
    return corpus


def _parse_size(size: Optional[str]) -> List[int]:
    if not size:
        return []
    try:
        return [int(t) for t in size.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"bad size {size!r}: expected integers separated by commas") from None


def generate(
    family: GraphFamily,
    size: Optional[str] = None,
    seed: int = 0,
    vertices: Optional[int] = None,
    edges: Optional[int] = None,
    count: int = 1,
) -> List[NamedGraph]:
    """Named graphs of one family; ``count`` only applies to random graphs."""
    family = GraphFamily(family)
    numbers = _parse_size(size)

    def one() -> int:
        if len(numbers) != 1:
            raise ValueError(f"{family.value} takes a single size, got {size!r}")
        return numbers[0]

    if family == GraphFamily.BANANA:
        n = one()
        return [(f"banana-{n}", banana(n))]
    elif family == GraphFamily.THETA_SUBDIVIDED:
        return [(f"theta-{'-'.join(map(str, numbers))}", theta_subdivided(numbers))]
    elif family == GraphFamily.WHEEL:
        n = one()
        return [(f"wheel-{n}", wheel(n))]
    elif family == GraphFamily.COMPLETE:
        n = one()
        return [(f"complete-{n}", complete(n))]
    elif family == GraphFamily.K4_DOUBLED:
        return [("k4-doubled", k4_doubled())]
    elif family == GraphFamily.DUNCE:
        return [("dunce", dunce())]
    elif family == GraphFamily.DUNCE_DISJOINT:
        return [("dunce-disjoint", dunce_disjoint())]
    elif family == GraphFamily.DUNCE_VERTEX_JOIN:
        return [("dunce-vertex-join", dunce_vertex_join())]
    elif family == GraphFamily.DUNCE_BRIDGE:
        return [("dunce-bridge", dunce_bridge())]
    elif family == GraphFamily.RANDOM:
        if vertices is None or edges is None:
            raise ValueError("random graphs need --v and --e")
        return [
            (f"random-v{vertices}-e{edges}-s{seed}-{i}", random_connected(vertices, edges, seed + i))
            for i in range(count)
        ]
    raise ValueError(f"Unsupported family: {family}")
