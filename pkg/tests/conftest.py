"""
Shared graphs for the test suite.
"""
import pytest

from alphaform.core.graph import Graph, build_graph
from alphaform.services.generators import banana, dunce, theta_subdivided


@pytest.fixture
def dunce_cap() -> Graph:
    """Edges (2,1),(3,1),(3,2),(3,2) on three vertices, v_star = 3."""
    return dunce()


@pytest.fixture
def multiedge() -> Graph:
    """Two parallel edges between two vertices, one loop."""
    return banana(2)


@pytest.fixture
def path_tree() -> Graph:
    return build_graph(3, [(1, 2), (2, 3)])


@pytest.fixture
def long_theta() -> Graph:
    """Three paths of five edges; 14 vertices, 15 edges, v_star = 14."""
    return theta_subdivided([5, 5, 5])

