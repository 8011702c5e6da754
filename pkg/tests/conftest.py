"""Shared fixtures for the test suite."""

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from homotest.graph import CommunityAssignment, Graph, parse_edge_list

settings.register_profile(
    "homotest",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("homotest")

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def toy_matrix():
    """4-node probability matrix with a mild two-block structure."""
    return np.array(
        [
            [0.00, 0.16, 0.16, 0.18],
            [0.16, 0.00, 0.23, 0.18],
            [0.16, 0.23, 0.00, 0.27],
            [0.18, 0.18, 0.27, 0.00],
        ]
    )


@pytest.fixture
def toy_labels():
    return CommunityAssignment([1, 1, 2, 2])


@pytest.fixture
def two_triangles():
    """Two disjoint triangles: the canonical exactly-recoverable graph."""
    return Graph(6, [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]])


@pytest.fixture
def two_cliques():
    """Two disjoint 10-cliques (n=20, m=90)."""
    edges = []
    for base in (0, 10):
        for i in range(10):
            for j in range(i + 1, 10):
                edges.append([base + i, base + j])
    return Graph(20, edges)


@pytest.fixture(scope="session")
def karate():
    text = (DATA_DIR / "karate.txt").read_text()
    return parse_edge_list(text)


@pytest.fixture
def data_dir():
    return DATA_DIR
