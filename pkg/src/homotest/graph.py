"""Graph and community-assignment containers plus edge-list I/O.

Graphs are undirected and simple. Internally an edge set is canonical:
each edge stored once as (i, j) with i < j, rows lexicographically
sorted, duplicates collapsed. Node ids are dense integers 0..n-1.
"""

from __future__ import annotations

import io

import numpy as np
from scipy import sparse

from .errors import ParseError, ValidationError


class Graph:
    """Immutable undirected simple graph.

    Attributes
    ----------
    n : int
        Number of nodes (ids 0..n-1; isolated nodes allowed).
    edges : ndarray of shape (m, 2)
        Canonical edge array, i < j per row, lexicographically sorted.
    """

    __slots__ = ("n", "edges", "_degrees", "_csr")

    def __init__(self, n: int, edges):
        n = int(n)
        if n < 1:
            raise ValidationError("graph needs at least one node")
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError("edges must be an (m, 2) array of node ids")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValidationError(f"edge endpoint outside 0..{n - 1}")
        if arr.size and (arr[:, 0] == arr[:, 1]).any():
            raise ValidationError("self-loops are not allowed")
        # canonicalize: sort endpoints within rows, then rows, then dedupe
        arr = np.sort(arr, axis=1)
        if arr.size:
            arr = np.unique(arr, axis=0)
        self.n = n
        self.edges = arr
        self.edges.setflags(write=False)
        self._degrees = None
        self._csr = None

    @property
    def m(self) -> int:
        """Number of edges."""
        return self.edges.shape[0]

    def density(self) -> float:
        """Fraction of unordered node pairs that are edges."""
        if self.n < 2:
            return 0.0
        return self.m / (self.n * (self.n - 1) / 2)

    def degrees(self) -> np.ndarray:
        """Degree of every node, shape (n,)."""
        if self._degrees is None:
            d = np.zeros(self.n, dtype=np.int64)
            if self.m:
                np.add.at(d, self.edges[:, 0], 1)
                np.add.at(d, self.edges[:, 1], 1)
            d.setflags(write=False)
            self._degrees = d
        return self._degrees

    def adjacency_csr(self) -> sparse.csr_matrix:
        """Symmetric CSR adjacency matrix with unit weights."""
        if self._csr is None:
            if self.m:
                i = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
                j = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
                data = np.ones(2 * self.m, dtype=np.float64)
            else:
                i = j = np.zeros(0, dtype=np.int64)
                data = np.zeros(0, dtype=np.float64)
            self._csr = sparse.csr_matrix((data, (i, j)), shape=(self.n, self.n))
        return self._csr

    def neighbors(self, i: int) -> np.ndarray:
        csr = self.adjacency_csr()
        return csr.indices[csr.indptr[i]:csr.indptr[i + 1]]

    def to_dense(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix, shape (n, n)."""
        a = np.zeros((self.n, self.n), dtype=np.int8)
        if self.m:
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    @classmethod
    def _from_sorted_pairs(cls, n: int, edges: np.ndarray) -> "Graph":
        """Fast path for edges already canonical (i < j, lex sorted, unique)."""
        g = cls.__new__(cls)
        g.n = int(n)
        g.edges = edges
        g.edges.setflags(write=False)
        g._degrees = None
        g._csr = None
        return g

    @classmethod
    def from_dense(cls, a) -> "Graph":
        """Build from a square symmetric 0/1 matrix with zero diagonal."""
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("adjacency matrix must be square")
        if not np.array_equal(a, a.T):
            raise ValidationError("adjacency matrix must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValidationError("adjacency matrix must have a zero diagonal")
        vals = np.unique(a)
        if not np.isin(vals, (0, 1)).all():
            raise ValidationError("adjacency matrix entries must be 0 or 1")
        i, j = np.nonzero(np.triu(a, k=1))
        return cls(a.shape[0], np.column_stack([i, j]))

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.edges, other.edges)
        )

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class CommunityAssignment:
    """Node-to-community labeling, canonicalized to labels 1..K.

    Labels are renumbered by first appearance, so two assignments that
    induce the same partition compare equal.
    """

    __slots__ = ("labels",)

    def __init__(self, labels):
        arr = np.asarray(labels)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("labels must be a non-empty 1-d sequence")
        if not np.issubdtype(arr.dtype, np.integer):
            if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.round(arr)):
                arr = arr.astype(np.int64)
            else:
                raise ValidationError("labels must be integers")
        # renumber by first appearance: first distinct label seen becomes 1
        _, first_pos, inverse = np.unique(arr, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first_pos))
        self.labels = (order[inverse] + 1).astype(np.int64)
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def k(self) -> int:
        """Number of communities."""
        return int(self.labels.max())

    def sizes(self) -> np.ndarray:
        """Community sizes indexed by label-1, shape (k,)."""
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def __eq__(self, other):
        return isinstance(other, CommunityAssignment) and np.array_equal(
            self.labels, other.labels
        )

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        return f"CommunityAssignment(n={self.n}, k={self.k})"


class ProbabilityMatrix:
    """Symmetric matrix of pairwise edge probabilities, zero diagonal."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError("probability matrix must be square")
        if arr.shape[0] < 2:
            raise ValidationError("probability matrix needs at least two nodes")
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12):
            raise ValidationError("probability matrix must be symmetric")
        if np.any(np.diag(arr) != 0.0):
            raise ValidationError("probability matrix must have a zero diagonal")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValidationError("probabilities must lie in [0, 1]")
        self.values = arr
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __repr__(self):
        return f"ProbabilityMatrix(n={self.n})"


def parse_edge_list(
    text: str,
    indexing: str = "zero",
    symmetrize: bool = True,
    drop_self_loops: bool = False,
    n: int | None = None,
) -> Graph:
    """Parse whitespace-delimited edge-list text into a Graph.

    One edge per line as two integer node ids. Blank lines and lines
    starting with ``#`` are ignored. Unordered duplicates collapse to a
    single edge. ``indexing="one"`` shifts ids down by one.

    Parameters
    ----------
    symmetrize : bool
        Treat (i, j) and (j, i) as the same edge. The canonical storage
        already collapses unordered pairs; with ``symmetrize=False`` a
        pair appearing in both orders is still a single undirected edge,
        so parsing is idempotent either way.
    drop_self_loops : bool
        Silently skip i == i lines instead of raising.
    n : int, optional
        Declared node count. Default is max id + 1. Ids at or above a
        declared count raise.

    Raises
    ------
    ParseError
        Malformed line (token count, non-integer, negative id after
        shifting, id beyond a declared n), with its line number.
    """
    if indexing not in ("zero", "one"):
        raise ValidationError(f"indexing must be 'zero' or 'one', got {indexing!r}")
    shift = 1 if indexing == "one" else 0
    us: list[int] = []
    vs: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(
                f"expected two node ids, got {len(parts)} tokens", line=lineno
            )
        try:
            u = int(parts[0]) - shift
            v = int(parts[1]) - shift
        except ValueError:
            raise ParseError(f"non-integer node id in {line!r}", line=lineno) from None
        if u < 0 or v < 0:
            raise ParseError("negative node id", line=lineno)
        if u == v:
            if drop_self_loops:
                continue
            raise ParseError(f"self-loop at node {parts[0]}", line=lineno)
        if n is not None and (u >= n or v >= n):
            raise ParseError(f"node id exceeds declared n={n}", line=lineno)
        us.append(u)
        vs.append(v)
    if n is None:
        n = (max(max(us), max(vs)) + 1) if us else 1
    edges = np.column_stack([us, vs]) if us else np.zeros((0, 2), dtype=np.int64)
    return Graph(n, edges)


def write_edge_list(g: Graph, indexing: str = "zero", header: str | None = None) -> str:
    """Serialize a graph in the canonical edge order, one edge per line."""
    if indexing not in ("zero", "one"):
        raise ValidationError(f"indexing must be 'zero' or 'one', got {indexing!r}")
    shift = 1 if indexing == "one" else 0
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    for u, v in g.edges:
        buf.write(f"{u + shift} {v + shift}\n")
    return buf.getvalue()


def parse_labels(text: str, n: int | None = None) -> CommunityAssignment:
    """Parse a label file: one integer community label per line.

    Line order matches node index order. Blank lines and ``#`` comments
    are ignored. With ``n`` given, the label count must match exactly.
    """
    vals: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            vals.append(int(line.split()[0]))
        except ValueError:
            raise ParseError(f"non-integer label {line!r}", line=lineno) from None
    if not vals:
        raise ParseError("label file contains no labels")
    if n is not None and len(vals) != n:
        raise ParseError(f"expected {n} labels, found {len(vals)}")
    return CommunityAssignment(vals)
