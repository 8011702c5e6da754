"""Community detection: random-walk agglomeration and a local search.

The main detector follows Pons & Latapy (2006): short random walks of
length t induce a profile per node; communities are merged greedily by
the smallest increase in mean squared profile distance, producing a full
merge tree. The tree is then cut at the level maximizing either
Newman-Girvan modularity (default) or the homophily statistic.

Isolated nodes take no part in the walks; they are appended to any
returned assignment as singleton communities. On a disconnected graph
the merge sequence stops at the connected components.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from . import _walktrap_kernel
from .errors import DegenerateInputError, ValidationError
from .graph import CommunityAssignment, Graph
from .homophily import max_homophily_exhaustive, t_statistic
from .rng import normalize_rng

CUT_CRITERIA = ("modularity", "t_statistic")


class MergeDendrogram:
    """Full merge sequence of the agglomeration plus per-level summaries.

    Level L means "after L merges". Level 0 is all singletons. Merge j
    joins community ids ``merges[j]`` into new id ``n_sub + j`` (ids
    0..n_sub-1 are the non-isolated nodes in subgraph numbering).
    """

    def __init__(self, graph, sub_nodes, iso_nodes, merges, merge_costs, eab, sab, dprod):
        self.graph = graph
        self.sub_nodes = sub_nodes
        self.iso_nodes = iso_nodes
        self.merges = merges
        self.merge_costs = merge_costs
        n = graph.n
        m = graph.m
        n_sub = sub_nodes.size
        n_iso = iso_nodes.size
        levels = merges.shape[0] + 1
        total_pairs = n * (n - 1) // 2
        p_hat = m / total_pairs

        ie = np.concatenate([[0], np.cumsum(eab)]).astype(np.float64)
        ip = np.concatenate([[0], np.cumsum(sab)]).astype(np.float64)
        self.k_levels = (n_sub - np.arange(levels)) + n_iso

        deg = graph.degrees().astype(np.float64)
        q0 = -float(np.sum((deg / (2.0 * m)) ** 2))
        dq = eab / m - dprod / (2.0 * m * m)
        self.q_levels = np.concatenate([[q0], q0 + np.cumsum(dq)])

        t_vals = np.full(levels, np.nan)
        ok = (ip > 0) & (ip < total_pairs)
        p_in = np.divide(ie, ip, out=np.zeros(levels), where=ok)
        p_out = np.divide(m - ie, total_pairs - ip, out=np.zeros(levels), where=ok)
        t_vals[ok] = ((p_in - p_out) / p_hat)[ok]
        self.t_levels = t_vals

    @property
    def n_levels(self) -> int:
        return self.merges.shape[0] + 1

    def labels_at_level(self, level: int) -> CommunityAssignment:
        """Partition of the full node set after ``level`` merges."""
        if not 0 <= level < self.n_levels:
            raise ValidationError(f"level must be in 0..{self.n_levels - 1}")
        n_sub = self.sub_nodes.size
        parent = np.arange(n_sub + level, dtype=np.int64)
        for j in range(level):
            parent[self.merges[j, 0]] = n_sub + j
            parent[self.merges[j, 1]] = n_sub + j
        roots = np.empty(n_sub, dtype=np.int64)
        for i in range(n_sub):
            r = i
            while parent[r] != r:
                r = parent[r]
            # path compression keeps the replay near-linear
            j = i
            while parent[j] != r:
                parent[j], j = r, parent[j]
            roots[i] = r
        labels = np.empty(self.graph.n, dtype=np.int64)
        labels[self.sub_nodes] = roots
        # isolated nodes become fresh singleton communities
        base = n_sub + level
        labels[self.iso_nodes] = base + np.arange(self.iso_nodes.size)
        return CommunityAssignment(labels + 1)


def walktrap_dendrogram(g: Graph, t: int = 4) -> MergeDendrogram:
    """Agglomerate by t-step walk profiles and return the merge tree.

    Raises
    ------
    DegenerateInputError
        Graph without edges (walk profiles are undefined everywhere).
    """
    if not isinstance(g, Graph):
        raise ValidationError("walktrap_dendrogram expects a Graph")
    t = int(t)
    if t < 1:
        raise ValidationError("walk length t must be >= 1")
    if g.m == 0:
        raise DegenerateInputError("graph has no edges")
    deg = g.degrees()
    sub_nodes = np.flatnonzero(deg > 0)
    iso_nodes = np.flatnonzero(deg == 0)
    n_sub = sub_nodes.size
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[sub_nodes] = np.arange(n_sub)
    e0 = remap[g.edges[:, 0]]
    e1 = remap[g.edges[:, 1]]

    d_sub = deg[sub_nodes].astype(np.float64)
    invd = 1.0 / d_sub
    rows = np.concatenate([e0, e1])
    cols = np.concatenate([e1, e0])
    a_sub = sparse.csr_matrix(
        (np.ones(rows.size), (rows, cols)), shape=(n_sub, n_sub)
    )
    p_step = a_sub
    p_step.data *= np.repeat(invd, np.diff(p_step.indptr))
    if t == 4:
        # (P @ P_dense) squared by BLAS: fewer sparse passes than t-1 SpMMs
        p2 = p_step @ p_step.toarray()
        pt = p2 @ p2
    else:
        pt = p_step.toarray()
        for _ in range(t - 1):
            pt = p_step @ pt

    # profiles pre-scaled by 1/sqrt(degree): pair costs become Euclidean
    w = pt * np.sqrt(invd)[None, :]

    # Small graphs: precompute the full profile gram matrix (one BLAS
    # product) so the merge loop gets every direct distance in O(1).
    # Large graphs: the n^3 gram would dominate; compute distances in
    # the loop instead.
    empty2d = np.empty((0, 0), dtype=np.float64)
    if n_sub <= 512:
        gram = w @ w.T
        sq = np.ascontiguousarray(np.diagonal(gram))
        w_arg, gram_arg, use_gram = empty2d, gram, True
    else:
        sq = np.einsum("ij,ij->i", w, w)
        w_arg, gram_arg, use_gram = w, empty2d, False

    ma, mb, eab, sab, dprod, mcost = _walktrap_kernel.agglomerate(
        n_sub, e0.astype(np.int64), e1.astype(np.int64), w_arg, sq, d_sub,
        gram_arg, use_gram,
    )
    merges = np.column_stack([ma, mb])
    return MergeDendrogram(g, sub_nodes, iso_nodes, merges, mcost, eab, sab, dprod)


def cut_dendrogram(dend: MergeDendrogram, criterion: str = "modularity"):
    """Best level of the merge tree under a cut criterion.

    Levels where the criterion is undefined are skipped. A cut landing on
    a single all-encompassing community is overridden to the best level
    with at least two communities and flagged. Ties keep the earliest
    (fewest-merges) level.

    Returns
    -------
    (level, overridden) : tuple[int, bool]
    """
    if criterion not in CUT_CRITERIA:
        raise ValidationError(f"criterion must be one of {CUT_CRITERIA}")
    scores = dend.q_levels if criterion == "modularity" else dend.t_levels
    valid = ~np.isnan(scores)
    if not valid.any():
        raise DegenerateInputError("cut criterion is undefined at every level")
    masked = np.where(valid, scores, -np.inf)
    level = int(np.argmax(masked))
    overridden = False
    if dend.k_levels[level] < 2:
        multi = valid & (dend.k_levels >= 2)
        if not multi.any():
            raise DegenerateInputError("no level with at least two communities")
        masked = np.where(multi, scores, -np.inf)
        level = int(np.argmax(masked))
        overridden = True
    return level, overridden


def walktrap(g: Graph, t: int = 4, cut: str = "modularity") -> CommunityAssignment:
    """Random-walk community detection; see walktrap_details for flags."""
    assignment, _ = walktrap_details(g, t=t, cut=cut)
    return assignment


def walktrap_details(g: Graph, t: int = 4, cut: str = "modularity"):
    """Run detection and return (assignment, info).

    info carries the chosen level, its community count, the cut score,
    and whether a single-community optimum was overridden to K >= 2.
    """
    dend = walktrap_dendrogram(g, t=t)
    level, overridden = cut_dendrogram(dend, criterion=cut)
    assignment = dend.labels_at_level(level)
    scores = dend.q_levels if cut == "modularity" else dend.t_levels
    info = {
        "level": level,
        "k": assignment.k,
        "cut": cut,
        "score": float(scores[level]),
        "k1_overridden": overridden,
    }
    return assignment, info


def modularity(g: Graph, c: CommunityAssignment) -> float:
    """Newman-Girvan modularity of an assignment."""
    if c.n != g.n:
        raise ValidationError(f"assignment covers {c.n} nodes, graph has {g.n}")
    if g.m == 0:
        raise DegenerateInputError("modularity is undefined without edges")
    m = g.m
    labels = c.labels
    k = c.k
    e_in = np.zeros(k + 1)
    same = labels[g.edges[:, 0]] == labels[g.edges[:, 1]]
    np.add.at(e_in, labels[g.edges[:, 0]][same], 1.0)
    dsum = np.zeros(k + 1)
    np.add.at(dsum, labels, g.degrees().astype(np.float64))
    return float(np.sum(e_in[1:] / m - (dsum[1:] / (2.0 * m)) ** 2))


def t_local_search(
    g: Graph,
    init: CommunityAssignment,
    rng=None,
    max_sweeps: int = 50,
):
    """Greedy single-node label moves maximizing the homophily statistic.

    Nodes are visited in shuffled order each sweep; a node may move to a
    label present among its neighbors when that strictly increases the
    statistic. The value is non-decreasing throughout. Stops after a
    sweep without moves or after ``max_sweeps``.

    Returns (assignment, info) where info has sweeps, moves and the
    final value. Pass an int or Generator as rng for the sweep order;
    the default is deterministic.
    """
    if init.n != g.n:
        raise ValidationError(f"assignment covers {init.n} nodes, graph has {g.n}")
    rng = normalize_rng(0 if rng is None else rng)
    n = g.n
    m = g.m
    total_pairs = n * (n - 1) // 2
    if m == 0:
        raise DegenerateInputError("graph has no edges")
    p_hat = m / total_pairs

    labels = init.labels.copy()
    k_hi = int(labels.max())
    sizes = np.bincount(labels, minlength=k_hi + 1)
    csr = g.adjacency_csr()
    same = labels[g.edges[:, 0]] == labels[g.edges[:, 1]]
    ie = int(same.sum())
    ip = int((sizes * (sizes - 1) // 2).sum())

    def value(ie_, ip_):
        if ip_ <= 0 or ip_ >= total_pairs:
            return -np.inf
        return (ie_ / ip_ - (m - ie_) / (total_pairs - ip_)) / p_hat

    current = value(ie, ip)
    if not np.isfinite(current):
        raise DegenerateInputError("statistic undefined for the initial assignment")

    n_comms = int((sizes[1:] > 0).sum())
    moves = 0
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        moved = False
        for v in rng.permutation(n):
            a = labels[v]
            nb = csr.indices[csr.indptr[v]:csr.indptr[v + 1]]
            if nb.size == 0:
                continue
            nb_labels = labels[nb]
            counts = np.bincount(nb_labels, minlength=k_hi + 1)
            d_va = counts[a]
            best_b = -1
            best_v = current
            best_ie = best_ip = 0
            for b in np.flatnonzero(counts):
                if b == a:
                    continue
                # emptying a must not leave a single community
                if sizes[a] == 1 and n_comms == 2:
                    continue
                ie2 = ie - d_va + int(counts[b])
                ip2 = ip - (int(sizes[a]) - 1) + int(sizes[b])
                v2 = value(ie2, ip2)
                # strict > keeps the smallest label among tied gains
                if v2 > best_v:
                    best_b, best_v, best_ie, best_ip = int(b), v2, ie2, ip2
            if best_b >= 0:
                ie, ip, current = best_ie, best_ip, best_v
                if sizes[a] == 1:
                    n_comms -= 1
                sizes[a] -= 1
                sizes[best_b] += 1
                labels[v] = best_b
                moves += 1
                moved = True
        if not moved:
            break
    info = {"sweeps": sweeps, "moves": moves, "value": float(current)}
    return CommunityAssignment(labels), info


DETECTOR_NAMES = ("walktrap", "walktrap_t", "local_search", "exhaustive")


def detect_communities(g: Graph, method: str = "walktrap", rng=None, t: int = 4):
    """Run a named detector and return (assignment, flags).

    Methods: ``walktrap`` (modularity cut), ``walktrap_t`` (homophily
    cut), ``local_search`` (walktrap start, then greedy label moves),
    ``exhaustive`` (exact search, small graphs only). Hyphen spellings
    are accepted.
    """
    name = method.replace("-", "_").lower()
    if name not in DETECTOR_NAMES:
        raise ValidationError(f"unknown detector {method!r}; choose from {DETECTOR_NAMES}")
    if name == "walktrap":
        assignment, info = walktrap_details(g, t=t, cut="modularity")
        return assignment, {"k1_overridden": info["k1_overridden"]}
    if name == "walktrap_t":
        assignment, info = walktrap_details(g, t=t, cut="t_statistic")
        return assignment, {"k1_overridden": info["k1_overridden"]}
    if name == "local_search":
        start, info = walktrap_details(g, t=t, cut="modularity")
        assignment, _ = t_local_search(g, start, rng=rng)
        return assignment, {"k1_overridden": info["k1_overridden"]}
    best_val, assignment = max_homophily_exhaustive(g)
    del best_val
    return assignment, {"k1_overridden": False}
