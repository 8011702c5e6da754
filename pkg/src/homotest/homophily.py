"""Homophily statistic: within- vs between-community edge-rate contrast.

For a community assignment c and a symmetric pairwise weight matrix
(edge probabilities, or a 0/1 adjacency), define

    p_in  = mean weight over unordered within-community pairs
    p_out = mean weight over unordered between-community pairs
    p_bar = mean weight over all unordered pairs

and the homophily value (p_in - p_out) / p_bar. Applied to a probability
matrix this is the population parameter; applied to an observed adjacency
it is the plug-in sample statistic. Both run through the same arithmetic
so the two quantities are directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssignmentError, DegenerateInputError, SearchSpaceError, ValidationError
from .graph import CommunityAssignment, Graph, ProbabilityMatrix

EXHAUSTIVE_MAX_NODES = 12


@dataclass(frozen=True)
class HomophilyDecomposition:
    """Within/between decomposition of mean pairwise weight.

    m_in and m_out count unordered node pairs (not edges) within and
    between communities. Invariant: p_bar equals the pair-count-weighted
    mixture of p_in and p_out.
    """

    p_in: float
    p_out: float
    p_bar: float
    m_in: int
    m_out: int
    value: float


def _as_weight_matrix(target) -> np.ndarray:
    """Validated dense symmetric nonnegative matrix with zero diagonal."""
    if isinstance(target, ProbabilityMatrix):
        return target.values
    arr = np.asarray(target, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("weight matrix must be square")
    if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12):
        raise ValidationError("weight matrix must be symmetric")
    if np.any(np.diag(arr) != 0.0):
        raise ValidationError("weight matrix must have a zero diagonal")
    if np.any(arr < 0.0):
        raise ValidationError("weights must be nonnegative")
    return arr


def _check_assignment(c: CommunityAssignment, n: int) -> None:
    if not isinstance(c, CommunityAssignment):
        raise ValidationError("expected a CommunityAssignment")
    if c.n != n:
        raise ValidationError(f"assignment covers {c.n} nodes, target has {n}")
    if c.k < 2:
        raise AssignmentError("assignment must have at least two communities")


def decompose(target, c: CommunityAssignment) -> HomophilyDecomposition:
    """Within/between decomposition of the mean pairwise weight under c.

    Parameters
    ----------
    target : Graph | ProbabilityMatrix | array_like
        A graph (0/1 weights from its adjacency) or a symmetric matrix of
        pairwise weights with a zero diagonal.
    c : CommunityAssignment
        Must have at least two communities and at least one
        within-community pair.

    Raises
    ------
    AssignmentError
        Fewer than two communities, or all communities singletons.
    DegenerateInputError
        All weights zero (the contrast is undefined).
    """
    if isinstance(target, Graph):
        n = target.n
        _check_assignment(c, n)
        sizes = c.sizes()
        m_in = int((sizes * (sizes - 1) // 2).sum())
        total_pairs = n * (n - 1) // 2
        m_out = total_pairs - m_in
        if m_in == 0:
            raise AssignmentError("assignment induces no within-community pairs")
        labels = c.labels
        e = target.edges
        intra_sum = float((labels[e[:, 0]] == labels[e[:, 1]]).sum()) if target.m else 0.0
        total_sum = float(target.m)
    else:
        w = _as_weight_matrix(target)
        n = w.shape[0]
        _check_assignment(c, n)
        sizes = c.sizes()
        m_in = int((sizes * (sizes - 1) // 2).sum())
        total_pairs = n * (n - 1) // 2
        m_out = total_pairs - m_in
        if m_in == 0:
            raise AssignmentError("assignment induces no within-community pairs")
        labels = c.labels
        same = labels[:, None] == labels[None, :]
        # each unordered pair appears twice in the symmetric sum
        intra_sum = float(w[same].sum()) / 2.0
        total_sum = float(w.sum()) / 2.0
    if total_sum <= 0.0:
        raise DegenerateInputError("all pairwise weights are zero")
    p_in = intra_sum / m_in
    p_out = (total_sum - intra_sum) / m_out
    p_bar = total_sum / total_pairs
    return HomophilyDecomposition(
        p_in=p_in,
        p_out=p_out,
        p_bar=p_bar,
        m_in=m_in,
        m_out=m_out,
        value=(p_in - p_out) / p_bar,
    )


def gamma(p, c: CommunityAssignment) -> float:
    """Population homophily of a probability matrix under assignment c."""
    if isinstance(p, Graph):
        raise ValidationError("gamma expects a probability matrix; use t_statistic for graphs")
    return decompose(p, c).value


def t_statistic(g: Graph, c: CommunityAssignment) -> float:
    """Sample homophily of an observed graph under assignment c."""
    if not isinstance(g, Graph):
        raise ValidationError("t_statistic expects a Graph")
    return decompose(g, c).value


def max_homophily_exhaustive(target, k_max: int | None = None):
    """Exact maximum homophily over all community assignments.

    Enumerates set partitions of the nodes as restricted growth strings
    in lexicographic order, maintaining the within-community weight sum
    incrementally. Skips single-community and all-singleton assignments
    (the value is undefined there). Ties keep the lexicographically
    smallest assignment.

    Parameters
    ----------
    target : Graph | ProbabilityMatrix | array_like
    k_max : int, optional
        Largest number of communities to consider. Default n - 1, the
        largest K for which the value is defined.

    Returns
    -------
    (value, assignment) : tuple[float, CommunityAssignment]

    Raises
    ------
    SearchSpaceError
        More than 12 nodes.
    """
    if isinstance(target, Graph):
        n = target.n
        w = target.to_dense().astype(np.float64)
    else:
        w = _as_weight_matrix(target)
        n = w.shape[0]
    if n > EXHAUSTIVE_MAX_NODES:
        raise SearchSpaceError(
            f"exhaustive search supports at most {EXHAUSTIVE_MAX_NODES} nodes, got {n}"
        )
    if n < 2:
        raise DegenerateInputError("need at least two nodes")
    total_sum = float(w.sum()) / 2.0
    if total_sum <= 0.0:
        raise DegenerateInputError("all pairwise weights are zero")
    if k_max is None:
        k_max = n - 1
    k_max = int(k_max)
    if k_max < 2:
        raise ValidationError("k_max must be at least 2")
    k_max = min(k_max, n - 1)

    total_pairs = n * (n - 1) // 2
    p_bar = total_sum / total_pairs

    rgs = np.zeros(n, dtype=np.int64)
    members: list[list[int]] = [[0]] + [[] for _ in range(n - 1)]
    best_value = -np.inf
    best_rgs: np.ndarray | None = None

    def evaluate(num_groups: int, intra_sum: float) -> None:
        nonlocal best_value, best_rgs
        if num_groups < 2:
            return
        m_in = 0
        for g_i in range(num_groups):
            s = len(members[g_i])
            m_in += s * (s - 1) // 2
        if m_in == 0:
            return
        m_out = total_pairs - m_in
        p_in = intra_sum / m_in
        p_out = (total_sum - intra_sum) / m_out
        value = (p_in - p_out) / p_bar
        # strict improvement keeps the lexicographically first argmax
        if value > best_value:
            best_value = value
            best_rgs = rgs.copy()

    def recurse(i: int, num_groups: int, intra_sum: float) -> None:
        if i == n:
            evaluate(num_groups, intra_sum)
            return
        hi = min(num_groups + 1, k_max)
        row = w[i]
        for g_i in range(hi):
            delta = 0.0
            for j in members[g_i]:
                delta += row[j]
            rgs[i] = g_i
            members[g_i].append(i)
            recurse(i + 1, max(num_groups, g_i + 1), intra_sum + delta)
            members[g_i].pop()

    recurse(1, 1, 0.0)
    if best_rgs is None:
        raise DegenerateInputError("no valid assignment exists")
    return best_value, CommunityAssignment(best_rgs + 1)


@dataclass(frozen=True)
class ErCharacterization:
    """Result of the constancy / non-positive-homophily equivalence check."""

    constant_off_diagonal: bool
    max_gamma: float
    argmax: CommunityAssignment
    consistent: bool


def er_characterization_check(p, tol: float = 1e-9) -> ErCharacterization:
    """Check that max homophily is non-positive exactly for constant matrices.

    A probability matrix admits no assignment with positive homophily if
    and only if all off-diagonal entries are equal. This evaluates both
    sides on a small matrix: constancy directly, and the maximum via
    exhaustive search.
    """
    w = _as_weight_matrix(p)
    n = w.shape[0]
    off = w[~np.eye(n, dtype=bool)]
    constant = bool(np.all(np.abs(off - off[0]) <= tol))
    max_gamma, argmax = max_homophily_exhaustive(p)
    return ErCharacterization(
        constant_off_diagonal=constant,
        max_gamma=max_gamma,
        argmax=argmax,
        consistent=constant == (max_gamma <= tol),
    )
