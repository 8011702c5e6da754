"""Synthetic network models: samplers, expected matrices, and fitters.

Every model exposes parameters as a small dataclass, a sampler drawing
one graph, and a closed-form (or Monte Carlo, for latent-space models)
matrix of pairwise edge probabilities. Degree-weight products that
exceed one are clamped to one and counted.

Model families: constant-probability (Erdos-Renyi), block-constant
(stochastic block model), degree-weighted (Chung-Lu), the two combined
(degree-corrected block model), and a one-dimensional latent-space model
(Hoff et al. style) with an optional within/between intercept split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.special import expit

from .errors import DegenerateInputError, ValidationError
from .graph import CommunityAssignment, Graph, ProbabilityMatrix
from .rng import normalize_rng

LSM_MC_SAMPLES = 500


def _check_prob(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


def _check_sizes(sizes) -> np.ndarray:
    arr = np.asarray(sizes, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0 or np.any(arr < 1):
        raise ValidationError("sizes must be positive integers")
    return arr


def _check_omega(omega, k: int) -> np.ndarray:
    arr = np.asarray(omega, dtype=np.float64)
    if arr.shape != (k, k):
        raise ValidationError(f"omega must be {k}x{k}")
    if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12):
        raise ValidationError("omega must be symmetric")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("omega entries must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class ErParams:
    """Constant edge probability p on n nodes."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("need at least two nodes")
        _check_prob(self.p, "p")


@dataclass(frozen=True)
class SbmParams:
    """Block-constant probabilities: omega[a, b] between blocks a and b."""

    sizes: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sizes", _check_sizes(self.sizes))
        object.__setattr__(self, "omega", _check_omega(self.omega, self.sizes.size))
        if int(self.sizes.sum()) < 2:
            raise ValidationError("need at least two nodes")

    @property
    def n(self) -> int:
        return int(self.sizes.sum())


@dataclass(frozen=True)
class ChungLuParams:
    """Degree weights theta; pair probability min(theta_i * theta_j, 1)."""

    theta: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.theta, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError("theta must be a vector of length >= 2")
        if np.any(arr < 0.0):
            raise ValidationError("theta must be nonnegative")
        object.__setattr__(self, "theta", arr)

    @property
    def n(self) -> int:
        return self.theta.size

    def clamped_pair_count(self) -> int:
        """Unordered pairs whose weight product exceeds one."""
        iu, ju = np.triu_indices(self.n, 1)
        return int(np.sum(self.theta[iu] * self.theta[ju] > 1.0))


@dataclass(frozen=True)
class DcsbmParams:
    """Degree-corrected blocks: min(theta_i * theta_j * omega[c_i, c_j], 1)."""

    sizes: np.ndarray
    omega: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sizes", _check_sizes(self.sizes))
        object.__setattr__(self, "omega", _check_omega(self.omega, self.sizes.size))
        arr = np.asarray(self.theta, dtype=np.float64)
        if arr.shape != (int(self.sizes.sum()),):
            raise ValidationError("theta length must match total size")
        if np.any(arr < 0.0):
            raise ValidationError("theta must be nonnegative")
        object.__setattr__(self, "theta", arr)

    @property
    def n(self) -> int:
        return int(self.sizes.sum())


@dataclass(frozen=True)
class LsmParams:
    """1-d latent positions z ~ N(0, sigma2); logit P = beta - |z_i - z_j|."""

    n: int
    beta: float
    sigma2: float

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("need at least two nodes")
        if self.sigma2 <= 0.0:
            raise ValidationError("sigma2 must be positive")


@dataclass(frozen=True)
class LsmHomParams:
    """Latent-space model with a block-dependent intercept.

    logit P = beta_in - |z_i - z_j| within a block, beta_out - |z_i - z_j|
    between blocks.
    """

    sizes: np.ndarray
    beta_in: float
    beta_out: float
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "sizes", _check_sizes(self.sizes))
        if int(self.sizes.sum()) < 2:
            raise ValidationError("need at least two nodes")
        if self.sigma2 <= 0.0:
            raise ValidationError("sigma2 must be positive")

    @property
    def n(self) -> int:
        return int(self.sizes.sum())


@dataclass(frozen=True)
class FittedNull:
    """A null model fitted to an observed graph.

    flags carries fitter diagnostics (clamped pair counts, convergence);
    n and m record the graph the fit came from.
    """

    kind: str
    params: object
    n: int
    m: int
    flags: dict = field(default_factory=dict)


def planted_assignment(sizes) -> CommunityAssignment:
    """Block labels 1..K repeated by block size, in node order."""
    sizes = _check_sizes(sizes)
    return CommunityAssignment(np.repeat(np.arange(1, sizes.size + 1), sizes))


def _graph_from_pair_probs(n: int, iu, ju, probs, rng) -> Graph:
    mask = rng.random(probs.shape[0]) < probs
    edges = np.column_stack([iu[mask], ju[mask]])
    return Graph._from_sorted_pairs(n, edges)


def sample_er(params: ErParams, rng=None) -> Graph:
    """One draw from the constant-probability model."""
    rng = normalize_rng(rng)
    iu, ju = np.triu_indices(params.n, 1)
    mask = rng.random(iu.size) < params.p
    return Graph._from_sorted_pairs(params.n, np.column_stack([iu[mask], ju[mask]]))


def sample_sbm(params: SbmParams, rng=None):
    """One draw from the block model; returns (graph, planted labels)."""
    rng = normalize_rng(rng)
    c = planted_assignment(params.sizes)
    blocks = c.labels - 1
    iu, ju = np.triu_indices(params.n, 1)
    probs = params.omega[blocks[iu], blocks[ju]]
    return _graph_from_pair_probs(params.n, iu, ju, probs, rng), c


def sample_chung_lu(params: ChungLuParams, rng=None) -> Graph:
    """One draw from the degree-weighted model (products clamped at 1)."""
    rng = normalize_rng(rng)
    iu, ju = np.triu_indices(params.n, 1)
    probs = np.minimum(params.theta[iu] * params.theta[ju], 1.0)
    return _graph_from_pair_probs(params.n, iu, ju, probs, rng)


def sample_dcsbm(params: DcsbmParams, rng=None):
    """One draw from the degree-corrected block model; returns (graph, labels)."""
    rng = normalize_rng(rng)
    c = planted_assignment(params.sizes)
    blocks = c.labels - 1
    iu, ju = np.triu_indices(params.n, 1)
    probs = np.minimum(
        params.theta[iu] * params.theta[ju] * params.omega[blocks[iu], blocks[ju]], 1.0
    )
    return _graph_from_pair_probs(params.n, iu, ju, probs, rng), c


def sample_lsm(params: LsmParams, rng=None) -> Graph:
    """One draw: fresh latent positions, then independent pair coins."""
    rng = normalize_rng(rng)
    z = rng.normal(0.0, np.sqrt(params.sigma2), params.n)
    iu, ju = np.triu_indices(params.n, 1)
    probs = expit(params.beta - np.abs(z[iu] - z[ju]))
    return _graph_from_pair_probs(params.n, iu, ju, probs, rng)


def sample_lsmhom(params: LsmHomParams, rng=None):
    """One draw from the block-intercept latent model; returns (graph, labels)."""
    rng = normalize_rng(rng)
    c = planted_assignment(params.sizes)
    blocks = c.labels - 1
    z = rng.normal(0.0, np.sqrt(params.sigma2), params.n)
    iu, ju = np.triu_indices(params.n, 1)
    beta = np.where(blocks[iu] == blocks[ju], params.beta_in, params.beta_out)
    probs = expit(beta - np.abs(z[iu] - z[ju]))
    return _graph_from_pair_probs(params.n, iu, ju, probs, rng), c


def sampler_for(params):
    """A closure rng -> Graph for any parameter object.

    Pair probabilities are precomputed once for closed-form models;
    latent-space models redraw positions every call.
    """
    if isinstance(params, ErParams):
        iu, ju = np.triu_indices(params.n, 1)
        p = params.p
        return lambda rng: _graph_from_pair_probs(
            params.n, iu, ju, np.full(iu.size, p), rng
        )
    if isinstance(params, ChungLuParams):
        iu, ju = np.triu_indices(params.n, 1)
        probs = np.minimum(params.theta[iu] * params.theta[ju], 1.0)
        return lambda rng: _graph_from_pair_probs(params.n, iu, ju, probs, rng)
    if isinstance(params, SbmParams):
        return lambda rng: sample_sbm(params, rng)[0]
    if isinstance(params, DcsbmParams):
        return lambda rng: sample_dcsbm(params, rng)[0]
    if isinstance(params, LsmParams):
        return lambda rng: sample_lsm(params, rng)
    if isinstance(params, LsmHomParams):
        return lambda rng: sample_lsmhom(params, rng)[0]
    raise ValidationError(f"unknown parameter type {type(params).__name__}")


def expected_matrix(params, rng=None, mc_samples: int = LSM_MC_SAMPLES) -> ProbabilityMatrix:
    """Pairwise edge-probability matrix of a model.

    Closed form for constant, block, and degree-weighted models. For
    latent-space models the latent positions are integrated out by Monte
    Carlo (``mc_samples`` draws, deterministic under the given rng).
    """
    if isinstance(params, ErParams):
        p = np.full((params.n, params.n), params.p)
        np.fill_diagonal(p, 0.0)
        return ProbabilityMatrix(p)
    if isinstance(params, SbmParams):
        blocks = planted_assignment(params.sizes).labels - 1
        p = params.omega[np.ix_(blocks, blocks)].copy()
        np.fill_diagonal(p, 0.0)
        return ProbabilityMatrix(p)
    if isinstance(params, ChungLuParams):
        p = np.minimum(np.outer(params.theta, params.theta), 1.0)
        np.fill_diagonal(p, 0.0)
        return ProbabilityMatrix(p)
    if isinstance(params, DcsbmParams):
        blocks = planted_assignment(params.sizes).labels - 1
        p = np.minimum(
            np.outer(params.theta, params.theta) * params.omega[np.ix_(blocks, blocks)],
            1.0,
        )
        np.fill_diagonal(p, 0.0)
        return ProbabilityMatrix(p)
    if isinstance(params, (LsmParams, LsmHomParams)):
        if mc_samples < 1:
            raise ValidationError("mc_samples must be >= 1")
        rng = normalize_rng(0 if rng is None else rng)
        n = params.n
        if isinstance(params, LsmHomParams):
            blocks = planted_assignment(params.sizes).labels - 1
            beta = np.where(
                blocks[:, None] == blocks[None, :], params.beta_in, params.beta_out
            )
        else:
            beta = params.beta
        acc = np.zeros((n, n))
        for _ in range(mc_samples):
            z = rng.normal(0.0, np.sqrt(params.sigma2), n)
            acc += expit(beta - np.abs(z[:, None] - z[None, :]))
        acc /= mc_samples
        np.fill_diagonal(acc, 0.0)
        return ProbabilityMatrix((acc + acc.T) / 2.0)
    raise ValidationError(f"unknown parameter type {type(params).__name__}")


def fit_er(g: Graph) -> FittedNull:
    """Constant-probability fit: p set to the observed density."""
    if g.m == 0:
        raise DegenerateInputError("cannot fit a null model to an empty graph")
    return FittedNull(kind="er", params=ErParams(g.n, g.density()), n=g.n, m=g.m)


def fit_chung_lu(g: Graph) -> FittedNull:
    """Degree-weight fit: theta_i = d_i / sqrt(2m).

    The weight sum then satisfies (sum theta)^2 = 2m, so expected total
    degree matches the observation up to clamping.
    """
    if g.m == 0:
        raise DegenerateInputError("cannot fit a null model to an empty graph")
    theta = g.degrees() / np.sqrt(2.0 * g.m)
    params = ChungLuParams(theta)
    return FittedNull(
        kind="chung_lu",
        params=params,
        n=g.n,
        m=g.m,
        flags={"clamped_pairs": params.clamped_pair_count()},
    )


def _log_likelihood(a_upper, eta_upper) -> float:
    # Bernoulli log-likelihood over unordered pairs
    return float(np.sum(a_upper * eta_upper - np.logaddexp(0.0, eta_upper)))


def fit_lsm(g: Graph, max_iters: int = 100, tol: float = 1e-5, rng=None) -> FittedNull:
    """Latent-space fit by maximum likelihood.

    Positions start from a 1-d classical scaling of hop distances and are
    refined by gradient ascent with backtracking; the intercept is
    re-solved by Newton steps each round. Only the intercept and the
    position variance are kept: sigma2 is the variance of the final
    positions, so fresh draws reproduce the fitted geometry on average.
    """
    if g.m == 0:
        raise DegenerateInputError("cannot fit a null model to an empty graph")
    rng = normalize_rng(0 if rng is None else rng)
    n = g.n
    a = g.to_dense().astype(np.float64)
    iu = np.triu_indices(n, 1)

    # classical 1-d scaling of hop distances (finite cap for disconnected pairs)
    hops = shortest_path(g.adjacency_csr(), method="D", unweighted=True)
    finite = np.isfinite(hops)
    cap = hops[finite].max() + 1.0 if finite.any() else 1.0
    hops[~finite] = cap
    d2 = hops**2
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ d2 @ j
    vals, vecs = np.linalg.eigh(b)
    scale = np.sqrt(max(vals[-1], 0.0))
    z = vecs[:, -1] * scale
    # break exact ties so the sign gradient is informative everywhere
    z = z + 1e-3 * rng.standard_normal(n)

    def eta_matrix(beta_, z_):
        return beta_ - np.abs(z_[:, None] - z_[None, :])

    density = g.density()
    beta = float(np.log(density / (1.0 - density))) if 0.0 < density < 1.0 else 0.0
    ll = _log_likelihood(a[iu], eta_matrix(beta, z)[iu])
    lr = 1.0 / n
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        eta = eta_matrix(beta, z)
        sig = expit(eta)
        np.fill_diagonal(sig, 0.0)
        # Newton refresh of the intercept (concave in beta)
        grad_b = np.sum(a[iu] - sig[iu])
        hess_b = -np.sum(sig[iu] * (1.0 - sig[iu]))
        if hess_b < 0.0:
            beta -= grad_b / hess_b
            eta = eta_matrix(beta, z)
            sig = expit(eta)
            np.fill_diagonal(sig, 0.0)
        # ascent step on positions with backtracking
        s = sig - a
        np.fill_diagonal(s, 0.0)
        gmat = np.sign(z[:, None] - z[None, :])
        grad_z = np.sum(s * gmat, axis=1)
        ll_now = _log_likelihood(a[iu], eta[iu])
        step = lr
        improved = False
        for _ in range(20):
            z_new = z + step * grad_z
            ll_new = _log_likelihood(a[iu], eta_matrix(beta, z_new)[iu])
            if ll_new > ll_now:
                improved = True
                break
            step /= 2.0
        if improved:
            z = z_new
            new_ll = ll_new
        else:
            new_ll = ll_now
        if abs(new_ll - ll) <= tol * (1.0 + abs(ll)):
            ll = new_ll
            converged = True
            break
        ll = new_ll
    sigma2 = float(np.var(z))
    if sigma2 <= 0.0:
        sigma2 = 1e-8
    return FittedNull(
        kind="lsm",
        params=LsmParams(n, float(beta), sigma2),
        n=n,
        m=g.m,
        flags={"converged": converged, "iterations": iterations},
    )


NULL_FITTERS = {"er": fit_er, "chung_lu": fit_chung_lu, "lsm": fit_lsm}


def fit_null(g: Graph, kind: str, **kwargs) -> FittedNull:
    """Fit one of the named null models (er, chung_lu, lsm)."""
    key = kind.replace("-", "_").lower()
    if key not in NULL_FITTERS:
        raise ValidationError(f"unknown null model {kind!r}; choose from {sorted(NULL_FITTERS)}")
    return NULL_FITTERS[key](g, **kwargs)


def params_from_dict(spec: dict, rng=None):
    """Build a parameter object from a JSON-style dict.

    The dict carries ``kind`` plus keyword fields. Block models accept
    either explicit ``sizes`` or ``n``/``k`` for an (almost) equal split,
    and either an explicit ``omega`` or ``p_in``/``p_out``. Weight models
    accept ``theta`` or ``theta_uniform: {low, high}`` drawn with rng.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("model spec must be a dict with a 'kind' field")
    spec = dict(spec)
    kind = str(spec.pop("kind")).replace("-", "_").lower()

    def sizes_from(s):
        if "sizes" in s:
            return _check_sizes(s.pop("sizes"))
        n = int(s.pop("n"))
        k = int(s.pop("k", 2))
        if n < k or k < 1:
            raise ValidationError("need n >= k >= 1")
        base = n // k
        rem = n % k
        return np.array([base + (1 if i < rem else 0) for i in range(k)], dtype=np.int64)

    def omega_from(s, k):
        if "omega" in s:
            return np.asarray(s.pop("omega"), dtype=np.float64)
        p_in = _check_prob(s.pop("p_in"), "p_in")
        p_out = _check_prob(s.pop("p_out"), "p_out")
        return np.full((k, k), p_out) + (p_in - p_out) * np.eye(k)

    def theta_from(s, n):
        if "theta" in s:
            arr = np.asarray(s.pop("theta"), dtype=np.float64)
            if arr.size != n:
                raise ValidationError(f"theta length {arr.size} != n {n}")
            return arr
        u = s.pop("theta_uniform")
        gen = normalize_rng(0 if rng is None else rng)
        return gen.uniform(float(u["low"]), float(u["high"]), n)

    try:
        if kind == "er":
            return ErParams(int(spec["n"]), float(spec["p"]))
        if kind == "sbm":
            sizes = sizes_from(spec)
            return SbmParams(sizes, omega_from(spec, sizes.size))
        if kind == "chung_lu":
            n = int(spec["n"]) if "n" in spec else len(spec.get("theta", ()))
            return ChungLuParams(theta_from(spec, n))
        if kind == "dcsbm":
            sizes = sizes_from(spec)
            return DcsbmParams(
                sizes, omega_from(spec, sizes.size), theta_from(spec, int(sizes.sum()))
            )
        if kind == "lsm":
            return LsmParams(int(spec["n"]), float(spec["beta"]), float(spec["sigma2"]))
        if kind == "lsmhom":
            sizes = sizes_from(spec)
            return LsmHomParams(
                sizes, float(spec["beta_in"]), float(spec["beta_out"]), float(spec["sigma2"])
            )
    except KeyError as exc:
        raise ValidationError(f"model spec for {kind!r} is missing field {exc}") from None
    raise ValidationError(f"unknown model kind {kind!r}")


def planted_for(params) -> CommunityAssignment | None:
    """Planted block labels for models that have them, else None."""
    if isinstance(params, (SbmParams, DcsbmParams, LsmHomParams)):
        return planted_assignment(params.sizes)
    return None
