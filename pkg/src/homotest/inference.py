"""Hypothesis tests for homophily against fitted null models.

The bootstrap test fits a null to the observed graph, redraws B graphs
from the fit, runs the same community detector on each, and compares the
observed statistic to the resulting reference distribution. The p-value
is the exact fraction of replicates at or above the observation (no
smoothing); a value of zero means "below 1/B".

The asymptotic test compares the observed statistic to a closed-form
threshold valid under a constant-probability null, with a search-space
size term for either equal-size assignments or the general composition
count.

Seed layout: observed-graph detection uses substream (seed, 0), null
fitting uses (seed, 1), replicate i uses (seed, 2, i). Replicates depend
only on their index, so any worker count gives identical reports.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detection import DETECTOR_NAMES, detect_communities
from .errors import AssignmentError, DegenerateInputError, ValidationError
from .graph import CommunityAssignment, Graph
from .homophily import t_statistic
from .models import fit_null, sampler_for
from .rng import substream

SCHEMA_VERSION = 1
MAX_REPLICATE_ATTEMPTS = 10
NULL_KINDS = ("er", "chung_lu", "lsm")


@dataclass
class TestReport:
    """Outcome of one hypothesis test, JSON-serializable and versioned."""

    method: str
    null_kind: str
    detector: str
    t_obs: float
    p_value: float | None
    threshold_c: float | None
    reject: bool
    alpha: float
    B: int | None
    seed: int | None
    n: int
    m: int
    flags: dict = field(default_factory=dict)
    bootstrap_samples: list | None = None

    def to_dict(self) -> dict:
        samples = None
        if self.bootstrap_samples is not None:
            samples = [None if s is None else float(s) for s in self.bootstrap_samples]
        return {
            "schema_version": SCHEMA_VERSION,
            "method": self.method,
            "null_kind": self.null_kind,
            "detector": self.detector,
            "t_obs": float(self.t_obs),
            "p_value": None if self.p_value is None else float(self.p_value),
            "threshold_c": None if self.threshold_c is None else float(self.threshold_c),
            "reject": bool(self.reject),
            "alpha": float(self.alpha),
            "B": self.B,
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "flags": self.flags,
            "bootstrap_samples": samples,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TestReport":
        d = json.loads(text)
        version = d.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ValidationError(f"unsupported report schema version {version!r}")
        return cls(**d)

    def finite_samples(self) -> np.ndarray:
        """Replicate values excluding failed replicates."""
        if self.bootstrap_samples is None:
            return np.zeros(0)
        return np.array([s for s in self.bootstrap_samples if s is not None], dtype=float)

    def p_display(self) -> str:
        """Human-readable p-value; an exact zero reads as a bound."""
        if self.p_value is None:
            return "n/a"
        if self.p_value == 0.0 and self.B:
            return f"< {1.0 / self.B:g}"
        return f"{self.p_value:g}"


def format_p(p_value: float | None, b: int | None) -> str:
    if p_value is None:
        return "n/a"
    if p_value == 0.0 and b:
        return f"< {1.0 / b:g}"
    return f"{p_value:g}"


# ---------------------------------------------------------------------------
# bootstrap machinery

_WORKER_CTX: dict = {}


def _one_replicate(sampler, detector, labels, seed, t, i):
    """Draw replicate i, detect, evaluate; resample a few times on failure.

    Returns (t_star or None, k1_overridden, attempts_used).
    """
    rng = substream(seed, 2, i)
    for attempt in range(1, MAX_REPLICATE_ATTEMPTS + 1):
        g_star = sampler(rng)
        try:
            if labels is not None:
                c_star = labels
                k1 = False
            else:
                c_star, det_flags = detect_communities(g_star, detector, rng=rng, t=t)
                k1 = bool(det_flags.get("k1_overridden", False))
            return t_statistic(g_star, c_star), k1, attempt
        except (AssignmentError, DegenerateInputError):
            continue
    return None, False, MAX_REPLICATE_ATTEMPTS


def _init_worker(params, detector, labels_arr, seed, t):
    _WORKER_CTX["sampler"] = sampler_for(params)
    _WORKER_CTX["detector"] = detector
    _WORKER_CTX["labels"] = (
        CommunityAssignment(labels_arr) if labels_arr is not None else None
    )
    _WORKER_CTX["seed"] = seed
    _WORKER_CTX["t"] = t


def _worker_replicate(i):
    return _one_replicate(
        _WORKER_CTX["sampler"],
        _WORKER_CTX["detector"],
        _WORKER_CTX["labels"],
        _WORKER_CTX["seed"],
        _WORKER_CTX["t"],
        i,
    )


def _validate_common(g: Graph, alpha: float) -> None:
    if not isinstance(g, Graph):
        raise ValidationError("expected a Graph")
    if g.m == 0:
        raise DegenerateInputError("graph has no edges; the statistic is undefined")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")


def _run_bootstrap(
    g: Graph,
    null: str,
    detector: str,
    labels,
    B: int,
    alpha: float,
    seed: int,
    threads: int,
    t: int,
):
    null = null.replace("-", "_").lower()
    if null not in NULL_KINDS:
        raise ValidationError(f"null must be one of {NULL_KINDS}")
    if B < 1:
        raise ValidationError("B must be >= 1")
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    seed = int(seed)

    flags: dict = {}
    if labels is not None:
        if labels.n != g.n:
            raise ValidationError(f"labels cover {labels.n} nodes, graph has {g.n}")
        c_obs = labels
        detector_name = "fixed_labels"
    else:
        det_name = detector.replace("-", "_").lower()
        if det_name not in DETECTOR_NAMES:
            raise ValidationError(
                f"unknown detector {detector!r}; choose from {DETECTOR_NAMES}"
            )
        c_obs, det_flags = detect_communities(g, det_name, rng=substream(seed, 0), t=t)
        detector_name = det_name
        if det_flags.get("k1_overridden"):
            flags["k1_overrides"] = 1
    t_obs = t_statistic(g, c_obs)

    fit_kwargs = {"rng": substream(seed, 1)} if null == "lsm" else {}
    fitted = fit_null(g, null, **fit_kwargs)
    for key, val in fitted.flags.items():
        flags[f"{null}_{key}" if key in ("converged", "iterations") else key] = val

    labels_for_reps = c_obs if labels is not None else None
    if threads == 1:
        sampler = sampler_for(fitted.params)
        results = [
            _one_replicate(sampler, detector_name, labels_for_reps, seed, t, i)
            for i in range(B)
        ]
    else:
        labels_arr = labels_for_reps.labels if labels_for_reps is not None else None
        with ProcessPoolExecutor(
            max_workers=threads,
            initializer=_init_worker,
            initargs=(fitted.params, detector_name, labels_arr, seed, t),
        ) as pool:
            chunk = max(1, B // (threads * 4))
            results = list(pool.map(_worker_replicate, range(B), chunksize=chunk))

    samples = [r[0] for r in results]
    k1_count = flags.get("k1_overrides", 0) + sum(1 for r in results if r[1])
    degenerate = sum(1 for r in results if r[0] is None)
    if k1_count:
        flags["k1_overrides"] = k1_count
    if degenerate:
        flags["degenerate_replicates"] = degenerate

    finite = np.array([s for s in samples if s is not None], dtype=float)
    p_value = float(np.sum(finite >= t_obs)) / B
    return TestReport(
        method="bootstrap",
        null_kind=null,
        detector=detector_name,
        t_obs=float(t_obs),
        p_value=p_value,
        threshold_c=None,
        reject=bool(p_value < alpha),
        alpha=alpha,
        B=B,
        seed=seed,
        n=g.n,
        m=g.m,
        flags=flags,
        bootstrap_samples=samples,
    )


def bootstrap_test(
    g: Graph,
    null: str = "er",
    detector: str = "walktrap",
    B: int = 200,
    alpha: float = 0.05,
    seed: int = 0,
    threads: int = 1,
    t: int = 4,
) -> TestReport:
    """Detector-based bootstrap test of positive homophily.

    Fits the named null (er, chung_lu, lsm) to g, draws B replicate
    graphs, runs the detector on each, and returns the exact counting
    p-value for the observed statistic. A replicate on which the
    statistic is undefined is redrawn up to 10 times, then dropped from
    the count and flagged.
    """
    _validate_common(g, alpha)
    return _run_bootstrap(g, null, detector, None, B, alpha, seed, threads, t)


def labeled_bootstrap_test(
    g: Graph,
    labels: CommunityAssignment,
    null: str = "er",
    B: int = 200,
    alpha: float = 0.05,
    seed: int = 0,
    threads: int = 1,
) -> TestReport:
    """Bootstrap test with a fixed assignment instead of a detector.

    The statistic is evaluated at the given labels on the observed graph
    and on every replicate.
    """
    _validate_common(g, alpha)
    if not isinstance(labels, CommunityAssignment):
        raise ValidationError("labels must be a CommunityAssignment")
    return _run_bootstrap(g, null, "fixed_labels", labels, B, alpha, seed, threads, 4)


# ---------------------------------------------------------------------------
# asymptotic test

def asymptotic_threshold(
    n: int,
    k: int,
    alpha: float = 0.05,
    p_hat: float = None,
    epsilon: float = 0.0,
    equal_sizes: bool = True,
) -> float:
    """Rejection threshold for the statistic under a constant null.

    equal_sizes=True uses the count of balanced partitions,
    n! / ((n/K)!^K K!), evaluated through log-gamma so any n is accepted;
    otherwise the composition count binom(n-1, K-1) is used. The
    threshold scales with (1 + epsilon) / p_hat.
    """
    n = int(n)
    k = int(k)
    if n < 3:
        raise ValidationError("need n >= 3")
    if not 2 <= k <= n:
        raise ValidationError("need 2 <= k <= n")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    if p_hat is None or not np.isfinite(p_hat) or p_hat <= 0.0:
        raise DegenerateInputError("p_hat must be positive")
    if epsilon < 0.0:
        raise ValidationError("epsilon must be >= 0")
    if equal_sizes:
        log_count = (
            math.lgamma(n + 1) - k * math.lgamma(n / k + 1) - math.lgamma(k + 1)
        )
        core = 8.0 * (math.log(2.0) + log_count - math.log(alpha)) / (n * (n - 2.0))
    else:
        log_count = math.lgamma(n) - math.lgamma(k) - math.lgamma(n - k + 1)
        core = 2.0 * (math.log(2.0) + log_count - math.log(alpha)) / (n * n)
    return math.sqrt(core) * (1.0 + epsilon) / p_hat


def asymptotic_test(
    g: Graph,
    detector: str = "walktrap",
    k: int | None = None,
    alpha: float = 0.05,
    epsilon: float = 0.0,
    equal_sizes: bool = True,
    seed: int = 0,
    t: int = 4,
) -> TestReport:
    """Threshold test of positive homophily against a constant null.

    The detector supplies the assignment (and K, unless given). Rejects
    when the observed statistic exceeds the threshold.
    """
    _validate_common(g, alpha)
    seed = int(seed)
    det_name = detector.replace("-", "_").lower()
    if det_name not in DETECTOR_NAMES:
        raise ValidationError(f"unknown detector {detector!r}; choose from {DETECTOR_NAMES}")
    c_obs, det_flags = detect_communities(g, det_name, rng=substream(seed, 0), t=t)
    t_obs = t_statistic(g, c_obs)
    k_used = int(k) if k is not None else c_obs.k
    threshold = asymptotic_threshold(
        g.n, k_used, alpha=alpha, p_hat=g.density(), epsilon=epsilon, equal_sizes=equal_sizes
    )
    flags = {"k_used": k_used, "equal_sizes": bool(equal_sizes), "epsilon": float(epsilon)}
    if det_flags.get("k1_overridden"):
        flags["k1_overrides"] = 1
    return TestReport(
        method="asymptotic",
        null_kind="er",
        detector=det_name,
        t_obs=float(t_obs),
        p_value=None,
        threshold_c=float(threshold),
        reject=bool(t_obs > threshold),
        alpha=alpha,
        B=None,
        seed=seed,
        n=g.n,
        m=g.m,
        flags=flags,
        bootstrap_samples=None,
    )
