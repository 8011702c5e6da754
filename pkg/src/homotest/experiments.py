"""Monte Carlo experiment harness: rejection-rate sweeps and convergence.

A scenario couples a generator family (optionally swept over one
parameter) with a test configuration and a run count. Every run r at
sweep point v derives its graph stream from substream (seed, v, r, 0)
and its test seed from (seed, v, r, 1), so a scenario is reproducible
run-for-run regardless of worker count or execution order.

A run whose test errors out (degenerate draw) is recorded as a
non-rejection and counted in the failure column rather than aborting
the sweep.
"""

from __future__ import annotations

import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import HomotestError, ValidationError
from .homophily import gamma, t_statistic
from .inference import asymptotic_test, bootstrap_test
from .models import expected_matrix, params_from_dict, planted_for, sampler_for
from .rng import substream, substream_seed


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of one rejection-rate experiment."""

    name: str
    generator: dict
    test: dict
    n_mc: int = 100
    seed: int = 0
    sweep: dict | None = None

    def __post_init__(self):
        if not isinstance(self.generator, dict) or "kind" not in self.generator:
            raise ValidationError("generator must be a dict with a 'kind'")
        if not isinstance(self.test, dict) or "method" not in self.test:
            raise ValidationError("test must be a dict with a 'method'")
        if self.test["method"] not in ("bootstrap", "asymptotic"):
            raise ValidationError("test method must be 'bootstrap' or 'asymptotic'")
        if self.n_mc < 1:
            raise ValidationError("n_mc must be >= 1")
        if self.sweep is not None:
            if "param" not in self.sweep or "values" not in self.sweep:
                raise ValidationError("sweep needs 'param' and 'values'")
            if len(self.sweep["values"]) == 0:
                raise ValidationError("sweep values must be non-empty")

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        d = json.loads(text)
        known = {"name", "generator", "test", "n_mc", "seed", "sweep"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown scenario fields: {sorted(extra)}")
        return cls(**d)

    def to_json(self) -> str:
        d = {
            "name": self.name,
            "generator": self.generator,
            "test": self.test,
            "n_mc": self.n_mc,
            "seed": self.seed,
        }
        if self.sweep is not None:
            d["sweep"] = self.sweep
        return json.dumps(d, indent=2) + "\n"


@dataclass
class SweepResult:
    """Per-point rejection rates with MC standard errors."""

    config: ScenarioConfig
    param: str | None
    values: list
    rates: list[float]
    ses: list[float]
    failures: list[int]
    runs: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# scenario: {self.config.name}\n")
        buf.write(f"# n_mc: {self.config.n_mc}\n")
        buf.write(f"# seed: {self.config.seed}\n")
        buf.write(f"# config: {json.dumps(self.config.generator)} | {json.dumps(self.config.test)}\n")
        name = self.param if self.param is not None else "point"
        buf.write(f"{name},rejection_rate,mc_se,n_mc,failed_runs\n")
        for v, r, s, f in zip(self.values, self.rates, self.ses, self.failures):
            label = v if v is not None else self.config.name
            buf.write(f"{label},{r:.6g},{s:.6g},{self.config.n_mc},{f}\n")
        return buf.getvalue()


def _single_run(config: ScenarioConfig, vi: int, value, r: int):
    """One Monte Carlo run; returns (reject, failed, summary)."""
    gen = dict(config.generator)
    if config.sweep is not None:
        gen[config.sweep["param"]] = value
    graph_rng = substream(config.seed, vi, r, 0)
    params = params_from_dict(gen, rng=graph_rng)
    g = sampler_for(params)(graph_rng)
    test_seed = substream_seed(config.seed, vi, r, 1)
    t = dict(config.test)
    method = t.pop("method")
    try:
        if method == "bootstrap":
            report = bootstrap_test(
                g,
                null=t.get("null", "er"),
                detector=t.get("detector", "walktrap"),
                B=int(t.get("B", 200)),
                alpha=float(t.get("alpha", 0.05)),
                seed=test_seed,
                threads=1,
            )
        else:
            report = asymptotic_test(
                g,
                detector=t.get("detector", "walktrap"),
                k=t.get("k"),
                alpha=float(t.get("alpha", 0.05)),
                epsilon=float(t.get("epsilon", 0.0)),
                equal_sizes=bool(t.get("equal_sizes", True)),
                seed=test_seed,
            )
    except HomotestError as exc:
        return False, True, {"error": str(exc)}
    summary = {
        "t_obs": report.t_obs,
        "p_value": report.p_value,
        "threshold_c": report.threshold_c,
        "reject": report.reject,
    }
    return bool(report.reject), False, summary


def _run_star(args):
    return _single_run(*args)


def run_scenario(config: ScenarioConfig, threads: int = 1, keep_runs: bool = False) -> SweepResult:
    """Execute a scenario; deterministic for any thread count."""
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    if config.sweep is not None:
        param = config.sweep["param"]
        values = list(config.sweep["values"])
    else:
        param = None
        values = [None]

    tasks = [
        (config, vi, v, r)
        for vi, v in enumerate(values)
        for r in range(config.n_mc)
    ]
    if threads == 1:
        outcomes = [_single_run(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, len(tasks) // (threads * 4))
            outcomes = list(pool.map(_run_star, tasks, chunksize=chunk))

    rates, ses, failures, runs = [], [], [], []
    for vi, v in enumerate(values):
        block = outcomes[vi * config.n_mc:(vi + 1) * config.n_mc]
        rejected = sum(1 for rj, _, _ in block if rj)
        failed = sum(1 for _, fl, _ in block if fl)
        rate = rejected / config.n_mc
        rates.append(rate)
        ses.append(float(np.sqrt(rate * (1.0 - rate) / config.n_mc)))
        failures.append(failed)
        if keep_runs:
            runs.append([s for _, _, s in block])
    return SweepResult(
        config=config,
        param=param,
        values=values,
        rates=rates,
        ses=ses,
        failures=failures,
        runs=runs,
    )


def convergence_check(generator: dict, ns, n_mc: int = 100, seed: int = 0):
    """Mean |statistic - population value| at the planted labels, per n.

    The generator must describe a block family (planted labels exist).
    Returns a list of dicts with n, the population value under the
    model's expected matrix, the mean absolute deviation, and its MC
    standard error.
    """
    rows = []
    for ni, n in enumerate(ns):
        gen = dict(generator)
        gen["n"] = int(n)
        params = params_from_dict(gen, rng=substream(seed, ni, 0))
        planted = planted_for(params)
        if planted is None:
            raise ValidationError("convergence check needs a model with planted labels")
        pop = gamma(expected_matrix(params).values, planted)
        devs = np.empty(n_mc)
        sampler = sampler_for(params)
        for r in range(n_mc):
            g = sampler(substream(seed, ni, 1, r))
            devs[r] = abs(t_statistic(g, planted) - pop)
        rows.append(
            {
                "n": int(n),
                "population_value": float(pop),
                "mean_abs_dev": float(devs.mean()),
                "se": float(devs.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0,
            }
        )
    return rows


def convergence_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("n,population_value,mean_abs_dev,se\n")
    for row in rows:
        buf.write(
            f"{row['n']},{row['population_value']:.6g},{row['mean_abs_dev']:.6g},{row['se']:.6g}\n"
        )
    return buf.getvalue()
