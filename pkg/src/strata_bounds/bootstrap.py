"""Cluster nonparametric bootstrap for every registered statistic.

Clusters are resampled with replacement (same number of clusters), block
propensities re-derived per replicate, and the statistic recomputed.
Replicates where estimation fails (weak shares, empty cells) are dropped
and counted.  All resample indices are drawn up front from a single seeded
generator, so results are identical regardless of how many worker threads
evaluate the replicates.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Union

import numpy as np

from .data import EstimateReport, Sample
from .errors import (ESTIMATION_ERRORS, EmptyCell, InvalidSpec,
                     MonotonicityDiagnostic, TooManyFailures)
from . import bounds as _bounds
from . import estimators as _est

__all__ = ["BootstrapSpec", "bootstrap_ci", "bootstrap_replicates",
           "STATISTICS", "resample"]

MAX_FAILURE_FRACTION = 0.2


@dataclass(frozen=True)
class BootstrapSpec:
    reps: int = 2000
    seed: int = 0
    alpha: float = 0.05
    resample_unit: str = "cluster"   # or "unit"
    ci_method: str = "percentile"    # or "normal"

    def validate(self):
        if self.reps < 1:
            raise InvalidSpec("reps must be positive")
        if self.ci_method == "percentile" and self.reps < 100:
            raise InvalidSpec("percentile CIs need reps >= 100")
        if not (0.0 < self.alpha < 1.0):
            raise InvalidSpec("alpha must be in (0, 1)")
        if self.resample_unit not in ("cluster", "unit"):
            raise InvalidSpec(f"unknown resample unit {self.resample_unit!r}")
        if self.ci_method not in ("percentile", "normal"):
            raise InvalidSpec(f"unknown ci method {self.ci_method!r}")


def _stat_tau02_lower(s: Sample) -> float:
    return _bounds.complier_effect_bounds(s).lower


def _stat_tau02_upper(s: Sample) -> float:
    return _bounds.complier_effect_bounds(s).upper


def _stat_tau12_lower(s: Sample) -> float:
    return _bounds.substitutor_effect_bounds(s).lower


def _stat_tau12_upper(s: Sample) -> float:
    return _bounds.substitutor_effect_bounds(s).upper


def _share_stat(name: str) -> Callable[[Sample], float]:
    def stat(s: Sample) -> float:
        return float(getattr(_est.estimate_shares(s), name))
    return stat


STATISTICS: Dict[str, Callable[[Sample], float]] = {
    "itt": lambda s: _est.estimate_itt(s).point,
    "first_stage": lambda s: _est.estimate_first_stage(s).point,
    "late": lambda s: _est.estimate_late(s).point,
    "mu0": lambda s: _est.estimate_mu0(s).point,
    "mu1": lambda s: _est.estimate_mu1(s).point,
    "beta_lower": lambda s: _bounds.complier_outcome_bounds(s).lower,
    "beta_upper": lambda s: _bounds.complier_outcome_bounds(s).upper,
    "tau02_lower": _stat_tau02_lower,
    "tau02_upper": _stat_tau02_upper,
    "tau12_lower": _stat_tau12_lower,
    "tau12_upper": _stat_tau12_upper,
    **{name: _share_stat(name) for name in _est.SHARE_NAMES},
}


def _thread_count() -> int:
    cap = os.environ.get("STRATA_BOUNDS_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            pass
    return 1


def resample(sample: Sample, rng_or_draws: Union[np.random.Generator, np.ndarray],
             unit: str = "cluster") -> Sample:
    """One bootstrap resample.  ``rng_or_draws`` is either a generator or a
    precomputed integer draw vector (cluster or unit indices)."""
    if unit == "cluster":
        groups = _cluster_index_lists(sample)
        k = len(groups)
        if isinstance(rng_or_draws, np.ndarray):
            picks = rng_or_draws
        else:
            picks = rng_or_draws.integers(0, k, size=k)
        idx = np.concatenate([groups[p] for p in picks])
        # resampled copies of a cluster count as distinct resampling units
        reps = [len(groups[p]) for p in picks]
        cluster_ids = np.repeat([f"b{j}" for j in range(k)], reps).tolist()
        return sample.subset(idx, cluster_ids=cluster_ids)
    n = sample.n
    if isinstance(rng_or_draws, np.ndarray):
        idx = rng_or_draws
    else:
        idx = rng_or_draws.integers(0, n, size=n)
    return sample.subset(idx, cluster_ids=[f"u{j}" for j in range(n)])


def _cluster_index_lists(sample: Sample):
    order = np.argsort(sample.cluster_codes, kind="stable")
    k = int(sample.cluster_codes.max()) + 1
    edges = np.searchsorted(sample.cluster_codes[order], np.arange(k + 1))
    return [order[edges[i]:edges[i + 1]] for i in range(k)]


def bootstrap_replicates(sample: Sample, statistic: Callable[[Sample], object],
                         spec: BootstrapSpec):
    """Evaluate ``statistic`` on ``spec.reps`` resamples.

    Returns (replicates, names, n_failed): ``replicates`` has one row per
    successful replicate; scalar statistics give a single column.
    """
    spec.validate()
    if spec.resample_unit == "cluster":
        groups = _cluster_index_lists(sample)
        k = len(groups)
    else:
        groups = None
        k = sample.n
    rng = np.random.default_rng(spec.seed)
    draws = rng.integers(0, k, size=(spec.reps, k))

    probe = statistic(sample)
    names = list(probe.keys()) if isinstance(probe, dict) else None

    def one(r: int):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", MonotonicityDiagnostic)
                rs = resample(sample, draws[r], unit=spec.resample_unit)
                val = statistic(rs)
        except (EmptyCell, *ESTIMATION_ERRORS):
            return None
        if names is not None:
            return np.array([val[k2] for k2 in names], dtype=float)
        return np.array([val], dtype=float)

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(spec.reps)))
    else:
        results = [one(r) for r in range(spec.reps)]

    kept = [v for v in results if v is not None]
    n_failed = spec.reps - len(kept)
    if n_failed > MAX_FAILURE_FRACTION * spec.reps:
        raise TooManyFailures(
            f"{n_failed}/{spec.reps} replicates failed; CI unreliable")
    return np.vstack(kept), names, n_failed


def bootstrap_ci(sample: Sample, statistic: Union[str, Callable[[Sample], float]],
                 spec: Optional[BootstrapSpec] = None) -> EstimateReport:
    """Percentile (or normal) CI for a scalar statistic, plus the replicate
    vector in ``meta['replicates']`` for plotting streaks."""
    spec = spec or BootstrapSpec()
    if isinstance(statistic, str):
        if statistic not in STATISTICS:
            raise InvalidSpec(f"unknown statistic {statistic!r}; "
                              f"choices: {sorted(STATISTICS)}")
        name = statistic
        fn = STATISTICS[statistic]
    else:
        name = getattr(statistic, "__name__", "statistic")
        fn = statistic
    point = float(fn(sample))
    reps, _, n_failed = bootstrap_replicates(sample, fn, spec)
    values = reps[:, 0]
    se = float(values.std(ddof=1)) if values.size > 1 else 0.0
    if spec.ci_method == "percentile":
        lo, hi = np.quantile(values, [spec.alpha / 2, 1 - spec.alpha / 2])
    else:
        from scipy.stats import norm
        zcrit = norm.ppf(1 - spec.alpha / 2)
        lo, hi = point - zcrit * se, point + zcrit * se
    return EstimateReport(
        name=name, point=point, se=se, ci=(float(lo), float(hi)),
        method="cluster_bootstrap" if spec.resample_unit == "cluster" else "unit_bootstrap",
        meta={"reps": spec.reps, "seed": spec.seed, "alpha": spec.alpha,
              "failed": n_failed, "ci_method": spec.ci_method,
              "replicates": values},
    )
