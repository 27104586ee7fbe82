"""Ground-truth data generator and brute-force verifier.

Populations are drawn with latent strata and all three potential outcomes,
so every identified quantity (shares, ITT, LATE, control means) and every
partially identified one (trimming bounds) has an exact oracle: the
finite-population value from the drawn units, the super-population value
from the configuration, and an enumeration check on small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .bounds import trimmed_cell_bounds
from .data import Sample
from .errors import InvalidConfig, TooLarge, UnsupportedFamily

__all__ = [
    "DgpConfig", "SyntheticPopulation", "Truth", "generate",
    "analytic_bounds", "brute_force_sharpness", "balanced_population",
    "PRESET_T1", "PRESET_T2", "PRESETS", "STRATA",
]

# stratum order everywhere: (0,0), (1,1), (2,2), (0,2), (1,2)
STRATA = ("never_taker", "govt_adherent", "always_taker", "complier", "substitutor")
_D_CONTROL = np.array([0, 1, 2, 0, 1], dtype=np.int8)
_D_TREATED = np.array([0, 1, 2, 2, 2], dtype=np.int8)

FAMILIES = ("normal", "uniform", "two_point")


@dataclass(frozen=True)
class DgpConfig:
    """Simulation design.

    ``outcome_means[s][k]`` is the mean of potential outcome Y(k) for
    stratum ``s`` (order as in ``STRATA``); ``outcome_noise`` is the total
    outcome standard deviation, split between a cluster random effect
    (share ``icc``) and unit noise.
    """

    strata_probs: tuple          # 5 probabilities summing to 1
    outcome_means: tuple         # 5 rows of (Y(0), Y(1), Y(2)) means
    outcome_noise: float = 1.0
    family: str = "normal"
    cluster_count: int = 50
    cluster_size: int = 20
    icc: float = 0.0
    assign_prob: float = 0.5
    blocks: int = 1
    seed: int = 0

    def validate(self):
        p = np.asarray(self.strata_probs, dtype=float)
        if p.shape != (5,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise InvalidConfig("strata_probs must be 5 nonnegative values summing to 1")
        if np.asarray(self.outcome_means, dtype=float).shape != (5, 3):
            raise InvalidConfig("outcome_means must be 5 rows of 3 means")
        if self.outcome_noise < 0:
            raise InvalidConfig("outcome_noise must be >= 0")
        if self.family not in FAMILIES:
            raise InvalidConfig(f"family must be one of {FAMILIES}")
        if not (0.0 <= self.icc < 1.0):
            raise InvalidConfig("icc must be in [0, 1)")
        if not (0.0 < self.assign_prob < 1.0):
            raise InvalidConfig("assign_prob must be in (0, 1)")
        if self.cluster_count < 2 or self.cluster_size < 1 or self.blocks < 1:
            raise InvalidConfig("need >= 2 clusters, >= 1 unit each, >= 1 block")


@dataclass(frozen=True)
class Truth:
    pi: np.ndarray
    itt: float
    first_stage: float
    late: float
    tau02: float
    tau12: float
    mu0: float
    mu1: float
    complier_bounds: Optional[tuple] = None
    substitutor_bounds: Optional[tuple] = None


@dataclass
class SyntheticPopulation:
    sample: Sample
    strata: np.ndarray    # latent stratum index per unit
    y0: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    truth: Truth          # finite-population truth from the drawn units
    truth_super: Truth    # super-population truth from the configuration
    config: DgpConfig = None


def _unit_noise(rng, n, sd, family):
    if sd == 0:
        return np.zeros(n)
    if family == "normal":
        return rng.normal(0.0, sd, size=n)
    if family == "uniform":
        return rng.uniform(-sd * math.sqrt(3.0), sd * math.sqrt(3.0), size=n)
    if family == "two_point":
        return sd * rng.choice([-1.0, 1.0], size=n)
    raise UnsupportedFamily(family)


def _finite_truth(strata, y0, y1, y2) -> Truth:
    n = strata.size
    pi = np.bincount(strata, minlength=5) / n
    is_c = strata == 3
    is_s = strata == 4
    tau02 = float((y2[is_c] - y0[is_c]).mean()) if is_c.any() else float("nan")
    tau12 = float((y2[is_s] - y1[is_s]).mean()) if is_s.any() else float("nan")
    mu0 = float(y0[is_c].mean()) if is_c.any() else float("nan")
    mu1 = float(y1[is_s].mean()) if is_s.any() else float("nan")
    fs = float(pi[3] + pi[4])
    itt = fs * ((pi[3] * tau02 + pi[4] * tau12) / fs) if fs > 0 else 0.0
    late = itt / fs if fs > 0 else float("nan")
    return Truth(pi=pi, itt=itt, first_stage=fs, late=late, tau02=tau02,
                 tau12=tau12, mu0=mu0, mu1=mu1)


def _super_truth(config: DgpConfig, with_bounds: bool = True) -> Truth:
    pi = np.asarray(config.strata_probs, dtype=float)
    means = np.asarray(config.outcome_means, dtype=float)
    tau02 = means[3, 2] - means[3, 0]
    tau12 = means[4, 2] - means[4, 1]
    fs = pi[3] + pi[4]
    itt = pi[3] * tau02 + pi[4] * tau12
    late = itt / fs if fs > 0 else float("nan")
    cb = sb = None
    if with_bounds and fs > 0 and pi[3] > 0:
        try:
            cb, sb = analytic_bounds(config)
        except UnsupportedFamily:
            pass
    return Truth(pi=pi, itt=itt, first_stage=fs, late=late, tau02=tau02,
                 tau12=tau12, mu0=means[3, 0], mu1=means[4, 1],
                 complier_bounds=cb, substitutor_bounds=sb)


def generate(config: DgpConfig) -> SyntheticPopulation:
    """Draw a population with latent strata and all potential outcomes."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n_clusters, m = config.cluster_count, config.cluster_size
    n = n_clusters * m
    cluster = np.repeat(np.arange(n_clusters), m)
    block = cluster % config.blocks  # clusters nested in blocks

    strata = rng.choice(5, size=n, p=np.asarray(config.strata_probs, dtype=float))

    sd = config.outcome_noise
    sd_cluster = sd * math.sqrt(config.icc)
    sd_unit = sd * math.sqrt(1.0 - config.icc)
    # cluster effect kept normal; unit noise follows the outcome family
    cluster_eff = (rng.normal(0.0, sd_cluster, size=n_clusters)[cluster]
                   if sd_cluster > 0 else np.zeros(n))
    means = np.asarray(config.outcome_means, dtype=float)
    pot = []
    for k in range(3):
        eps = _unit_noise(rng, n, sd_unit, config.family)
        pot.append(means[strata, k] + cluster_eff + eps)
    y0, y1, y2 = pot

    # assignment at the cluster level (clusters are the randomization units)
    z_cluster = (rng.random(n_clusters) < config.assign_prob).astype(np.int8)
    # guarantee overlap within every block
    for b in range(config.blocks):
        members = np.nonzero(np.arange(n_clusters) % config.blocks == b)[0]
        if z_cluster[members].sum() == 0:
            z_cluster[rng.choice(members)] = 1
        elif z_cluster[members].sum() == members.size:
            z_cluster[rng.choice(members)] = 0
    z = z_cluster[cluster]

    d = np.where(z == 1, _D_TREATED[strata], _D_CONTROL[strata])
    y = np.choose(d, [y0, y1, y2])

    sample = Sample(
        label=f"sim-{config.seed}",
        z=z, d=d, y=y, weight=np.ones(n),
        cluster_ids=[f"c{c}" for c in cluster],
        block_ids=[f"b{b}" for b in block],
    )
    return SyntheticPopulation(
        sample=sample, strata=strata, y0=y0, y1=y1, y2=y2,
        truth=_finite_truth(strata, y0, y1, y2),
        truth_super=_super_truth(config), config=config,
    )


# --- population-level sharp bounds -------------------------------------------

class _Component:
    """Marginal distribution of one stratum's Y(2): cdf and the partial
    expectation int_{-inf}^{c} y dF."""

    def __init__(self, mean, sd, family):
        self.mean, self.sd, self.family = mean, sd, family

    def cdf(self, c):
        if self.sd == 0:
            return float(c >= self.mean)
        if self.family == "normal":
            return norm.cdf(c, self.mean, self.sd)
        if self.family == "uniform":
            a = self.sd * math.sqrt(3.0)
            return float(np.clip((c - (self.mean - a)) / (2 * a), 0.0, 1.0))
        raise UnsupportedFamily(self.family)

    def partial_expectation(self, c):
        if self.sd == 0:
            return self.mean if c >= self.mean else 0.0
        if self.family == "normal":
            a = (c - self.mean) / self.sd
            return self.mean * norm.cdf(a) - self.sd * norm.pdf(a)
        if self.family == "uniform":
            half = self.sd * math.sqrt(3.0)
            lo, hi = self.mean - half, self.mean + half
            cc = min(max(c, lo), hi)
            return (cc * cc - lo * lo) / (2.0 * (hi - lo))
        raise UnsupportedFamily(self.family)

    def support(self):
        if self.sd == 0:
            return self.mean, self.mean
        if self.family == "normal":
            return self.mean - 12 * self.sd, self.mean + 12 * self.sd
        half = self.sd * math.sqrt(3.0)
        return self.mean - half, self.mean + half


def _mixture_trim(components, weights, level, from_top):
    """Mean of the bottom (or top) ``level`` mass of a continuous mixture."""
    lo = min(c.support()[0] for c in components)
    hi = max(c.support()[1] for c in components)

    def cdf(c):
        return sum(wt * comp.cdf(c) for wt, comp in zip(weights, components))

    target = 1.0 - level if from_top else level
    if cdf(lo) >= target:
        cut = lo
    elif cdf(hi) <= target:
        cut = hi
    else:
        cut = brentq(lambda c: cdf(c) - target, lo, hi, xtol=1e-12)
    pe = sum(wt * comp.partial_expectation(cut)
             for wt, comp in zip(weights, components))
    if from_top:
        mean_total = sum(wt * comp.mean for wt, comp in zip(weights, components))
        return (mean_total - pe) / level
    return pe / level


def _two_point_atoms(components, weights):
    atoms = {}
    for wt, comp in zip(weights, components):
        if comp.sd == 0:
            pts = [(comp.mean, 1.0)]
        else:
            pts = [(comp.mean - comp.sd, 0.5), (comp.mean + comp.sd, 0.5)]
        for v, p in pts:
            atoms[v] = atoms.get(v, 0.0) + wt * p
    values = np.array(sorted(atoms))
    probs = np.array([atoms[v] for v in values])
    return values, probs


def analytic_bounds(config: DgpConfig, tol: float = 1e-10) -> tuple:
    """Population-level sharp bounds ((complier lo, hi), (substitutor lo, hi)).

    Computed from the true complier/substitutor Y(2) mixture by closed-form
    truncated means (normal, uniform) or exact discrete trimming
    (two_point).
    """
    config.validate()
    pi = np.asarray(config.strata_probs, dtype=float)
    means = np.asarray(config.outcome_means, dtype=float)
    fs = pi[3] + pi[4]
    if fs <= 0 or pi[3] <= 0:
        raise InvalidConfig("need a positive complier share for bounds")
    if config.icc > 0 and config.family != "normal":
        raise UnsupportedFamily(
            "cluster effects outside the normal family have no closed-form marginal")
    if pi[4] <= 0:
        # no substitutors: point identification for the complier
        point = (means[3, 2] - means[3, 0],) * 2
        return point, point

    lam = pi[3] / fs
    sd = config.outcome_noise
    comps = [_Component(means[3, 2], sd, config.family),
             _Component(means[4, 2], sd, config.family)]
    wts = [lam, 1.0 - lam]

    if config.family == "two_point" or sd == 0:
        values, probs = _two_point_atoms(comps, wts)
        beta_lo, beta_hi = trimmed_cell_bounds(values, probs, lam)
        sub_lo, sub_hi = trimmed_cell_bounds(values, probs, 1.0 - lam)
    else:
        beta_lo = _mixture_trim(comps, wts, lam, from_top=False)
        beta_hi = _mixture_trim(comps, wts, lam, from_top=True)
        sub_lo = _mixture_trim(comps, wts, 1.0 - lam, from_top=False)
        sub_hi = _mixture_trim(comps, wts, 1.0 - lam, from_top=True)

    complier = (beta_lo - means[3, 0], beta_hi - means[3, 0])
    substitutor = (sub_lo - means[4, 1], sub_hi - means[4, 1])
    return complier, substitutor


# --- exhaustive sharpness check ----------------------------------------------

MAX_ENUM_CELL = 20


def brute_force_sharpness(population: SyntheticPopulation) -> tuple:
    """(min, max) complier mean over all labelings of the treated program
    cell consistent with the latent complier count.

    Only defined without always takers (the mixture is then the observed
    cell); enumeration is exhaustive over label assignments.
    """
    strata = population.strata
    s = population.sample
    if np.any(strata == 2):
        raise InvalidConfig("enumeration requires a population without always takers")
    cell = np.nonzero((s.z == 1) & (s.d == 2))[0]
    if cell.size == 0:
        raise InvalidConfig("treated program cell is empty")
    if cell.size > MAX_ENUM_CELL:
        raise TooLarge(f"cell size {cell.size} > {MAX_ENUM_CELL}")
    ys = s.y[cell]
    k = int(np.sum(strata[cell] == 3))
    if k == 0:
        raise InvalidConfig("no compliers in the treated program cell")
    best_lo, best_hi = math.inf, -math.inf
    for combo in itertools.combinations(range(cell.size), k):
        mean = ys[list(combo)].mean()
        best_lo = min(best_lo, mean)
        best_hi = max(best_hi, mean)
    return float(best_lo), float(best_hi)


def balanced_population(strata_counts, y2_values, rng=None,
                        y0_value: float = 0.0, y1_value: float = 0.0) -> SyntheticPopulation:
    """Tiny deterministic population whose two arms have identical strata
    composition, so estimated shares equal the exact counts.

    ``strata_counts`` gives per-arm counts in ``STRATA`` order (always
    takers must be 0); ``y2_values`` supplies the treated-arm program-cell
    outcomes for compliers and substitutors, in that order.
    """
    counts = np.asarray(strata_counts, dtype=int)
    if counts.shape != (5,) or counts[2] != 0:
        raise InvalidConfig("strata_counts must be 5 ints with always takers = 0")
    if counts[3] + counts[4] != len(y2_values):
        raise InvalidConfig("y2_values must cover compliers + substitutors")
    strata_arm = np.repeat(np.arange(5), counts)
    n_arm = strata_arm.size
    strata = np.concatenate([strata_arm, strata_arm])
    z = np.concatenate([np.zeros(n_arm, dtype=np.int8), np.ones(n_arm, dtype=np.int8)])
    y0 = np.full(2 * n_arm, float(y0_value))
    y1 = np.full(2 * n_arm, float(y1_value))
    y2 = np.zeros(2 * n_arm)
    switch = np.isin(strata_arm, (3, 4))
    y2[n_arm:][switch] = np.asarray(y2_values, dtype=float)
    d = np.where(z == 1, _D_TREATED[strata], _D_CONTROL[strata])
    y = np.choose(d, [y0, y1, y2])
    sample = Sample(
        label="balanced", z=z, d=d, y=y, weight=np.ones(2 * n_arm),
        cluster_ids=[f"c{i}" for i in range(2 * n_arm)],
        block_ids=["_all"] * (2 * n_arm),
    )
    return SyntheticPopulation(sample=sample, strata=strata, y0=y0, y1=y1,
                               y2=y2, truth=_finite_truth(strata, y0, y1, y2),
                               truth_super=None)


# --- calibrated presets -------------------------------------------------------

def _preset(shares, late_target, complier_effect, seed):
    """Per-stratum means chosen so the population LATE hits the target.

    Published share vectors are rounded to two decimals and may sum to
    0.99; they are renormalized here.
    """
    pi = np.asarray(shares, dtype=float)
    pi = pi / pi.sum()
    shares = tuple(pi.tolist())
    lam = pi[3] / (pi[3] + pi[4])
    tau12 = ((late_target - lam * complier_effect) / (1.0 - lam)
             if pi[4] > 0 else late_target)
    means = (
        (-0.3, 0.0, 0.0),                    # never taker
        (0.0, 0.1, 0.0),                     # govt adherent
        (0.0, 0.0, 0.5),                     # always taker
        (0.0, 0.0, complier_effect),         # complier
        (0.0, 0.0, tau12),                   # substitutor
    )
    return DgpConfig(strata_probs=tuple(shares), outcome_means=means,
                     outcome_noise=1.0, family="normal",
                     cluster_count=80, cluster_size=15, icc=0.3, seed=seed)


PRESET_T1 = _preset((0.23, 0.09, 0.00, 0.42, 0.25), late_target=1.06,
                    complier_effect=1.15, seed=2)
PRESET_T2 = _preset((0.20, 0.25, 0.18, 0.16, 0.20), late_target=1.04,
                    complier_effect=1.35, seed=2)

PRESETS = {"table-t1": PRESET_T1, "table-t2": PRESET_T2,
           "table7-t1": PRESET_T1, "table7-t2": PRESET_T2}
