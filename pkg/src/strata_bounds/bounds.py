"""Sharp trimming bounds on the principal effects.

Pipeline: subtract the always-taker outcome distribution from the treated
program-taker distribution to recover the complier+substitutor mixture CDF;
isotonize it; trim the top or bottom by the substitutor share to bound the
complier treated-outcome mean; subtract the identified control mean to get
effect bounds; and map them through the LATE decomposition for the
substitutor effect.

Tie handling is fractional throughout: the atom at a cutpoint enters the
trimmed integral with exactly the fraction needed so the retained mixture
mass equals the trim level.  That makes the trimmed-mass identity exact on
step CDFs and makes the estimator agree with exhaustive enumeration on
small discrete instances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Sample
from .errors import BoundsInverted, EmptyCell, WeakShare
from .estimators import (DEFAULT_FLOOR, StrataShares, estimate_late,
                         estimate_mu0, estimate_mu1, estimate_shares)

__all__ = [
    "MixtureCdf", "EffectBounds", "build_mixture_cdf", "trim_cutpoints",
    "complier_outcome_bounds", "complier_effect_bounds",
    "substitutor_effect_bounds", "bounds_line", "trimmed_cell_bounds",
]

_INVERSION_TOL = 1e-9


@dataclass(frozen=True)
class MixtureCdf:
    """Identified treated-outcome CDF of the two switching strata combined.

    ``raw_cdf`` is the weighted-ECDF difference and may leave [0, 1] or dip;
    ``iso_cdf`` is its running maximum clipped to [0, 1] and forced to 1 at
    the top support point.  ``point_mass`` are the iso_cdf increments.
    """

    support: np.ndarray
    raw_cdf: np.ndarray
    iso_cdf: np.ndarray
    point_mass: np.ndarray
    coef_treated: float   # (pi02 + pi12 + pi22) / (pi02 + pi12)
    coef_control: float   # pi22 / (pi02 + pi12)

    def quantile(self, level: float) -> float:
        """Generalized inverse: inf{y : iso_cdf(y) >= level}."""
        if level <= 0:
            return float(self.support[0])
        idx = int(np.searchsorted(self.iso_cdf, min(level, 1.0) - 1e-12))
        return float(self.support[min(idx, self.support.size - 1)])


@dataclass
class EffectBounds:
    target: str
    lower: float
    upper: float
    ci_lower: Optional[tuple] = None
    ci_upper: Optional[tuple] = None
    cutpoints: Optional[tuple] = None
    shares_used: Optional[StrataShares] = None
    meta: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "lower": self.lower,
            "upper": self.upper,
            "ci_lower": list(self.ci_lower) if self.ci_lower else None,
            "ci_upper": list(self.ci_upper) if self.ci_upper else None,
            "cutpoints": list(self.cutpoints) if self.cutpoints else None,
            "meta": self.meta,
        }


def _weighted_ecdf(values: np.ndarray, weights: np.ndarray,
                   support: np.ndarray) -> np.ndarray:
    """Right-continuous weighted ECDF evaluated at each support point."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    cw = np.cumsum(weights[order])
    total = cw[-1]
    idx = np.searchsorted(v, support, side="right")
    out = np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0)
    return out / total


def _kernel_cdf(values: np.ndarray, weights: np.ndarray,
                grid: np.ndarray, bandwidth: float) -> np.ndarray:
    from scipy.stats import norm
    w = weights / weights.sum()
    z = (grid[:, None] - values[None, :]) / bandwidth
    return norm.cdf(z) @ w


def build_mixture_cdf(sample: Sample, shares: Optional[StrataShares] = None,
                      floor: float = DEFAULT_FLOOR, smooth: bool = False,
                      bandwidth: Optional[float] = None) -> MixtureCdf:
    """Weighted-ECDF difference of the two D=2 cells, isotonized.

    ``smooth=True`` is an experimental toggle that replaces the step ECDFs
    with Gaussian-kernel CDFs (Silverman bandwidth unless given) on a dense
    grid.  The step version is the estimator of record.
    """
    shares = shares if shares is not None else estimate_shares(sample)
    switch = shares.pi_02 + shares.pi_12
    if switch <= floor:
        raise WeakShare(f"pi(0,2)+pi(1,2) = {switch:.4f} <= floor {floor}")
    ca = (switch + shares.pi_22) / switch
    cb = shares.pi_22 / switch

    w = sample.ipw
    in_t = (sample.z == 1) & (sample.d == 2)
    in_c = (sample.z == 0) & (sample.d == 2)
    if not np.any(in_t):
        raise EmptyCell("no treated program-takers (z=1, d=2)")
    use_control = cb > 0
    if use_control and not np.any(in_c):
        raise EmptyCell("no control program-takers (z=0, d=2) but pi(2,2) > 0")

    if use_control:
        support = np.unique(np.concatenate([sample.y[in_t], sample.y[in_c]]))
    else:
        support = np.unique(sample.y[in_t])

    if smooth:
        from .gmm import _silverman_bandwidth
        h = bandwidth if bandwidth is not None else _silverman_bandwidth(
            sample.y[in_t], w[in_t])
        pad = 3.0 * h
        support = np.linspace(support[0] - pad, support[-1] + pad, 512)
        f_t = _kernel_cdf(sample.y[in_t], w[in_t], support, h)
        if use_control:
            f_c = _kernel_cdf(sample.y[in_c], w[in_c], support, h)
            raw = ca * f_t - cb * f_c
        else:
            raw = f_t.copy()
    else:
        f_t = _weighted_ecdf(sample.y[in_t], w[in_t], support)
        if use_control:
            f_c = _weighted_ecdf(sample.y[in_c], w[in_c], support)
            raw = ca * f_t - cb * f_c
        else:
            raw = f_t.copy()

    iso = np.minimum(np.maximum.accumulate(np.maximum(raw, 0.0)), 1.0)
    iso[-1] = 1.0
    mass = np.diff(iso, prepend=0.0)
    return MixtureCdf(support=support, raw_cdf=raw, iso_cdf=iso,
                      point_mass=mass, coef_treated=float(ca),
                      coef_control=float(cb))


def trim_cutpoints(mixture: MixtureCdf, shares: StrataShares) -> tuple:
    """(c1, c2): mixture quantiles at the complier and substitutor fractions."""
    switch = shares.pi_02 + shares.pi_12
    lam = shares.pi_02 / switch
    return mixture.quantile(lam), mixture.quantile(1.0 - lam)


def _trim_lower(support: np.ndarray, mass: np.ndarray, level: float) -> tuple:
    """Mean of the bottom ``level`` probability mass, with the boundary atom
    included fractionally.  Returns (mean, cutpoint)."""
    cum = np.cumsum(mass)
    j = int(np.searchsorted(cum, level - 1e-12))
    j = min(j, support.size - 1)
    below = cum[j - 1] if j > 0 else 0.0
    integral = float(np.dot(support[:j], mass[:j])) + support[j] * (level - below)
    return integral / level, float(support[j])


def _trim_upper(support: np.ndarray, mass: np.ndarray, level: float) -> tuple:
    mean, cut = _trim_lower(-support[::-1], mass[::-1], level)
    return -mean, -cut


def trimmed_cell_bounds(values: np.ndarray, weights: np.ndarray,
                        keep_fraction: float) -> tuple:
    """(lower, upper) means of the bottom/top ``keep_fraction`` weight mass
    of a single cell.  This is the no-always-taker special case of the
    mixture trim and the object that exhaustive enumeration reproduces."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    order = np.argsort(values, kind="stable")
    v = values[order]
    m = weights[order] / weights.sum()
    lo, _ = _trim_lower(v, m, keep_fraction)
    hi, _ = _trim_upper(v, m, keep_fraction)
    return lo, hi


def complier_outcome_bounds(sample: Sample, shares: Optional[StrataShares] = None,
                            floor: float = DEFAULT_FLOOR) -> EffectBounds:
    """Bounds on the mean treated outcome of the (0,2) stratum.

    Lower bound: mean of the bottom pi02/(pi02+pi12) fraction of the
    mixture; upper bound: mean of the top fraction of the same size.
    """
    shares = shares if shares is not None else estimate_shares(sample)
    if shares.pi_02 <= floor:
        raise WeakShare(f"pi(0,2) = {shares.pi_02:.4f} <= floor {floor}")
    mixture = build_mixture_cdf(sample, shares, floor=floor)
    lam = shares.pi_02 / (shares.pi_02 + shares.pi_12)
    lower, c1 = _trim_lower(mixture.support, mixture.point_mass, lam)
    upper, c2 = _trim_upper(mixture.support, mixture.point_mass, lam)
    if lower > upper:
        if lower - upper < _INVERSION_TOL:
            warnings.warn("bound endpoints swapped within numerical tolerance",
                          stacklevel=2)
            lower, upper = upper, lower
        else:
            raise BoundsInverted(
                f"lower {lower} > upper {upper} beyond tolerance; severe "
                "assumption violation or degenerate data")
    return EffectBounds(target="complier_outcome_mean", lower=float(lower),
                        upper=float(upper), cutpoints=(c1, c2),
                        shares_used=shares,
                        meta={"trim_level": lam})


def complier_effect_bounds(sample: Sample, floor: float = DEFAULT_FLOOR,
                           shares: Optional[StrataShares] = None) -> EffectBounds:
    """Outcome bounds shifted by the identified control mean, endpoint-wise."""
    shares = shares if shares is not None else estimate_shares(sample)
    outcome = complier_outcome_bounds(sample, shares, floor=floor)
    mu0 = estimate_mu0(sample, floor=floor, shares=shares).point
    return EffectBounds(target="complier_effect",
                        lower=outcome.lower - mu0, upper=outcome.upper - mu0,
                        cutpoints=outcome.cutpoints, shares_used=shares,
                        meta={"mu0": mu0, **outcome.meta})


def _substitutor_outcome_bounds(sample: Sample, shares: StrataShares,
                                floor: float) -> EffectBounds:
    """Mirror of the complier outcome bounds: trim level pi12/(pi02+pi12)."""
    if shares.pi_12 <= floor:
        raise WeakShare(f"pi(1,2) = {shares.pi_12:.4f} <= floor {floor}")
    mixture = build_mixture_cdf(sample, shares, floor=floor)
    lam = shares.pi_12 / (shares.pi_02 + shares.pi_12)
    lower, c_lo = _trim_lower(mixture.support, mixture.point_mass, lam)
    upper, c_hi = _trim_upper(mixture.support, mixture.point_mass, lam)
    return EffectBounds(target="substitutor_outcome_mean", lower=float(lower),
                        upper=float(upper), cutpoints=(c_lo, c_hi),
                        shares_used=shares, meta={"trim_level": lam})


def substitutor_effect_bounds(sample: Sample, method: str = "decomposition",
                              floor: float = DEFAULT_FLOOR,
                              shares: Optional[StrataShares] = None,
                              intersect: bool = False) -> EffectBounds:
    """Bounds on the (1,2) stratum effect.

    ``decomposition`` maps the complier effect bounds through the LATE
    identity (complier upper -> substitutor lower and vice versa);
    ``direct`` mirrors the trimming construction on the same mixture.
    With ``intersect=True`` the interval is the intersection of both.
    """
    if method not in ("decomposition", "direct"):
        raise ValueError(f"unknown method {method!r}")
    shares = shares if shares is not None else estimate_shares(sample)
    if shares.pi_12 <= floor:
        raise WeakShare(f"pi(1,2) = {shares.pi_12:.4f} <= floor {floor}")

    def _decomposition() -> tuple:
        late = estimate_late(sample, floor=floor).point
        switch = shares.pi_02 + shares.pi_12
        if shares.pi_02 <= floor:
            # no compliers: the pooled effect is the substitutor effect
            return late, late, {"late": late, "degenerate": True}
        cb = complier_effect_bounds(sample, floor=floor, shares=shares)
        lo = (late * switch - shares.pi_02 * cb.upper) / shares.pi_12
        hi = (late * switch - shares.pi_02 * cb.lower) / shares.pi_12
        return lo, hi, {"late": late, "complier_bounds": [cb.lower, cb.upper]}

    def _direct() -> tuple:
        outcome = _substitutor_outcome_bounds(sample, shares, floor)
        mu1 = estimate_mu1(sample, floor=floor, shares=shares).point
        return outcome.lower - mu1, outcome.upper - mu1, {
            "mu1": mu1, "cutpoints": list(outcome.cutpoints)}

    if intersect:
        lo_a, hi_a, meta = _decomposition()
        lo_b, hi_b, meta_b = _direct()
        lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
        meta = {"decomposition": [lo_a, hi_a], "direct": [lo_b, hi_b], **meta, **meta_b}
        if lo > hi:
            if lo - hi < _INVERSION_TOL:
                lo = hi = 0.5 * (lo + hi)
            else:
                raise BoundsInverted(
                    f"intersection empty: [{lo_a}, {hi_a}] vs [{lo_b}, {hi_b}]")
    elif method == "decomposition":
        lo, hi, meta = _decomposition()
    else:
        lo, hi, meta = _direct()
    meta["method"] = "intersect" if intersect else method
    return EffectBounds(target="substitutor_effect", lower=float(lo),
                        upper=float(hi), shares_used=shares, meta=meta)


def bounds_line(sample: Sample, grid: int = 50, floor: float = DEFAULT_FLOOR,
                shares: Optional[StrataShares] = None) -> np.ndarray:
    """Polyline of (substitutor effect, complier effect) pairs consistent
    with the data: the complier effect ranges over its bounds and the
    substitutor effect follows from the LATE decomposition.
    """
    shares = shares if shares is not None else estimate_shares(sample)
    late = estimate_late(sample, floor=floor).point
    cb = complier_effect_bounds(sample, floor=floor, shares=shares)
    if shares.pi_12 <= 0 or cb.upper == cb.lower:
        # point identification: degenerate single-point polyline
        tau02 = 0.5 * (cb.lower + cb.upper)
        tau12 = late if shares.pi_12 <= 0 else (
            (late * (shares.pi_02 + shares.pi_12) - shares.pi_02 * tau02)
            / shares.pi_12)
        return np.array([[tau12, tau02]])
    tau02 = np.linspace(cb.lower, cb.upper, max(int(grid), 2))
    switch = shares.pi_02 + shares.pi_12
    tau12 = (late * switch - shares.pi_02 * tau02) / shares.pi_12
    return np.column_stack([tau12, tau02])
