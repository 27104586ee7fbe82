"""Point estimators for strata shares, ITT, first stage, LATE, and the
counterfactual control-outcome means of the two switching strata.

Everything is an inverse-propensity-weighted cell contrast.  With ``ipw``
denoting the composed weight (user weight x density-ratio weight x
block-level inverse propensity), the treated-arm mean of any variable is
its ipw-weighted mean over z=1 units, and likewise for control.  Cell
probabilities p(d, z) are ipw-weighted take-up shares within an arm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import EstimateReport, Sample
from .errors import EmptyCell, MonotonicityDiagnostic, WeakFirstStage, WeakShare

__all__ = [
    "StrataShares", "CellMeans", "cell_means", "estimate_shares",
    "estimate_itt", "estimate_first_stage", "estimate_late",
    "estimate_mu0", "estimate_mu1",
    "DEFAULT_FLOOR", "DEFAULT_MONOTONICITY_TOL",
]

DEFAULT_FLOOR = 0.01
DEFAULT_MONOTONICITY_TOL = 0.02

# share order used throughout: (0,0), (1,1), (2,2), (0,2), (1,2)
SHARE_NAMES = ("pi_00", "pi_11", "pi_22", "pi_02", "pi_12")


@dataclass(frozen=True)
class StrataShares:
    """Five principal-strata proportions.

    The named fields are clamped (negatives floored at 0, renormalized to
    sum to 1); ``raw`` keeps the unclamped cell contrasts, which may be
    slightly negative in finite samples.
    """

    pi_00: float
    pi_11: float
    pi_22: float
    pi_02: float
    pi_12: float
    raw: tuple  # same order as the fields

    def as_array(self) -> np.ndarray:
        return np.array([self.pi_00, self.pi_11, self.pi_22, self.pi_02, self.pi_12])

    def raw_array(self) -> np.ndarray:
        return np.array(self.raw)

    def to_dict(self) -> dict:
        out = dict(zip(SHARE_NAMES, self.as_array().tolist()))
        out["raw"] = dict(zip(SHARE_NAMES, self.raw))
        return out


@dataclass(frozen=True)
class CellMeans:
    """ipw-weighted take-up probabilities and outcome means per (d, z) cell.

    ``p[d, z]`` is the within-arm take-up share; ``mean[d, z]`` the outcome
    mean in that cell (nan if the cell is empty); ``mass[d, z]`` the raw
    ipw mass.
    """

    p: np.ndarray      # (3, 2)
    mean: np.ndarray   # (3, 2)
    mass: np.ndarray   # (3, 2)
    arm_mean: np.ndarray  # outcome mean per arm, indexed by z

    def require(self, d: int, z: int) -> float:
        if self.mass[d, z] <= 0:
            raise EmptyCell(f"no weight in cell (z={z}, d={d})")
        return float(self.mean[d, z])


def cell_means(sample: Sample) -> CellMeans:
    w = sample.ipw
    cell = sample.d.astype(np.intp) * 2 + sample.z
    mass = np.bincount(cell, weights=w, minlength=6).reshape(3, 2)
    ysum = np.bincount(cell, weights=w * sample.y, minlength=6).reshape(3, 2)
    arm_mass = mass.sum(axis=0)
    if np.any(arm_mass <= 0):
        raise EmptyCell("an assignment arm has no weight")
    p = mass / arm_mass
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(mass > 0, ysum / np.where(mass > 0, mass, 1.0), np.nan)
    arm_mean = ysum.sum(axis=0) / arm_mass
    return CellMeans(p=p, mean=mean, mass=mass, arm_mean=arm_mean)


def _clamp(raw: np.ndarray) -> np.ndarray:
    clamped = np.maximum(raw, 0.0)
    total = clamped.sum()
    if total <= 0:
        raise WeakShare("all raw shares non-positive")
    return clamped / total


def estimate_shares(sample: Sample,
                    warn_tol: float = DEFAULT_MONOTONICITY_TOL) -> StrataShares:
    """Principal-strata shares from ipw cell contrasts.

    raw pi(1,2) = p(1,0) - p(1,1); pi(2,2) = p(2,0); pi(0,0) = p(0,1);
    pi(0,2) = p(0,0) - p(0,1); pi(1,1) = 1 - the rest.  A raw share below
    ``-warn_tol`` emits a :class:`MonotonicityDiagnostic` warning.
    """
    cm = cell_means(sample)
    p = cm.p
    pi_12 = p[1, 0] - p[1, 1]
    pi_22 = p[2, 0]
    pi_00 = p[0, 1]
    pi_02 = p[0, 0] - p[0, 1]
    pi_11 = 1.0 - pi_00 - pi_22 - pi_02 - pi_12
    raw = np.array([pi_00, pi_11, pi_22, pi_02, pi_12])
    if np.any(raw < -warn_tol):
        bad = {SHARE_NAMES[i]: float(raw[i]) for i in np.nonzero(raw < -warn_tol)[0]}
        warnings.warn(
            f"raw share(s) {bad} below -{warn_tol}; data inconsistent with "
            "one-directional take-up beyond sampling noise",
            MonotonicityDiagnostic, stacklevel=2)
    clamped = _clamp(raw)
    return StrataShares(*clamped.tolist(), raw=tuple(raw.tolist()))


def estimate_itt(sample: Sample, se: str | None = None) -> EstimateReport:
    """ipw-weighted difference in mean outcome between arms.

    ``se="cluster"`` adds an analytic cluster-robust standard error built
    from cluster-summed influence contributions.
    """
    cm = cell_means(sample)
    point = float(cm.arm_mean[1] - cm.arm_mean[0])
    if se is None:
        return EstimateReport("itt", point)
    if se != "cluster":
        raise ValueError(f"unknown se option {se!r}")
    w = sample.ipw
    treated = sample.z == 1
    w1 = float(w[treated].sum())
    w0 = float(w[~treated].sum())
    psi = np.where(treated,
                   w * (sample.y - cm.arm_mean[1]) / w1,
                   -w * (sample.y - cm.arm_mean[0]) / w0)
    g = np.bincount(sample.cluster_codes, weights=psi)
    k = g.size
    if k < 2:
        raise EmptyCell("cluster-robust SE needs at least two clusters")
    variance = float((g ** 2).sum()) * k / (k - 1)
    return EstimateReport("itt", point, se=float(np.sqrt(variance)),
                          method="analytic", meta={"clusters": k})


def estimate_first_stage(sample: Sample) -> EstimateReport:
    """Effect of assignment on program take-up: p(2,1) - p(2,0).

    Equals raw pi(0,2) + pi(1,2) up to floating-point roundoff.
    """
    cm = cell_means(sample)
    return EstimateReport("first_stage", float(cm.p[2, 1] - cm.p[2, 0]))


def estimate_late(sample: Sample, floor: float = DEFAULT_FLOOR) -> EstimateReport:
    """ITT divided by the first stage (both on the same weighted sample)."""
    itt = estimate_itt(sample).point
    fs = estimate_first_stage(sample).point
    if fs <= floor:
        raise WeakFirstStage(f"first stage {fs:.4f} <= floor {floor}")
    return EstimateReport("late", itt / fs,
                          meta={"itt": itt, "first_stage": fs})


def _contrast_mean(cm: CellMeans, d: int, share_stay: float, share_switch: float,
                   floor: float, name: str) -> EstimateReport:
    """((stay + switch)/switch) * mean(Y | Z=0, D=d) - (stay/switch) * mean(Y | Z=1, D=d).

    With d=0 this is the control-outcome mean of the (0,2) stratum; with
    d=1, of the (1,2) stratum.  ``stay`` is the share that keeps choice d
    under both assignments.
    """
    if share_switch <= floor:
        raise WeakShare(f"{name}: switching share {share_switch:.4f} <= floor {floor}")
    m_control = cm.require(d, 0)
    # the contrast term only matters when some units keep choice d under treatment
    m_treated = cm.require(d, 1) if share_stay > 0 else 0.0
    point = ((share_stay + share_switch) / share_switch) * m_control \
        - (share_stay / share_switch) * m_treated
    return EstimateReport(name, float(point),
                          meta={"share_stay": share_stay, "share_switch": share_switch})


def estimate_mu0(sample: Sample, floor: float = DEFAULT_FLOOR,
                 shares: StrataShares | None = None) -> EstimateReport:
    """Mean control outcome for units that switch from no schooling to the
    program, identified from the two D=0 cells."""
    shares = shares if shares is not None else estimate_shares(sample)
    cm = cell_means(sample)
    return _contrast_mean(cm, 0, shares.pi_00, shares.pi_02, floor, "mu0")


def estimate_mu1(sample: Sample, floor: float = DEFAULT_FLOOR,
                 shares: StrataShares | None = None) -> EstimateReport:
    """Mean control outcome for units that switch from the existing
    alternative to the program (mirror of :func:`estimate_mu0` on D=1)."""
    shares = shares if shares is not None else estimate_shares(sample)
    cm = cell_means(sample)
    return _contrast_mean(cm, 1, shares.pi_11, shares.pi_12, floor, "mu1")
