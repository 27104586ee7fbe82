"""Histogram density-ratio weights for balancing a covariate distribution.

Fits per-bin target/source mass ratios on one covariate and multiplies them
into the source sample's weights, so the reweighted source histogram
matches the target histogram bin by bin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .data import Sample
from .errors import OutOfRange, UnsupportedShift

__all__ = ["DensityRatioModel", "fit_density_ratio", "apply_weights"]

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class DensityRatioModel:
    covariate: str
    bin_edges: np.ndarray          # strictly increasing, len B+1
    source_density: np.ndarray     # per-bin probability mass, sums to 1
    target_density: np.ndarray
    ratio: np.ndarray              # target/source where source > 0, else 0

    def to_dict(self) -> dict:
        return {
            "covariate": self.covariate,
            "bin_edges": self.bin_edges.tolist(),
            "source_density": self.source_density.tolist(),
            "target_density": self.target_density.tolist(),
            "ratio": self.ratio.tolist(),
        }

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: dict) -> "DensityRatioModel":
        return cls(
            covariate=payload["covariate"],
            bin_edges=np.asarray(payload["bin_edges"], dtype=float),
            source_density=np.asarray(payload["source_density"], dtype=float),
            target_density=np.asarray(payload["target_density"], dtype=float),
            ratio=np.asarray(payload["ratio"], dtype=float),
        )


def _covariate(sample: Sample, name: str) -> np.ndarray:
    if name not in sample.aux:
        raise OutOfRange(f"covariate {name!r} not present in sample {sample.label!r}")
    x = sample.aux[name]
    if not np.all(np.isfinite(x)):
        raise OutOfRange(f"covariate {name!r} has non-finite values")
    return x


def _bin_index(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    # values exactly at the top edge land in the last bin (histogram convention)
    if np.any(x < edges[0]) or np.any(x > edges[-1]):
        bad = x[(x < edges[0]) | (x > edges[-1])][0]
        raise OutOfRange(f"covariate value {bad} outside bin edges "
                         f"[{edges[0]}, {edges[-1]}]")
    idx = np.searchsorted(edges, x, side="right") - 1
    return np.clip(idx, 0, edges.size - 2)


def fit_density_ratio(source: Sample, target: Sample, covariate: str,
                      bins: Union[int, np.ndarray] = 10) -> DensityRatioModel:
    """Fit per-bin target/source weight-mass ratios.

    ``bins`` is either a bin count (fixed-width bins over the pooled range)
    or an explicit array of edges covering both samples.  Bins where the
    target has mass but the source has none raise :class:`UnsupportedShift`:
    no source units can represent that region.
    """
    xs = _covariate(source, covariate)
    xt = _covariate(target, covariate)
    if np.isscalar(bins):
        lo = min(xs.min(), xt.min())
        hi = max(xs.max(), xt.max())
        if hi == lo:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise OutOfRange("bin edges must be strictly increasing")

    src_mass = np.bincount(_bin_index(xs, edges), weights=source.weight,
                           minlength=edges.size - 1)
    tgt_mass = np.bincount(_bin_index(xt, edges), weights=target.weight,
                           minlength=edges.size - 1)
    src_mass = src_mass / src_mass.sum()
    tgt_mass = tgt_mass / tgt_mass.sum()

    unsupported = (src_mass <= _MASS_TOL) & (tgt_mass > _MASS_TOL)
    if np.any(unsupported):
        bad = np.nonzero(unsupported)[0]
        raise UnsupportedShift(
            f"target has mass in bin(s) {bad.tolist()} where source has none")

    ratio = np.zeros_like(src_mass)
    ok = src_mass > _MASS_TOL
    ratio[ok] = tgt_mass[ok] / src_mass[ok]
    return DensityRatioModel(covariate, edges, src_mass, tgt_mass, ratio)


def apply_weights(sample: Sample, model: DensityRatioModel) -> Sample:
    """Multiply bin ratios into unit weights, renormalized to the original
    total weight so scale diagnostics stay comparable."""
    x = _covariate(sample, model.covariate)
    idx = _bin_index(x, model.bin_edges)
    new_w = sample.weight * model.ratio[idx]
    total = new_w.sum()
    if total <= 0:
        raise UnsupportedShift("all reweighted mass is zero")
    new_w = new_w * (sample.weight.sum() / total)
    # units in zero-target-mass bins get weight 0 and are dropped
    keep = np.nonzero(new_w > 0)[0]
    if keep.size == sample.n:
        return sample.with_weights(new_w)
    return sample.subset(keep).with_weights(new_w[keep])
