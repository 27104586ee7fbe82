"""Core domain types and CSV ingestion.

A :class:`Sample` holds one experimental wave as immutable parallel numpy
arrays.  Assignment ``z`` is 0/1, take-up ``d`` is 0 (no program, no
alternative), 1 (existing alternative), or 2 (introduced program).  Blocks
are randomization strata; the propensity within a block is the treated
weight share, and all downstream estimators apply inverse-propensity
weights built from it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DomainViolation, EmptyCell, MalformedRow

__all__ = [
    "UnitRecord", "Sample", "EstimateReport", "ingest_csv", "write_csv",
    "propensity", "DEFAULT_SCHEMA",
]

DEFAULT_SCHEMA = {
    "z": "z",
    "d": "d",
    "y": "y",
    "cluster": "cluster",
    "block": "block",
    "weight": "weight",
}


@dataclass(frozen=True)
class UnitRecord:
    """One experimental unit."""

    unit_id: str
    cluster_id: str
    z: int
    d: int
    y: float
    block_id: str = "_all"
    weight: float = 1.0
    aux: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.z not in (0, 1):
            raise DomainViolation(f"z must be 0 or 1, got {self.z!r}")
        if self.d not in (0, 1, 2):
            raise DomainViolation(f"d must be 0, 1, or 2, got {self.d!r}")
        if not math.isfinite(self.y):
            raise DomainViolation(f"y must be finite, got {self.y!r}")
        if not (self.weight > 0):
            raise DomainViolation(f"weight must be > 0, got {self.weight!r}")
        if not self.cluster_id:
            raise DomainViolation("cluster_id must be nonempty")


class Sample:
    """Immutable collection of units with block/propensity bookkeeping.

    Construction validates overlap: every block must carry positive weight
    in both arms, otherwise :class:`EmptyCell` is raised.
    """

    def __init__(self, label, z, d, y, weight, cluster_ids, block_ids,
                 unit_ids=None, aux=None):
        self.label = label
        self.z = np.ascontiguousarray(z, dtype=np.int8)
        self.d = np.ascontiguousarray(d, dtype=np.int8)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.weight = np.ascontiguousarray(weight, dtype=np.float64)
        n = self.z.size
        if not (self.d.size == self.y.size == self.weight.size == n):
            raise ValueError("array length mismatch")
        if n == 0:
            raise EmptyCell("sample has no units")

        self.cluster_ids = list(cluster_ids)
        self.block_ids = list(block_ids)
        self.unit_ids = list(unit_ids) if unit_ids is not None else [str(i) for i in range(n)]
        self.aux = {k: np.ascontiguousarray(v, dtype=np.float64)
                    for k, v in (aux or {}).items()}

        if not np.all((self.z == 0) | (self.z == 1)):
            raise DomainViolation("z must be 0 or 1")
        if not np.all((self.d >= 0) & (self.d <= 2)):
            raise DomainViolation("d must be in {0, 1, 2}")
        if not np.all(np.isfinite(self.y)):
            raise DomainViolation("y must be finite")
        if not np.all(self.weight > 0):
            raise DomainViolation("weights must be > 0")

        # integer codes for blocks and clusters
        self._block_labels, self.block_codes = np.unique(
            np.asarray(self.block_ids, dtype=object), return_inverse=True)
        self._cluster_labels, self.cluster_codes = np.unique(
            np.asarray(self.cluster_ids, dtype=object), return_inverse=True)

        nb = self._block_labels.size
        w1 = np.bincount(self.block_codes, weights=self.weight * self.z, minlength=nb)
        wt = np.bincount(self.block_codes, weights=self.weight, minlength=nb)
        if np.any(w1 <= 0) or np.any(w1 >= wt):
            bad = self._block_labels[(w1 <= 0) | (w1 >= wt)]
            raise EmptyCell(f"block(s) {list(bad)} lack a treated or control arm")
        self._block_propensity = w1 / wt

        # inverse-propensity weight composed with the unit weight
        e = self._block_propensity[self.block_codes]
        self.ipw = self.weight * np.where(self.z == 1, 1.0 / e, 1.0 / (1.0 - e))
        self.ipw.setflags(write=False)
        for arr in (self.z, self.d, self.y, self.weight):
            arr.setflags(write=False)

    # --- constructors ---------------------------------------------------------

    @classmethod
    def from_units(cls, units: Iterable[UnitRecord], label: str = "") -> "Sample":
        units = list(units)
        aux_keys = set()
        for u in units:
            aux_keys.update(u.aux.keys())
        aux = {k: [u.aux.get(k, np.nan) for u in units] for k in sorted(aux_keys)}
        return cls(
            label=label,
            z=[u.z for u in units],
            d=[u.d for u in units],
            y=[u.y for u in units],
            weight=[u.weight for u in units],
            cluster_ids=[u.cluster_id for u in units],
            block_ids=[u.block_id for u in units],
            unit_ids=[u.unit_id for u in units],
            aux=aux,
        )

    def with_weights(self, weight: np.ndarray, label: Optional[str] = None) -> "Sample":
        return Sample(self.label if label is None else label,
                      self.z, self.d, self.y, weight,
                      self.cluster_ids, self.block_ids, self.unit_ids, self.aux)

    def subset(self, idx: np.ndarray, label: Optional[str] = None,
               cluster_ids: Optional[Sequence[str]] = None) -> "Sample":
        """New sample from unit indices (used by bootstrap resampling)."""
        cl = cluster_ids if cluster_ids is not None else [self.cluster_ids[i] for i in idx]
        return Sample(self.label if label is None else label,
                      self.z[idx], self.d[idx], self.y[idx], self.weight[idx],
                      cl, [self.block_ids[i] for i in idx],
                      unit_ids=[self.unit_ids[i] for i in idx],
                      aux={k: v[idx] for k, v in self.aux.items()})

    # --- views ----------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def blocks(self) -> dict:
        """block_id -> array of unit indices."""
        out = {}
        order = np.argsort(self.block_codes, kind="stable")
        bounds = np.searchsorted(self.block_codes[order],
                                 np.arange(self._block_labels.size + 1))
        for i, lbl in enumerate(self._block_labels):
            out[lbl] = order[bounds[i]:bounds[i + 1]]
        return out

    @property
    def units(self) -> list:
        return [
            UnitRecord(
                unit_id=self.unit_ids[i],
                cluster_id=self.cluster_ids[i],
                block_id=self.block_ids[i],
                z=int(self.z[i]),
                d=int(self.d[i]),
                y=float(self.y[i]),
                weight=float(self.weight[i]),
                aux={k: float(v[i]) for k, v in self.aux.items()},
            )
            for i in range(self.n)
        ]

    def propensity(self, block_id) -> float:
        hit = np.nonzero(self._block_labels == block_id)[0]
        if hit.size == 0:
            raise EmptyCell(f"no such block: {block_id!r}")
        return float(self._block_propensity[hit[0]])


@dataclass
class EstimateReport:
    """Point estimate with optional uncertainty."""

    name: str
    point: float
    se: Optional[float] = None
    ci: Optional[tuple] = None
    method: str = "analytic"
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "point": self.point,
            "se": self.se,
            "ci": list(self.ci) if self.ci is not None else None,
            "method": self.method,
            "meta": {k: v for k, v in self.meta.items()
                     if not isinstance(v, np.ndarray)},
        }


def propensity(sample: Sample, block_id) -> float:
    """Treated weight share within a block, strictly in (0, 1)."""
    return sample.propensity(block_id)


def _parse_code(text: str, allowed: tuple, what: str) -> int:
    try:
        val = int(float(text))
    except (TypeError, ValueError):
        raise ValueError(f"{what} not numeric: {text!r}")
    if val not in allowed or float(text) != val:
        raise DomainViolation(f"{what} must be in {set(allowed)}, got {text!r}")
    return val


def ingest_csv(path, schema: Optional[Mapping[str, str]] = None,
               aux_columns: Optional[Mapping[str, str]] = None,
               label: str = "") -> Sample:
    """Read a sample from a headered CSV file.

    ``schema`` maps the logical fields (z, d, y, cluster, block, weight) to
    column names; block and weight columns are optional.  ``aux_columns``
    maps covariate names to columns.  Units keep file order.
    """
    cols = dict(DEFAULT_SCHEMA)
    if schema:
        cols.update(schema)
    aux_columns = dict(aux_columns or {})

    units = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for fieldname in ("z", "d", "y", "cluster"):
            if cols[fieldname] not in header:
                raise MalformedRow(0, f"missing required column {cols[fieldname]!r}")
        has_block = cols.get("block") in header
        has_weight = cols.get("weight") in header
        for name, col in aux_columns.items():
            if col not in header:
                raise MalformedRow(0, f"missing covariate column {col!r}")

        for i, row in enumerate(reader, start=1):
            try:
                z = _parse_code(row[cols["z"]], (0, 1), "z")
                d = _parse_code(row[cols["d"]], (0, 1, 2), "d")
                y = float(row[cols["y"]])
                if not math.isfinite(y):
                    raise ValueError(f"y not finite: {row[cols['y']]!r}")
                weight = float(row[cols["weight"]]) if has_weight else 1.0
                aux = {name: float(row[col]) for name, col in aux_columns.items()}
                units.append(UnitRecord(
                    unit_id=row.get("unit_id") or str(i),
                    cluster_id=row[cols["cluster"]],
                    block_id=row[cols["block"]] if has_block else "_all",
                    z=z, d=d, y=y, weight=weight, aux=aux,
                ))
            except DomainViolation as exc:
                exc.row = i
                exc.args = (f"row {i}: {exc.args[0]}",)
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRow(i, str(exc)) from exc
    return Sample.from_units(units, label=label)


def write_csv(sample: Sample, path, extra_columns: Optional[Mapping[str, Sequence]] = None):
    """Write a sample back to CSV (round-trips through :func:`ingest_csv`)."""
    aux_names = sorted(sample.aux)
    fields = ["unit_id", "cluster", "block", "z", "d", "y", "weight"] + aux_names
    extra = dict(extra_columns or {})
    fields += list(extra)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for i in range(sample.n):
            row = [
                sample.unit_ids[i], sample.cluster_ids[i], sample.block_ids[i],
                int(sample.z[i]), int(sample.d[i]),
                repr(float(sample.y[i])), repr(float(sample.weight[i])),
            ]
            row += [repr(float(sample.aux[k][i])) for k in aux_names]
            row += [extra[k][i] for k in extra]
            writer.writerow(row)
