"""Phase-space types: strain-stress points, datasets, sorting, scaling.

A dataset is stored as two (N, d) float arrays (strain and stress rows in
lockstep), d = 1 for bars and d = 6 for Voigt continuum points.  The Voigt
convention everywhere is (e11, e22, e33, g23, g13, g12) with engineering
shear strains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EPS_TOL = 1e-12  # strain components below this are skipped in scaling ratios


class DimensionMismatchError(ValueError):
    pass


class EmptyDatasetError(ValueError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    """One strain-stress pair; components must be finite, dims equal."""

    strain: np.ndarray
    stress: np.ndarray

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.strain, dtype=float))
        s = np.atleast_1d(np.asarray(self.stress, dtype=float))
        if e.shape != s.shape or e.ndim != 1:
            raise DimensionMismatchError(
                f"strain shape {e.shape} != stress shape {s.shape}"
            )
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(s))):
            raise ValueError("phase point has non-finite components")
        object.__setattr__(self, "strain", e)
        object.__setattr__(self, "stress", s)

    @property
    def dimension(self) -> int:
        return self.strain.shape[0]


@dataclass(frozen=True)
class ScalingMatrix:
    """Diagonal stress/strain scaling; entries strictly positive."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.diag, dtype=float))
        if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
            raise ValueError("scaling diagonal must be finite and positive")
        object.__setattr__(self, "diag", d)


class DataSet:
    """Ordered collection of phase points with cached sort keys.

    Immutable once built: `sort_canonical` returns a new instance.
    """

    def __init__(self, strains, stresses, label: str = "", sort_keys=None):
        e = np.asarray(strains, dtype=float)
        s = np.asarray(stresses, dtype=float)
        if e.ndim == 1:
            e = e[:, None]
        if s.ndim == 1:
            s = s[:, None]
        if e.shape != s.shape:
            raise DimensionMismatchError(
                f"strain array {e.shape} != stress array {s.shape}"
            )
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(s))):
            raise ValueError("dataset has non-finite entries")
        self.strains = e
        self.stresses = s
        self.label = label
        self._sort_keys = None if sort_keys is None else np.asarray(sort_keys, float)

    def __len__(self) -> int:
        return self.strains.shape[0]

    def __getitem__(self, i: int) -> PhasePoint:
        return PhasePoint(self.strains[i], self.stresses[i])

    @property
    def dimension(self) -> int:
        return self.strains.shape[1]

    @property
    def points(self) -> list[PhasePoint]:
        return [self[i] for i in range(len(self))]

    @property
    def sort_keys(self) -> np.ndarray:
        if self._sort_keys is None:
            self._sort_keys = sort_keys_array(self.strains, self.stresses)
        return self._sort_keys

    @property
    def is_sorted(self) -> bool:
        k = self.sort_keys
        return bool(np.all(k[1:] >= k[:-1]))

    def phase_matrix(self) -> np.ndarray:
        """(N, 2d) concatenation [strain | stress] used by NN search."""
        return np.hstack([self.strains, self.stresses])


def sort_key_1d(p: PhasePoint) -> float:
    """sign(strain) * ||(strain, stress)||_2 for a 1-D point; sign(0) = +1."""
    if p.dimension != 1:
        raise DimensionMismatchError(f"sort_key_1d needs d=1, got d={p.dimension}")
    e, s = p.strain[0], p.stress[0]
    sign = -1.0 if e < 0.0 else 1.0
    return float(sign * np.hypot(e, s))


def sort_key_6d(p: PhasePoint) -> float:
    """Sum of the six strain components."""
    if p.dimension != 6:
        raise DimensionMismatchError(f"sort_key_6d needs d=6, got d={p.dimension}")
    return float(np.sum(p.strain))


def sort_keys_array(strains: np.ndarray, stresses: np.ndarray) -> np.ndarray:
    if strains.shape[1] == 1:
        e, s = strains[:, 0], stresses[:, 0]
        sign = np.where(e < 0.0, -1.0, 1.0)
        return sign * np.hypot(e, s)
    return strains.sum(axis=1)


def sort_canonical(ds: DataSet) -> DataSet:
    """Sort ascending by the dimension-appropriate key; stable on ties."""
    if len(ds) == 0:
        raise EmptyDatasetError("cannot sort an empty dataset")
    order = np.argsort(ds.sort_keys, kind="stable")
    return DataSet(
        ds.strains[order],
        ds.stresses[order],
        label=ds.label,
        sort_keys=ds.sort_keys[order],
    )


def scaling_from_arrays(strains: np.ndarray, stresses: np.ndarray) -> ScalingMatrix:
    """Per-component median of stress/strain ratios; degenerate -> 1."""
    d = strains.shape[1]
    diag = np.ones(d)
    for i in range(d):
        e = strains[:, i]
        keep = np.abs(e) >= EPS_TOL
        if not np.any(keep):
            continue
        med = float(np.median(stresses[keep, i] / e[keep]))
        # the scaling must stay a valid positive metric even on noisy data
        if np.isfinite(med) and med > 0.0:
            diag[i] = med
    return ScalingMatrix(diag)


def estimate_scaling(local_points) -> ScalingMatrix:
    """Median stress/strain ratio per component over a point collection."""
    if isinstance(local_points, DataSet):
        return scaling_from_arrays(local_points.strains, local_points.stresses)
    pts = list(local_points)
    if not pts:
        raise EmptyDatasetError("estimate_scaling needs at least one point")
    e = np.stack([p.strain for p in pts])
    s = np.stack([p.stress for p in pts])
    return scaling_from_arrays(e, s)


# -- CSV + sidecar interchange -------------------------------------------------


def dataset_to_csv(ds: DataSet) -> str:
    d = ds.dimension
    header = ",".join([f"e{i+1}" for i in range(d)] + [f"s{i+1}" for i in range(d)])
    lines = [header]
    for row_e, row_s in zip(ds.strains, ds.stresses):
        lines.append(",".join(repr(float(v)) for v in (*row_e, *row_s)))
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str, label: str = "") -> DataSet:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise EmptyDatasetError("CSV has no data rows")
    header = lines[0].split(",")
    if len(header) % 2 != 0 or not header[0].startswith("e"):
        raise ValueError(f"unrecognised dataset header: {lines[0]!r}")
    d = len(header) // 2
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.shape[1] != 2 * d:
        raise DimensionMismatchError("row width does not match header")
    return DataSet(data[:, :d], data[:, d:], label=label)


def write_dataset(ds: DataSet, csv_path, sidecar: dict | None = None) -> None:
    csv_path = Path(csv_path)
    csv_path.write_text(dataset_to_csv(ds), encoding="utf-8", newline="\n")
    if sidecar is not None:
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_dataset(csv_path) -> DataSet:
    csv_path = Path(csv_path)
    return dataset_from_csv(csv_path.read_text(encoding="utf-8"), label=csv_path.stem)
