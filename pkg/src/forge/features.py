"""Trend-feature construction from scenario parameter tensors.

Every time series collapses to a (initial, final, OLS slope) triple; static
region-level quantities pass through unchanged.  The assembled matrix has
one row per (region, technology) pair and a normative column order so
persisted matrices are byte-comparable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .model import ScenarioData, SetsSpec


@dataclass(frozen=True)
class TrendTriple:
    """Endpoint and slope summary of a parameter time series."""

    initial: float
    final: float
    slope: float


def trend(years: np.ndarray, values: np.ndarray) -> TrendTriple:
    """Summarize a series as endpoints plus ordinary-least-squares slope."""
    years = np.asarray(years, dtype=float)
    values = np.asarray(values, dtype=float)
    if years.shape != values.shape or years.ndim != 1 or years.size < 2:
        raise ValueError("trend expects matched 1-D series of length >= 2")
    ty = years - years.mean()
    slope = float(ty @ (values - values.mean()) / (ty @ ty))
    return TrendTriple(float(values[0]), float(values[-1]), slope)


# Column layout per bank: (column prefix, tensor attribute).  3-D tensors are
# sliced at the row's (technology, region); 2-D at the region; 1-D series are
# global and broadcast to every row.
_FM_SERIES = [
    ("CostMarg", "cost_marg_fms"),
    ("CostInv", "cost_inv_fms"),
    ("CostInvLevel", "cost_inv_level_fms"),
    ("GHG", "ghg_fms"),
    ("ForestGrowth", "fms_growth"),
    ("CO2", "co2_price"),
    ("GHGTarget", "ghg_target_lulucf"),
]
_FM_STATIC = [("InitialBeechArea", "beech_area0"), ("InitialGrassArea", "grass_area0")]

_AGRI_SERIES = [
    ("CostMargAgri", "cost_marg_agri"),
    ("CostInvAgri", "cost_inv_agri"),
    ("CostInvLevAgri", "cost_inv_level_agri"),
    ("GHGAgri", "ghg_agri"),
    ("AgriGrowth", "agri_growth"),
    ("Peat_Extraction", "peat_extraction"),
]
_AGRI_STATIC = [("Agriarea0", "agri_area0")]


@dataclass
class FeatureMatrix:
    """Feature rows keyed by (region, technology) with named numeric columns.

    ``scaling`` maps column name to the (min, max) recorded by min-max
    normalization; it is empty for raw matrices.
    """

    rows: list[tuple[str, str]]
    columns: list[str]
    values: np.ndarray
    scaling: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.rows), len(self.columns)):
            raise ValueError("values shape does not match rows x columns")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix has non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        # the two categorical identifier columns count toward the width
        return (len(self.rows), len(self.columns) + 2)

    def cell(self, region: str, technology: str, column: str) -> float:
        i = self.rows.index((region, technology))
        return float(self.values[i, self.columns.index(column)])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=self.columns)
        frame.insert(0, "Technology", [t for _, t in self.rows])
        frame.insert(0, "Region", [r for r, _ in self.rows])
        return frame


def assemble(data: ScenarioData, bank: str) -> FeatureMatrix:
    """Build the raw (unnormalized) feature matrix for one scenario."""
    s = data.sets
    years = np.asarray(s.years, dtype=float)
    if bank == "fm":
        techs, series, static = s.fm_techs, _FM_SERIES, _FM_STATIC
    elif bank == "agri":
        techs, series, static = s.agri_techs, _AGRI_SERIES, _AGRI_STATIC
    else:
        raise ValueError(f"unknown bank {bank!r}")

    columns: list[str] = []
    for prefix, _ in series:
        columns += [f"{prefix}_{s.years[0]}", f"{prefix}_{s.years[-1]}", f"{prefix}_Slope"]
    columns += [name for name, _ in static]

    rows = [(r, k) for r in s.regions for k in techs]
    values = np.empty((len(rows), len(columns)))
    for i, (region, tech) in enumerate(rows):
        ri, ki = s.regions.index(region), techs.index(tech)
        cells: list[float] = []
        for _, attr in series:
            arr = getattr(data, attr)
            if arr.ndim == 3:
                y = arr[:, ki, ri]
            elif arr.ndim == 2:
                y = arr[:, ri]
            else:
                y = arr
            tr = trend(years, y)
            cells += [tr.initial, tr.final, tr.slope]
        for _, attr in static:
            cells.append(float(getattr(data, attr)[ri]))
        values[i] = cells
    return FeatureMatrix(rows, columns, values)


def minmax_normalize(m: FeatureMatrix) -> FeatureMatrix:
    """Scale each column to [0, 1], recording (min, max); constant columns map to 0."""
    lo = m.values.min(axis=0)
    hi = m.values.max(axis=0)
    span = hi - lo
    out = np.where(span > 0, (m.values - lo) / np.where(span > 0, span, 1.0), 0.0)
    scaling = {c: (float(lo[j]), float(hi[j])) for j, c in enumerate(m.columns)}
    return FeatureMatrix(list(m.rows), list(m.columns), out, scaling)


def denormalize(m: FeatureMatrix) -> FeatureMatrix:
    """Invert :func:`minmax_normalize` using the recorded scaling."""
    if not m.scaling:
        raise ValueError("matrix has no recorded scaling")
    lo = np.array([m.scaling[c][0] for c in m.columns])
    hi = np.array([m.scaling[c][1] for c in m.columns])
    return FeatureMatrix(list(m.rows), list(m.columns), m.values * (hi - lo) + lo)


def encode_for_learning(m: FeatureMatrix, sets: SetsSpec,
                        techs: tuple[str, ...]) -> tuple[np.ndarray, list[str]]:
    """Cross-join feature rows with years into a numeric design matrix.

    Categorical identifiers become one-hot indicators; a min-max scaled
    ``year`` column is appended last.  Row order: feature-row major, year
    minor, matching the solution tensors flattened as (year within row).
    """
    n_rows, n_years = len(m.rows), sets.n_years
    names = (list(m.columns)
             + [f"Region_{r}" for r in sets.regions]
             + [f"Technology_{k}" for k in techs]
             + ["year"])
    X = np.zeros((n_rows * n_years, len(names)))
    years = np.asarray(sets.years, dtype=float)
    yr = (years - years[0]) / (years[-1] - years[0]) if n_years > 1 else np.zeros(1)
    p = len(m.columns)
    for i, (region, tech) in enumerate(m.rows):
        block = slice(i * n_years, (i + 1) * n_years)
        X[block, :p] = m.values[i]
        X[block, p + sets.regions.index(region)] = 1.0
        X[block, p + len(sets.regions) + techs.index(tech)] = 1.0
        X[block, -1] = yr
    return X, names


def save_features(m: FeatureMatrix, csv_path: str | Path) -> None:
    """Write the matrix as CSV plus a JSON sidecar with the scaling record."""
    path = Path(csv_path)
    m.to_frame().to_csv(path, index=False)
    sidecar = {"scaling": {c: list(v) for c, v in m.scaling.items()}}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def load_features(csv_path: str | Path) -> FeatureMatrix:
    path = Path(csv_path)
    frame = pd.read_csv(path)
    rows = list(zip(frame["Region"], frame["Technology"]))
    columns = [c for c in frame.columns if c not in ("Region", "Technology")]
    sidecar = json.loads(path.with_suffix(".json").read_text())
    scaling = {c: (float(v[0]), float(v[1])) for c, v in sidecar["scaling"].items()}
    return FeatureMatrix(rows, columns, frame[columns].to_numpy(float), scaling)
