"""CSV/JSON persistence for scenario parameter sets.

A scenario saves to a directory of long-format CSV files, one per parameter
tensor, plus a ``manifest.json`` with the index sets and scalars.  Headers
are normative (``year,region,technology,value`` for tech tensors) so files
are byte-comparable across runs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from .model import PARAMETER_TENSORS, ScenarioData, SetsSpec

MANIFEST_SCHEMA = 1


def _tensor_frame(data: ScenarioData, name: str) -> pd.DataFrame:
    s = data.sets
    arr = data.tensor(name)
    assert arr is not None
    if arr.ndim == 3:
        techs = s.fm_techs if name.endswith("FMs") else s.agri_techs
        recs = [
            (t, r, k, arr[ti, ki, ri])
            for ti, t in enumerate(s.years)
            for ri, r in enumerate(s.regions)
            for ki, k in enumerate(techs)
        ]
        return pd.DataFrame(recs, columns=["year", "region", "technology", "value"])
    if arr.ndim == 2:
        recs = [
            (t, r, arr[ti, ri])
            for ti, t in enumerate(s.years)
            for ri, r in enumerate(s.regions)
        ]
        return pd.DataFrame(recs, columns=["year", "region", "value"])
    if arr.shape == (s.n_years,):
        return pd.DataFrame({"year": list(s.years), "value": arr})
    return pd.DataFrame({"region": list(s.regions), "value": arr})


def save_scenario(data: ScenarioData, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, attr in PARAMETER_TENSORS.items():
        if attr is None:
            continue
        _tensor_frame(data, name).to_csv(out / f"{name}.csv", index=False)
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "scenario_id": data.scenario_id,
        "sets": {
            "years": list(data.sets.years),
            "regions": list(data.sets.regions),
            "fm_techs": list(data.sets.fm_techs),
            "agri_techs": list(data.sets.agri_techs),
        },
        "scalars": {
            "alpha": data.alpha,
            "gamma": data.gamma,
            "peat_target_2030": data.peat_target_2030,
            "seed": data.seed,
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return out


def load_scenario(in_dir: str | Path) -> ScenarioData:
    src = Path(in_dir)
    manifest = json.loads((src / "manifest.json").read_text())
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise ValueError(f"unsupported scenario manifest schema: {manifest.get('schema')}")
    sets = SetsSpec(
        tuple(manifest["sets"]["years"]),
        tuple(manifest["sets"]["regions"]),
        tuple(manifest["sets"]["fm_techs"]),
        tuple(manifest["sets"]["agri_techs"]),
    )
    T, R = sets.n_years, len(sets.regions)
    kwargs = {}
    for name, attr in PARAMETER_TENSORS.items():
        if attr is None:
            continue
        df = pd.read_csv(src / f"{name}.csv")
        if "technology" in df.columns:
            techs = sets.fm_techs if name.endswith("FMs") else sets.agri_techs
            arr = np.zeros((T, len(techs), R))
            ti = df["year"].map({y: i for i, y in enumerate(sets.years)})
            ki = df["technology"].map({k: i for i, k in enumerate(techs)})
            ri = df["region"].map({r: i for i, r in enumerate(sets.regions)})
            arr[ti, ki, ri] = df["value"]
        elif {"year", "region"} <= set(df.columns):
            arr = np.zeros((T, R))
            ti = df["year"].map({y: i for i, y in enumerate(sets.years)})
            ri = df["region"].map({r: i for i, r in enumerate(sets.regions)})
            arr[ti, ri] = df["value"]
        elif "year" in df.columns:
            arr = df.set_index("year").loc[list(sets.years), "value"].to_numpy()
        else:
            arr = df.set_index("region").loc[list(sets.regions), "value"].to_numpy()
        kwargs[attr] = arr
    scal = manifest["scalars"]
    return ScenarioData(sets=sets, alpha=scal["alpha"], gamma=scal["gamma"],
                        peat_target_2030=scal["peat_target_2030"],
                        seed=scal["seed"], scenario_id=manifest["scenario_id"],
                        **kwargs)
