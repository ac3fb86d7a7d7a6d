"""Perturbation scenario bank: recipes, materialization, and batch runs.

Each bank is a fixed set of 26 scenarios.  A recipe is a mapping from
parameter names to multipliers applied elementwise to the baseline tensors;
parameters not named keep their baseline values.  Running the bank solves
the LP for every scenario and persists inputs, outputs and a manifest with
file checksums so reruns are byte-comparable.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import lp as lpmod
from . import model, scenario_io

BANK_SCHEMA = 1

#: Multipliers that appear in the built-in recipes.
ALLOWED_FACTORS = frozenset(
    {0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0}
)


class BankRunError(RuntimeError):
    """A scenario in the bank failed to solve to optimality."""


@dataclass(frozen=True)
class ScenarioRecipe:
    """A named multiplicative perturbation of the baseline."""

    scenario_id: str
    multipliers: dict[str, float]
    bank: str  # "fm" | "agri"

    def __post_init__(self):
        if self.bank not in ("fm", "agri"):
            raise ValueError(f"unknown bank {self.bank!r}")
        for name, factor in self.multipliers.items():
            if name not in model.PARAMETER_TENSORS:
                raise KeyError(f"unknown parameter {name!r} in {self.scenario_id}")
            if float(factor) not in ALLOWED_FACTORS:
                raise ValueError(
                    f"{self.scenario_id}: factor {factor} for {name} outside the recipe set")


# The four agricultural parameters swept jointly by the forest-bank recipes
# S13/S14 (the block marked with a single wildcard column in the design).
_AGRI_BLOCK = ("costInvAgri", "costMargAgri", "costInvLevelAgri", "Agriarea0")

_FM_TABLE: list[dict[str, float]] = [
    {"CO2price": 0.8, "FMsgrowth": 0.8, "BeechArea0": 0.8},
    {"CO2price": 0.8, "FMsgrowth": 1.0, "BeechArea0": 0.8},
    {"CO2price": 0.8, "FMsgrowth": 1.0, "BeechArea0": 1.0},
    {"CO2price": 1.2, "FMsgrowth": 1.0, "BeechArea0": 1.2},
    {"CO2price": 1.2, "FMsgrowth": 1.2, "BeechArea0": 0.8},
    {"CO2price": 1.2, "FMsgrowth": 1.2, "BeechArea0": 1.2},
    {"FMsgrowth": 0.8, "costInvLevelFMs": 0.8},
    {"FMsgrowth": 0.8, "ghgTargetLULUCF": 0.8, "costInvLevelFMs": 0.8, "ghgFMs": 0.8},
    {"FMsgrowth": 1.2, "costInvLevelFMs": 1.2},
    {"FMsgrowth": 1.2, "ghgTargetLULUCF": 1.2, "costInvLevelFMs": 1.2, "ghgFMs": 1.2},
    {"FMsgrowth": 0.8, "BeechArea0": 0.8, "GrassArea0": 0.8,
     "ghgTargetLULUCF": 0.8, "cap0FMs": 0.8},
    {"FMsgrowth": 1.2, "BeechArea0": 1.2, "GrassArea0": 1.2,
     "ghgTargetLULUCF": 1.2, "cap0FMs": 1.2},
    {name: 0.8 for name in _AGRI_BLOCK},
    {name: 1.2 for name in _AGRI_BLOCK},
    {"costInvFMs": 0.8, "costInvLevelFMs": 0.8},
    {"costInvFMs": 0.9, "costInvLevelFMs": 1.1},
    {"costInvFMs": 1.2, "costInvLevelFMs": 1.2},
    {"costMargFMs": 0.5, "costInvFMs": 0.5, "costInvLevelFMs": 0.5},
    {"costMargFMs": 0.5, "costInvFMs": 0.5, "costInvLevelFMs": 0.5, "ghgFMs": 0.5},
    {"cap0FMs": 0.8, "costMargFMs": 0.8, "costInvFMs": 0.8, "costInvLevelFMs": 0.8},
    {"costMargFMs": 0.8, "costInvFMs": 0.8, "costInvLevelFMs": 0.8, "ghgFMs": 0.8},
    {"cap0FMs": 1.2, "costMargFMs": 1.2, "costInvFMs": 1.2, "costInvLevelFMs": 1.2},
    {"costMargFMs": 1.2, "costInvFMs": 1.2, "costInvLevelFMs": 1.2, "ghgFMs": 1.2},
    {"costMargFMs": 1.5, "costInvFMs": 1.5, "costInvLevelFMs": 1.5},
    {"costMargFMs": 1.5, "costInvFMs": 1.5, "costInvLevelFMs": 1.5, "ghgFMs": 1.5},
    {"FMsgrowth": 1.3, "BeechArea0": 1.3, "GrassArea0": 1.3, "ghgTargetLULUCF": 1.3},
]

_AGRI_TABLE: list[dict[str, float]] = [
    {"Agrigrowth": 1.9, "Agriarea0": 1.9, "PeatExtract": 1.9},
    {"Agrigrowth": 0.4, "Agriarea0": 0.4, "PeatExtract": 0.4},
    {"CO2price": 0.8, "FMsgrowth": 0.8, "BeechArea0": 0.8},
    {"CO2price": 0.8, "FMsgrowth": 1.0, "BeechArea0": 0.8},
    {"CO2price": 0.8, "FMsgrowth": 1.0, "BeechArea0": 1.0},
    {"CO2price": 1.2, "FMsgrowth": 1.0, "BeechArea0": 1.2},
    {"CO2price": 1.2, "FMsgrowth": 1.2, "BeechArea0": 0.8},
    {"CO2price": 1.2, "FMsgrowth": 1.2, "BeechArea0": 1.2},
    {},
    {"costInvAgri": 0.5, "costInvLevelAgri": 0.5, "ghgAgri": 0.5,
     "Agrigrowth": 0.5, "Agriarea0": 0.5},
    {"costInvAgri": 0.8, "costInvLevelAgri": 0.8, "Agrigrowth": 0.8},
    {"costInvAgri": 0.8, "costInvLevelAgri": 0.8, "ghgAgri": 0.8},
    {"costInvAgri": 1.2, "costInvLevelAgri": 1.2, "Agrigrowth": 1.2},
    {"costInvAgri": 1.2, "costInvLevelAgri": 1.2, "ghgAgri": 1.2},
    {"costInvAgri": 0.7, "costInvLevelAgri": 0.7, "Agrigrowth": 0.7},
    {"costInvAgri": 1.7, "costInvLevelAgri": 1.7, "Agrigrowth": 1.7},
    {"costMargAgri": 0.6, "Agrigrowth": 0.6},
    {"costMargAgri": 1.5, "ghgAgri": 1.5, "Agrigrowth": 1.5,
     "Agriarea0": 1.5, "PeatExtract": 1.5},
    {"costMargAgri": 1.6, "Agrigrowth": 1.6},
    {"costMargAgri": 2.0, "costInvAgri": 2.0, "costInvLevelAgri": 2.0},
    {"ghgAgri": 0.5, "PeatExtract": 0.5},
    {"ghgAgri": 0.8, "Agrigrowth": 0.8, "Agriarea0": 0.8, "PeatExtract": 0.8},
    {"ghgAgri": 1.2, "Agrigrowth": 1.2, "Agriarea0": 1.2, "PeatExtract": 1.2},
    {"ghgAgri": 1.5, "Agrigrowth": 1.5, "Agriarea0": 1.5, "PeatExtract": 1.5},
    {"ghgAgri": 1.8, "Agrigrowth": 1.8, "Agriarea0": 1.8, "PeatExtract": 1.8},
    {"ghgAgri": 1.8, "PeatExtract": 1.8},
]


def builtin_recipes(bank: str) -> list[ScenarioRecipe]:
    """The 26 built-in recipes for the ``"fm"`` or ``"agri"`` bank."""
    table = {"fm": _FM_TABLE, "agri": _AGRI_TABLE}.get(bank)
    if table is None:
        raise ValueError(f"unknown bank {bank!r}")
    return [ScenarioRecipe(f"S{i + 1:02d}", dict(mult), bank)
            for i, mult in enumerate(table)]


def materialize(baseline: model.ScenarioData, recipe: ScenarioRecipe) -> model.ScenarioData:
    """Apply a recipe's multipliers to the baseline."""
    return baseline.scaled(recipe.multipliers, recipe.scenario_id)


@dataclass(frozen=True)
class ScenarioRun:
    """Solved scenario: primal solution plus derived output tensors."""

    recipe: ScenarioRecipe
    data: model.ScenarioData
    solution: model.Solution
    abatement: model.AbatementReport
    cost_fms: np.ndarray
    cost_agri: np.ndarray
    iterations: int


@dataclass
class ScenarioBank:
    """A baseline plus the recipe list that perturbs it."""

    bank: str
    baseline: model.ScenarioData
    recipes: list[ScenarioRecipe] = field(default_factory=list)

    def scenario(self, scenario_id: str) -> model.ScenarioData:
        for recipe in self.recipes:
            if recipe.scenario_id == scenario_id:
                return materialize(self.baseline, recipe)
        raise KeyError(scenario_id)


def generate_bank(bank: str, sets: model.SetsSpec | None = None,
                  seed: int = 0) -> ScenarioBank:
    sets = sets if sets is not None else model.SetsSpec.full_size()
    baseline = model.synthesize_baseline(sets, seed=seed)
    return ScenarioBank(bank, baseline, builtin_recipes(bank))


def _solve_one(recipe: ScenarioRecipe, baseline: model.ScenarioData) -> ScenarioRun:
    data = materialize(baseline, recipe)
    problem = model.build_lp(data)
    outcome = lpmod.solve(problem)
    if outcome.status != "Optimal":
        raise BankRunError(f"scenario {recipe.scenario_id}: {outcome.status}")
    sol = model.solution_from_x(problem, data, outcome.x, outcome.objective)
    report = model.validate(data, sol)
    if report.max_violation > 1e-6:
        raise BankRunError(
            f"scenario {recipe.scenario_id}: max violation {report.max_violation:.3e}")
    fms_cost, agri_cost = model.cost_tensors(data, sol)
    return ScenarioRun(recipe, data, sol, model.abatement(data, sol),
                       fms_cost, agri_cost, outcome.iterations)


def run_bank(bank: ScenarioBank, out_dir: str | Path | None = None,
             workers: int = 1) -> dict[str, ScenarioRun]:
    """Solve every scenario; optionally persist all artifacts under out_dir."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(r.scenario_id, pool.submit(_solve_one, r, bank.baseline))
                       for r in bank.recipes]
            runs = {sid: fut.result() for sid, fut in futures}
    else:
        runs = {r.scenario_id: _solve_one(r, bank.baseline) for r in bank.recipes}
    if out_dir is not None:
        write_bank(bank, runs, out_dir)
    return runs


def _cell_frame(sets: model.SetsSpec, techs: tuple[str, ...], arr: np.ndarray) -> pd.DataFrame:
    recs = [
        (t, r, k, arr[ti, ki, ri])
        for ti, t in enumerate(sets.years)
        for ri, r in enumerate(sets.regions)
        for ki, k in enumerate(techs)
    ]
    return pd.DataFrame(recs, columns=["year", "region", "technology", "value"])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_bank(bank: ScenarioBank, runs: dict[str, ScenarioRun],
               out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checksums: dict[str, str] = {}
    for recipe in bank.recipes:
        run = runs[recipe.scenario_id]
        s = run.data.sets
        sdir = out / recipe.scenario_id
        scenario_io.save_scenario(run.data, sdir / "inputs")
        odir = sdir / "outputs"
        odir.mkdir(parents=True, exist_ok=True)
        tables = {
            "capFMs": _cell_frame(s, s.fm_techs, run.solution.cap_fms),
            "capAgri": _cell_frame(s, s.agri_techs, run.solution.cap_agri),
            "ghgAbateFMs": _cell_frame(s, s.fm_techs, run.abatement.ghg_abate_fms),
            "ghgAbateAgri": _cell_frame(s, s.agri_techs, run.abatement.ghg_abate_agri),
            "costTechFMs": _cell_frame(s, s.fm_techs, run.cost_fms),
            "costTechAgri": _cell_frame(s, s.agri_techs, run.cost_agri),
            "purCO2": pd.DataFrame({"year": list(s.years), "value": run.solution.pur_co2}),
        }
        for name, frame in tables.items():
            frame.to_csv(odir / f"{name}.csv", index=False)
        summary = {
            "objective": run.solution.objective,
            "co2_gap_rewt": run.solution.co2_gap_rewt,
            "iterations": run.iterations,
            "total_abatement_fms": run.abatement.total_fms,
            "total_abatement_agri": run.abatement.total_agri,
        }
        (odir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
        for path in sorted(sdir.rglob("*.csv")):
            checksums[str(path.relative_to(out))] = _sha256(path)
    manifest = {
        "schema": BANK_SCHEMA,
        "bank": bank.bank,
        "seed": bank.baseline.seed,
        "scenarios": [
            {"id": r.scenario_id, "multipliers": r.multipliers} for r in bank.recipes
        ],
        "checksums": checksums,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return out


def load_bank(bank_dir: str | Path) -> tuple[ScenarioBank, dict[str, dict[str, pd.DataFrame]]]:
    """Read a persisted bank directory back into memory.

    The baseline is regenerated from the recorded seed using the index sets
    of the first stored scenario; output tables are read per scenario.
    """
    root = Path(bank_dir)
    manifest = json.loads((root / "manifest.json").read_text())
    if manifest.get("schema") != BANK_SCHEMA:
        raise ValueError(f"unsupported bank manifest schema: {manifest.get('schema')}")
    recipes = [ScenarioRecipe(item["id"], dict(item["multipliers"]), manifest["bank"])
               for item in manifest["scenarios"]]
    outputs: dict[str, dict[str, pd.DataFrame]] = {}
    sets = None
    for recipe in recipes:
        sdir = root / recipe.scenario_id
        if sets is None:
            sets = scenario_io.load_scenario(sdir / "inputs").sets
        outputs[recipe.scenario_id] = {
            p.stem: pd.read_csv(p) for p in sorted((sdir / "outputs").glob("*.csv"))
        }
    assert sets is not None
    baseline = model.synthesize_baseline(sets, seed=manifest["seed"])
    bank = ScenarioBank(manifest["bank"], baseline, recipes)
    return bank, outputs
