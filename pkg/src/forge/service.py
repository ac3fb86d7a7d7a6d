"""HTTP service exposing the scenario-analysis pipeline as JSON endpoints.

Every response uses a common envelope (status, data, provenance,
schema_version).  Loaded artifacts are immutable shared state; long jobs
(bank runs, training) belong to the CLI, so handlers only read.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import attribution, bank as bankmod, narrator, pipeline, similarity, surrogate
from .model import SetsSpec

SCHEMA_VERSION = 1


@dataclass
class ServiceState:
    """Artifacts the service holds for its lifetime."""

    banks: dict[str, bankmod.ScenarioBank]
    runs: dict[str, dict[str, bankmod.ScenarioRun]]
    clusters: dict[str, pipeline.ClusterArtifacts] = field(default_factory=dict)
    ensemble: surrogate.ForestEnsemble | None = None
    narrator_config: narrator.NarratorConfig = field(default_factory=narrator.NarratorConfig)
    seed: int = 0

    def cluster(self, bank: str, space: str, t: float) -> pipeline.ClusterArtifacts:
        key = f"{bank}:{space}:{t}"
        if key not in self.clusters:
            self.clusters[key] = pipeline.cluster_bank(
                self.banks[bank], self.runs.get(bank), space=space, t=t)
        return self.clusters[key]


def build_state(sets: SetsSpec | None = None, seed: int = 0,
                train: bool = False) -> ServiceState:
    """Generate and solve both banks in memory; optionally train a surrogate."""
    sets = sets if sets is not None else SetsSpec.desk_scale()
    banks, runs = {}, {}
    for kind in ("fm", "agri"):
        b = bankmod.generate_bank(kind, sets, seed=seed)
        banks[kind] = b
        runs[kind] = bankmod.run_bank(b, workers=4)
    state = ServiceState(banks, runs, seed=seed)
    if train:
        table = pipeline.build_learning_table(banks["fm"], runs["fm"], "capFMs")
        state.ensemble = pipeline.train_surrogate(table).ensemble
    return state


def _sha(obj: str) -> str:
    return hashlib.sha256(obj.encode("utf-8")).hexdigest()[:16]


def envelope(data, provenance: dict) -> dict:
    return {
        "status": "ok",
        "data": data,
        "provenance": provenance,
        "schema_version": SCHEMA_VERSION,
    }


class PredictRequest(BaseModel):
    rows: list[list[float]]


class ShapRequest(BaseModel):
    rows: list[list[float]]
    n_samples: int | None = None
    seed: int = 0


class AskRequest(BaseModel):
    question: str
    bank: str = "fm"
    stub: bool = True
    eps: float | None = None
    t: float | None = None


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="scenario-forge", version="1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    def get_bank(kind: str) -> bankmod.ScenarioBank:
        if kind not in state.banks:
            raise HTTPException(404, detail=f"unknown bank {kind!r}")
        return state.banks[kind]

    @app.get("/scenarios")
    def scenarios(bank: str = "fm"):
        b = get_bank(bank)
        data = {
            "bank": b.bank,
            "seed": state.seed,
            "recipes": [
                {"id": r.scenario_id, "multipliers": r.multipliers}
                for r in b.recipes
            ],
        }
        return envelope(data, {"bank": bank, "seed": state.seed})

    @app.get("/scenarios/{scenario_id}/outputs")
    def scenario_outputs(scenario_id: str, bank: str = "fm"):
        get_bank(bank)
        run = state.runs[bank].get(scenario_id)
        if run is None:
            raise HTTPException(404, detail=f"unknown scenario {scenario_id!r}")
        sol = run.solution
        data = {
            "id": scenario_id,
            "objective": sol.objective,
            "co2_gap_rewt": sol.co2_gap_rewt,
            "pur_co2": sol.pur_co2.tolist(),
            "total_abatement_fms": run.abatement.total_fms,
            "total_abatement_agri": run.abatement.total_agri,
            "cap_fms_total": float(sol.cap_fms.sum()),
            "cap_agri_total": float(sol.cap_agri.sum()),
            "years": list(run.data.sets.years),
        }
        return envelope(data, {"bank": bank, "scenario": scenario_id,
                               "seed": state.seed})

    @app.get("/clusters")
    def clusters(space: str = "input", bank: str = "fm", t: float = 0.5):
        get_bank(bank)
        if space not in ("input", "output"):
            raise HTTPException(422, detail="space must be 'input' or 'output'")
        art = state.cluster(bank, space, t)
        hi, lo = similarity.extremal_pairs(art.corr, k=1)
        data = {
            "ids": list(art.corr.ids),
            "rho": art.corr.rho.tolist(),
            "linkage": art.linkage.tolist(),
            "labels": art.labels.tolist(),
            "threshold": art.threshold,
            "most_similar": hi[0],
            "least_similar": lo[0],
        }
        return envelope(data, {"bank": bank, "space": space, "t": t,
                               "seed": state.seed})

    @app.post("/predict")
    def predict(req: PredictRequest):
        if state.ensemble is None:
            raise HTTPException(409, detail="no trained ensemble loaded")
        X = np.asarray(req.rows, dtype=float)
        if X.ndim != 2:
            raise HTTPException(422, detail="rows must be a 2-D array")
        pred = state.ensemble.predict(X)
        return envelope({"predictions": pred.tolist(),
                         "target_range": [state.ensemble.y_min, state.ensemble.y_max]},
                        {"n_rows": int(X.shape[0]), "seed": state.seed})

    @app.post("/shap")
    def shap(req: ShapRequest):
        if state.ensemble is None:
            raise HTTPException(409, detail="no trained ensemble loaded")
        X = np.asarray(req.rows, dtype=float)
        attr = attribution.ensemble_shap(state.ensemble, X,
                                         n_samples=req.n_samples, seed=req.seed)
        ranking = attribution.global_importance(attr)
        data = {
            "phi": attr.phi.tolist(),
            "phi0": attr.phi0.tolist(),
            "sample_index": attr.sample_index.tolist(),
            "feature_names": list(attr.feature_names),
            "global_ranking": [{"name": n, "mean_abs_shap": v} for n, v in ranking],
        }
        return envelope(data, {"n_rows": int(X.shape[0]), "seed": req.seed})

    @app.post("/ask")
    def ask(req: AskRequest):
        b = get_bank(req.bank)
        cfg = state.narrator_config
        if req.eps is not None or req.t is not None:
            cfg = narrator.NarratorConfig(
                eps=req.eps if req.eps is not None else cfg.eps,
                cluster_threshold=req.t if req.t is not None else cfg.cluster_threshold,
                extra_patterns=cfg.extra_patterns, client=cfg.client, model=cfg.model)
        art = state.cluster(req.bank, "input", cfg.cluster_threshold)
        client = narrator.StubClient() if req.stub else cfg.make_client()
        try:
            out = narrator.answer_query(req.question, b, art.labels, art.corr,
                                        cfg, client=client)
        except narrator.UnrecognizedQueryError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        q, match, g = out["query"], out["match"], out["grounding"]
        data = {
            "parsed": {"parameter": q.parameter, "multiplier": q.multiplier,
                       "direction": q.direction, "raw": q.raw},
            "matched_ids": list(match.ids),
            "nearest": match.nearest,
            "grounding": {
                "cluster_id": g.cluster_id,
                "cluster_size": g.cluster_size,
                "intra_rho": g.intra_rho,
                "representative_recipes": g.representative_recipes,
            },
            "prompt": out["prompt"],
            "narrative": out["narrative"].text,
        }
        prov = {
            "prompt_hash": out["narrative"].provenance.prompt_hash,
            "client_id": out["narrative"].provenance.client_id,
            "matched_ids": list(match.ids),
            "cluster_id": g.cluster_id,
            "seed": state.seed,
        }
        return envelope(data, prov)

    return app


def serve(host: str = "127.0.0.1", port: int = 8230, seed: int = 0,
          scale: str = "desk", train: bool = True) -> None:
    """Build artifacts and run the HTTP service (blocking)."""
    import uvicorn

    state = build_state(pipeline.default_sets(scale), seed=seed, train=train)
    uvicorn.run(create_app(state), host=host, port=port)
