"""Command-line entry points for the scenario-analysis pipeline.

Every subcommand writes its artifacts under a run directory next to a small
JSON manifest, so a full pipeline run is a chain of directories that can be
checksummed and replayed.  Errors exit non-zero with a single machine-
parsable line on stderr: ``forge-error: <code>: <message>``.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import attribution, bank as bankmod, features, narrator, pipeline, \
    scenario_io, surrogate


def _fail(code: str, message: str) -> None:
    click.echo(f"forge-error: {code}: {message}", err=True)
    sys.exit(1)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, KeyError, FileNotFoundError,
                bankmod.BankRunError, narrator.UnrecognizedQueryError) as exc:
            _fail(type(exc).__name__, str(exc))
    return wrapper


def _write_manifest(out: Path, step: str, params: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    doc = {"step": step, "params": params, "schema": 1}
    (out / f"{step}_manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True))


def _load_bank_dir(in_dir: str) -> tuple[bankmod.ScenarioBank, dict]:
    gen = json.loads((Path(in_dir) / "generate_manifest.json").read_text())
    params = gen["params"]
    sets = pipeline.default_sets(params["scale"])
    b = bankmod.generate_bank(params["bank"], sets, seed=params["seed"])
    return b, params


@click.group()
def main() -> None:
    """Scenario-analysis pipeline for land-based mitigation planning."""


@main.group()
def bank() -> None:
    """Generate or solve a scenario bank."""


@bank.command("generate")
@click.option("--bank", "kind", type=click.Choice(["fm", "agri"]), default="fm")
@click.option("--seed", type=int, default=0)
@click.option("--scale", type=click.Choice(["desk", "full"]), default="desk")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_guarded
def bank_generate(kind: str, seed: int, scale: str, out_dir: str) -> None:
    """Materialize the 26 scenario input directories."""
    out = Path(out_dir)
    b = bankmod.generate_bank(kind, pipeline.default_sets(scale), seed=seed)
    for recipe in b.recipes:
        scenario_io.save_scenario(bankmod.materialize(b.baseline, recipe),
                                  out / recipe.scenario_id / "inputs")
    _write_manifest(out, "generate",
                    {"bank": kind, "seed": seed, "scale": scale})
    click.echo(f"generated {len(b.recipes)} scenarios under {out}")


@bank.command("run")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--workers", type=int, default=4)
@_guarded
def bank_run(in_dir: str, workers: int) -> None:
    """Solve every scenario and write outputs plus the bank manifest."""
    b, params = _load_bank_dir(in_dir)
    runs = bankmod.run_bank(b, out_dir=in_dir, workers=workers)
    _write_manifest(Path(in_dir), "run", {"workers": workers, **params})
    click.echo(f"solved {len(runs)} scenarios; manifest at {in_dir}/manifest.json")


@main.command("features")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--normalize/--raw", default=True)
@_guarded
def features_cmd(in_dir: str, normalize: bool) -> None:
    """Write per-scenario feature matrices (CSV + scaling sidecar)."""
    b, params = _load_bank_dir(in_dir)
    out = Path(in_dir) / "features"
    out.mkdir(exist_ok=True)
    for recipe in b.recipes:
        m = features.assemble(bankmod.materialize(b.baseline, recipe), b.bank)
        if normalize:
            m = features.minmax_normalize(m)
        features.save_features(m, out / f"{recipe.scenario_id}.csv")
    _write_manifest(Path(in_dir), "features",
                    {"normalize": normalize, **params})
    click.echo(f"wrote {len(b.recipes)} feature matrices under {out}")


@main.command("cluster")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--space", type=click.Choice(["input", "output"]), default="input")
@click.option("--target", default="costTechAgri",
              help="output tensor when --space output")
@click.option("--t", "threshold", type=float, default=0.5)
@_guarded
def cluster_cmd(in_dir: str, space: str, target: str, threshold: float) -> None:
    """Correlate and cluster the bank; writes correlation, linkage, labels."""
    b, params = _load_bank_dir(in_dir)
    runs = bankmod.run_bank(b, workers=4) if space == "output" else None
    art = pipeline.cluster_bank(b, runs, space=space, output_tensor=target,
                                t=threshold)
    out = Path(in_dir) / "clusters"
    out.mkdir(exist_ok=True)
    np.savetxt(out / f"{space}_rho.csv", art.corr.rho, delimiter=",")
    np.savetxt(out / f"{space}_linkage.csv", art.linkage, delimiter=",")
    (out / f"{space}_labels.json").write_text(json.dumps(
        {sid: int(lab) for sid, lab in zip(art.corr.ids, art.labels)},
        indent=2, sort_keys=True))
    _write_manifest(Path(in_dir), "cluster",
                    {"space": space, "t": threshold, "target": target, **params})
    click.echo(f"clustered {len(art.corr.ids)} scenarios "
               f"({len(set(art.labels.tolist()))} clusters at t={threshold})")


@main.command("train")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--target", default="capFMs")
@click.option("--folds", type=int, default=10)
@click.option("--trees", type=int, default=50)
@click.option("--max-depth", type=int, default=None)
@click.option("--seed", type=int, default=0)
@_guarded
def train_cmd(in_dir: str, target: str, folds: int, trees: int,
              max_depth: int | None, seed: int) -> None:
    """Train the bagged surrogate; writes the ensemble JSON and metrics."""
    b, params = _load_bank_dir(in_dir)
    runs = bankmod.run_bank(b, workers=4)
    table = pipeline.build_learning_table(b, runs, target)
    config = surrogate.EnsembleConfig(n_folds=folds, n_trees=trees,
                                      max_depth=max_depth, seed=seed)
    trained = pipeline.train_surrogate(table, config, split_seed=seed)
    out = Path(in_dir)
    surrogate.save_ensemble(trained.ensemble, out / "ensemble.json")
    metrics = {"rmse": trained.metrics.rmse, "r2": trained.metrics.r2,
               "target": target, "n_rows": int(table.y.size)}
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True))
    _write_manifest(out, "train", {"target": target, "folds": folds,
                                   "trees": trees, "max_depth": max_depth,
                                   "train_seed": seed, **params})
    click.echo(f"r2={trained.metrics.r2:.4f} rmse={trained.metrics.rmse:.4f}")


@main.command("shap")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--rows", type=int, default=8, help="evaluation rows to explain")
@click.option("--seed", type=int, default=0)
@_guarded
def shap_cmd(in_dir: str, rows: int, seed: int) -> None:
    """Attribute the trained ensemble on a sample of the learning table."""
    out = Path(in_dir)
    ens_path = out / "ensemble.json"
    if not ens_path.exists():
        _fail("MissingArtifact", f"no ensemble at {ens_path}; run `forge train` first")
    ens = surrogate.load_ensemble(ens_path)
    train_manifest = json.loads((out / "train_manifest.json").read_text())
    b, _ = _load_bank_dir(in_dir)
    runs = bankmod.run_bank(b, workers=4)
    table = pipeline.build_learning_table(b, runs, train_manifest["params"]["target"])
    attr = attribution.ensemble_shap(ens, table.X, n_samples=rows, seed=seed,
                                     background=table.X)
    ranking = attribution.global_importance(attr)
    doc = {
        "phi": attr.phi.tolist(),
        "phi0": attr.phi0.tolist(),
        "sample_index": attr.sample_index.tolist(),
        "feature_names": list(attr.feature_names),
        "global_ranking": [{"name": n, "mean_abs_shap": v} for n, v in ranking],
    }
    (out / "shap.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    _write_manifest(out, "shap", {"rows": rows, "seed": seed})
    top = ", ".join(n for n, _ in ranking[:3])
    click.echo(f"top features: {top}")


@main.command("ask")
@click.argument("question")
@click.option("--bank", "kind", type=click.Choice(["fm", "agri"]), default="fm")
@click.option("--seed", type=int, default=0)
@click.option("--scale", type=click.Choice(["desk", "full"]), default="desk")
@click.option("--stub/--remote", default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@_guarded
def ask_cmd(question: str, kind: str, seed: int, scale: str, stub: bool,
            config_path: str | None, out_dir: str | None) -> None:
    """Answer a stakeholder what-if question against a generated bank."""
    cfg = narrator.NarratorConfig.from_file(config_path) if config_path \
        else narrator.NarratorConfig()
    b = bankmod.generate_bank(kind, pipeline.default_sets(scale), seed=seed)
    art = pipeline.cluster_bank(b, space="input", t=cfg.cluster_threshold)
    client = narrator.StubClient() if stub else cfg.make_client()
    out = narrator.answer_query(question, b, art.labels, art.corr, cfg,
                                client=client)
    match, g = out["match"], out["grounding"]
    click.echo(f"parameter: {out['query'].parameter}  "
               f"multiplier: {out['query'].multiplier}")
    click.echo(f"matched: {', '.join(match.ids)}"
               + (" [nearest]" if match.nearest else ""))
    click.echo(f"cluster #{g.cluster_id}: {g.cluster_size} scenarios, "
               f"intra-rho {g.intra_rho:.3f}")
    click.echo(out["narrative"].text)
    if out_dir:
        dest = Path(out_dir)
        dest.mkdir(parents=True, exist_ok=True)
        record = {
            "question": question,
            "parsed": {"parameter": out["query"].parameter,
                       "multiplier": out["query"].multiplier,
                       "direction": out["query"].direction},
            "matched_ids": list(match.ids),
            "nearest": match.nearest,
            "cluster_id": g.cluster_id,
            "cluster_size": g.cluster_size,
            "intra_rho": g.intra_rho,
            "prompt": out["prompt"],
            "narrative": out["narrative"].text,
            "provenance": {
                "prompt_hash": out["narrative"].provenance.prompt_hash,
                "client_id": out["narrative"].provenance.client_id,
            },
        }
        (dest / "ask.json").write_text(json.dumps(record, indent=2, sort_keys=True))
        _write_manifest(dest, "ask", {"bank": kind, "seed": seed,
                                      "scale": scale, "stub": stub})


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8230)
@click.option("--seed", type=int, default=0)
@click.option("--scale", type=click.Choice(["desk", "full"]), default="desk")
@click.option("--train/--no-train", default=True)
@_guarded
def serve_cmd(host: str, port: int, seed: int, scale: str, train: bool) -> None:
    """Start the HTTP service (blocking)."""
    from .service import serve

    serve(host=host, port=port, seed=seed, scale=scale, train=train)


if __name__ == "__main__":
    main()
