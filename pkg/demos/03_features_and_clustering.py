"""Trend features, scenario correlation, and UPGMA clustering.

Summarizes each scenario's inputs as endpoint/slope features, computes the
pairwise Pearson matrix, and agglomerates with average linkage — first on
inputs (near-identical by design) and then on cost outputs (dispersed).
"""

from forge import bank, model, pipeline, similarity

b = bank.generate_bank("agri", model.SetsSpec.desk_scale(), seed=7)
runs = bank.run_bank(b, workers=4)

mats = pipeline.scenario_feature_matrices(b)
m = mats["S01"]
print(f"feature matrix per scenario: {m.shape[0]} rows x {m.shape[1]} cols "
      f"(incl. Region/Technology identifiers)")
print("first columns:", m.columns[:6], "...")

in_art = pipeline.cluster_bank(b, space="input")
out_art = pipeline.cluster_bank(b, runs, space="output",
                                output_tensor="costTechAgri")

print(f"input-space  min off-diagonal rho: "
      f"{min(in_art.corr.off_diagonal()):.4f}")
print(f"output-space min off-diagonal rho: "
      f"{min(out_art.corr.off_diagonal()):.4f}")

most, least = similarity.extremal_pairs(out_art.corr, k=1)
print(f"most similar cost profiles:  {most[0][0]} ~ {most[0][1]} "
      f"(rho={most[0][2]:.3f})")
print(f"least similar cost profiles: {least[0][0]} ~ {least[0][1]} "
      f"(rho={least[0][2]:.3f})")

for name, art in (("input", in_art), ("output", out_art)):
    n = int(art.labels.max())
    print(f"{name}-space clusters at t={art.threshold}: {n}")
