"""Natural-language what-if queries grounded in the scenario bank.

A free-form question is parsed to (parameter, multiplier, direction),
matched against the recipe grid, grounded in cluster evidence, compiled
into a deterministic prompt, and narrated by the offline stub client.
"""

from forge import bank, model, narrator, pipeline

b = bank.generate_bank("fm", model.SetsSpec.desk_scale(), seed=7)
art = pipeline.cluster_bank(b, space="input")

question = "What happens if CO2 price increases by 20%?"
out = narrator.answer_query(question, b, art.labels, art.corr,
                            narrator.NarratorConfig())

q = out["query"]
print(f"question: {question}")
print(f"parsed:   parameter={q.parameter} multiplier={q.multiplier} "
      f"direction={q.direction}")
print(f"matched scenarios: {', '.join(out['match'].ids)}"
      + (" (nearest)" if out["match"].nearest else ""))

g = out["grounding"]
print(f"cluster #{g.cluster_id}: {g.cluster_size} members, "
      f"mean intra-cluster rho = {g.intra_rho:.3f}")

print("\n--- prompt (first lines) ---")
print("\n".join(out["prompt"].splitlines()[:8]))
print("\n--- stub narrative ---")
print(out["narrative"].text)
print(f"\nprovenance: client={out['narrative'].provenance.client_id} "
      f"prompt_hash={out['narrative'].provenance.prompt_hash[:16]}...")
