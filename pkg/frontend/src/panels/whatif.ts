/** What-if panel: slider over a parameter multiplier.
 *
 * The slider's lambda picks the recipe nearest to (parameter, lambda); the
 * panel then shows the served outputs for that scenario plus the global
 * SHAP ranking from /shap. All numbers come from the service.
 */

import { ApiClient } from "../api.js";
import { RequestGate, SessionView } from "../state.js";
import { Recipe, ScenarioOutputsPayload, ServiceError } from "../types.js";
import { barChart, escapeHtml } from "../render.js";

export interface WhatIfCard {
  kind: "whatif";
  parameter: string;
  lambda: number;
  scenarioId: string;
  exact: boolean;
  outputs: ScenarioOutputsPayload;
  topBars: { label: string; value: number }[];
}

export interface WhatIfError {
  kind: "error";
  detail: string;
  status: number;
}

/** Recipe whose factor for the parameter is closest to lambda (ties: first). */
export function nearestScenario(
  recipes: Recipe[],
  parameter: string,
  lambda: number,
  eps = 0.05,
): { id: string; exact: boolean } {
  let bestId = recipes[0]?.id ?? "";
  let bestGap = Infinity;
  for (const r of recipes) {
    const factor = r.multipliers[parameter] ?? 1.0;
    const gap = Math.abs(factor - lambda);
    if (gap < bestGap) {
      bestGap = gap;
      bestId = r.id;
    }
  }
  return { id: bestId, exact: bestGap < eps };
}

export async function whatIfPanel(
  parameter: string,
  lambda: number,
  recipes: Recipe[],
  api: ApiClient,
  session: SessionView,
  gate: RequestGate,
  topK = 3,
): Promise<WhatIfCard | WhatIfError | null> {
  const requestId = gate.next();
  session.setWhatIf(parameter, lambda);
  const pick = nearestScenario(recipes, parameter, lambda);
  try {
    const outputs = await api.scenarioOutputs(pick.id, session.activeBank);
    let topBars: { label: string; value: number }[] = [];
    try {
      const shap = await api.shap([], 1, 0);
      topBars = shap.data.global_ranking
        .slice(0, topK)
        .map((g) => ({ label: g.name, value: g.mean_abs_shap }));
    } catch (err) {
      // no trained ensemble (409) leaves the bars empty but keeps the card
      if (!(err instanceof ServiceError) || err.status !== 409) throw err;
    }
    if (!gate.isCurrent(requestId)) return null; // stale response dropped
    return {
      kind: "whatif",
      parameter,
      lambda,
      scenarioId: pick.id,
      exact: pick.exact,
      outputs: outputs.data,
      topBars,
    };
  } catch (err) {
    if (!gate.isCurrent(requestId)) return null;
    if (err instanceof ServiceError) {
      return { kind: "error", detail: err.detail, status: err.status };
    }
    return {
      kind: "error",
      detail: err instanceof Error ? err.message : String(err),
      status: 0,
    };
  }
}

export function renderWhatIfCard(card: WhatIfCard | WhatIfError): string {
  if (card.kind === "error") {
    return `<div class="card error"><p>${escapeHtml(card.detail)}</p></div>`;
  }
  const flag = card.exact
    ? ""
    : `<span class="flag">nearest match: ${escapeHtml(card.scenarioId)}</span>`;
  const bars = card.topBars.length ? barChart(card.topBars) : "";
  const series = card.outputs.years
    .map((y, i) => `<td data-year="${y}">${card.outputs.pur_co2[i].toFixed(2)}</td>`)
    .join("");
  return `<div class="card whatif">
  <h3>${escapeHtml(card.parameter)} × ${card.lambda}</h3>
  <p>Scenario ${escapeHtml(card.scenarioId)} ${flag}</p>
  <dl>
    <dt>Objective</dt><dd>${card.outputs.objective.toFixed(2)}</dd>
    <dt>Forest capacity total</dt><dd>${card.outputs.cap_fms_total.toFixed(2)}</dd>
    <dt>Agri capacity total</dt><dd>${card.outputs.cap_agri_total.toFixed(2)}</dd>
  </dl>
  <table class="series"><tr>${series}</tr></table>
  ${bars}
</div>`;
}
