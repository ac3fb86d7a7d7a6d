/** Ask panel: POST /ask and render a grounded answer card. */

import { ApiClient } from "../api.js";
import { SessionView } from "../state.js";
import { AskPayload, Recipe, ServiceError } from "../types.js";
import { escapeHtml } from "../render.js";

export interface AnswerCard {
  kind: "answer";
  question: string;
  parameter: string;
  multiplierLabel: string;
  direction: string;
  matchedIds: string[];
  nearest: boolean;
  clusterId: number;
  clusterSize: number;
  intraRho: number;
  narrative: string;
  promptHash: string;
  clientId: string;
}

export interface ErrorCard {
  kind: "error";
  question: string;
  status: number;
  detail: string;
  /** parameter names the service understands, shown on 422 */
  vocabulary: string[];
  retryable: boolean;
}

export type AskCard = AnswerCard | ErrorCard;

/** Every multiplier key appearing in the bank's recipes. */
export function parameterVocabulary(recipes: Recipe[]): string[] {
  const names = new Set<string>();
  for (const r of recipes) {
    for (const key of Object.keys(r.multipliers)) names.add(key);
  }
  return [...names].sort();
}

export function cardFromPayload(
  question: string,
  payload: AskPayload,
  provenance: Record<string, unknown>,
): AnswerCard {
  const m = payload.parsed.multiplier;
  return {
    kind: "answer",
    question,
    parameter: payload.parsed.parameter,
    multiplierLabel: m === null ? payload.parsed.direction : `×${m}`,
    direction: payload.parsed.direction,
    matchedIds: [...payload.matched_ids],
    nearest: payload.nearest,
    clusterId: payload.grounding.cluster_id,
    clusterSize: payload.grounding.cluster_size,
    intraRho: payload.grounding.intra_rho,
    narrative: payload.narrative,
    promptHash: String(provenance["prompt_hash"] ?? ""),
    clientId: String(provenance["client_id"] ?? ""),
  };
}

export async function askPanel(
  question: string,
  api: ApiClient,
  session: SessionView,
  vocabulary: string[] = [],
): Promise<AskCard> {
  try {
    const env = await api.ask(question, session.activeBank);
    const card = cardFromPayload(question, env.data, env.provenance);
    session.append({
      question,
      payload: env.data,
      provenance: env.provenance,
    });
    return card;
  } catch (err) {
    // a failure still yields a rendered card, never a blank panel
    if (err instanceof ServiceError) {
      return {
        kind: "error",
        question,
        status: err.status,
        detail: err.detail,
        vocabulary: err.status === 422 ? vocabulary : [],
        retryable: err.status !== 422,
      };
    }
    return {
      kind: "error",
      question,
      status: 0,
      detail: err instanceof Error ? err.message : String(err),
      vocabulary: [],
      retryable: true,
    };
  }
}

export function renderAskCard(card: AskCard): string {
  if (card.kind === "error") {
    const vocab = card.vocabulary.length
      ? `<p class="vocab">Known parameters: ${card.vocabulary
          .map(escapeHtml)
          .join(", ")}</p>`
      : "";
    const retry = card.retryable
      ? `<button class="retry" data-question="${escapeHtml(card.question)}">Retry</button>`
      : "";
    return `<div class="card error">
  <h3>Could not answer</h3>
  <p>${escapeHtml(card.detail)}</p>
  ${vocab}${retry}
</div>`;
  }
  const chips = card.matchedIds
    .map((id) => `<span class="chip">${escapeHtml(id)}</span>`)
    .join("");
  const nearest = card.nearest ? `<span class="flag">nearest match</span>` : "";
  return `<div class="card answer">
  <h3>${escapeHtml(card.question)}</h3>
  <p class="parsed">${escapeHtml(card.parameter)}, ${escapeHtml(card.multiplierLabel)} (${escapeHtml(card.direction)})</p>
  <div class="chips">${chips}${nearest}</div>
  <p class="cluster">Cluster #${card.clusterId}: ${card.clusterSize} scenarios, mean ρ = ${card.intraRho.toFixed(3)}</p>
  <blockquote class="narrative">${escapeHtml(card.narrative)}</blockquote>
  <footer class="provenance">client=${escapeHtml(card.clientId)} prompt=${escapeHtml(card.promptHash.slice(0, 16))}</footer>
</div>`;
}
