/** Cluster panel: dendrogram + correlation heatmap at a draggable cut. */

import { ApiClient } from "../api.js";
import { SessionView } from "../state.js";
import { ClustersPayload, ServiceError } from "../types.js";
import { dendrogram, escapeHtml, heatmap } from "../render.js";

export interface ClusterCard {
  kind: "clusters";
  space: string;
  t: number;
  payload: ClustersPayload;
  nClusters: number;
  largestCluster: number;
}

export interface ClusterError {
  kind: "error";
  detail: string;
  status: number;
}

export async function clusterPanel(
  space: string,
  t: number,
  api: ApiClient,
  session: SessionView,
): Promise<ClusterCard | ClusterError> {
  try {
    const env = await api.clusters(space, session.activeBank, t);
    const labels = env.data.labels;
    const counts = new Map<number, number>();
    for (const l of labels) counts.set(l, (counts.get(l) ?? 0) + 1);
    return {
      kind: "clusters",
      space,
      t,
      payload: env.data,
      nClusters: counts.size,
      largestCluster: Math.max(...counts.values()),
    };
  } catch (err) {
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

export function renderClusterCard(card: ClusterCard | ClusterError): string {
  if (card.kind === "error") {
    return `<div class="card error"><p>${escapeHtml(card.detail)}</p></div>`;
  }
  const p = card.payload;
  const [ma, mb, mr] = p.most_similar;
  const [la, lb, lr] = p.least_similar;
  return `<div class="card clusters">
  <h3>${escapeHtml(card.space)} space, cut t = ${card.t}</h3>
  <p>${card.nClusters} cluster(s); largest has ${card.largestCluster} scenarios</p>
  <p class="extremes">
    most similar: <span class="pair">${escapeHtml(ma)} ~ ${escapeHtml(mb)}</span> (ρ=${mr.toFixed(3)});
    least similar: <span class="pair">${escapeHtml(la)} ~ ${escapeHtml(lb)}</span> (ρ=${lr.toFixed(3)})
  </p>
  ${dendrogram(p.linkage, p.ids.length, p.ids, card.t)}
  ${heatmap(p.ids, p.rho)}
</div>`;
}
