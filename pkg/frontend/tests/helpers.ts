/** Shared fixtures: a fake service speaking the envelope schema. */

import { FetchLike } from "../src/api.js";
import { AskPayload, ClustersPayload, Envelope } from "../src/types.js";

export const RECIPES = [
  { id: "S03", multipliers: { CO2price: 0.8 } },
  { id: "S04", multipliers: { CO2price: 1.2, BeechArea0: 1.2 } },
  { id: "S05", multipliers: { CO2price: 1.2, FMsgrowth: 1.2, BeechArea0: 0.8 } },
  { id: "S06", multipliers: { CO2price: 1.2, FMsgrowth: 1.2, BeechArea0: 1.2 } },
  { id: "S09", multipliers: {} },
];

export const ASK_PAYLOAD: AskPayload = {
  parsed: {
    parameter: "CO2price",
    multiplier: 1.2,
    direction: "increase",
    raw: "What happens if CO2 price increases by 20%?",
  },
  matched_ids: ["S04", "S05", "S06"],
  nearest: false,
  grounding: {
    cluster_id: 1,
    cluster_size: 26,
    intra_rho: 0.999,
    representative_recipes: { S04: { CO2price: 1.2 } },
  },
  prompt: "You are a sustainability analyst ...",
  narrative: "[stub narrative abc123] Cluster evidence suggests ...",
};

export const ASK_PROVENANCE = {
  prompt_hash: "abc123def456abc123def456",
  client_id: "stub",
  matched_ids: ["S04", "S05", "S06"],
  cluster_id: 1,
  seed: 7,
};

/** Two tight pairs far apart, merged last: heights 0.1, 0.2, 1.5. */
export const CLUSTERS_PAYLOAD: ClustersPayload = {
  ids: ["S01", "S02", "S03", "S04"],
  rho: [
    [1.0, 0.9, 0.1, 0.1],
    [0.9, 1.0, 0.1, 0.1],
    [0.1, 0.1, 1.0, 0.8],
    [0.1, 0.1, 0.8, 1.0],
  ],
  linkage: [
    [0, 1, 0.1, 2],
    [2, 3, 0.2, 2],
    [4, 5, 1.5, 4],
  ],
  labels: [1, 1, 1, 1],
  threshold: 2.0,
  most_similar: ["S01", "S02", 0.9],
  least_similar: ["S01", "S03", 0.1],
};

export const BASELINE_OUTPUTS = {
  id: "S09",
  objective: 23456.78,
  co2_gap_rewt: 0.0,
  pur_co2: [1.92, 11.74, 21.5],
  total_abatement_fms: 2373.2,
  total_abatement_agri: 737202.9,
  cap_fms_total: 812.5,
  cap_agri_total: 930.25,
  years: [2025, 2026, 2027],
};

function envelope<T>(data: T, provenance: Record<string, unknown>): Envelope<T> {
  return { status: "ok", data, provenance, schema_version: 1 };
}

function ok(body: unknown) {
  return Promise.resolve({
    ok: true,
    status: 200,
    json: () => Promise.resolve(body),
  });
}

function fail(status: number, detail: string) {
  return Promise.resolve({
    ok: false,
    status,
    json: () => Promise.resolve({ detail }),
  });
}

export interface FakeServiceOptions {
  /** per-endpoint override hooks keyed by pathname */
  overrides?: Record<string, (url: string, init?: unknown) => Promise<unknown>>;
  log?: { url: string; body?: unknown }[];
}

/** A FetchLike that answers like the real service (stub narration). */
export function fakeService(opts: FakeServiceOptions = {}): FetchLike {
  return (url, init) => {
    const u = new URL(url);
    opts.log?.push({
      url,
      body: init?.body !== undefined ? JSON.parse(init.body) : undefined,
    });
    const override = Object.entries(opts.overrides ?? {}).find(([p]) =>
      u.pathname.startsWith(p),
    );
    if (override) {
      return override[1](url, init) as ReturnType<FetchLike>;
    }
    if (u.pathname === "/scenarios") {
      return ok(envelope({ bank: "fm", seed: 7, recipes: RECIPES }, { seed: 7 }));
    }
    if (/^\/scenarios\/S\d+\/outputs$/.test(u.pathname)) {
      const id = u.pathname.split("/")[2];
      if (!RECIPES.some((r) => r.id === id)) {
        return fail(404, `unknown scenario '${id}'`);
      }
      return ok(envelope({ ...BASELINE_OUTPUTS, id }, { scenario: id }));
    }
    if (u.pathname === "/clusters") {
      if (!["input", "output"].includes(u.searchParams.get("space") ?? "")) {
        return fail(422, "space must be 'input' or 'output'");
      }
      return ok(envelope(CLUSTERS_PAYLOAD, { space: u.searchParams.get("space") }));
    }
    if (u.pathname === "/ask") {
      const body = JSON.parse((init as { body: string }).body) as {
        question: string;
      };
      if (!/co2|price|cost|growth/i.test(body.question)) {
        return fail(422, `unrecognized query: ${body.question}`);
      }
      return ok(envelope(ASK_PAYLOAD, ASK_PROVENANCE));
    }
    if (u.pathname === "/predict" || u.pathname === "/shap") {
      return fail(409, "no trained ensemble loaded");
    }
    return fail(404, `no route ${u.pathname}`);
  };
}
