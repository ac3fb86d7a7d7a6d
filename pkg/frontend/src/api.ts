/** Thin typed client over the documented JSON endpoints.
 *
 * The fetch function is injectable so tests can intercept every request;
 * the UI never computes model quantities itself — it only relays what the
 * service returns.
 */

import {
  AskPayload,
  ClustersPayload,
  Envelope,
  PredictPayload,
  ScenarioOutputsPayload,
  ScenariosPayload,
  ServiceError,
  ShapPayload,
  UiConfig,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiClient {
  constructor(
    private readonly config: UiConfig,
    private readonly fetchFn: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async unwrap<T>(resp: {
    ok: boolean;
    status: number;
    json(): Promise<unknown>;
  }): Promise<Envelope<T>> {
    let doc: unknown;
    try {
      doc = await resp.json();
    } catch {
      throw new ServiceError(resp.status, "malformed response body");
    }
    if (!resp.ok) {
      const detail =
        typeof doc === "object" && doc !== null && "detail" in doc
          ? String((doc as { detail: unknown }).detail)
          : "request failed";
      throw new ServiceError(resp.status, detail);
    }
    const env = doc as Envelope<T>;
    if (
      typeof env !== "object" ||
      env === null ||
      env.status !== "ok" ||
      env.data === undefined
    ) {
      throw new ServiceError(resp.status, "malformed service envelope");
    }
    return env;
  }

  private async get<T>(path: string, params: Record<string, string>) {
    const qs = new URLSearchParams(params).toString();
    const url = `${this.config.baseUrl}${path}${qs ? `?${qs}` : ""}`;
    return this.unwrap<T>(await this.fetchFn(url));
  }

  private async post<T>(path: string, body: unknown) {
    const resp = await this.fetchFn(`${this.config.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.unwrap<T>(resp);
  }

  scenarios(bank: string): Promise<Envelope<ScenariosPayload>> {
    return this.get("/scenarios", { bank });
  }

  scenarioOutputs(
    id: string,
    bank: string,
  ): Promise<Envelope<ScenarioOutputsPayload>> {
    return this.get(`/scenarios/${id}/outputs`, { bank });
  }

  clusters(
    space: string,
    bank: string,
    t: number,
  ): Promise<Envelope<ClustersPayload>> {
    return this.get("/clusters", { space, bank, t: String(t) });
  }

  predict(rows: number[][]): Promise<Envelope<PredictPayload>> {
    return this.post("/predict", { rows });
  }

  shap(
    rows: number[][],
    nSamples: number,
    seed: number,
  ): Promise<Envelope<ShapPayload>> {
    return this.post("/shap", { rows, n_samples: nSamples, seed });
  }

  ask(question: string, bank: string): Promise<Envelope<AskPayload>> {
    return this.post("/ask", { question, bank, stub: this.config.stub });
  }
}
