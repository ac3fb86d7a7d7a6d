/** Browser wiring: mounts the three panels and the session replay button.
 *
 * Configuration comes from config.json next to index.html: the service
 * base URL and whether narration should use the offline stub.
 */

import { ApiClient } from "./api.js";
import { RequestGate, SessionView, debounce } from "./state.js";
import {
  askPanel,
  parameterVocabulary,
  renderAskCard,
} from "./panels/ask.js";
import { renderWhatIfCard, whatIfPanel } from "./panels/whatif.js";
import { clusterPanel, renderClusterCard } from "./panels/cluster.js";
import { replaySession } from "./replay.js";
import { Recipe, UiConfig } from "./types.js";

async function boot(): Promise<void> {
  const config = (await (await fetch("./config.json")).json()) as UiConfig;
  const api = new ApiClient(config);
  const session = new SessionView();
  const whatIfGate = new RequestGate();

  const askRoot = document.getElementById("ask-panel")!;
  const whatIfRoot = document.getElementById("whatif-panel")!;
  const clusterRoot = document.getElementById("cluster-panel")!;

  let recipes: Recipe[] = [];
  try {
    recipes = (await api.scenarios(session.activeBank)).data.recipes;
  } catch {
    askRoot.innerHTML =
      '<div class="card error"><p>Service unreachable; check config.json.</p></div>';
  }
  const vocabulary = parameterVocabulary(recipes);

  const form = document.getElementById("ask-form") as HTMLFormElement;
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const input = document.getElementById("ask-input") as HTMLInputElement;
    const card = await askPanel(input.value, api, session, vocabulary);
    askRoot.insertAdjacentHTML("afterbegin", renderAskCard(card));
  });
  askRoot.addEventListener("click", async (ev) => {
    const target = ev.target as HTMLElement;
    if (target.matches("button.retry")) {
      const q = target.dataset["question"] ?? "";
      const card = await askPanel(q, api, session, vocabulary);
      askRoot.insertAdjacentHTML("afterbegin", renderAskCard(card));
    }
  });

  const slider = document.getElementById("whatif-slider") as HTMLInputElement;
  const paramSelect = document.getElementById(
    "whatif-parameter",
  ) as HTMLSelectElement;
  paramSelect.innerHTML = vocabulary
    .map((v) => `<option value="${v}">${v}</option>`)
    .join("");
  const refreshWhatIf = debounce(async () => {
    const card = await whatIfPanel(
      paramSelect.value,
      Number(slider.value),
      recipes,
      api,
      session,
      whatIfGate,
    );
    if (card !== null) whatIfRoot.innerHTML = renderWhatIfCard(card);
  }, 200);
  slider.addEventListener("input", refreshWhatIf);
  paramSelect.addEventListener("change", refreshWhatIf);

  const cutSlider = document.getElementById("cluster-cut") as HTMLInputElement;
  const spaceSelect = document.getElementById(
    "cluster-space",
  ) as HTMLSelectElement;
  const refreshClusters = debounce(async () => {
    const card = await clusterPanel(
      spaceSelect.value,
      Number(cutSlider.value),
      api,
      session,
    );
    clusterRoot.innerHTML = renderClusterCard(card);
  }, 200);
  cutSlider.addEventListener("input", refreshClusters);
  spaceSelect.addEventListener("change", refreshClusters);
  refreshClusters();

  document
    .getElementById("replay-button")!
    .addEventListener("click", async () => {
      const result = await replaySession(session, api);
      document.getElementById("replay-status")!.textContent =
        `replayed ${result.reproduced}/${result.total} cards` +
        (result.mismatches.length ? " (mismatches!)" : "");
    });
}

document.addEventListener("DOMContentLoaded", () => {
  void boot();
});
