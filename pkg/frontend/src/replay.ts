/** Session replay: re-ask every history question and compare the cards. */

import { ApiClient } from "./api.js";
import { SessionView } from "./state.js";
import { AnswerCard, cardFromPayload, renderAskCard } from "./panels/ask.js";

export interface ReplayResult {
  total: number;
  reproduced: number;
  mismatches: { question: string; expected: string; got: string }[];
}

export async function replaySession(
  session: SessionView,
  api: ApiClient,
): Promise<ReplayResult> {
  const result: ReplayResult = { total: 0, reproduced: 0, mismatches: [] };
  for (const entry of session.history) {
    result.total += 1;
    const expectedCard: AnswerCard = cardFromPayload(
      entry.question,
      entry.payload,
      entry.provenance,
    );
    const env = await api.ask(entry.question, session.activeBank);
    const gotCard = cardFromPayload(entry.question, env.data, env.provenance);
    const expected = renderAskCard(expectedCard);
    const got = renderAskCard(gotCard);
    if (expected === got) {
      result.reproduced += 1;
    } else {
      result.mismatches.push({ question: entry.question, expected, got });
    }
  }
  return result;
}
