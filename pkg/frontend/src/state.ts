/** Session state: append-only query history plus what-if and bank context. */

import { AskPayload } from "./types.js";

export interface HistoryEntry {
  question: string;
  /** full service payload, including the provenance-linked narrative */
  payload: AskPayload;
  provenance: Record<string, unknown>;
}

export interface WhatIfState {
  parameter: string;
  multiplier: number;
}

export class SessionView {
  private readonly entries: HistoryEntry[] = [];
  activeBank: "fm" | "agri" = "fm";
  whatIf: WhatIfState = { parameter: "CO2price", multiplier: 1.0 };
  private listeners: (() => void)[] = [];

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  append(entry: HistoryEntry): void {
    this.entries.push(entry); // append-only: no mutation or removal API
    this.emit();
  }

  setBank(bank: "fm" | "agri"): void {
    this.activeBank = bank;
    this.emit();
  }

  setWhatIf(parameter: string, multiplier: number): void {
    this.whatIf = { parameter, multiplier };
    this.emit();
  }

  subscribe(fn: () => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((f) => f !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }
}

/** Monotonic request ids so stale responses are never rendered as fresh. */
export class RequestGate {
  private latest = 0;

  next(): number {
    return ++this.latest;
  }

  isCurrent(id: number): boolean {
    return id === this.latest;
  }
}

/** Debounce helper for slider-driven panels (one in-flight per panel). */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}
