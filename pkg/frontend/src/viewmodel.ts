/** Client-side table model: holds the latest redacted view, gates inputs by
 * the server's legal-action set, and refuses to ever display a card the
 * server did not show this seat. There is no game logic here; the engine is
 * the single source of truth. */

import { ActionSpec, StateTree, View } from "./client.js";

export const HIDDEN = "?";

export class InformationLeak extends Error {}

/** Cards this seat is allowed to see: its own hole and discards, plus the
 * community board. Everything else must arrive as the hidden placeholder. */
export function visibleCards(state: StateTree, seat: number): Set<string> {
  const seen = new Set<string>();
  for (const c of state.hole[String(seat)] ?? []) seen.add(c);
  for (const c of state.discards[String(seat)] ?? []) seen.add(c);
  for (const c of state.community) seen.add(c);
  return seen;
}

/** Throws when a view carries information this seat must not see. */
export function assertNoLeak(view: View): void {
  const state = view.state;
  if (state.deck.length > 0) {
    throw new InformationLeak("deck visible in a player view");
  }
  const mine = String(view.seat);
  for (const [player, cards] of Object.entries(state.hole)) {
    if (player === mine) continue;
    for (const c of cards) {
      if (c !== HIDDEN) {
        throw new InformationLeak(`seat ${view.seat} can see ${c} in hole of ${player}`);
      }
    }
  }
  for (const [player, cards] of Object.entries(state.discards)) {
    if (player === mine) continue;
    for (const c of cards) {
      if (c !== HIDDEN) {
        throw new InformationLeak(`seat ${view.seat} can see ${c} in discards of ${player}`);
      }
    }
  }
}

export interface RaiseBounds {
  min: number;
  max: number;
}

export class TableViewModel {
  view: View | null = null;
  /** Message feed accumulated across views (messages are per-step). */
  events: string[] = [];
  scriptDraft = "";
  private lastStep = -1;

  /** Leak-check and adopt a fresh view. Returns true when it was new. */
  applyView(view: View): boolean {
    assertNoLeak(view);
    if (view.step === this.lastStep && this.view !== null) {
      return false;
    }
    this.view = view;
    this.lastStep = view.step;
    for (const m of view.state.messages) {
      this.events.push(`#${view.step} ${m}`);
    }
    return true;
  }

  get status(): string {
    return this.view?.status ?? "disconnected";
  }

  get yourTurn(): boolean {
    return this.view?.your_turn ?? false;
  }

  /** Action kinds the UI may enable right now. */
  legalKinds(): Set<string> {
    return new Set((this.view?.legal ?? []).map((a) => a.kind));
  }

  /** Slider bounds derived from the legal raise amounts (already clamped to
   * the game's bet limits and the seat's stack by the server). */
  raiseBounds(): RaiseBounds | null {
    const amounts = (this.view?.legal ?? [])
      .filter((a) => a.kind === "raise" && a.amount !== undefined)
      .map((a) => a.amount as number);
    if (amounts.length === 0) return null;
    return { min: Math.min(...amounts), max: Math.max(...amounts) };
  }

  /** Largest discard set the server will accept this turn. */
  maxDiscards(): number {
    let max = 0;
    for (const a of this.view?.legal ?? []) {
      if (a.kind === "discard" && a.cards && a.cards.length > max) {
        max = a.cards.length;
      }
    }
    return max;
  }

  /** Whether a concrete action is inside the server's legal set. */
  isLegal(action: ActionSpec): boolean {
    const key = (a: ActionSpec) =>
      `${a.kind}|${a.amount ?? ""}|${[...(a.cards ?? [])].sort().join(",")}`;
    const want = key(action);
    return (this.view?.legal ?? []).some((a) => key(a) === want);
  }

  myHole(): string[] {
    if (!this.view) return [];
    return this.view.state.hole[String(this.view.seat)] ?? [];
  }

  potTotal(): number {
    return (this.view?.state.pots ?? []).reduce((n, p) => n + p.amount, 0);
  }

  /** End-of-round summary: the prize announcements of the final step. */
  summary(): string[] {
    if (this.status !== "finished" || !this.view) return [];
    return this.view.state.messages.filter((m) => m.includes("wins"));
  }
}
