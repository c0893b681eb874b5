/** Minimal DOM table: script editor, seat picker, action bar, event feed.
 * Rendering reads only the view model; input widgets are enabled exactly
 * when the server's legal set allows them. */

import { ActionSpec, GameClient, View } from "./client.js";
import { TableViewModel } from "./viewmodel.js";

interface UiRefs {
  script: HTMLTextAreaElement;
  createBtn: HTMLButtonElement;
  seatSelect: HTMLSelectElement;
  joinBtn: HTMLButtonElement;
  botsBtn: HTMLButtonElement;
  table: HTMLElement;
  actions: HTMLElement;
  feed: HTMLElement;
  statusLine: HTMLElement;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class TableUi {
  private vm = new TableViewModel();
  private client: GameClient;
  private refs: UiRefs;
  private sessionId: string | null = null;
  private seat = 1;
  private polling = false;
  private pendingDiscards = new Set<string>();

  constructor(baseUrl: string) {
    this.client = new GameClient(baseUrl);
    this.refs = {
      script: el("script-editor"),
      createBtn: el("create-btn"),
      seatSelect: el("seat-select"),
      joinBtn: el("join-btn"),
      botsBtn: el("bots-btn"),
      table: el("table"),
      actions: el("actions"),
      feed: el("feed"),
      statusLine: el("status-line"),
    };
    this.refs.createBtn.onclick = () => void this.create();
    this.refs.joinBtn.onclick = () => void this.join();
    this.refs.botsBtn.onclick = () => void this.fillBots();
  }

  private async create(): Promise<void> {
    this.vm.scriptDraft = this.refs.script.value;
    const info = await this.client.createSession(this.vm.scriptDraft);
    this.sessionId = info.session_id;
    this.refs.seatSelect.innerHTML = "";
    for (let p = 1; p <= info.players; p++) {
      const opt = document.createElement("option");
      opt.value = String(p);
      opt.textContent = `seat ${p}`;
      this.refs.seatSelect.appendChild(opt);
    }
    this.refs.statusLine.textContent = `session ${info.session_id} (${info.status})`;
  }

  private async join(): Promise<void> {
    if (!this.sessionId) return;
    this.seat = Number(this.refs.seatSelect.value || "1");
    const view = await this.client.join(this.sessionId, this.seat);
    this.adopt(view);
    void this.poll();
  }

  private async fillBots(): Promise<void> {
    if (!this.sessionId || !this.vm.view) return;
    const seats = this.vm.view.seats;
    let seed = 1;
    for (const [seatNo, kind] of Object.entries(seats)) {
      if (kind === "open") {
        await this.client.addBot(this.sessionId, Number(seatNo), seed++);
      }
    }
    this.adopt(await this.client.view(this.sessionId, this.seat));
  }

  private async poll(): Promise<void> {
    if (this.polling) return;
    this.polling = true;
    while (this.sessionId && this.vm.status !== "finished") {
      const since = this.vm.view?.step ?? 0;
      const view = await this.client.waitChange(this.sessionId, this.seat, since, 10);
      this.adopt(view);
    }
    this.polling = false;
  }

  private adopt(view: View): void {
    this.vm.applyView(view);
    this.render();
  }

  private async submit(action: ActionSpec): Promise<void> {
    if (!this.sessionId || !this.vm.isLegal(action)) return;
    const view = await this.client.act(this.sessionId, this.seat, action);
    this.pendingDiscards.clear();
    this.adopt(view);
  }

  private render(): void {
    const view = this.vm.view;
    if (!view) return;
    const s = view.state;
    this.refs.statusLine.textContent =
      `${view.status} | step ${view.step} | pot ${this.vm.potTotal()}` +
      (view.your_turn ? " | your turn" : "");

    const rows: string[] = [];
    for (const [player, stack] of Object.entries(s.stacks)) {
      const hole = (s.hole[player] ?? []).join(" ") || "-";
      const tags: string[] = [];
      if (Number(player) === s.button) tags.push("button");
      if (s.folded.includes(Number(player))) tags.push("folded");
      if (s.all_in.includes(Number(player))) tags.push("all in");
      if (s.current_actor === Number(player)) tags.push("to act");
      rows.push(
        `<tr><td>seat ${player}</td><td>${hole}</td><td>${stack}</td>` +
        `<td>${s.street_bets[player] ?? 0}</td><td>${tags.join(", ")}</td></tr>`,
      );
    }
    this.refs.table.innerHTML =
      `<p>community: ${s.community.join(" ") || "-"}</p>` +
      `<table><tr><th>seat</th><th>cards</th><th>stack</th><th>bet</th><th></th></tr>` +
      rows.join("") + `</table>`;

    this.renderActions();
    this.refs.feed.innerHTML = this.vm.events.slice(-20).map((e) => `<li>${e}</li>`).join("");
    const summary = this.vm.summary();
    if (summary.length) {
      this.refs.feed.innerHTML += summary.map((m) => `<li><b>${m}</b></li>`).join("");
    }
  }

  private renderActions(): void {
    const box = this.refs.actions;
    box.innerHTML = "";
    const kinds = this.vm.legalKinds();
    for (const kind of ["check", "call", "fold", "all_in"]) {
      const btn = document.createElement("button");
      btn.textContent = kind.replace("_", " ");
      btn.disabled = !kinds.has(kind);
      btn.onclick = () => void this.submit({ kind });
      box.appendChild(btn);
    }
    const bounds = this.vm.raiseBounds();
    if (bounds) {
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(bounds.min);
      slider.max = String(bounds.max);
      slider.value = String(bounds.min);
      const btn = document.createElement("button");
      btn.textContent = `raise ${slider.value}`;
      slider.oninput = () => (btn.textContent = `raise ${slider.value}`);
      btn.onclick = () => void this.submit({ kind: "raise", amount: Number(slider.value) });
      box.appendChild(slider);
      box.appendChild(btn);
    }
    const maxDiscards = this.vm.maxDiscards();
    if (kinds.has("discard")) {
      for (const card of this.vm.myHole()) {
        const toggle = document.createElement("button");
        const mark = () => {
          toggle.textContent = (this.pendingDiscards.has(card) ? "[x] " : "[ ] ") + card;
        };
        mark();
        toggle.onclick = () => {
          if (this.pendingDiscards.has(card)) {
            this.pendingDiscards.delete(card);
          } else if (this.pendingDiscards.size < maxDiscards) {
            this.pendingDiscards.add(card);
          }
          mark();
        };
        box.appendChild(toggle);
      }
      const btn = document.createElement("button");
      btn.textContent = "discard selected";
      btn.onclick = () =>
        void this.submit({ kind: "discard", cards: [...this.pendingDiscards].sort() });
      box.appendChild(btn);
    }
  }
}

export function mount(baseUrl = ""): TableUi {
  return new TableUi(baseUrl);
}
