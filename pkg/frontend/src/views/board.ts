// Dashboard: KPI targets, ticket board, model catalogue, watchlist, ledger
// browser with chain-validity indicator. Everything rendered here comes
// straight from gateway endpoints; the console computes nothing authoritative.

import { ApiError, GatewayClient, ModelView, TicketView } from "../api.js";
import { clear, el } from "../dom.js";

const TICKET_COLUMNS = ["open", "in-progress", "awaiting-approval", "approved", "done", "rejected"];

export class BoardView {
  constructor(
    private client: GatewayClient,
    readonly root: HTMLElement,
    private notify: (text: string) => void,
  ) {}

  async refresh(): Promise<void> {
    clear(this.root);
    const [tickets, models, watchlist, bindings, verdict] = await Promise.all([
      this.client.tickets(),
      this.client.models(),
      this.client.watchlist(),
      this.client.bindings().catch(() => null),
      this.client.verifyLedger().catch(() => null),
    ]);
    this.root.append(this.renderBindings(bindings));
    this.root.append(this.renderTickets(tickets));
    this.root.append(this.renderModels(models));
    this.root.append(this.renderWatchlist(watchlist.active));
    await this.renderLedger(verdict);
  }

  private renderBindings(
    bindings: { bindings: Array<Record<string, unknown>>; effective_weights: Record<string, number> } | null,
  ): HTMLElement {
    const section = el("section", { class: "kpi", "data-testid": "kpi-board" }, [el("h2", {}, ["KPI targets"])]);
    if (!bindings) {
      section.append(el("p", {}, ["not visible for this role"]));
      return section;
    }
    const table = el("table", {}, [
      el("tr", {}, [el("th", {}, ["kpi"]), el("th", {}, ["raw weight"]), el("th", {}, ["effective"])]),
    ]);
    for (const binding of bindings.bindings) {
      const id = String(binding.binding_id);
      table.append(
        el("tr", {}, [
          el("td", {}, [String(binding.kpi)]),
          el("td", {}, [String(binding.weight)]),
          el("td", {}, [(bindings.effective_weights[id] ?? 0).toFixed(2)]),
        ]),
      );
    }
    section.append(table);
    return section;
  }

  private renderTickets(tickets: TicketView[]): HTMLElement {
    const section = el("section", { class: "tickets", "data-testid": "ticket-board" }, [el("h2", {}, ["Tickets"])]);
    const board = el("div", { class: "columns" });
    for (const column of TICKET_COLUMNS) {
      const cell = el("div", { class: "column", "data-state": column }, [el("h3", {}, [column])]);
      for (const ticket of tickets.filter((t) => t.state === column)) {
        const card = el("div", { class: "ticket-card", "data-testid": `ticket-${ticket.ticket_id}` }, [
          el("strong", {}, [ticket.ticket_id]),
          el("div", {}, [ticket.subject]),
          el("div", { class: "ticket-state" }, [ticket.state]),
        ]);
        if (
          ticket.kind === "deployment" &&
          ticket.state === "awaiting-approval" &&
          this.client.role === "business-manager"
        ) {
          // Action buttons submit through the same governed endpoints the
          // typed dialogue uses.
          const approve = el("button", { class: "approve", "data-testid": `approve-${ticket.ticket_id}` }, ["Approve"]);
          approve.addEventListener("click", () => void this.decide(ticket.ticket_id, "approved"));
          const reject = el("button", { class: "reject", "data-testid": `reject-${ticket.ticket_id}` }, ["Reject"]);
          reject.addEventListener("click", () => void this.decide(ticket.ticket_id, "rejected"));
          card.append(approve, reject);
        }
        cell.append(card);
      }
      board.append(cell);
    }
    section.append(board);
    return section;
  }

  private async decide(ticketId: string, state: string): Promise<void> {
    try {
      const ticket = await this.client.transitionTicket(ticketId, state);
      // An approval runs through to deployment, adding several history
      // entries at once; surface the notes from this transition, not just
      // the final one.
      const notes = ticket.history
        .map((entry) => entry.note)
        .filter(Boolean)
        .slice(-2)
        .join(" · ");
      this.notify(`ticket ${ticketId} → ${ticket.state}: ${notes}`);
    } catch (error) {
      this.notify(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
    }
    await this.refresh();
  }

  private renderModels(models: ModelView[]): HTMLElement {
    const section = el("section", { class: "models", "data-testid": "model-catalog" }, [el("h2", {}, ["Model catalogue"])]);
    for (const model of models) {
      section.append(
        el("div", { class: "model-row" }, [
          el("span", { class: "version" }, [`${model.tool_id} ${model.version}`]),
          el("span", { class: `badge badge-${model.status}`, "data-testid": `badge-${model.version}` }, [model.status]),
          el("span", { class: "features" }, [model.feature_list.join(", ")]),
        ]),
      );
    }
    return section;
  }

  private renderWatchlist(active: string[]): HTMLElement {
    const section = el("section", { class: "watchlist", "data-testid": "watchlist" }, [
      el("h2", {}, ["Sensitive-attribute watchlist"]),
      el("div", {}, [active.join(", ")]),
    ]);
    if (this.client.role === "value-ethics-manager") {
      const input = el("input", { type: "text", placeholder: "attribute", "data-testid": "flag-input" });
      const reason = el("input", { type: "text", placeholder: "reason", "data-testid": "flag-reason" });
      const button = el("button", { "data-testid": "flag-submit" }, ["Flag as sensitive"]);
      button.addEventListener("click", () => {
        void this.client
          .flagAttribute((input as HTMLInputElement).value, (reason as HTMLInputElement).value)
          .then(() => this.refresh())
          .catch((error) => this.notify(error instanceof ApiError ? error.message : String(error)));
      });
      section.append(el("div", { class: "flag-form" }, [input, reason, button]));
    }
    return section;
  }

  private async renderLedger(verdict: { chain: { valid: boolean }; head: { valid: boolean } } | null): Promise<void> {
    const section = el("section", { class: "ledger", "data-testid": "ledger-browser" }, [el("h2", {}, ["Ledger"])]);
    if (verdict) {
      const healthy = verdict.chain.valid && verdict.head.valid;
      section.append(
        el("div", { class: `chain ${healthy ? "chain-valid" : "chain-broken"}`, "data-testid": "chain-indicator" }, [
          healthy ? "chain valid" : "CHAIN INVALID",
        ]),
      );
    }
    try {
      const entries = await this.client.ledgerEntries(0);
      const tail = entries.slice(-15);
      const list = el("table", {}, [
        el("tr", {}, [el("th", {}, ["#"]), el("th", {}, ["kind"]), el("th", {}, ["timestamp"])]),
      ]);
      for (const entry of tail) {
        list.append(
          el("tr", {}, [
            el("td", {}, [String(entry.index)]),
            el("td", {}, [String(entry.kind)]),
            el("td", {}, [String(entry.timestamp)]),
          ]),
        );
      }
      section.append(list);
    } catch {
      section.append(el("p", {}, ["ledger browsing not permitted for this role"]));
    }
    this.root.append(section);
  }
}
