// Decision lineage browser: ordered split path, feature vector, version,
// inclusion-proof indices, and an export that is byte-identical to the
// CLI's per-decision report.

import { ApiError, GatewayClient } from "../api.js";
import { clear, el } from "../dom.js";

export class AuditView {
  lastExport = "";

  constructor(
    private client: GatewayClient,
    readonly root: HTMLElement,
  ) {
    this.render(null, "");
  }

  async open(decisionId: string): Promise<void> {
    try {
      const view = await this.client.decision(decisionId);
      this.render(view, "");
    } catch (error) {
      const message =
        error instanceof ApiError
          ? error.code === "policy-denied"
            ? `permission denied: ${error.message}`
            : `${error.code}: ${error.message}`
          : String(error);
      this.render(null, message);
    }
  }

  private render(view: Awaited<ReturnType<GatewayClient["decision"]>> | null, problem: string): void {
    clear(this.root);
    const input = el("input", { type: "text", placeholder: "decision reference", "data-testid": "audit-input" });
    const button = el("button", { "data-testid": "audit-open" }, ["Open"]);
    button.addEventListener("click", () => void this.open((input as HTMLInputElement).value.trim()));
    this.root.append(el("div", { class: "audit-controls" }, [input, button]));
    if (problem) {
      this.root.append(el("div", { class: "audit-error", "data-testid": "audit-error" }, [problem]));
      return;
    }
    if (!view) return;
    const { decision, inclusion_proof } = view;
    this.root.append(
      el("h2", {}, [`Decision ${decision.decision_id}`]),
      el("div", { "data-testid": "audit-outcome" }, [
        `outcome: ${decision.outcome} · model version ${decision.model_version}`,
      ]),
      el("div", { class: "proof", "data-testid": "audit-proof" }, [
        `ledger inclusion indices: ${inclusion_proof.join(", ")}`,
      ]),
    );
    const path = el("ol", { class: "decision-path", "data-testid": "decision-path" });
    for (const step of decision.decision_path) {
      path.append(
        el("li", {}, [`${step.feature} ${step.comparator} ${String(step.threshold)} → ${step.branch}`]),
      );
    }
    this.root.append(path);
    const vector = el("table", { class: "feature-vector" }, [
      el("tr", {}, [el("th", {}, ["feature"]), el("th", {}, ["value"])]),
    ]);
    for (const [feature, value] of Object.entries(decision.feature_vector)) {
      vector.append(el("tr", {}, [el("td", {}, [feature]), el("td", {}, [String(value)])]));
    }
    this.root.append(vector, el("p", { class: "explanation" }, [decision.explanation_text]));

    const exportButton = el("button", { "data-testid": "audit-export" }, ["Export audit report"]);
    exportButton.addEventListener("click", () => {
      void this.client.exportDecision(decision.decision_id, "json").then((payload) => {
        this.lastExport = payload;
        try {
          const blob = new Blob([payload], { type: "application/json" });
          const link = el("a", {
            href: URL.createObjectURL(blob),
            download: `audit-${decision.decision_id}.json`,
          });
          link.click();
        } catch {
          // headless DOM without object URLs: the payload is still captured
        }
      });
    });
    this.root.append(exportButton);
  }
}
