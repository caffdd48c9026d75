// Gateway client. Every mutation goes through the documented HTTP endpoints,
// every outgoing request is recorded (tests assert both properties), and
// role guards stop a session from even issuing a request its role may not
// make; the server enforces policy anyway, the guard keeps the client honest.

import { getConfig } from "./config.js";

export interface TaskView {
  task_id: string;
  state: string;
  client_agent: string;
  server_agent: string;
  messages: Array<{ role: string; parts: Array<Record<string, unknown>>; timestamp: string }>;
  artifacts: Array<{ artifact_id: string; parts: Array<Record<string, unknown>> }>;
  metadata: Record<string, unknown>;
}

export interface TicketView {
  ticket_id: string;
  kind: string;
  state: string;
  subject: string;
  body: string;
  assigned_role: string;
  history: Array<{ state: string; actor: string; timestamp: string; note: string }>;
}

export interface ModelView {
  tool_id: string;
  version: string;
  status: string;
  feature_list: string[];
  validation_metrics: Record<string, number>;
}

export interface DecisionView {
  decision: {
    decision_id: string;
    outcome: string;
    model_version: string;
    feature_vector: Record<string, unknown>;
    decision_path: Array<{ feature: string; comparator: string; threshold: unknown; branch: string }>;
    explanation_text: string;
  };
  inclusion_proof: number[];
}

export interface RequestRecord {
  method: string;
  path: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

// Endpoints a role's session must never call, mutating or not; the duty
// matrix is enforced server-side; this guard keeps the client from even
// issuing such a request.
interface DenyRule {
  pattern: RegExp;
  methods: "*" | string[];
}

const ROLE_DENYLIST: Record<string, DenyRule[]> = {
  customer: [
    { pattern: /^\/tickets\/[^/]+\/transition$/, methods: "*" },
    { pattern: /^\/catalog\/(kpi-bindings|models|watchlist|objectives)$/, methods: ["POST"] },
    { pattern: /^\/loan-engine/, methods: "*" },
    { pattern: /^\/ledger\/entries/, methods: "*" }, // full ledger browsing is not a customer surface
    { pattern: /^\/tools\/register$/, methods: "*" },
  ],
  "business-manager": [{ pattern: /^\/catalog\/watchlist$/, methods: ["POST"] }],
  "data-scientist": [{ pattern: /^\/catalog\/watchlist$/, methods: ["POST"] }],
};

export class GatewayClient {
  readonly requestLog: RequestRecord[] = [];

  constructor(public role: string) {}

  private guard(method: string, path: string): void {
    for (const rule of ROLE_DENYLIST[this.role] ?? []) {
      if (rule.pattern.test(path) && (rule.methods === "*" || rule.methods.includes(method))) {
        throw new ApiError(0, "role-isolation", `${this.role} session may not call ${path}`);
      }
    }
  }

  async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.guard(method, path);
    this.requestLog.push({ method, path });
    const { gateway, token } = getConfig();
    const response = await fetch(`${gateway}${path}`, {
      method,
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${token}`,
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let code = "error";
      let message = text;
      let details: Record<string, unknown> = {};
      try {
        const parsed = JSON.parse(text);
        code = parsed.error ?? code;
        message = parsed.message ?? message;
        details = parsed.details ?? {};
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, code, message, details);
    }
    return (text ? JSON.parse(text) : {}) as T;
  }

  // -- conversations --------------------------------------------------------

  sendTurn(text: string, taskId?: string): Promise<{ task: TaskView; reply: string }> {
    const body: Record<string, unknown> = { text };
    if (taskId) body.task_id = taskId;
    return this.request("POST", "/a2a/tasks/send", body);
  }

  getTask(taskId: string): Promise<{ task: TaskView; events: Array<Record<string, unknown>> }> {
    return this.request("GET", `/a2a/tasks/get?id=${encodeURIComponent(taskId)}`);
  }

  myTasks(): Promise<TaskView[]> {
    return this.request("GET", "/a2a/tasks?mine=true");
  }

  notifications(): Promise<TaskView[]> {
    return this.request("GET", "/notifications");
  }

  acknowledge(taskId: string): Promise<TaskView> {
    return this.request("POST", `/notifications/${encodeURIComponent(taskId)}/ack`);
  }

  // -- dashboard --------------------------------------------------------

  tickets(state?: string): Promise<TicketView[]> {
    const query = state ? `?state=${encodeURIComponent(state)}` : "";
    return this.request("GET", `/tickets${query}`);
  }

  transitionTicket(ticketId: string, state: string, note = ""): Promise<TicketView> {
    return this.request("POST", `/tickets/${encodeURIComponent(ticketId)}/transition`, { state, note });
  }

  models(): Promise<ModelView[]> {
    return this.request("GET", "/catalog/models");
  }

  bindings(): Promise<{ bindings: Array<Record<string, unknown>>; effective_weights: Record<string, number> }> {
    return this.request("GET", "/catalog/kpi-bindings");
  }

  objectives(): Promise<Array<Record<string, unknown>>> {
    return this.request("GET", "/catalog/objectives");
  }

  watchlist(): Promise<{ active: string[]; entries: Array<Record<string, unknown>> }> {
    return this.request("GET", "/catalog/watchlist");
  }

  flagAttribute(attribute: string, reason: string): Promise<Record<string, unknown>> {
    return this.request("POST", "/catalog/watchlist", { attribute, reason });
  }

  // -- ledger --------------------------------------------------------

  ledgerEntries(from = 0, to?: number): Promise<Array<Record<string, unknown>>> {
    const query = to === undefined ? `?from=${from}` : `?from=${from}&to=${to}`;
    return this.request("GET", `/ledger/entries${query}`);
  }

  verifyLedger(): Promise<{ chain: { valid: boolean }; head: { valid: boolean } }> {
    return this.request("POST", "/ledger/verify");
  }

  decision(decisionId: string): Promise<DecisionView> {
    return this.request("GET", `/ledger/decisions/${encodeURIComponent(decisionId)}`);
  }

  async exportDecision(decisionId: string, format: "json" | "text" = "json"): Promise<string> {
    this.guard("GET", "/ledger/export");
    this.requestLog.push({ method: "GET", path: "/ledger/export" });
    const { gateway, token } = getConfig();
    const response = await fetch(
      `${gateway}/ledger/export?format=${format}&decision=${encodeURIComponent(decisionId)}`,
      { headers: { Authorization: `Bearer ${token}` } },
    );
    if (!response.ok) {
      throw new ApiError(response.status, "export-failed", await response.text());
    }
    return response.text();
  }

  health(): Promise<{ status: string; agents: number; tools: number }> {
    return this.request("GET", "/healthz");
  }
}
