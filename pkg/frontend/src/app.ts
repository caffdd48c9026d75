// Console assembly: role-scoped tabs (chat, dashboard, audit, notifications).
// Which panels render follows the session's privileges; the server enforces
// them regardless.

import { GatewayClient } from "./api.js";
import { clear, el } from "./dom.js";
import { AuditView } from "./views/audit.js";
import { BoardView } from "./views/board.js";
import { ChatView } from "./views/chat.js";

const AUDIT_ROLES = new Set(["audit-manager", "customer", "hada"]);

export interface ConsoleApp {
  client: GatewayClient;
  chat: ChatView;
  board: BoardView | null;
  audit: AuditView | null;
  refreshNotifications(): Promise<void>;
}

export async function mountConsole(root: HTMLElement, role: string): Promise<ConsoleApp> {
  clear(root);
  const client = new GatewayClient(role);
  const statusBar = el("div", { class: "status-bar", "data-testid": "status-bar" });
  const notify = (text: string) => {
    statusBar.textContent = text;
  };

  const header = el("header", {}, [el("h1", {}, [`hada console — ${role}`]), statusBar]);
  const chatRoot = el("div", { class: "panel panel-chat", "data-testid": "panel-chat" });
  const boardRoot = el("div", { class: "panel panel-board", "data-testid": "panel-board" });
  const auditRoot = el("div", { class: "panel panel-audit", "data-testid": "panel-audit" });
  const feedRoot = el("div", { class: "panel panel-feed", "data-testid": "panel-feed" });
  root.append(header, chatRoot, boardRoot, auditRoot, feedRoot);

  const chat = new ChatView(client, chatRoot);
  const board = new BoardView(client, boardRoot, notify);
  await board.refresh().catch((error) => notify(String(error)));

  let audit: AuditView | null = null;
  if (AUDIT_ROLES.has(role)) {
    audit = new AuditView(client, auditRoot);
  }

  async function refreshNotifications(): Promise<void> {
    clear(feedRoot);
    feedRoot.append(el("h2", {}, ["Notifications"]));
    const pending = await client.notifications();
    for (const task of pending) {
      const first = task.messages[0];
      const text = first
        ? first.parts
            .filter((part) => part.kind === "text")
            .map((part) => String(part.text))
            .join(" ")
        : "";
      const card = el("div", { class: "notification", "data-testid": `notification-${task.task_id}` }, [text]);
      const ack = el("button", {}, ["mark read"]);
      ack.addEventListener("click", () => void client.acknowledge(task.task_id).then(refreshNotifications));
      card.append(ack);
      feedRoot.append(card);
    }
    if (!pending.length) feedRoot.append(el("p", {}, ["nothing pending"]));
  }
  await refreshNotifications().catch(() => undefined);

  return { client, chat, board, audit, refreshNotifications };
}
