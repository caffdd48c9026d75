// Role-scoped chat panel: send turns, stream updates, render input-required
// field prompts and policy denials (with the accountable role) inline.

import { ApiError, GatewayClient } from "../api.js";
import { clear, el } from "../dom.js";
import { applyEvent, applySnapshot, ChatSession, detectFieldPrompts, emptySession } from "../state.js";
import { subscribeTask, Subscription } from "../sse.js";

export class ChatView {
  session: ChatSession = emptySession();
  private subscription: Subscription | null = null;

  constructor(
    private client: GatewayClient,
    readonly root: HTMLElement,
  ) {
    this.render();
  }

  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed) return;
    try {
      const { task, reply } = await this.client.sendTurn(trimmed, this.session.taskId || undefined);
      this.session = applySnapshot(this.session, task);
      this.session.awaitingFields = task.state === "input-required" ? detectFieldPrompts(reply) : [];
      this.resubscribe(task.task_id);
    } catch (error) {
      if (error instanceof ApiError) {
        this.session.messages = [
          ...this.session.messages,
          { role: "agent", text: `request failed (${error.code}): ${error.message}` },
        ];
        if (error.details.accountable) this.session.deniedBy = String(error.details.accountable);
      } else {
        this.session.messages = [...this.session.messages, { role: "agent", text: "network failure — retry" }];
      }
    }
    this.render();
  }

  private resubscribe(taskId: string): void {
    if (this.subscription) this.subscription.close();
    this.subscription = subscribeTask(taskId, (event) => {
      this.session = applyEvent(this.session, event);
      this.render();
    });
  }

  async resume(taskId: string): Promise<void> {
    const { task } = await this.client.getTask(taskId);
    this.session = applySnapshot(emptySession(), task);
    this.resubscribe(taskId);
    this.render();
  }

  newConversation(): void {
    if (this.subscription) this.subscription.close();
    this.subscription = null;
    this.session = emptySession();
    this.render();
  }

  render(): void {
    clear(this.root);
    const transcript = el("div", { class: "transcript", "data-testid": "transcript" });
    for (const message of this.session.messages) {
      const bubble = el("div", { class: `msg msg-${message.role}` }, [
        el("span", { class: "who" }, [message.role === "user" ? "you" : "hada"]),
        el("span", { class: "text" }, [message.text]),
      ]);
      transcript.append(bubble);
    }
    const status = el("div", { class: "chat-status", "data-testid": "chat-status" }, [
      this.session.taskId ? `task ${this.session.taskId} — ${this.session.state}` : "new conversation",
    ]);
    if (this.session.deniedBy) {
      status.append(el("span", { class: "denied" }, [` · denied; accountable role: ${this.session.deniedBy}`]));
    }
    const prompts = el("div", { class: "field-prompts", "data-testid": "field-prompts" });
    for (const field of this.session.awaitingFields) {
      prompts.append(el("span", { class: "prompt" }, [field]));
    }
    const input = el("input", {
      type: "text",
      class: "chat-input",
      "data-testid": "chat-input",
      placeholder: "type a message…",
    });
    const sendButton = el("button", { class: "chat-send", "data-testid": "chat-send" }, ["send"]);
    sendButton.addEventListener("click", () => {
      const value = (input as HTMLInputElement).value;
      (input as HTMLInputElement).value = "";
      void this.send(value);
    });
    const freshButton = el("button", { class: "chat-new" }, ["new conversation"]);
    freshButton.addEventListener("click", () => this.newConversation());

    const artifacts = el("div", { class: "artifacts", "data-testid": "artifacts" });
    for (const artifact of this.session.artifacts) {
      artifacts.append(el("pre", { class: "artifact" }, [JSON.stringify(artifact, null, 2)]));
    }
    this.root.append(status, transcript, prompts, artifacts, el("div", { class: "chat-controls" }, [input, sendButton, freshButton]));
  }
}
