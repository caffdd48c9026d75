// Chat-session state as a pure function of received events plus local
// drafts: the reducer consumes task snapshots and SSE events only, so a
// reconnect that replays the stream reconstructs the identical view.

import type { TaskView } from "./api.js";
import type { TaskEvent } from "./sse.js";

export interface ChatMessage {
  role: string;
  text: string;
  data?: Record<string, unknown>;
}

export interface ChatSession {
  taskId: string;
  state: string;
  messages: ChatMessage[];
  artifacts: Array<Record<string, unknown>>;
  awaitingFields: string[];
  deniedBy?: string;
  seenSequence: number;
}

export function emptySession(): ChatSession {
  return { taskId: "", state: "", messages: [], artifacts: [], awaitingFields: [], seenSequence: 0 };
}

function textOf(parts: Array<Record<string, unknown>>): string {
  return parts
    .filter((part) => part.kind === "text")
    .map((part) => String(part.text ?? ""))
    .join("\n");
}

function dataOf(parts: Array<Record<string, unknown>>): Record<string, unknown> | undefined {
  const part = parts.find((candidate) => candidate.kind === "data");
  return part ? (part.data as Record<string, unknown>) : undefined;
}

export function applySnapshot(session: ChatSession, task: TaskView): ChatSession {
  const messages: ChatMessage[] = task.messages.map((message) => ({
    role: message.role,
    text: textOf(message.parts),
    data: dataOf(message.parts),
  }));
  const last = messages[messages.length - 1];
  return {
    ...session,
    taskId: task.task_id,
    state: task.state,
    messages,
    artifacts: task.artifacts.flatMap((artifact) =>
      artifact.parts.filter((part) => part.kind === "data").map((part) => part.data as Record<string, unknown>),
    ),
    awaitingFields:
      task.state === "input-required" && last?.data?.missing_slots
        ? (last.data.missing_slots as string[])
        : session.awaitingFields,
    deniedBy: (last?.data?.accountable as string | undefined) ?? session.deniedBy,
  };
}

export function applyEvent(session: ChatSession, event: TaskEvent): ChatSession {
  if (event.sequence_no <= session.seenSequence) return session; // replayed duplicate
  const next = { ...session, seenSequence: event.sequence_no };
  if (event.kind === "status-update") {
    next.state = String(event.payload.state ?? next.state);
  } else if (event.kind === "artifact-update") {
    const artifact = event.payload.artifact as { parts: Array<Record<string, unknown>> };
    next.artifacts = [
      ...next.artifacts,
      ...artifact.parts.filter((part) => part.kind === "data").map((part) => part.data as Record<string, unknown>),
    ];
  }
  return next;
}

// The four loan slots render as highlighted prompts when the agent asks for
// more details; detection keys off the reply text so it works for partial
// re-prompts too.
const FIELD_PROMPTS = ["Dependents", "Co-applicant Income", "LoanAmount", "LoanTerm"];

export function detectFieldPrompts(reply: string): string[] {
  return FIELD_PROMPTS.filter((field) => reply.includes(field));
}
