// Server-sent-events subscription over fetch streaming.
//
// fetch + ReadableStream instead of EventSource so the same code runs in the
// browser and under the node test runner, and so the Authorization header
// and Last-Event-ID resume work without URL hacks. Reconnects resume from
// the last seen sequence number, so a dropped stream replays nothing twice
// and misses nothing.

import { getConfig } from "./config.js";

export interface TaskEvent {
  kind: string;
  task_id: string;
  payload: Record<string, unknown>;
  sequence_no: number;
}

export interface Subscription {
  close(): void;
  done: Promise<void>;
}

export function subscribeTask(
  taskId: string,
  onEvent: (event: TaskEvent) => void,
  options: { maxReconnects?: number } = {},
): Subscription {
  const controller = new AbortController();
  let lastEventId = 0;
  let closed = false;
  const maxReconnects = options.maxReconnects ?? 5;

  const done = (async () => {
    let attempts = 0;
    while (!closed && attempts <= maxReconnects) {
      const { gateway, token } = getConfig();
      try {
        const response = await fetch(
          `${gateway}/a2a/tasks/subscribe?id=${encodeURIComponent(taskId)}`,
          {
            headers: {
              Authorization: `Bearer ${token}`,
              Accept: "text/event-stream",
              "Last-Event-ID": String(lastEventId),
            },
            signal: controller.signal,
          },
        );
        if (!response.ok || !response.body) throw new Error(`subscribe failed: ${response.status}`);
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { value, done: finished } = await reader.read();
          if (finished) return; // server closed: task reached a terminal state
          buffer += decoder.decode(value, { stream: true });
          let boundary = buffer.indexOf("\n\n");
          while (boundary >= 0) {
            const frame = buffer.slice(0, boundary);
            buffer = buffer.slice(boundary + 2);
            const dataLine = frame.split("\n").find((line) => line.startsWith("data: "));
            if (dataLine) {
              const event = JSON.parse(dataLine.slice(6)) as TaskEvent;
              lastEventId = event.sequence_no;
              onEvent(event);
            }
            boundary = buffer.indexOf("\n\n");
          }
        }
      } catch (error) {
        if (closed) return;
        attempts += 1;
        await new Promise((resolve) => setTimeout(resolve, 100 * attempts));
      }
    }
  })();

  return {
    close() {
      closed = true;
      controller.abort();
    },
    done,
  };
}

export function parseSseText(text: string): TaskEvent[] {
  // Shared with tests: parse a full event-stream body into events.
  const events: TaskEvent[] = [];
  for (const frame of text.split("\n\n")) {
    const dataLine = frame.split("\n").find((line) => line.startsWith("data: "));
    if (dataLine) events.push(JSON.parse(dataLine.slice(6)) as TaskEvent);
  }
  return events;
}
