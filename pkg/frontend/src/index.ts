import { mountConsole } from "./app.js";
import { loadConfig } from "./config.js";

async function boot(): Promise<void> {
  const config = await loadConfig();
  const role = new URLSearchParams(window.location.search).get("role") ?? "customer";
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  await mountConsole(root, role);
  console.info(`console connected to ${config.gateway} as ${role}`);
}

void boot();
