// Console configuration: one JSON object (gateway origin + role token).

export interface ConsoleConfig {
  gateway: string;
  token: string;
}

let active: ConsoleConfig = { gateway: "http://127.0.0.1:8080", token: "" };

export function setConfig(config: ConsoleConfig): void {
  active = { ...config, gateway: config.gateway.replace(/\/$/, "") };
}

export function getConfig(): ConsoleConfig {
  return active;
}

export async function loadConfig(url = "./config.json"): Promise<ConsoleConfig> {
  const response = await fetch(url);
  if (!response.ok) throw new Error(`cannot load console config from ${url}`);
  setConfig((await response.json()) as ConsoleConfig);
  return active;
}
