import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, GatewayClient } from "../src/api.js";
import { setConfig } from "../src/config.js";

setConfig({ gateway: "http://gateway.test", token: "dev-test" });

function mockFetch(status = 200, body: unknown = {}): ReturnType<typeof vi.fn> {
  const fn = vi.fn(async () => new Response(JSON.stringify(body), { status }));
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => vi.unstubAllGlobals());

describe("gateway client", () => {
  it("attaches the bearer token and records every request", async () => {
    const fetchMock = mockFetch(200, []);
    const client = new GatewayClient("business-manager");
    await client.tickets("open");
    expect(client.requestLog).toEqual([{ method: "GET", path: "/tickets?state=open" }]);
    const [url, init] = fetchMock.mock.calls[0] as [string, RequestInit];
    expect(url).toBe("http://gateway.test/tickets?state=open");
    expect((init.headers as Record<string, string>).Authorization).toBe("Bearer dev-test");
  });

  it("surfaces gateway errors with code and details", async () => {
    mockFetch(403, { error: "policy-denied", message: "no", details: { accountable: "business-manager" } });
    const client = new GatewayClient("customer");
    await expect(client.sendTurn("approve the deployment")).rejects.toMatchObject({
      code: "policy-denied",
      status: 403,
      details: { accountable: "business-manager" },
    });
  });

  it("role isolation: a customer session never issues BM/DS-only mutations", async () => {
    const fetchMock = mockFetch();
    const client = new GatewayClient("customer");
    await expect(client.transitionTicket("OPS-1", "approved")).rejects.toBeInstanceOf(ApiError);
    await expect(client.flagAttribute("ZIP_Code", "x")).rejects.toBeInstanceOf(ApiError);
    expect(fetchMock).not.toHaveBeenCalled();
    expect(client.requestLog).toEqual([]);
  });

  it("role isolation: ethics-only mutation allowed for the ethics role", async () => {
    mockFetch(200, { attribute: "PropertyArea" });
    const client = new GatewayClient("value-ethics-manager");
    await client.flagAttribute("PropertyArea", "proxy");
    expect(client.requestLog).toEqual([{ method: "POST", path: "/catalog/watchlist" }]);
  });

  it("reads are never blocked client-side (server decides)", async () => {
    mockFetch(200, []);
    const client = new GatewayClient("customer");
    await client.tickets();
    expect(client.requestLog).toHaveLength(1);
  });
});
