import { describe, expect, it } from "vitest";

import { validateTrace } from "../src/protocol.js";
import { ConsoleSession } from "../src/session.js";
import { FakeTransport, connectedClient } from "./helpers.js";

describe("console client", () => {
  it("estimates, runs, streams rows and finishes; the trace is protocol-legal", async () => {
    const { client, t } = await connectedClient();
    const rows: string[][] = [];
    const handle = client.estimate("SELECT objID FROM Galaxy", {
      onRows: (_n, chunk) => {
        for (const line of new TextDecoder().decode(chunk).split("\n")) {
          if (line) rows.push(line.split(","));
        }
      },
    });
    expect(t.lastSent().type).toBe("ESTIMATE");
    expect(handle.state).toBe("Estimating");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 1, databases: 6, containers: 6,
                 seconds: 0.01, bytes: 123, columns: [] });
    expect(handle.state).toBe("Estimated");
    expect(handle.estimate?.containers).toBe(6);

    client.run(handle);
    expect(t.lastSent()).toMatchObject({ type: "RUN", query_id: 1 });
    t.pushText({ type: "COLUMNS", query_id: 1, names: ["objID"], columns: [] });
    t.pushRows(1, "101\n102\n");
    t.pushRows(1, "103\n");
    t.pushText({ type: "STATUS", query_id: 1, state: "Done", rows: 3, elapsed_s: 0.02 });

    expect(handle.state).toBe("Done");
    expect(handle.rows).toBe(3);
    expect(rows).toEqual([["101"], ["102"], ["103"]]);
    expect(validateTrace(client.trace)).toBeNull();
  });

  it("refuses to run without an estimate", async () => {
    const { client, t } = await connectedClient();
    const handle = client.estimate("SELECT objID FROM Galaxy");
    expect(() => client.run(handle)).toThrow(/illegal query transition/);
    // still refuses after a failure reply
    t.pushText({ type: "ERROR", code: "SyntaxError", message: "1:8: found 'WHERE'" });
    expect(handle.state).toBe("Failed");
    expect(() => client.run(handle)).toThrow(/illegal query transition/);
    expect(handle.error?.code).toBe("SyntaxError");
  });

  it("reports syntax errors with their position", async () => {
    const { client, t } = await connectedClient();
    let reported = "";
    client.estimate("SELECT objID WHERE x", {
      onError: (e) => { reported = `${e.code} ${e.message}`; },
    });
    t.pushText({ type: "ERROR", code: "SyntaxError",
                 message: "1:14: found 'WHERE' (expected FROM)", line: 1, col: 14 });
    expect(reported).toContain("1:14");
  });

  it("cancels a running query and keeps the received rows", async () => {
    const { client, t } = await connectedClient();
    const handle = client.estimate("SELECT objID FROM PhotoTag");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 1, databases: 6, containers: 24,
                 seconds: 1, bytes: 1e8, columns: [] });
    client.run(handle);
    t.pushText({ type: "COLUMNS", query_id: 1, names: ["objID"], columns: [] });
    t.pushRows(1, "1\n2\n");
    client.cancel(handle);
    expect(t.lastSent()).toMatchObject({ type: "CANCEL", query_id: 1 });
    t.pushText({ type: "CANCEL_OK", query_id: 1, state: "Cancelling" });
    t.pushText({ type: "STATUS", query_id: 1, state: "Cancelled", rows: 2,
                 elapsed_s: 0.5 });
    expect(handle.state).toBe("Cancelled");
    expect(handle.rows).toBe(2);
    expect(validateTrace(client.trace)).toBeNull();
  });

  it("multiplexes concurrent queries without cross-talk", async () => {
    const { client, t } = await connectedClient();
    const a = client.estimate("SELECT objID FROM Galaxy");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 1, databases: 1, containers: 1,
                 seconds: 0, bytes: 1, columns: [] });
    const b = client.estimate("SELECT objID FROM Star");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 2, databases: 1, containers: 1,
                 seconds: 0, bytes: 1, columns: [] });
    client.run(a);
    client.run(b);
    t.pushText({ type: "COLUMNS", query_id: 2, names: ["objID"], columns: [] });
    t.pushRows(2, "222\n");
    t.pushText({ type: "COLUMNS", query_id: 1, names: ["objID"], columns: [] });
    t.pushRows(1, "111\n");
    t.pushText({ type: "STATUS", query_id: 2, state: "Done", rows: 1, elapsed_s: 0 });
    t.pushText({ type: "STATUS", query_id: 1, state: "Done", rows: 1, elapsed_s: 0 });
    const text = (h: typeof a) => new TextDecoder().decode(h.chunks[0]).trim();
    expect(text(a)).toBe("111");
    expect(text(b)).toBe("222");
    expect(validateTrace(client.trace)).toBeNull();
  });
});

describe("console session tabs", () => {
  it("keeps tabs independent: closing one cancels only its own query", async () => {
    const transports: FakeTransport[] = [];
    const session = new ConsoleSession(() => {
      const t = new FakeTransport();
      transports.push(t);
      return t;
    });
    const conn = session.connect("ws://x", "astro", "orion");
    const t = transports[0];
    t.open();
    t.pushText({ type: "HELLO_OK" });
    t.pushText({ type: "AUTH_OK", session_id: 1 });
    await conn;

    const tab1 = session.newTab();
    const tab2 = session.newTab();
    tab1.submit("SELECT objID FROM Galaxy");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 1, databases: 1, containers: 1,
                 seconds: 0, bytes: 1, columns: [] });
    tab2.submit("SELECT objID FROM Star");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 2, databases: 1, containers: 1,
                 seconds: 0, bytes: 1, columns: [] });
    tab1.run();
    tab2.run();
    const sentBefore = t.sent.length;
    tab1.close();
    const cancels = t.sent.slice(sentBefore).map((s) => JSON.parse(s))
      .filter((m) => m.type === "CANCEL");
    expect(cancels).toEqual([{ type: "CANCEL", query_id: 1 }]);
    expect(session.tabs).toEqual([tab2]);
    expect(tab2.state).toBe("Running");  // untouched by tab1's close
  });
});
