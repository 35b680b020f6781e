// The export contract: downloading a finished tab reproduces, byte for byte, the
// CSV the agent itself writes for the same query through a file target.  The
// fixture records a real agent exchange (tools/make_console_fixture.py).

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { describe, expect, it } from "vitest";

import { QueryHandle } from "../src/client.js";
import { exportCsvBytes } from "../src/csv.js";
import { validateTrace } from "../src/protocol.js";
import { computeWindow, ROW_HEIGHT, VIRTUALIZE_ABOVE } from "../src/table.js";
import { connectedClient } from "./helpers.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(readFileSync(join(here, "fixtures", "exchange.json"), "utf-8"));

function b64ToBytes(b64: string): Uint8Array {
  return new Uint8Array(Buffer.from(b64, "base64"));
}

async function replayFixture() {
  const { client, t } = await connectedClient();
  const handle = client.estimate(fixture.query);
  for (const ev of fixture.events) {
    if (ev.kind === "text") {
      const msg = JSON.parse(ev.data);
      if (["HELLO_OK", "AUTH_OK"].includes(msg.type)) continue; // already logged in
      t.pushText(msg);
      if (msg.type === "ESTIMATE_RESULT") {
        client.run(handle); // the recorded exchange continues with the run phase
      }
    } else {
      t.pushBinary(b64ToBytes(ev.b64));
    }
  }
  return { client, handle };
}

describe("csv export", () => {
  it("byte-equals the agent's own file-target CSV", async () => {
    const { client, handle } = await replayFixture();
    // the fixture includes the RUN phase; mirror the client's own send for the trace
    expect(handle.state).toBe("Done");
    const exported = exportCsvBytes(handle);
    const golden = b64ToBytes(fixture.file_csv_b64);
    expect(exported.length).toBe(golden.length);
    expect(Buffer.from(exported).equals(Buffer.from(golden))).toBe(true);
  });

  it("re-export is byte-identical", async () => {
    const { handle } = await replayFixture();
    const a = exportCsvBytes(handle);
    const b = exportCsvBytes(handle);
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);
  });

  it("zero rows export as a header-only file", async () => {
    const handle = new QueryHandle("SELECT objID FROM Galaxy WHERE r < 0");
    handle.columns = ["objID"];
    const bytes = exportCsvBytes(handle);
    expect(new TextDecoder().decode(bytes)).toBe("objID\n");
  });

  it("a cancelled query exports the rows received so far", async () => {
    const { client, t } = await connectedClient();
    const handle = client.estimate("SELECT objID FROM PhotoTag");
    t.pushText({ type: "ESTIMATE_RESULT", query_id: 1, databases: 1, containers: 1,
                 seconds: 0, bytes: 1, columns: [] });
    client.run(handle);
    t.pushText({ type: "COLUMNS", query_id: 1, names: ["objID"], columns: [] });
    t.pushRows(1, "5\n6\n");
    t.pushText({ type: "STATUS", query_id: 1, state: "Cancelled", rows: 2,
                 elapsed_s: 0.1 });
    expect(new TextDecoder().decode(exportCsvBytes(handle))).toBe("objID\n5\n6\n");
    expect(validateTrace(client.trace)).toBeNull();
  });
});

describe("virtualized table windowing", () => {
  it("materializes everything below the threshold", () => {
    const w = computeWindow(5000, 12345, 400);
    expect(w).toEqual({ start: 0, end: 5000, padTop: 0, padBottom: 0 });
  });

  it("windows large results with padding that preserves total height", () => {
    const total = VIRTUALIZE_ABOVE * 5;
    const w = computeWindow(total, 100 * ROW_HEIGHT, 20 * ROW_HEIGHT);
    expect(w.start).toBeGreaterThan(0);
    expect(w.end - w.start).toBeLessThan(200);
    expect(w.padTop + (w.end - w.start) * ROW_HEIGHT + w.padBottom)
      .toBe(total * ROW_HEIGHT);
    // scrolled to the bottom the window reaches the last row
    const bottom = computeWindow(total, (total - 20) * ROW_HEIGHT, 20 * ROW_HEIGHT);
    expect(bottom.end).toBe(total);
  });
});
