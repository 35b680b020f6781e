// CSV export: exactly the bytes the agent would write to a file target —
// the header line (column names) followed by the row chunks as received.

import { QueryHandle } from "./client.js";

const encoder = new TextEncoder();

export function exportCsvBytes(handle: QueryHandle): Uint8Array {
  const header = encoder.encode(handle.columns.join(",") + "\n");
  let total = header.length;
  for (const c of handle.chunks) total += c.length;
  const out = new Uint8Array(total);
  out.set(header, 0);
  let off = header.length;
  for (const c of handle.chunks) {
    out.set(c, off);
    off += c.length;
  }
  return out;
}

/** Parse received chunks into row arrays for the table view. */
export function parseRows(chunk: Uint8Array): string[][] {
  const text = new TextDecoder().decode(chunk);
  const rows: string[][] = [];
  for (const line of text.split("\n")) {
    if (line !== "") rows.push(line.split(","));
  }
  return rows;
}
