// Test transport: a scriptable WebSocket stand-in that records what the console
// sends and lets tests push frames in.

import { TransportLike } from "../src/client.js";

export class FakeTransport implements TransportLike {
  sent: string[] = [];
  onmessage: ((ev: { data: string | ArrayBuffer }) => void) | null = null;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  binaryType?: string;
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  open(): void {
    this.onopen?.();
  }

  pushText(msg: object): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }

  pushBinary(bytes: Uint8Array): void {
    const buf = new ArrayBuffer(bytes.length);
    new Uint8Array(buf).set(bytes);
    this.onmessage?.({ data: buf });
  }

  pushRows(queryId: number, csvText: string): void {
    const payload = new TextEncoder().encode(csvText);
    const count = csvText.split("\n").filter((l) => l !== "").length;
    this.pushText({ type: "ROWS", query_id: queryId, count,
                    encoding: "csv", payload_bytes: payload.length });
    this.pushBinary(payload);
  }

  lastSent(): { type?: string; [k: string]: unknown } {
    return JSON.parse(this.sent[this.sent.length - 1]);
  }
}

export async function connectedClient() {
  const { ConsoleClient } = await import("../src/client.js");
  const t = new FakeTransport();
  const client = new ConsoleClient(() => t);
  const conn = client.connect("ws://test");
  t.open();
  await conn;
  const login = client.login("astro", "orion");
  t.pushText({ type: "HELLO_OK", server: "skyql", protocol: 1 });
  t.pushText({ type: "AUTH_OK", session_id: 7 });
  await login;
  return { client, t };
}
