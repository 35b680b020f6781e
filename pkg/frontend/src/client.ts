// Console-side protocol client: framing, demultiplexing, per-query tab state.
//
// The transport is the standard browser WebSocket surface, injectable so tests can
// script exchanges without sockets. A control message carrying `payload_bytes` is
// followed by one binary frame holding the payload (CSV row lines).

import {
  ColumnInfo,
  EstimateResult,
  QueryStateMachine,
  ServerMessage,
  StatusMsg,
  TraceEvent,
} from "./protocol.js";

export interface TransportLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string | ArrayBuffer }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: ((ev: unknown) => void) | null;
  binaryType?: string;
}

export type TransportFactory = (url: string) => TransportLike;

export interface QueryEvents {
  onEstimate?: (est: EstimateResult) => void;
  onColumns?: (names: string[], columns: ColumnInfo[]) => void;
  onRows?: (count: number, csvChunk: Uint8Array) => void;
  onStatus?: (status: StatusMsg) => void;
  onError?: (err: { code: string; message: string }) => void;
}

export class QueryHandle {
  readonly machine = new QueryStateMachine();
  queryId = -1;
  sxql: string;
  columns: string[] = [];
  columnInfo: ColumnInfo[] = [];
  estimate: EstimateResult | null = null;
  rows = 0;
  chunks: Uint8Array[] = [];
  status: StatusMsg | null = null;
  error: { code: string; message: string } | null = null;
  events: QueryEvents;

  constructor(sxql: string, events: QueryEvents = {}) {
    this.sxql = sxql;
    this.events = events;
  }

  get state() {
    return this.machine.state;
  }
}

export class ConsoleClient {
  readonly trace: TraceEvent[] = [];
  private transport: TransportLike | null = null;
  private pendingPayloadFor: ServerMessage | null = null;
  private byQuery = new Map<number, QueryHandle>();
  private awaitingEstimate: QueryHandle[] = [];
  private controlWaiters: Array<(msg: ServerMessage) => void> = [];
  private controlInbox: ServerMessage[] = [];
  sessionId: number | null = null;
  connected = false;
  onDisconnect: (() => void) | null = null;

  constructor(private makeTransport: TransportFactory) {}

  connect(url: string): Promise<void> {
    return new Promise((resolve, reject) => {
      const t = this.makeTransport(url);
      t.binaryType = "arraybuffer";
      t.onopen = () => {
        this.connected = true;
        resolve();
      };
      t.onerror = (e) => reject(e instanceof Error ? e : new Error("connect failed"));
      t.onclose = () => {
        this.connected = false;
        if (this.onDisconnect) this.onDisconnect();
      };
      t.onmessage = (ev) => this.handleFrame(ev.data);
      this.transport = t;
    });
  }

  close(): void {
    this.transport?.close();
    this.connected = false;
  }

  private send(msg: ServerMessage): void {
    this.trace.push({ dir: "sent", msg });
    if (!this.transport) throw new Error("not connected");
    this.transport.send(JSON.stringify(msg));
  }

  private handleFrame(data: string | ArrayBuffer): void {
    if (typeof data !== "string") {
      const head = this.pendingPayloadFor;
      this.pendingPayloadFor = null;
      if (head) this.dispatch(head, new Uint8Array(data));
      return;
    }
    const msg = JSON.parse(data) as ServerMessage;
    if (typeof msg.payload_bytes === "number" && msg.payload_bytes > 0) {
      this.pendingPayloadFor = msg; // payload arrives as the next binary frame
      return;
    }
    this.dispatch(msg, null);
  }

  private dispatch(msg: ServerMessage, payload: Uint8Array | null): void {
    this.trace.push({ dir: "received", msg });
    const qid = msg.query_id as number | undefined;
    switch (msg.type) {
      case "ESTIMATE_RESULT": {
        const handle = this.awaitingEstimate.shift();
        if (!handle) return;
        handle.queryId = qid!;
        handle.estimate = msg as unknown as EstimateResult;
        handle.columnInfo = (msg.columns as ColumnInfo[]) ?? [];
        handle.machine.transition("Estimated");
        this.byQuery.set(qid!, handle);
        handle.events.onEstimate?.(handle.estimate);
        return;
      }
      case "COLUMNS": {
        const handle = qid !== undefined ? this.byQuery.get(qid) : undefined;
        if (!handle) return;
        handle.columns = (msg.names as string[]) ?? [];
        handle.events.onColumns?.(handle.columns, (msg.columns as ColumnInfo[]) ?? []);
        return;
      }
      case "ROWS": {
        const handle = qid !== undefined ? this.byQuery.get(qid) : undefined;
        if (!handle || !payload) return;
        handle.rows += (msg.count as number) ?? 0;
        handle.chunks.push(payload);
        handle.events.onRows?.((msg.count as number) ?? 0, payload);
        return;
      }
      case "COUNT": {
        const handle = qid !== undefined ? this.byQuery.get(qid) : undefined;
        if (handle) handle.rows = msg.count as number;
        return;
      }
      case "STATUS": {
        const handle = qid !== undefined ? this.byQuery.get(qid) : undefined;
        if (!handle) return;
        const status = msg as unknown as StatusMsg;
        handle.status = status;
        if (!handle.machine.terminal) handle.machine.transition(status.state);
        if (status.error) handle.error = status.error;
        handle.events.onStatus?.(status);
        return;
      }
      case "CANCEL_OK": {
        const handle = qid !== undefined ? this.byQuery.get(qid) : undefined;
        if (handle && msg.state === "Cancelled" && handle.state === "Estimated") {
          handle.machine.transition("Cancelled");
          handle.events.onStatus?.({
            query_id: qid!, state: "Cancelled", rows: handle.rows, elapsed_s: 0,
          });
        }
        return;
      }
      case "ERROR": {
        const err = { code: msg.code as string, message: msg.message as string };
        const handle = this.awaitingEstimate.shift();
        if (handle) {
          if (!handle.machine.terminal) handle.machine.transition("Failed");
          handle.error = err;
          handle.events.onError?.(err);
          return;
        }
        const running = qid !== undefined ? this.byQuery.get(qid) : undefined;
        if (running) {
          running.error = err;
          running.events.onError?.(err);
        }
        return;
      }
      default: {
        const waiter = this.controlWaiters.shift();
        if (waiter) waiter(msg);
        else this.controlInbox.push(msg);
      }
    }
  }

  private waitControl(type: string, timeoutMs = 15000): Promise<ServerMessage> {
    return new Promise((resolve, reject) => {
      const settle = (msg: ServerMessage) => {
        if (msg.type === type) resolve(msg);
        else reject(new Error(`${(msg as { code?: string }).code ?? msg.type}: ` +
          `${(msg as { message?: string }).message ?? ""}`));
      };
      const queued = this.controlInbox.shift();
      if (queued) {
        settle(queued);
        return;
      }
      const timer = setTimeout(
        () => reject(new Error(`timed out waiting for ${type}`)), timeoutMs);
      this.controlWaiters.push((msg) => {
        clearTimeout(timer);
        settle(msg);
      });
    });
  }

  async login(user: string, password: string): Promise<number> {
    this.send({ type: "HELLO", protocol: 1 });
    await this.waitControl("HELLO_OK");
    this.send({ type: "AUTH", user, password });
    const ok = await this.waitControl("AUTH_OK");
    this.sessionId = ok.session_id as number;
    return this.sessionId;
  }

  /** Submit text for estimation; the returned handle reaches Estimated or Failed. */
  estimate(sxql: string, events: QueryEvents = {}): QueryHandle {
    const handle = new QueryHandle(sxql, events);
    handle.machine.transition("Estimating");
    this.awaitingEstimate.push(handle);
    this.send({ type: "ESTIMATE", sxql });
    return handle;
  }

  /** Run a previously estimated query. The state machine rejects anything else. */
  run(handle: QueryHandle, countOnly = false): void {
    handle.machine.transition("Running"); // throws unless Estimated
    const msg: ServerMessage = { type: "RUN", query_id: handle.queryId };
    if (countOnly) msg.count_only = true;
    this.send(msg);
  }

  cancel(handle: QueryHandle): void {
    if (handle.state !== "Estimated" && handle.state !== "Running") {
      throw new Error(`cannot cancel while ${handle.state}`);
    }
    this.send({ type: "CANCEL", query_id: handle.queryId });
  }
}
