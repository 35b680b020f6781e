// Server sessions and query tabs. Sessions are per-server WebSocket connections;
// tabs multiplex queries over their session by query id and stay independent:
// closing a tab only cancels its own running query.

import { ConsoleClient, QueryHandle, TransportFactory } from "./client.js";
import { parseRows } from "./csv.js";

export interface TabListener {
  onEstimate?(tab: QueryTab): void;
  onRows?(tab: QueryTab, rows: string[][]): void;
  onFinished?(tab: QueryTab): void;
  onError?(tab: QueryTab, message: string): void;
}

let nextTabId = 1;

export class QueryTab {
  readonly id = nextTabId++;
  title: string;
  sxql = "";
  handle: QueryHandle | null = null;
  rows: string[][] = [];
  listener: TabListener;

  constructor(readonly session: ConsoleSession, listener: TabListener = {}) {
    this.listener = listener;
    this.title = `query ${this.id}`;
  }

  get state() {
    return this.handle?.state ?? "Idle";
  }

  /** Submit the text for estimation; the estimate panel must precede any run. */
  submit(sxql: string): QueryHandle {
    this.sxql = sxql;
    this.rows = [];
    this.handle = this.session.client.estimate(sxql, {
      onEstimate: () => this.listener.onEstimate?.(this),
      onColumns: () => undefined,
      onRows: (_n, chunk) => {
        const parsed = parseRows(chunk);
        this.rows.push(...parsed);
        this.listener.onRows?.(this, parsed);
      },
      onStatus: () => this.listener.onFinished?.(this),
      onError: (e) => this.listener.onError?.(this, `${e.code}: ${e.message}`),
    });
    return this.handle;
  }

  run(countOnly = false): void {
    if (!this.handle) throw new Error("nothing submitted");
    this.session.client.run(this.handle, countOnly);
  }

  cancel(): void {
    if (this.handle) this.session.client.cancel(this.handle);
  }

  discard(): void {
    if (this.handle && this.handle.state === "Estimated") {
      this.session.client.cancel(this.handle);
    }
    this.handle = null;
    this.rows = [];
  }

  /** Closing a tab cancels only this tab's in-flight query. */
  close(): void {
    if (this.handle && (this.handle.state === "Running" || this.handle.state === "Estimated")) {
      try {
        this.session.client.cancel(this.handle);
      } catch {
        // already terminal; nothing to cancel
      }
    }
    this.session.removeTab(this);
  }
}

export class ConsoleSession {
  readonly client: ConsoleClient;
  tabs: QueryTab[] = [];
  url = "";
  user = "";
  state: "disconnected" | "connected" | "reconnectable" = "disconnected";

  constructor(makeTransport: TransportFactory) {
    this.client = new ConsoleClient(makeTransport);
    this.client.onDisconnect = () => {
      this.state = "reconnectable";
    };
  }

  async connect(url: string, user: string, password: string): Promise<void> {
    this.url = url;
    this.user = user;
    await this.client.connect(url);
    await this.client.login(user, password);
    this.state = "connected";
  }

  newTab(listener: TabListener = {}): QueryTab {
    const tab = new QueryTab(this, listener);
    this.tabs.push(tab);
    return tab;
  }

  removeTab(tab: QueryTab): void {
    this.tabs = this.tabs.filter((t) => t !== tab);
  }

  close(): void {
    this.client.close();
    this.state = "disconnected";
  }
}
