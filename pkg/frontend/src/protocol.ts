// Wire protocol types and the client-side query state machine.
// The framing and message set mirror docs/protocol.md in the repository root.

export type QueryState =
  | "Idle"
  | "Estimating"
  | "Estimated"
  | "Running"
  | "Done"
  | "Failed"
  | "Cancelled";

export interface ColumnInfo {
  name: string;
  type: string;
  format: string;
}

export interface EstimateResult {
  query_id: number;
  databases: number;
  containers: number;
  seconds: number;
  bytes: number;
  columns: ColumnInfo[];
}

export interface StatusMsg {
  query_id: number;
  state: "Done" | "Failed" | "Cancelled";
  rows: number;
  elapsed_s: number;
  error?: { code: string; message: string };
}

export interface ErrorMsg {
  code: string;
  message: string;
  line?: number;
  col?: number;
  query_id?: number;
}

export type ServerMessage = { type: string; [key: string]: unknown };

// Legal client-side transitions; RUN is only reachable from Estimated, which is
// how the estimate-then-confirm workflow is enforced at the protocol layer.
const LEGAL: Record<QueryState, QueryState[]> = {
  Idle: ["Estimating"],
  Estimating: ["Estimated", "Failed"],
  Estimated: ["Running", "Cancelled"],
  Running: ["Done", "Failed", "Cancelled"],
  Done: [],
  Failed: [],
  Cancelled: [],
};

export class IllegalTransition extends Error {
  constructor(from: QueryState, to: QueryState) {
    super(`illegal query transition ${from} -> ${to}`);
  }
}

export class QueryStateMachine {
  state: QueryState = "Idle";
  readonly history: Array<[QueryState, QueryState]> = [];

  transition(to: QueryState): void {
    if (!LEGAL[this.state].includes(to)) {
      throw new IllegalTransition(this.state, to);
    }
    this.history.push([this.state, to]);
    this.state = to;
  }

  get terminal(): boolean {
    return LEGAL[this.state].length === 0;
  }
}

// A recorded exchange: messages the console sent and received, in order.
export interface TraceEvent {
  dir: "sent" | "received";
  msg: ServerMessage;
}

/**
 * Validate that a message trace is protocol-legal from the console side:
 * HELLO before AUTH, AUTH before query traffic, and for every query id an
 * ESTIMATE answered by ESTIMATE_RESULT strictly before any RUN, with RUN/CANCEL
 * only in states where the server would accept them.
 */
export function validateTrace(trace: TraceEvent[]): string | null {
  let helloed = false;
  let authed = false;
  const jobs = new Map<number, QueryStateMachine>();
  for (const ev of trace) {
    const t = ev.msg.type;
    if (ev.dir === "sent") {
      if (t === "HELLO") {
        helloed = true;
      } else if (t === "AUTH") {
        if (!helloed) return "AUTH before HELLO";
      } else if (t === "ESTIMATE") {
        if (!authed) return "ESTIMATE before AUTH_OK";
      } else if (t === "RUN") {
        const qid = ev.msg.query_id as number;
        const job = jobs.get(qid);
        if (!job) return `RUN for unknown query ${qid}`;
        if (job.state !== "Estimated") {
          return `RUN while ${job.state} (estimate must come first)`;
        }
        job.transition("Running");
      } else if (t === "CANCEL") {
        const qid = ev.msg.query_id as number;
        const job = jobs.get(qid);
        if (!job) return `CANCEL for unknown query ${qid}`;
        if (job.state !== "Estimated" && job.state !== "Running") {
          return `CANCEL while ${job.state}`;
        }
      }
    } else {
      if (t === "AUTH_OK") {
        authed = true;
      } else if (t === "ESTIMATE_RESULT") {
        const qid = ev.msg.query_id as number;
        const job = new QueryStateMachine();
        job.transition("Estimating");
        job.transition("Estimated");
        jobs.set(qid, job);
      } else if (t === "STATUS") {
        const qid = ev.msg.query_id as number;
        const job = jobs.get(qid);
        if (!job) return `STATUS for unknown query ${qid}`;
        const to = (ev.msg as unknown as StatusMsg).state;
        if (job.state === "Estimated" && to === "Cancelled") {
          job.transition("Cancelled");
        } else if (job.state === "Running") {
          job.transition(to);
        } else if (!job.terminal) {
          return `STATUS ${to} while ${job.state}`;
        }
      }
    }
  }
  return null;
}
