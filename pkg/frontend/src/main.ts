// The console app shell: server sessions, query tabs, the estimate-then-run panel,
// streaming results, cancel, and CSV download.

import { ConsoleSession, QueryTab } from "./session.js";
import { ResultTable } from "./table.js";
import { exportCsvBytes } from "./csv.js";
import { EXAMPLES } from "./examples.js";
import { EstimateResult } from "./protocol.js";

const sessions: ConsoleSession[] = [];

interface TabView {
  tab: QueryTab;
  pane: HTMLElement;
  table: ResultTable;
  status: HTMLElement;
  estimatePanel: HTMLElement;
  runBtn: HTMLButtonElement;
  cancelBtn: HTMLButtonElement;
  exportBtn: HTMLButtonElement;
  editor: HTMLTextAreaElement;
  errorBox: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, cls?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}

function fmtSeconds(s: number): string {
  return s >= 1 ? `${s.toFixed(1)} s` : `${(s * 1000).toFixed(1)} ms`;
}

function renderEstimate(view: TabView, est: EstimateResult) {
  view.estimatePanel.innerHTML = "";
  view.estimatePanel.appendChild(el("span", "est-chip",
    `${est.containers} containers in ${est.databases} databases`));
  view.estimatePanel.appendChild(el("span", "est-chip",
    `~${fmtSeconds(est.seconds)} projected`));
  view.estimatePanel.appendChild(el("span", "est-chip",
    `${(est.bytes / 1e6).toFixed(1)} MB to scan`));
  view.estimatePanel.appendChild(el("span", "est-hint",
    "run it, or discard if the cost is not worth it"));
  view.runBtn.disabled = false;
}

function buildTabPane(session: ConsoleSession, container: HTMLElement): TabView {
  const pane = el("div", "tab-pane");
  const editor = el("textarea", "editor") as HTMLTextAreaElement;
  editor.rows = 6;
  editor.spellcheck = false;

  const examplePick = el("select", "examples") as HTMLSelectElement;
  examplePick.appendChild(el("option", "", "examples…"));
  for (const ex of EXAMPLES) {
    const opt = el("option", "", `${ex.id} — ${ex.description}`) as HTMLOptionElement;
    opt.value = ex.sxql;
    examplePick.appendChild(opt);
  }
  examplePick.onchange = () => {
    if (examplePick.value) editor.value = examplePick.value;
  };

  const submitBtn = el("button", "", "Estimate") as HTMLButtonElement;
  const runBtn = el("button", "", "Run") as HTMLButtonElement;
  const countBtn = el("button", "", "Count only") as HTMLButtonElement;
  const discardBtn = el("button", "", "Discard") as HTMLButtonElement;
  const cancelBtn = el("button", "warn", "Cancel") as HTMLButtonElement;
  const exportBtn = el("button", "", "Export CSV") as HTMLButtonElement;
  runBtn.disabled = true;
  countBtn.disabled = true;
  cancelBtn.disabled = true;
  exportBtn.disabled = true;

  const estimatePanel = el("div", "estimate");
  const errorBox = el("div", "error-box");
  const status = el("div", "status", "idle");
  const tableBox = el("div", "table-box");

  const controls = el("div", "controls");
  controls.append(examplePick, submitBtn, runBtn, countBtn, discardBtn, cancelBtn, exportBtn);
  pane.append(editor, controls, estimatePanel, errorBox, status, tableBox);
  container.appendChild(pane);

  const table = new ResultTable(tableBox);
  const tab = session.newTab({
    onEstimate: (t) => {
      renderEstimate(view, t.handle!.estimate!);
      countBtn.disabled = false;
      status.textContent = "estimated — confirm to run";
    },
    onRows: (t, rows) => {
      if (table.columns.length === 0 && t.handle) table.setColumns(t.handle.columns);
      table.append(rows);
      status.textContent = `${t.handle?.rows ?? 0} rows…`;
    },
    onFinished: (t) => {
      const st = t.handle?.status;
      if (!st) return;
      status.textContent = `${st.state} — ${st.rows} rows in ${fmtSeconds(st.elapsed_s)}`;
      if (st.state === "Cancelled") {
        status.appendChild(el("span", "badge cancelled", "Cancelled"));
      }
      if (st.state === "Failed" && st.error) {
        errorBox.textContent = `${st.error.code}: ${st.error.message}`;
      }
      cancelBtn.disabled = true;
      exportBtn.disabled = t.rows.length === 0 && st.state === "Failed";
    },
    onError: (_t, message) => {
      errorBox.textContent = message;
      highlightErrorPosition(editor, message);
      status.textContent = "error";
    },
  });

  const view: TabView = {
    tab, pane, table, status, estimatePanel, runBtn, cancelBtn, exportBtn, editor,
    errorBox,
  };

  submitBtn.onclick = () => {
    errorBox.textContent = "";
    estimatePanel.innerHTML = "";
    table.clear();
    runBtn.disabled = true;
    countBtn.disabled = true;
    exportBtn.disabled = true;
    table.setColumns([]);
    status.textContent = "estimating…";
    tab.submit(editor.value);
  };
  const launch = (countOnly: boolean) => {
    runBtn.disabled = true;
    countBtn.disabled = true;
    cancelBtn.disabled = false;
    exportBtn.disabled = false;
    status.textContent = "running…";
    tab.run(countOnly);
  };
  runBtn.onclick = () => launch(false);
  countBtn.onclick = () => launch(true);
  discardBtn.onclick = () => {
    tab.discard();
    estimatePanel.innerHTML = "";
    runBtn.disabled = true;
    countBtn.disabled = true;
    status.textContent = "discarded";
  };
  cancelBtn.onclick = () => {
    try {
      tab.cancel();
    } catch {
      /* already finished */
    }
  };
  exportBtn.onclick = () => {
    if (!tab.handle) return;
    const bytes = exportCsvBytes(tab.handle);
    const buf = new ArrayBuffer(bytes.length);
    new Uint8Array(buf).set(bytes);
    const blob = new Blob([buf], { type: "text/csv" });
    const a = el("a") as HTMLAnchorElement;
    a.href = URL.createObjectURL(blob);
    a.download = `${view.tab.title.replace(/\s+/g, "_")}.csv`;
    a.click();
    URL.revokeObjectURL(a.href);
  };
  return view;
}

function highlightErrorPosition(editor: HTMLTextAreaElement, message: string) {
  const m = /(\d+):(\d+)/.exec(message);
  if (!m) return;
  const line = parseInt(m[1], 10);
  const col = parseInt(m[2], 10);
  const lines = editor.value.split("\n");
  let pos = 0;
  for (let i = 0; i < line - 1 && i < lines.length; i++) pos += lines[i].length + 1;
  pos += col - 1;
  editor.focus();
  editor.setSelectionRange(pos, Math.min(pos + 1, editor.value.length));
}

function addSessionPanel(root: HTMLElement) {
  const panel = el("div", "session-panel");
  const url = el("input") as HTMLInputElement;
  url.value = `ws://${location.hostname || "127.0.0.1"}:7402`;
  const user = el("input") as HTMLInputElement;
  user.placeholder = "user";
  const password = el("input") as HTMLInputElement;
  password.type = "password";
  password.placeholder = "password";
  const connectBtn = el("button", "", "Connect") as HTMLButtonElement;
  const state = el("span", "conn-state", "disconnected");
  const tabsBox = el("div", "tabs");
  const newTabBtn = el("button", "", "+ tab") as HTMLButtonElement;
  newTabBtn.disabled = true;
  panel.append(url, user, password, connectBtn, state, newTabBtn, tabsBox);
  root.appendChild(panel);

  const session = new ConsoleSession((u) => new WebSocket(u) as never);
  sessions.push(session);
  session.client.onDisconnect = () => {
    state.textContent = "reconnect needed";
    state.className = "conn-state stale";
  };
  connectBtn.onclick = async () => {
    state.textContent = "connecting…";
    try {
      await session.connect(url.value, user.value, password.value);
      state.textContent = `connected (session ${session.client.sessionId})`;
      state.className = "conn-state live";
      newTabBtn.disabled = false;
      if (session.tabs.length === 0) buildTabPane(session, tabsBox);
    } catch (e) {
      state.textContent = `failed: ${e instanceof Error ? e.message : e}`;
      state.className = "conn-state stale";
    }
  };
  newTabBtn.onclick = () => buildTabPane(session, tabsBox);
}

export function start() {
  const root = document.getElementById("app");
  if (!root) return;
  const addServer = el("button", "", "+ server session") as HTMLButtonElement;
  addServer.onclick = () => addSessionPanel(root);
  root.appendChild(addServer);
  addSessionPanel(root);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
