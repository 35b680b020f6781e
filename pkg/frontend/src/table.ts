// Incrementally filled, windowed results table. Row data lives in plain arrays;
// above the virtualization threshold only the visible window is materialized as DOM.

export const VIRTUALIZE_ABOVE = 10_000;
export const ROW_HEIGHT = 22;

export interface Window {
  start: number;
  end: number; // exclusive
  padTop: number;
  padBottom: number;
}

/** Visible row window for a scroll position; pure so it is unit-testable. */
export function computeWindow(
  total: number, scrollTop: number, viewportHeight: number, overscan = 20,
): Window {
  if (total <= VIRTUALIZE_ABOVE) {
    return { start: 0, end: total, padTop: 0, padBottom: 0 };
  }
  const first = Math.max(0, Math.floor(scrollTop / ROW_HEIGHT) - overscan);
  const visible = Math.ceil(viewportHeight / ROW_HEIGHT) + 2 * overscan;
  const end = Math.min(total, first + visible);
  return {
    start: first,
    end,
    padTop: first * ROW_HEIGHT,
    padBottom: (total - end) * ROW_HEIGHT,
  };
}

export class ResultTable {
  rows: string[][] = [];
  columns: string[] = [];
  private container: HTMLElement | null;
  private scroller: HTMLElement | null = null;
  private tbody: HTMLElement | null = null;
  private header: HTMLElement | null = null;
  private raf = 0;

  constructor(container: HTMLElement | null) {
    this.container = container;
    if (container) this.mount(container);
  }

  private mount(container: HTMLElement) {
    container.innerHTML = "";
    const scroller = document.createElement("div");
    scroller.className = "table-scroller";
    const table = document.createElement("table");
    this.header = document.createElement("thead");
    this.tbody = document.createElement("tbody");
    table.appendChild(this.header);
    table.appendChild(this.tbody);
    scroller.appendChild(table);
    container.appendChild(scroller);
    scroller.addEventListener("scroll", () => this.scheduleRender());
    this.scroller = scroller;
  }

  setColumns(columns: string[]) {
    this.columns = columns;
    if (this.header) {
      this.header.innerHTML =
        "<tr>" + columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("") + "</tr>";
    }
  }

  append(rows: string[][]) {
    this.rows.push(...rows);
    this.scheduleRender();
  }

  clear() {
    this.rows = [];
    if (this.tbody) this.tbody.innerHTML = "";
  }

  private scheduleRender() {
    if (!this.scroller || this.raf) return;
    this.raf = requestAnimationFrame(() => {
      this.raf = 0;
      this.render();
    });
  }

  render() {
    if (!this.scroller || !this.tbody) return;
    const w = computeWindow(
      this.rows.length, this.scroller.scrollTop, this.scroller.clientHeight);
    const parts: string[] = [];
    if (w.padTop) {
      parts.push(`<tr style="height:${w.padTop}px"><td colspan="${this.columns.length}"></td></tr>`);
    }
    for (let i = w.start; i < w.end; i++) {
      parts.push("<tr>" + this.rows[i].map((v) => `<td>${escapeHtml(v)}</td>`).join("") + "</tr>");
    }
    if (w.padBottom) {
      parts.push(`<tr style="height:${w.padBottom}px"><td colspan="${this.columns.length}"></td></tr>`);
    }
    this.tbody.innerHTML = parts.join("");
  }
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
