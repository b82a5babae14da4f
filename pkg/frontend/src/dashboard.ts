/**
 * Live report dashboard: poll the server, re-render only on new data.
 *
 * Every number and chart shown here comes verbatim from the server
 * response; this module formats, it never aggregates. Charts are the
 * server's SVG documents injected as-is.
 */

import { ApiClient, ApiError, Report, ReportBlock } from "./api.js";

export interface DashboardState {
  lastVersion: number;
  report: Report | null;
  stale: boolean;
  denied: boolean;
  pollingMs: number;
  inFlight: boolean;
}

export function initDashboardState(pollingMs = 3000): DashboardState {
  return {
    lastVersion: -1,
    report: null,
    stale: false,
    denied: false,
    pollingMs,
    inFlight: false,
  };
}

function numberCell(value: unknown): string {
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : value.toFixed(3);
  }
  return String(value);
}

function tableElement(headers: string[], rows: unknown[][]): HTMLTableElement {
  const table = document.createElement("table");
  const head = document.createElement("tr");
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = document.createElement("tr");
    for (const cell of row) {
      const td = document.createElement("td");
      td.textContent = numberCell(cell);
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  return table;
}

function frequencyTableElement(table: Record<string, any>): HTMLTableElement {
  const rows = (table.categories as string[]).map((category, i) => [
    category,
    table.counts[i],
    table.total > 0 ? table.proportions[i] : "-",
  ]);
  return tableElement(["category", "count", "share"], rows);
}

function summaryTableElement(summary: Record<string, any>): HTMLTableElement {
  const keys = ["n", "mean", "sd", "min", "q1", "median", "q3", "max"];
  return tableElement(keys, [keys.map((k) => summary[k])]);
}

function appendCharts(panel: HTMLElement, block: ReportBlock): void {
  for (const [name, svg] of Object.entries(block.charts)) {
    const holder = document.createElement("div");
    holder.className = `chart chart-${name}`;
    holder.innerHTML = svg; // server-rendered SVG displayed verbatim
    panel.appendChild(holder);
  }
}

function blockBody(panel: HTMLElement, block: ReportBlock): void {
  if (block.status === "empty") {
    const note = document.createElement("p");
    note.className = "placeholder";
    note.textContent = "no data yet";
    panel.appendChild(note);
    return;
  }
  if (block.status === "error") {
    const note = document.createElement("p");
    note.className = "block-error";
    note.textContent = block.detail ?? "analysis failed";
    panel.appendChild(note);
    return;
  }
  const result = block.result ?? {};
  switch (block.kind) {
    case "likert": {
      appendCharts(panel, block);
      panel.appendChild(frequencyTableElement(result.table));
      if (result.summary) panel.appendChild(summaryTableElement(result.summary));
      break;
    }
    case "frequency": {
      appendCharts(panel, block);
      panel.appendChild(frequencyTableElement(result.table));
      break;
    }
    case "summary": {
      if (result.summary) {
        panel.appendChild(summaryTableElement(result.summary));
      } else {
        const note = document.createElement("p");
        note.className = "placeholder";
        note.textContent = "no numeric answers yet";
        panel.appendChild(note);
      }
      break;
    }
    case "crosstab": {
      const table = result.table;
      const rows = (table.row_categories as string[]).map((row, i) => [
        row,
        ...table.cells[i],
        table.row_margins[i],
      ]);
      rows.push(["total", ...table.col_margins, table.total]);
      panel.appendChild(
        tableElement(["", ...(table.col_categories as string[]), "total"], rows),
      );
      break;
    }
    case "xbar_r": {
      appendCharts(panel, block);
      const limits = [
        ["X-bar", result.xbar_limits.lcl, result.xbar_limits.cl, result.xbar_limits.ucl],
        ["R", result.r_limits.lcl, result.r_limits.cl, result.r_limits.ucl],
      ];
      panel.appendChild(tableElement(["chart", "LCL", "CL", "UCL"], limits));
      break;
    }
    case "pca": {
      appendCharts(panel, block);
      const rows = (result.eigenvalues as number[]).map((value, i) => [
        `PC${i + 1}`,
        value,
        result.explained[i],
      ]);
      panel.appendChild(tableElement(["component", "eigenvalue", "explained"], rows));
      break;
    }
    default: {
      const note = document.createElement("p");
      note.className = "unknown-kind";
      note.textContent = `unsupported block kind: ${block.kind}`;
      panel.appendChild(note);
    }
  }
}

/** Render a full report: one panel per block, in server order. */
export function renderDashboard(container: HTMLElement, report: Report): void {
  container.innerHTML = "";
  const header = document.createElement("div");
  header.className = "dashboard-header";
  const version = document.createElement("span");
  version.className = "data-version";
  version.textContent = `data version ${report.data_version}`;
  header.appendChild(version);
  container.appendChild(header);

  for (const block of report.blocks) {
    const panel = document.createElement("section");
    panel.className = `panel panel-${block.status}`;
    panel.dataset.kind = block.kind;
    const title = document.createElement("h2");
    title.textContent = block.title;
    panel.appendChild(title);
    blockBody(panel, block);
    container.appendChild(panel);
  }
}

export function setStaleBadge(container: HTMLElement, stale: boolean): void {
  let badge = container.querySelector<HTMLElement>(".stale-badge");
  if (stale) {
    if (!badge) {
      badge = document.createElement("span");
      badge.className = "stale-badge";
      badge.textContent = "connection lost; showing last known data";
      container.prepend(badge);
    }
  } else if (badge) {
    badge.remove();
  }
}

/**
 * One poll: fetch the report and re-render only when data_version moved
 * forward. Concurrent polls are deduplicated (at most one in flight); the
 * displayed version never decreases.
 */
export async function pollReport(
  api: ApiClient,
  questionnaireId: string,
  session: string,
  state: DashboardState,
  container: HTMLElement,
): Promise<void> {
  if (state.inFlight || state.denied) return;
  state.inFlight = true;
  try {
    const report = await api.getReport(questionnaireId, session);
    state.stale = false;
    if (report.data_version > state.lastVersion) {
      state.lastVersion = report.data_version;
      state.report = report;
      renderDashboard(container, report);
    }
    setStaleBadge(container, false);
  } catch (err) {
    if (err instanceof ApiError && err.status === 403) {
      state.denied = true;
      container.innerHTML = "";
      const note = document.createElement("p");
      note.className = "denied";
      note.textContent = "Access denied: your credential cannot view this report.";
      container.appendChild(note);
    } else {
      state.stale = true;
      setStaleBadge(container, true);
    }
  } finally {
    state.inFlight = false;
  }
}

export function startPolling(
  api: ApiClient,
  questionnaireId: string,
  session: string,
  state: DashboardState,
  container: HTMLElement,
): number {
  void pollReport(api, questionnaireId, session, state, container);
  return window.setInterval(
    () => void pollReport(api, questionnaireId, session, state, container),
    state.pollingMs,
  );
}
