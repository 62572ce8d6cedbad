/**
 * Result views.
 *
 * Each view is a pure function from a parsed report (plus UI selection
 * state) to an HTML string, so rendering is snapshot-testable without a
 * browser. Drill-down targets carry data-* attributes the shell wires to
 * click handlers.
 */

import type { ParsedReport, ReportTable } from "./report.js";
import { specEchoValue } from "./report.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function td(value: string, cls?: string): string {
  return cls === undefined
    ? `<td>${escapeHtml(value)}</td>`
    : `<td class="${cls}">${escapeHtml(value)}</td>`;
}

function metricsFooter(report: ParsedReport): string {
  const entries = Object.entries(report.metrics);
  if (entries.length === 0) return "";
  const cells = entries
    .map(([key, value]) => `<span class="metric">${escapeHtml(key)}=${escapeHtml(value)}</span>`)
    .join(" ");
  return `<footer class="metrics">${cells}</footer>`;
}

// -- summarize ------------------------------------------------------------

export interface SummaryRow {
  templateId: string;
  template: string;
  count: number;
  firstSeen: string;
  lastSeen: string;
  examples: string[];
}

export type SummarySortKey = "template_id" | "count" | "template";

export function summaryRows(
  report: ParsedReport,
  sortKey: SummarySortKey = "template_id",
): SummaryRow[] {
  const table = report.sections.get("summary");
  if (table === undefined) return [];
  const rows = table.rows.map((cells) => ({
    templateId: cells[0] ?? "",
    template: cells[1] ?? "",
    count: Number(cells[2] ?? "0"),
    firstSeen: cells[3] ?? "",
    lastSeen: cells[4] ?? "",
    examples: (cells[5] ?? "-") === "-" ? [] : (cells[5] ?? "").split(" | "),
  }));
  const compare: Record<SummarySortKey, (a: SummaryRow, b: SummaryRow) => number> = {
    template_id: (a, b) => Number(a.templateId) - Number(b.templateId),
    count: (a, b) => b.count - a.count,
    template: (a, b) => a.template.localeCompare(b.template),
  };
  return rows.sort(compare[sortKey]);
}

/** Sortable template table; the selected row expands parameter examples. */
export function renderSummaryView(
  report: ParsedReport,
  sortKey: SummarySortKey = "template_id",
  expandedId: string | null = null,
): string {
  const rows = summaryRows(report, sortKey);
  const body = rows
    .map((row) => {
      const expanded = row.templateId === expandedId;
      const main =
        `<tr class="template-row" data-template-id="${escapeHtml(row.templateId)}">` +
        td(row.templateId) + td(row.template, "template") + td(String(row.count)) +
        td(row.firstSeen) + td(row.lastSeen) + "</tr>";
      if (!expanded) return main;
      const examples = row.examples.length === 0
        ? "<em>no parameters</em>"
        : row.examples.map((e) => `<code>${escapeHtml(e)}</code>`).join("<br>");
      return main +
        `<tr class="examples-row"><td colspan="5">${examples}</td></tr>`;
    })
    .join("");
  const sortHeader = (key: SummarySortKey, label: string): string =>
    `<th><button class="sort" data-sort-key="${key}">${label}</button></th>`;
  return (
    `<table class="summary">` +
    `<thead><tr>${sortHeader("template_id", "id")}${sortHeader("template", "template")}` +
    `${sortHeader("count", "count")}<th>first seen</th><th>last seen</th></tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    metricsFooter(report)
  );
}

// -- cluster --------------------------------------------------------------

export interface ClusterRow {
  cluster: string;
  size: number;
  topTemplates: string[];
}

export function clusterRows(report: ParsedReport): ClusterRow[] {
  const table = report.sections.get("clusters");
  if (table === undefined) return [];
  return table.rows.map((cells) => ({
    cluster: cells[0] ?? "",
    size: Number(cells[1] ?? "0"),
    topTemplates: (cells[2] ?? "-") === "-" ? [] : (cells[2] ?? "").split(" | "),
  }));
}

/** Cluster size bars; clicking a bar expands that cluster's templates. */
export function renderClusterView(
  report: ParsedReport,
  selectedCluster: string | null = null,
): string {
  const rows = clusterRows(report);
  const maxSize = Math.max(1, ...rows.map((row) => row.size));
  const bars = rows
    .map((row) => {
      const width = Math.round((row.size / maxSize) * 100);
      const label = row.cluster === "-1" ? "noise" : `cluster ${row.cluster}`;
      const selected = row.cluster === selectedCluster ? " selected" : "";
      return (
        `<div class="cluster-bar${selected}" data-cluster-id="${escapeHtml(row.cluster)}">` +
        `<span class="label">${escapeHtml(label)}</span>` +
        `<span class="bar" style="width:${width}%"></span>` +
        `<span class="size">${row.size}</span></div>`
      );
    })
    .join("");
  const selected = rows.find((row) => row.cluster === selectedCluster);
  const drilldown =
    selected === undefined
      ? ""
      : `<section class="drilldown"><h3>${
          selected.cluster === "-1" ? "noise" : `cluster ${escapeHtml(selected.cluster)}`
        } templates</h3><ul>${
          selected.topTemplates.length === 0
            ? "<li><em>no templates</em></li>"
            : selected.topTemplates
                .map((t) => `<li><code>${escapeHtml(t)}</code></li>`)
                .join("")
        }</ul></section>`;
  return `<div class="clusters">${bars}</div>${drilldown}${metricsFooter(report)}`;
}

// -- anomalies ------------------------------------------------------------

export interface AnomalyRow {
  rowId: string;
  score: number;
  flagged: boolean;
}

export function anomalyRows(report: ParsedReport): AnomalyRow[] {
  const table = report.sections.get("anomalies");
  if (table === undefined) return [];
  return table.rows.map((cells) => ({
    rowId: cells[0] ?? "",
    score: Number(cells[1] ?? "0"),
    flagged: cells[2] === "1",
  }));
}

function isCounterTimeline(rows: AnomalyRow[]): boolean {
  return rows.length > 0 && rows.every((row) => !Number.isNaN(Date.parse(row.rowId)));
}

/**
 * Counter reports render as a timeline with flagged buckets highlighted;
 * partition reports render as a score table. Both mark the selected row,
 * and the caller supplies drill-down loglines for it (from the uploaded
 * dataset for buckets, or the report's partition ids).
 */
export function renderAnomalyView(
  report: ParsedReport,
  selectedRowId: string | null = null,
  drilldownLines: string[] | null = null,
): string {
  const rows = anomalyRows(report);
  const timeline = isCounterTimeline(rows);
  const maxScore = Math.max(1e-9, ...rows.map((row) => row.score));
  const items = rows
    .map((row) => {
      const classes = ["anomaly-row"];
      if (row.flagged) classes.push("flagged");
      if (row.rowId === selectedRowId) classes.push("selected");
      if (timeline) {
        const height = Math.max(2, Math.round((row.score / maxScore) * 100));
        return (
          `<div class="${classes.join(" ")}" data-row-id="${escapeHtml(row.rowId)}" ` +
          `title="${escapeHtml(row.rowId)} score=${row.score}">` +
          `<span class="bar" style="height:${height}%"></span></div>`
        );
      }
      return (
        `<tr class="${classes.join(" ")}" data-row-id="${escapeHtml(row.rowId)}">` +
        td(row.rowId) + td(row.score.toFixed(6)) + td(row.flagged ? "flagged" : "") + "</tr>"
      );
    })
    .join("");
  const body = timeline
    ? `<div class="timeline">${items}</div>`
    : `<table class="anomalies"><thead><tr><th>partition</th><th>score</th><th></th></tr></thead>` +
      `<tbody>${items}</tbody></table>`;
  const drilldown =
    selectedRowId === null || drilldownLines === null
      ? ""
      : `<section class="drilldown"><h3>${escapeHtml(selectedRowId)}</h3><pre>${
          drilldownLines.map(escapeHtml).join("\n")
        }</pre></section>`;
  return body + drilldown + metricsFooter(report);
}

/**
 * Loglines of one time bucket, recovered from the uploaded dataset with
 * the same line pattern the job used. Falls back to every line when the
 * pattern has no timestamp group.
 */
export function bucketLoglines(
  rawText: string,
  linePattern: string | null,
  bucketStartIso: string,
  bucketSeconds: number,
): string[] {
  const bucketStart = Date.parse(bucketStartIso) / 1000;
  const lines = rawText.split("\n").filter((line) => line.trim() !== "");
  if (linePattern === null || !linePattern.includes("timestamp")) {
    return lines;
  }
  // the service accepts python-style named groups; JS spells them (?<name>
  const jsPattern = linePattern.replace(/\(\?P</g, "(?<");
  let regex: RegExp;
  try {
    regex = new RegExp(jsPattern);
  } catch {
    return lines;
  }
  return lines.filter((line) => {
    const match = regex.exec(line);
    const raw = match?.groups?.["timestamp"];
    if (raw === undefined) return false;
    const epoch = /^\d+(\.\d+)?$/.test(raw) ? Number(raw) : Date.parse(raw) / 1000;
    if (Number.isNaN(epoch)) return false;
    return Math.floor(epoch / bucketSeconds) * bucketSeconds === bucketStart;
  });
}

/** bucket_seconds as echoed in the job's spec, for drill-down bucketing. */
export function bucketSecondsOf(report: ParsedReport): number {
  const value = specEchoValue(report.specText, "bucket_seconds");
  const parsed = value === null ? NaN : Number(value);
  return Number.isNaN(parsed) ? 60 : parsed;
}

// -- status ---------------------------------------------------------------

export function renderStatus(
  state: string | null,
  error: string | null = null,
): string {
  if (state === null) return "";
  if (state === "failed") {
    return `<div class="status failed">job failed: ${escapeHtml(error ?? "unknown error")}</div>`;
  }
  if (state === "queued" || state === "running") {
    return `<div class="status running"><span class="spinner"></span>${escapeHtml(state)}…</div>`;
  }
  return `<div class="status done">${escapeHtml(state)}</div>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}

export function renderFieldErrors(messages: string[]): string {
  if (messages.length === 0) return "";
  return `<ul class="field-errors">${messages
    .map((m) => `<li>${escapeHtml(m)}</li>`)
    .join("")}</ul>`;
}

export function renderReport(
  report: ParsedReport,
  selection: { sortKey?: SummarySortKey; expandedId?: string | null;
               cluster?: string | null; rowId?: string | null;
               drilldownLines?: string[] | null } = {},
): string {
  switch (report.application) {
    case "summarize":
      return renderSummaryView(report, selection.sortKey ?? "template_id",
        selection.expandedId ?? null);
    case "cluster":
      return renderClusterView(report, selection.cluster ?? null);
    default:
      return renderAnomalyView(report, selection.rowId ?? null,
        selection.drilldownLines ?? null);
  }
}

export function tableRowCount(html: string): number {
  return (html.match(/<tr class="template-row"/g) ?? []).length;
}
