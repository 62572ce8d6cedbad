/**
 * Parse the plain-text job report into structured data.
 *
 * Report layout: a title line, `application=<name>`, an indented `[spec]`
 * echo, `[dataset]` key=value pairs, zero or more `[<section>]` tables
 * (one comma-joined header line, then rows; cells never contain commas or
 * newlines by construction), and an optional `[metrics]` key=value block.
 */

export interface ReportTable {
  header: string[];
  rows: string[][];
}

export interface ParsedReport {
  application: string;
  specText: string;
  dataset: Record<string, string>;
  warnings: string[];
  sections: Map<string, ReportTable>;
  metrics: Record<string, string>;
}

const KV_BLOCKS = new Set(["dataset", "metrics"]);

export function parseReport(text: string): ParsedReport {
  const report: ParsedReport = {
    application: "",
    specText: "",
    dataset: {},
    warnings: [],
    sections: new Map(),
    metrics: {},
  };
  let block: string | null = null;
  let table: ReportTable | null = null;
  const specLines: string[] = [];

  for (const line of text.split("\n")) {
    if (line.startsWith("application=") && block === null) {
      report.application = line.slice("application=".length);
      continue;
    }
    const heading = /^\[([a-z_]+)\]$/.exec(line);
    if (heading !== null) {
      block = heading[1]!;
      table = null;
      if (!KV_BLOCKS.has(block) && block !== "spec") {
        table = { header: [], rows: [] };
        report.sections.set(block, table);
      }
      continue;
    }
    if (block === null || line === "") continue;
    if (block === "spec") {
      specLines.push(line.startsWith("  ") ? line.slice(2) : line);
    } else if (KV_BLOCKS.has(block)) {
      const eq = line.indexOf("=");
      if (eq < 0) continue;
      const key = line.slice(0, eq);
      const value = line.slice(eq + 1);
      if (key === "warning") {
        report.warnings.push(value);
      } else if (block === "dataset") {
        report.dataset[key] = value;
      } else {
        report.metrics[key] = value;
      }
    } else if (table !== null) {
      const cells = line.split(",");
      if (table.header.length === 0) {
        table.header = cells;
      } else {
        table.rows.push(cells);
      }
    }
  }
  report.specText = specLines.join("\n");
  return report;
}

/** Read one spec field out of the sorted-key echo, e.g. "bucket_seconds". */
export function specEchoValue(specText: string, key: string): string | null {
  for (const line of specText.split("\n")) {
    const trimmed = line.trim();
    if (trimmed.startsWith(`${key}:`)) {
      return trimmed.slice(key.length + 1).trim();
    }
  }
  return null;
}
