/**
 * Form <-> spec-document serialization.
 *
 * Covers: exact documents emitted per application, client-side validation
 * wording (kept identical to the service's 400 payloads, cross-checked
 * against a recorded pair), and round-trips in both directions.
 */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  CLUSTER_ALGORITHMS,
  DETECTORS,
  FormInvalid,
  LOADER_FORMATS,
  PARSER_ALGORITHMS,
  SEQUENCE_STRATEGIES,
  buildSpec,
  defaultForm,
  parseSpecDocument,
  specToForm,
  validateForm,
  type ClusterForm,
  type DetectForm,
  type Form,
  type SpecDocument,
  type SummarizeForm,
} from "../src/spec.js";

const pairs = JSON.parse(
  readFileSync(new URL("./fixtures/contract-pairs.json", import.meta.url), "utf8"),
) as Array<{
  name: string;
  request: { method: string; path: string; json?: unknown };
  response: { status: number; json?: unknown };
}>;

function pair(name: string) {
  const found = pairs.find((p) => p.name === name);
  if (found === undefined) throw new Error(`no recorded pair named ${name}`);
  return found;
}

function summarizeForm(): SummarizeForm {
  const form = defaultForm("summarize") as SummarizeForm;
  form.dataset = "dataset:0123456789abcdef";
  return form;
}

function clusterForm(): ClusterForm {
  const form = defaultForm("cluster") as ClusterForm;
  form.dataset = "dataset:0123456789abcdef";
  return form;
}

function detectForm(): DetectForm {
  const form = defaultForm("detect") as DetectForm;
  form.dataset = "dataset:0123456789abcdef";
  return form;
}

describe("buildSpec", () => {
  it("summarize emits only loader and parser", () => {
    const form = summarizeForm();
    form.algorithm = "iplom";
    expect(buildSpec(form)).toStrictEqual({
      application: "summarize",
      loader: { path: "dataset:0123456789abcdef" },
      parser: { algorithm: "iplom" },
    });
  });

  it("non-default loader fields are forwarded", () => {
    const form = summarizeForm();
    form.format = "csv";
    form.linePattern = "(?P<timestamp>\\d+) (?P<body>.*)";
    expect(buildSpec(form).loader).toStrictEqual({
      path: "dataset:0123456789abcdef",
      format: "csv",
      line_pattern: "(?P<timestamp>\\d+) (?P<body>.*)",
    });
  });

  it("cluster kmeans emits drain + tfidf + k", () => {
    const form = clusterForm();
    form.k = 7;
    expect(buildSpec(form)).toStrictEqual({
      application: "cluster",
      loader: { path: "dataset:0123456789abcdef" },
      parser: { algorithm: "drain" },
      representation: { kind: "tfidf" },
      analysis: { algorithm: "kmeans", k: 7 },
    });
  });

  it("cluster dbscan emits eps and min_pts instead of k", () => {
    const form = clusterForm();
    form.algorithm = "dbscan";
    form.eps = 0.75;
    form.minPts = 4;
    expect(buildSpec(form).analysis).toStrictEqual({
      algorithm: "dbscan",
      eps: 0.75,
      min_pts: 4,
    });
  });

  it("counter detectors emit counters with bucket_seconds", () => {
    const form = detectForm();
    form.detector = "ewma";
    form.bucketSeconds = 300;
    expect(buildSpec(form)).toStrictEqual({
      application: "detect_anomaly",
      loader: { path: "dataset:0123456789abcdef" },
      representation: { kind: "counters", bucket_seconds: 300 },
      analysis: { algorithm: "ewma" },
    });
  });

  it("sequence detector emits parser, partition and sequential", () => {
    const form = detectForm();
    form.detector = "ngram_topk";
    form.order = 3;
    form.topK = 5;
    form.strategy = "time_window";
    form.duration = 21600;
    expect(buildSpec(form)).toStrictEqual({
      application: "detect_anomaly",
      loader: { path: "dataset:0123456789abcdef" },
      parser: { algorithm: "drain" },
      partition: { strategy: "time_window", duration: 21600 },
      representation: { kind: "sequential" },
      analysis: { algorithm: "ngram_topk", order: 3, top_k: 5 },
    });
  });

  it("point detectors emit tfidf", () => {
    const form = detectForm();
    form.detector = "lof";
    expect(buildSpec(form)).toStrictEqual({
      application: "detect_anomaly",
      loader: { path: "dataset:0123456789abcdef" },
      representation: { kind: "tfidf" },
      analysis: { algorithm: "lof" },
    });
  });

  it("entity pattern becomes the adapter section", () => {
    const form = detectForm();
    form.strategy = "identifier";
    form.entityPattern = "(blk_-?\\d+)";
    expect(buildSpec(form).adapter).toStrictEqual({ id_pattern: "(blk_-?\\d+)" });
    expect(buildSpec(form).partition).toStrictEqual({ strategy: "identifier" });
  });
});

describe("validateForm", () => {
  it("requires a dataset", () => {
    const form = defaultForm("summarize");
    expect(validateForm(form)).toStrictEqual([
      { field: "loader.path", message: "loader.path: required" },
    ]);
  });

  it("kmeans k below one mirrors the service's wording exactly", () => {
    const form = clusterForm();
    form.k = 0;
    const messages = validateForm(form).map((e) => e.message);
    const recorded = pair("rejected").response.json as { errors: string[] };
    expect(messages).toStrictEqual(recorded.errors);
  });

  it("dbscan needs positive eps and min_pts >= 1", () => {
    const form = clusterForm();
    form.algorithm = "dbscan";
    form.eps = 0;
    form.minPts = 0;
    expect(validateForm(form).map((e) => e.message)).toStrictEqual([
      "analysis.eps: must be positive",
      "analysis.min_pts: must be >= 1",
    ]);
  });

  it("counter detectors need a positive bucket size", () => {
    const form = detectForm();
    form.detector = "ets_additive";
    form.bucketSeconds = 0;
    expect(validateForm(form).map((e) => e.message)).toStrictEqual([
      "representation.bucket_seconds: must be positive",
    ]);
  });

  it("sequence detector checks order, top_k and the partition shape", () => {
    const form = detectForm();
    form.order = 0;
    form.topK = 0;
    form.windowSize = 0;
    expect(validateForm(form).map((e) => e.message)).toStrictEqual([
      "analysis.order: must be >= 1",
      "analysis.top_k: must be >= 1",
      "partition.window_size: must be a positive integer",
    ]);
    form.order = 2;
    form.topK = 3;
    form.strategy = "time_window";
    form.duration = 0;
    expect(validateForm(form).map((e) => e.message)).toStrictEqual([
      "partition.duration: must be a positive time span",
    ]);
  });

  it("rules for inactive algorithms never fire", () => {
    const form = clusterForm();
    form.algorithm = "kmeans";
    form.eps = 0; // dbscan-only field left invalid on purpose
    form.minPts = 0;
    expect(validateForm(form)).toStrictEqual([]);
  });

  it("buildSpec refuses invalid forms so they never reach the network", () => {
    const form = clusterForm();
    form.k = 0;
    expect(() => buildSpec(form)).toThrowError(FormInvalid);
    try {
      buildSpec(form);
    } catch (error) {
      expect((error as FormInvalid).errors).toStrictEqual([
        { field: "analysis.k", message: "analysis.k: must be >= 1" },
      ]);
    }
  });
});

// -- round trips ------------------------------------------------------------

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function pick<T>(rand: () => number, values: readonly T[]): T {
  return values[Math.floor(rand() * values.length)]!;
}

function randInt(rand: () => number, lo: number, hi: number): number {
  return lo + Math.floor(rand() * (hi - lo + 1));
}

/**
 * A random *canonical* form: fields its application/algorithm actually use
 * get random valid values, all inactive fields stay at their defaults.
 * Canonical forms are exactly the ones specToForm can reconstruct.
 */
function randomCanonicalForm(rand: () => number): Form {
  const app = pick(rand, ["summarize", "cluster", "detect"] as const);
  const form = defaultForm(app);
  form.dataset = `dataset:${randInt(rand, 0, 0xffff).toString(16).padStart(16, "0")}`;
  form.format = pick(rand, LOADER_FORMATS);
  form.linePattern = rand() < 0.5 ? "" : "(?P<timestamp>\\d+) (?P<body>.*)";
  if (form.app === "summarize") {
    form.algorithm = pick(rand, PARSER_ALGORITHMS);
  } else if (form.app === "cluster") {
    form.algorithm = pick(rand, CLUSTER_ALGORITHMS);
    if (form.algorithm === "kmeans") {
      form.k = randInt(rand, 1, 12);
    } else {
      form.eps = randInt(rand, 1, 40) / 10;
      form.minPts = randInt(rand, 1, 9);
    }
  } else {
    form.detector = pick(rand, DETECTORS);
    if (rand() < 0.4) form.entityPattern = "(blk_-?\\d+)";
    if (form.detector === "ewma" || form.detector === "ets_additive") {
      form.bucketSeconds = randInt(rand, 1, 7200);
    } else if (form.detector === "ngram_topk") {
      form.order = randInt(rand, 1, 4);
      form.topK = randInt(rand, 1, 10);
      form.strategy = pick(rand, SEQUENCE_STRATEGIES);
      if (form.strategy === "fixed_window" || form.strategy === "sliding_window") {
        form.windowSize = randInt(rand, 1, 500);
      } else if (form.strategy === "time_window") {
        form.duration = randInt(rand, 60, 86400);
      }
    }
  }
  return form;
}

describe("round trips", () => {
  it("specToForm inverts buildSpec for canonical forms", () => {
    const rand = mulberry32(20260814);
    for (let trial = 0; trial < 200; trial += 1) {
      const form = randomCanonicalForm(rand);
      expect(specToForm(buildSpec(form))).toStrictEqual(form);
    }
  });

  it("buildSpec inverts specToForm for documents the portal emits", () => {
    const rand = mulberry32(42);
    for (let trial = 0; trial < 200; trial += 1) {
      const doc = buildSpec(randomCanonicalForm(rand));
      expect(buildSpec(specToForm(doc))).toStrictEqual(doc);
    }
  });

  it("round-trips the recorded live submission", () => {
    const doc = parseSpecDocument(pair("submit").request.json);
    expect(buildSpec(specToForm(doc))).toStrictEqual(doc);
  });

  it("round-trips handwritten documents per application", () => {
    const docs: SpecDocument[] = [
      {
        application: "cluster",
        loader: { path: "dataset:0123456789abcdef", format: "csv" },
        parser: { algorithm: "drain" },
        representation: { kind: "tfidf" },
        analysis: { algorithm: "dbscan", eps: 0.75, min_pts: 4 },
      },
      {
        application: "detect_anomaly",
        loader: {
          path: "dataset:0123456789abcdef",
          line_pattern: "(?P<timestamp>\\d+) (?P<body>.*)",
        },
        representation: { kind: "counters", bucket_seconds: 300 },
        analysis: { algorithm: "ewma" },
      },
      {
        application: "detect_anomaly",
        loader: { path: "dataset:0123456789abcdef" },
        adapter: { id_pattern: "(blk_-?\\d+)" },
        parser: { algorithm: "drain" },
        partition: { strategy: "identifier" },
        representation: { kind: "sequential" },
        analysis: { algorithm: "ngram_topk", order: 2, top_k: 5 },
      },
    ];
    for (const doc of docs) {
      expect(buildSpec(specToForm(doc))).toStrictEqual(doc);
    }
  });
});

describe("parseSpecDocument", () => {
  it("accepts the recorded submission", () => {
    expect(() => parseSpecDocument(pair("submit").request.json)).not.toThrow();
  });

  it("rejects unknown applications and malformed sections", () => {
    expect(() => parseSpecDocument({ application: "benchmark", loader: { path: "x" } }))
      .toThrow();
    expect(() => parseSpecDocument({ application: "summarize" })).toThrow();
    expect(() =>
      parseSpecDocument({
        application: "summarize",
        loader: { path: "x" },
        parser: { algorithm: "regex" },
      }),
    ).toThrow();
  });
});
