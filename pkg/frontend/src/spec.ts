/**
 * Form model and job-spec documents.
 *
 * The portal edits flat per-application forms and serializes them to the
 * JSON spec documents the service accepts. Only fields the forms control
 * are ever emitted, and client-side validation mirrors the server's
 * field-error strings so inline errors read identically to a 400 payload.
 */

import { z } from "zod";

export const PARSER_ALGORITHMS = ["drain", "iplom", "ael"] as const;
export const LOADER_FORMATS = ["log", "csv", "tsv", "json"] as const;
export const CLUSTER_ALGORITHMS = ["kmeans", "dbscan"] as const;
export const DETECTORS = ["ewma", "ets_additive", "iforest", "lof", "ngram_topk"] as const;
export const SEQUENCE_STRATEGIES = ["fixed_window", "sliding_window", "time_window", "identifier"] as const;

export type ParserAlgorithm = (typeof PARSER_ALGORITHMS)[number];
export type LoaderFormat = (typeof LOADER_FORMATS)[number];
export type ClusterAlgorithm = (typeof CLUSTER_ALGORITHMS)[number];
export type Detector = (typeof DETECTORS)[number];
export type SequenceStrategy = (typeof SEQUENCE_STRATEGIES)[number];

interface FormBase {
  /** dataset handle (dataset:<id>) or server-visible path */
  dataset: string;
  format: LoaderFormat;
  /** optional named-group regex forwarded verbatim to the loader */
  linePattern: string;
}

export interface SummarizeForm extends FormBase {
  app: "summarize";
  algorithm: ParserAlgorithm;
}

export interface ClusterForm extends FormBase {
  app: "cluster";
  algorithm: ClusterAlgorithm;
  k: number;
  eps: number;
  minPts: number;
}

export interface DetectForm extends FormBase {
  app: "detect";
  detector: Detector;
  /** counters */
  bucketSeconds: number;
  /** sequence detector */
  order: number;
  topK: number;
  strategy: SequenceStrategy;
  windowSize: number;
  duration: number;
  entityPattern: string;
}

export type Form = SummarizeForm | ClusterForm | DetectForm;
export type AppName = Form["app"];

export function defaultForm(app: AppName): Form {
  const base: FormBase = { dataset: "", format: "log", linePattern: "" };
  switch (app) {
    case "summarize":
      return { app, ...base, algorithm: "drain" };
    case "cluster":
      return { app, ...base, algorithm: "kmeans", k: 3, eps: 0.5, minPts: 5 };
    case "detect":
      return {
        app, ...base, detector: "ngram_topk", bucketSeconds: 60, order: 2,
        topK: 10, strategy: "fixed_window", windowSize: 100, duration: 3600,
        entityPattern: "",
      };
  }
}

/** One inline error, same shape the service returns in a 400 payload. */
export interface FieldError {
  field: string;
  message: string;
}

function err(field: string, message: string): FieldError {
  return { field, message };
}

/**
 * Local validation. Every message matches the server's wording for the
 * same rule so an inline error and a mirrored 400 read identically.
 */
export function validateForm(form: Form): FieldError[] {
  const errors: FieldError[] = [];
  if (form.dataset.trim() === "") {
    errors.push(err("loader.path", "loader.path: required"));
  }
  if (form.app === "cluster") {
    if (form.algorithm === "kmeans" && form.k < 1) {
      errors.push(err("analysis.k", "analysis.k: must be >= 1"));
    }
    if (form.algorithm === "dbscan") {
      if (!(form.eps > 0)) errors.push(err("analysis.eps", "analysis.eps: must be positive"));
      if (form.minPts < 1) errors.push(err("analysis.min_pts", "analysis.min_pts: must be >= 1"));
    }
  }
  if (form.app === "detect") {
    if (form.detector === "ewma" || form.detector === "ets_additive") {
      if (!(form.bucketSeconds > 0)) {
        errors.push(err("representation.bucket_seconds",
          "representation.bucket_seconds: must be positive"));
      }
    }
    if (form.detector === "ngram_topk") {
      if (form.order < 1) errors.push(err("analysis.order", "analysis.order: must be >= 1"));
      if (form.topK < 1) errors.push(err("analysis.top_k", "analysis.top_k: must be >= 1"));
      if ((form.strategy === "fixed_window" || form.strategy === "sliding_window")
          && form.windowSize < 1) {
        errors.push(err("partition.window_size",
          "partition.window_size: must be a positive integer"));
      }
      if (form.strategy === "time_window" && !(form.duration > 0)) {
        errors.push(err("partition.duration",
          "partition.duration: must be a positive time span"));
      }
    }
  }
  return errors;
}

// -- spec documents -------------------------------------------------------

const loaderSchema = z.object({
  path: z.string(),
  format: z.enum(LOADER_FORMATS).optional(),
  line_pattern: z.string().optional(),
});

const specDocumentSchema = z.object({
  application: z.enum(["summarize", "cluster", "detect_anomaly"]),
  loader: loaderSchema,
  adapter: z.object({ id_pattern: z.string() }).optional(),
  parser: z.object({ algorithm: z.enum(PARSER_ALGORITHMS) }).optional(),
  partition: z.object({
    strategy: z.enum(SEQUENCE_STRATEGIES),
    window_size: z.number().int().optional(),
    duration: z.number().optional(),
  }).optional(),
  representation: z.object({
    kind: z.enum(["tfidf", "sequential", "counters"]),
    bucket_seconds: z.number().optional(),
  }).optional(),
  analysis: z.object({
    algorithm: z.enum([...CLUSTER_ALGORITHMS, ...DETECTORS]),
    k: z.number().int().optional(),
    eps: z.number().optional(),
    min_pts: z.number().int().optional(),
    order: z.number().int().optional(),
    top_k: z.number().int().optional(),
  }).optional(),
});

export type SpecDocument = z.infer<typeof specDocumentSchema>;

/** Parse an arbitrary document into the portal's spec subset. */
export function parseSpecDocument(doc: unknown): SpecDocument {
  return specDocumentSchema.parse(doc);
}

function buildLoader(form: Form): SpecDocument["loader"] {
  const loader: SpecDocument["loader"] = { path: form.dataset };
  if (form.format !== "log") loader.format = form.format;
  if (form.linePattern !== "") loader.line_pattern = form.linePattern;
  return loader;
}

/**
 * Serialize a validated form to the spec document POSTed to /api/jobs.
 * Throws if the form has local validation errors; callers gate on
 * validateForm first so no request is ever issued for an invalid form.
 */
export function buildSpec(form: Form): SpecDocument {
  const errors = validateForm(form);
  if (errors.length > 0) {
    throw new FormInvalid(errors);
  }
  switch (form.app) {
    case "summarize":
      return {
        application: "summarize",
        loader: buildLoader(form),
        parser: { algorithm: form.algorithm },
      };
    case "cluster": {
      const analysis: NonNullable<SpecDocument["analysis"]> =
        form.algorithm === "kmeans"
          ? { algorithm: "kmeans", k: form.k }
          : { algorithm: "dbscan", eps: form.eps, min_pts: form.minPts };
      return {
        application: "cluster",
        loader: buildLoader(form),
        parser: { algorithm: "drain" },
        representation: { kind: "tfidf" },
        analysis,
      };
    }
    case "detect":
      return buildDetectSpec(form);
  }
}

function buildDetectSpec(form: DetectForm): SpecDocument {
  const doc: SpecDocument = {
    application: "detect_anomaly",
    loader: buildLoader(form),
  };
  if (form.entityPattern !== "") {
    doc.adapter = { id_pattern: form.entityPattern };
  }
  if (form.detector === "ewma" || form.detector === "ets_additive") {
    doc.representation = { kind: "counters", bucket_seconds: form.bucketSeconds };
    doc.analysis = { algorithm: form.detector };
  } else if (form.detector === "ngram_topk") {
    doc.parser = { algorithm: "drain" };
    doc.partition = partitionOf(form);
    doc.representation = { kind: "sequential" };
    doc.analysis = { algorithm: "ngram_topk", order: form.order, top_k: form.topK };
  } else {
    doc.representation = { kind: "tfidf" };
    doc.analysis = { algorithm: form.detector };
  }
  return doc;
}

function partitionOf(form: DetectForm): NonNullable<SpecDocument["partition"]> {
  switch (form.strategy) {
    case "fixed_window":
    case "sliding_window":
      return { strategy: form.strategy, window_size: form.windowSize };
    case "time_window":
      return { strategy: form.strategy, duration: form.duration };
    case "identifier":
      return { strategy: form.strategy };
  }
}

export class FormInvalid extends Error {
  constructor(public readonly errors: FieldError[]) {
    super(errors.map((e) => e.message).join("; "));
    this.name = "FormInvalid";
  }
}

/**
 * Repopulate a form from a previously built spec document, inverse of
 * buildSpec up to form defaults for fields the document omits.
 */
export function specToForm(doc: SpecDocument): Form {
  const app: AppName =
    doc.application === "detect_anomaly" ? "detect" : doc.application;
  const form = defaultForm(app);
  form.dataset = doc.loader.path;
  form.format = doc.loader.format ?? "log";
  form.linePattern = doc.loader.line_pattern ?? "";

  if (form.app === "summarize") {
    form.algorithm = (doc.parser?.algorithm ?? "drain") as ParserAlgorithm;
  } else if (form.app === "cluster") {
    const analysis = doc.analysis;
    if (analysis?.algorithm === "dbscan") {
      form.algorithm = "dbscan";
      form.eps = analysis.eps ?? form.eps;
      form.minPts = analysis.min_pts ?? form.minPts;
    } else {
      form.algorithm = "kmeans";
      form.k = analysis?.k ?? form.k;
    }
  } else {
    const analysis = doc.analysis;
    form.detector = (analysis?.algorithm ?? "ngram_topk") as Detector;
    form.entityPattern = doc.adapter?.id_pattern ?? "";
    form.bucketSeconds = doc.representation?.bucket_seconds ?? form.bucketSeconds;
    form.order = analysis?.order ?? form.order;
    form.topK = analysis?.top_k ?? form.topK;
    const partition = doc.partition;
    if (partition !== undefined) {
      form.strategy = partition.strategy;
      form.windowSize = partition.window_size ?? form.windowSize;
      form.duration = partition.duration ?? form.duration;
    }
  }
  return form;
}
