/**
 * Browser shell: owns the mutable ViewState, renders on every action,
 * and wires DOM events to reducer actions. All rendering logic lives in
 * the pure modules; this file only glues them to the document.
 */

import { ApiClient, SpecRejected, UnknownJob } from "./api.js";
import { pollJob, type PollHandle } from "./poll.js";
import { parseReport } from "./report.js";
import {
  buildSpec, defaultForm, validateForm,
  type AppName, type ClusterForm, type DetectForm, type Form, type SummarizeForm,
} from "./spec.js";
import { initialState, reduce, type Action, type ViewState } from "./state.js";
import {
  bucketLoglines, bucketSecondsOf, renderErrorBanner, renderFieldErrors,
  renderReport, renderStatus, type SummarySortKey,
} from "./views.js";

const client = new ApiClient("");
let state: ViewState = initialState();
let poll: PollHandle | null = null;

function dispatch(action: Action): void {
  state = reduce(state, action);
  render();
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

// -- form rendering ---------------------------------------------------------

function field(label: string, input: string): string {
  return `<label class="field"><span>${label}</span>${input}</label>`;
}

function selectInput(name: string, options: readonly string[], value: string): string {
  const opts = options
    .map((o) => `<option value="${o}"${o === value ? " selected" : ""}>${o}</option>`)
    .join("");
  return `<select name="${name}">${opts}</select>`;
}

function numberInput(name: string, value: number, step = "1"): string {
  return `<input type="number" name="${name}" value="${value}" step="${step}">`;
}

function textInput(name: string, value: string, placeholder = ""): string {
  return `<input type="text" name="${name}" value="${value.replace(/"/g, "&quot;")}" placeholder="${placeholder}">`;
}

function renderFormFields(form: Form): string {
  const common =
    field("format", selectInput("format", ["log", "csv", "tsv", "json"], form.format)) +
    field("line pattern", textInput("linePattern", form.linePattern, "optional named-group regex"));
  if (form.app === "summarize") {
    return field("miner", selectInput("algorithm", ["drain", "iplom", "ael"], form.algorithm)) + common;
  }
  if (form.app === "cluster") {
    const algoFields =
      form.algorithm === "kmeans"
        ? field("k", numberInput("k", form.k))
        : field("eps", numberInput("eps", form.eps, "0.1")) +
          field("min pts", numberInput("minPts", form.minPts));
    return (
      field("algorithm", selectInput("algorithm", ["kmeans", "dbscan"], form.algorithm)) +
      algoFields + common
    );
  }
  const detectFields: Record<string, string> = {
    ewma: field("bucket seconds", numberInput("bucketSeconds", form.bucketSeconds)),
    ets_additive: field("bucket seconds", numberInput("bucketSeconds", form.bucketSeconds)),
    iforest: "",
    lof: "",
    ngram_topk:
      field("order", numberInput("order", form.order)) +
      field("top k", numberInput("topK", form.topK)) +
      field("partition", selectInput("strategy",
        ["fixed_window", "sliding_window", "time_window", "identifier"], form.strategy)) +
      (form.strategy === "time_window"
        ? field("duration s", numberInput("duration", form.duration))
        : form.strategy === "identifier"
          ? field("entity pattern", textInput("entityPattern", form.entityPattern, "(blk_\\d+)"))
          : field("window size", numberInput("windowSize", form.windowSize))),
  };
  return (
    field("detector", selectInput("detector",
      ["ngram_topk", "ewma", "ets_additive", "iforest", "lof"], form.detector)) +
    (detectFields[form.detector] ?? "") + common
  );
}

function readForm(): Form {
  const container = byId<HTMLElement>("form-fields");
  const form = { ...state.form } as Form & Record<string, unknown>;
  for (const input of container.querySelectorAll<HTMLInputElement | HTMLSelectElement>("input,select")) {
    const name = input.name;
    if (!(name in form)) continue;
    const current = form[name];
    form[name] = typeof current === "number" ? Number(input.value) : input.value;
  }
  return form as Form;
}

// -- rendering ----------------------------------------------------------------

function render(): void {
  byId<HTMLElement>("banner").innerHTML =
    state.banner === null ? "" : renderErrorBanner(state.banner);
  byId<HTMLElement>("dataset-status").textContent =
    state.datasetHandle === null
      ? "no dataset uploaded"
      : `${state.datasetName} → ${state.datasetHandle}`;

  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-app]")) {
    button.classList.toggle("active", button.dataset["app"] === state.activeApp);
  }
  byId<HTMLElement>("form-fields").innerHTML = renderFormFields(state.form);
  byId<HTMLElement>("form-errors").innerHTML =
    renderFieldErrors(state.fieldErrors.map((e) => e.message));
  byId<HTMLElement>("status").innerHTML = renderStatus(state.jobState, state.jobError);

  const results = byId<HTMLElement>("results");
  if (state.reportText === null) {
    results.innerHTML = "";
  } else {
    const report = parseReport(state.reportText);
    let drilldownLines: string[] | null = null;
    if (state.selectedRowId !== null && state.datasetText !== null) {
      drilldownLines = bucketLoglines(
        state.datasetText, state.form.linePattern || null,
        state.selectedRowId, bucketSecondsOf(report));
    }
    results.innerHTML = renderReport(report, {
      sortKey: state.sortKey,
      expandedId: state.expandedTemplateId,
      cluster: state.selectedCluster,
      rowId: state.selectedRowId,
      drilldownLines,
    });
  }

  byId<HTMLElement>("jobs").innerHTML = state.jobs
    .map((job) =>
      `<li><button class="job-link" data-job-id="${job.job_id}">` +
      `${job.job_id} · ${job.application} · ${job.state}</button></li>`)
    .join("");
}

// -- event wiring ---------------------------------------------------------------

async function refreshJobs(): Promise<void> {
  try {
    dispatch({ kind: "jobs_listed", jobs: await client.listJobs() });
  } catch (error) {
    dispatch({ kind: "error", message: String(error) });
  }
}

async function onUpload(file: File): Promise<void> {
  try {
    const text = await file.text();
    const handle = await client.uploadDataset(file.name, text);
    dispatch({ kind: "dataset_uploaded", handle, name: file.name, text });
  } catch (error) {
    dispatch({ kind: "error", message: String(error) });
  }
}

async function onRun(): Promise<void> {
  const form = readForm();
  dispatch({ kind: "form_changed", form });
  const errors = validateForm(form);
  if (errors.length > 0) {
    dispatch({ kind: "form_invalid", errors });
    return; // invalid forms never reach the network
  }
  const spec = buildSpec(form);
  try {
    const jobId = await client.submitJob(spec);
    dispatch({ kind: "submitted", jobId, spec });
    poll?.stop();
    poll = pollJob(client, jobId, (record) => dispatch({ kind: "job_update", record }));
    const record = await poll.done;
    if (record?.state === "succeeded") {
      dispatch({ kind: "report_loaded", text: await client.getReport(jobId) });
    }
    void refreshJobs();
  } catch (error) {
    if (error instanceof SpecRejected) {
      dispatch({
        kind: "form_invalid",
        errors: error.errors.map((message) => ({
          field: message.split(":")[0] ?? "", message,
        })),
      });
    } else if (error instanceof UnknownJob) {
      dispatch({ kind: "error", message: error.message });
    } else {
      dispatch({ kind: "error", message: String(error) });
    }
  }
}

function onResultsClick(event: Event): void {
  const target = event.target instanceof Element ? event.target : null;
  if (target === null) return;
  const sort = target.closest<HTMLElement>("[data-sort-key]");
  if (sort?.dataset["sortKey"] !== undefined) {
    dispatch({ kind: "sort", key: sort.dataset["sortKey"] as SummarySortKey });
    return;
  }
  const template = target.closest<HTMLElement>("[data-template-id]");
  if (template?.dataset["templateId"] !== undefined) {
    dispatch({ kind: "toggle_template", templateId: template.dataset["templateId"] });
    return;
  }
  const cluster = target.closest<HTMLElement>("[data-cluster-id]");
  if (cluster?.dataset["clusterId"] !== undefined) {
    dispatch({ kind: "select_cluster", cluster: cluster.dataset["clusterId"] });
    return;
  }
  const row = target.closest<HTMLElement>("[data-row-id]");
  if (row?.dataset["rowId"] !== undefined) {
    dispatch({ kind: "select_row", rowId: row.dataset["rowId"] });
  }
}

export function mount(): void {
  byId<HTMLInputElement>("upload").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file !== undefined) void onUpload(file);
  });
  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-app]")) {
    button.addEventListener("click", () =>
      dispatch({ kind: "select_app", app: button.dataset["app"] as AppName }));
  }
  byId<HTMLElement>("form-fields").addEventListener("change", () =>
    dispatch({ kind: "form_changed", form: readForm() }));
  byId<HTMLButtonElement>("run").addEventListener("click", () => void onRun());
  byId<HTMLElement>("results").addEventListener("click", onResultsClick);
  byId<HTMLElement>("jobs").addEventListener("click", (event) => {
    const target = event.target instanceof Element
      ? event.target.closest<HTMLElement>("[data-job-id]") : null;
    const jobId = target?.dataset["jobId"];
    if (jobId === undefined) return;
    void (async () => {
      try {
        dispatch({ kind: "report_loaded", text: await client.getReport(jobId) });
      } catch (error) {
        dispatch({ kind: "error", message: String(error) });
      }
    })();
  });
  void refreshJobs();
  render();
}

// static-host entry point; tests import the pure modules directly
if (typeof document !== "undefined" && document.getElementById("portal") !== null) {
  mount();
}

// referenced here so the shell compiles them for the browser bundle
export type { ClusterForm, DetectForm, SummarizeForm };
export { defaultForm };
