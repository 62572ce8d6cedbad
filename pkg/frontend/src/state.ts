/**
 * Portal view state and its reducer.
 *
 * The state is a plain value; every user or network event is an action
 * and `reduce` is a pure function, so state transitions are unit-testable
 * without any DOM. The shell owns the single mutable reference.
 */

import type { JobRecord } from "./api.js";
import type { AppName, FieldError, Form, SpecDocument } from "./spec.js";
import { defaultForm, specToForm } from "./spec.js";
import type { SummarySortKey } from "./views.js";

export interface ViewState {
  activeApp: AppName;
  datasetHandle: string | null;
  datasetName: string | null;
  /** raw uploaded text, kept for time-bucket drill-down */
  datasetText: string | null;
  form: Form;
  fieldErrors: FieldError[];
  banner: string | null;
  currentJobId: string | null;
  jobState: JobRecord["state"] | null;
  jobError: string | null;
  /** spec document of the current job, for form round-trips */
  lastSpec: SpecDocument | null;
  reportText: string | null;
  /** drill-down selection */
  sortKey: SummarySortKey;
  expandedTemplateId: string | null;
  selectedCluster: string | null;
  selectedRowId: string | null;
  jobs: JobRecord[];
}

export function initialState(): ViewState {
  return {
    activeApp: "summarize",
    datasetHandle: null,
    datasetName: null,
    datasetText: null,
    form: defaultForm("summarize"),
    fieldErrors: [],
    banner: null,
    currentJobId: null,
    jobState: null,
    jobError: null,
    lastSpec: null,
    reportText: null,
    sortKey: "template_id",
    expandedTemplateId: null,
    selectedCluster: null,
    selectedRowId: null,
    jobs: [],
  };
}

export type Action =
  | { kind: "select_app"; app: AppName }
  | { kind: "dataset_uploaded"; handle: string; name: string; text: string }
  | { kind: "form_changed"; form: Form }
  | { kind: "form_invalid"; errors: FieldError[] }
  | { kind: "submitted"; jobId: string; spec: SpecDocument }
  | { kind: "job_update"; record: JobRecord }
  | { kind: "report_loaded"; text: string }
  | { kind: "load_spec"; spec: SpecDocument }
  | { kind: "error"; message: string }
  | { kind: "sort"; key: SummarySortKey }
  | { kind: "toggle_template"; templateId: string }
  | { kind: "select_cluster"; cluster: string }
  | { kind: "select_row"; rowId: string }
  | { kind: "jobs_listed"; jobs: JobRecord[] };

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.kind) {
    case "select_app": {
      const form = { ...defaultForm(action.app) };
      if (state.datasetHandle !== null) form.dataset = state.datasetHandle;
      return { ...state, activeApp: action.app, form, fieldErrors: [], banner: null };
    }
    case "dataset_uploaded":
      return {
        ...state,
        datasetHandle: action.handle,
        datasetName: action.name,
        datasetText: action.text,
        form: { ...state.form, dataset: action.handle },
        banner: null,
      };
    case "form_changed":
      return { ...state, form: action.form, fieldErrors: [] };
    case "form_invalid":
      return { ...state, fieldErrors: action.errors };
    case "submitted":
      return {
        ...state,
        currentJobId: action.jobId,
        lastSpec: action.spec,
        jobState: "queued",
        jobError: null,
        reportText: null,
        fieldErrors: [],
        banner: null,
        expandedTemplateId: null,
        selectedCluster: null,
        selectedRowId: null,
      };
    case "job_update":
      if (action.record.job_id !== state.currentJobId) return state;
      return { ...state, jobState: action.record.state, jobError: action.record.error };
    case "report_loaded":
      return { ...state, reportText: action.text };
    case "load_spec": {
      const form = specToForm(action.spec);
      const app = form.app;
      return { ...state, activeApp: app, form, fieldErrors: [], banner: null };
    }
    case "error":
      return { ...state, banner: action.message };
    case "sort":
      return { ...state, sortKey: action.key };
    case "toggle_template":
      return {
        ...state,
        expandedTemplateId:
          state.expandedTemplateId === action.templateId ? null : action.templateId,
      };
    case "select_cluster":
      return {
        ...state,
        selectedCluster:
          state.selectedCluster === action.cluster ? null : action.cluster,
      };
    case "select_row":
      return {
        ...state,
        selectedRowId: state.selectedRowId === action.rowId ? null : action.rowId,
      };
    case "jobs_listed":
      return { ...state, jobs: action.jobs };
  }
}
