/**
 * Typed client for the job service HTTP API.
 *
 * Exactly five endpoints exist and this module is the only place the
 * portal touches the network; contract tests replay recorded
 * request/response pairs against it.
 */

import { z } from "zod";
import type { SpecDocument } from "./spec.js";

const healthSchema = z.object({ status: z.literal("ok") });
const uploadSchema = z.object({ dataset_id: z.string().regex(/^[0-9a-f]{16}$/) });
const submitSchema = z.object({ job_id: z.string() });
const errorsSchema = z.object({ errors: z.array(z.string()) });

export const jobRecordSchema = z.object({
  job_id: z.string(),
  state: z.enum(["queued", "running", "succeeded", "failed"]),
  submitted_at: z.string(),
  finished_at: z.string().nullable(),
  application: z.string(),
  error: z.string().nullable(),
  report_path: z.string().nullable(),
});
export type JobRecord = z.infer<typeof jobRecordSchema>;

const listingSchema = z.object({ jobs: z.array(jobRecordSchema) });

/** Server rejected the spec; carries the 400 payload's field errors. */
export class SpecRejected extends Error {
  constructor(public readonly errors: string[]) {
    super(errors.join("; "));
    this.name = "SpecRejected";
  }
}

export class UnknownJob extends Error {
  constructor(jobId: string) {
    super(`unknown job ${jobId}`);
    this.name = "UnknownJob";
  }
}

export class ServiceError extends Error {
  constructor(status: number, detail: string) {
    super(`service returned ${status}: ${detail}`);
    this.name = "ServiceError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export function datasetHandle(datasetId: string): string {
  return `dataset:${datasetId}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchImpl(this.baseUrl + path, init);
  }

  async health(): Promise<boolean> {
    const response = await this.request("/api/health");
    return response.ok && healthSchema.safeParse(await response.json()).success;
  }

  /** Upload a dataset; returns the dataset:<id> handle for loader paths. */
  async uploadDataset(filename: string, content: Blob | string): Promise<string> {
    const form = new FormData();
    const blob = typeof content === "string" ? new Blob([content]) : content;
    form.append("file", blob, filename);
    const response = await this.request("/api/datasets", { method: "POST", body: form });
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text());
    }
    const { dataset_id } = uploadSchema.parse(await response.json());
    return datasetHandle(dataset_id);
  }

  async submitJob(spec: SpecDocument): Promise<string> {
    const response = await this.request("/api/jobs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(spec),
    });
    if (response.status === 400) {
      throw new SpecRejected(errorsSchema.parse(await response.json()).errors);
    }
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text());
    }
    return submitSchema.parse(await response.json()).job_id;
  }

  async getJob(jobId: string): Promise<JobRecord> {
    const response = await this.request(`/api/jobs/${jobId}`);
    if (response.status === 404) throw new UnknownJob(jobId);
    if (!response.ok) throw new ServiceError(response.status, await response.text());
    return jobRecordSchema.parse(await response.json());
  }

  async listJobs(): Promise<JobRecord[]> {
    const response = await this.request("/api/jobs");
    if (!response.ok) throw new ServiceError(response.status, await response.text());
    return listingSchema.parse(await response.json()).jobs;
  }

  async getReport(jobId: string): Promise<string> {
    const response = await this.request(`/api/jobs/${jobId}/report`);
    if (response.status === 404) throw new UnknownJob(jobId);
    if (!response.ok) throw new ServiceError(response.status, await response.text());
    return response.text();
  }
}
