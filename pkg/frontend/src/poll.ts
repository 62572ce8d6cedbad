/**
 * Job polling with backoff.
 *
 * Polls GET /api/jobs/{id} starting at one-second intervals, backing off
 * linearly to a five-second ceiling. The await-then-schedule loop
 * guarantees at most one in-flight request per job; stop() cancels the
 * pending timer and resolves nothing further.
 */

import type { ApiClient, JobRecord } from "./api.js";

export const INITIAL_DELAY_MS = 1_000;
export const MAX_DELAY_MS = 5_000;
export const DELAY_STEP_MS = 1_000;

export function nextDelay(previous: number): number {
  return Math.min(previous + DELAY_STEP_MS, MAX_DELAY_MS);
}

export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const realScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as Parameters<typeof clearTimeout>[0]),
};

export interface PollHandle {
  /** Resolves with the terminal record, or null when stopped first. */
  done: Promise<JobRecord | null>;
  stop(): void;
}

export function pollJob(
  client: ApiClient,
  jobId: string,
  onUpdate: (record: JobRecord) => void,
  scheduler: Scheduler = realScheduler,
): PollHandle {
  let stopped = false;
  let pending: unknown = null;
  let finish!: (record: JobRecord | null) => void;
  let fail!: (error: unknown) => void;

  const done = new Promise<JobRecord | null>((resolve, reject) => {
    finish = resolve;
    fail = reject;
  });

  let delay = INITIAL_DELAY_MS;

  const tick = async (): Promise<void> => {
    pending = null;
    if (stopped) return;
    let record: JobRecord;
    try {
      record = await client.getJob(jobId);
    } catch (error) {
      fail(error);
      return;
    }
    if (stopped) return;
    onUpdate(record);
    if (record.state === "succeeded" || record.state === "failed") {
      finish(record);
      return;
    }
    pending = scheduler.set(() => void tick(), delay);
    delay = nextDelay(delay);
  };

  void tick();

  return {
    done,
    stop() {
      if (stopped) return;
      stopped = true;
      if (pending !== null) {
        scheduler.clear(pending);
        pending = null;
      }
      finish(null);
    },
  };
}
