import type { ApiClient } from './api.js';
import type { JobRecord, JobRequest } from './types.js';

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

const DEFAULT_INTERVAL_MS = 250;
const DEFAULT_TIMEOUT_MS = 120_000;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Poll a job until it reaches a terminal state; throws on failure. */
export async function pollJob(
  client: ApiClient,
  jobId: string,
  options: PollOptions = {},
): Promise<JobRecord> {
  const interval = options.intervalMs ?? DEFAULT_INTERVAL_MS;
  const deadline = Date.now() + (options.timeoutMs ?? DEFAULT_TIMEOUT_MS);
  for (;;) {
    const record = await client.getJob(jobId);
    if (record.status === 'done') {
      return record;
    }
    if (record.status === 'failed') {
      throw new Error(record.error?.message ?? `job ${jobId} failed`);
    }
    if (Date.now() >= deadline) {
      throw new Error(`timed out waiting for job ${jobId} (${record.status})`);
    }
    await sleep(interval);
  }
}

/** Submit a job and wait for its terminal record. */
export async function runJob(
  client: ApiClient,
  request: JobRequest,
  options: PollOptions = {},
): Promise<JobRecord> {
  const submitted = await client.submitJob(request);
  if (submitted.status === 'done' || submitted.status === 'failed') {
    if (submitted.status === 'failed') {
      throw new Error(submitted.error?.message ?? `job ${submitted.id} failed`);
    }
    return submitted;
  }
  return pollJob(client, submitted.id, options);
}
