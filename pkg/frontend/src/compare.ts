import type { ApiClient } from './api.js';
import type { JobRequest, RiskReport } from './types.js';
import { runJob, type PollOptions } from './jobs.js';

/** One method row in the comparison table. The service's report is kept
 * verbatim — the dashboard never recomputes risk numbers. */
export interface ComparisonRow {
  label: string;
  status: 'pending' | 'done' | 'failed';
  jobId: string | null;
  report: RiskReport | null;
  error: string | null;
}

/** Percent with 4 decimals, e.g. 2.1069 -> "210.6900%". */
export function formatPct(value: number): string {
  return `${(100 * value).toFixed(4)}%`;
}

/**
 * Serialized comparison state: each run appends or replaces one labelled
 * row; rows from earlier parameter sets stay put so edited re-runs can be
 * compared side by side. A failed row never disturbs its neighbours.
 */
export class ComparisonStore {
  private rows: ComparisonRow[] = [];

  list(): ComparisonRow[] {
    return this.rows.map((row) => ({ ...row }));
  }

  private upsert(row: ComparisonRow): void {
    const index = this.rows.findIndex((r) => r.label === row.label);
    if (index >= 0) {
      this.rows[index] = row;
    } else {
      this.rows.push(row);
    }
  }

  async run(
    client: ApiClient,
    label: string,
    request: JobRequest,
    options: PollOptions = {},
  ): Promise<ComparisonRow> {
    this.upsert({ label, status: 'pending', jobId: null, report: null, error: null });
    let row: ComparisonRow;
    try {
      const record = await runJob(client, request, options);
      row = {
        label,
        status: 'done',
        jobId: record.id,
        report: record.result,
        error: null,
      };
    } catch (error) {
      row = {
        label,
        status: 'failed',
        jobId: null,
        report: null,
        error: error instanceof Error ? error.message : String(error),
      };
    }
    this.upsert(row);
    return { ...row };
  }
}
