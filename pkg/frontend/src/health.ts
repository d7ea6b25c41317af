import type { ValidationReport } from './types.js';

/** Badge state for one battery subtest. */
export interface Badge {
  name: 'chi_square' | 'ks' | 'autocorrelation' | 'entropy' | 'overall';
  pass: boolean;
  detail: string;
}

/** Source-health row: either a finished validation or a pending spinner. */
export interface HealthRow {
  sourceId: string;
  state: 'pending' | 'done' | 'error';
  badges: Badge[];
  error: string | null;
}

export function pendingHealthRow(sourceId: string): HealthRow {
  return { sourceId, state: 'pending', badges: [], error: null };
}

export function errorHealthRow(sourceId: string, message: string): HealthRow {
  return { sourceId, state: 'error', badges: [], error: message };
}

export function healthRowFromReport(report: ValidationReport): HealthRow {
  const maxR = Math.max(
    ...report.autocorrelation.map(({ r }) => Math.abs(r)),
  );
  const badges: Badge[] = [
    {
      name: 'chi_square',
      pass: report.verdict.chi_square,
      detail: `p=${report.chi_square.p_value.toExponential(2)}`,
    },
    {
      name: 'ks',
      pass: report.verdict.ks,
      detail: `D=${report.ks.statistic.toExponential(2)}`,
    },
    {
      name: 'autocorrelation',
      pass: report.verdict.autocorrelation,
      detail: `max|r|=${maxR.toExponential(2)}`,
    },
    {
      name: 'entropy',
      pass: report.verdict.entropy,
      detail: `${report.entropy_bits.toFixed(2)} bits`,
    },
    {
      name: 'overall',
      pass: report.verdict.overall,
      detail: report.verdict.overall ? 'pass' : 'fail',
    },
  ];
  return { sourceId: report.source_id, state: 'done', badges, error: null };
}
