import { describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { ComparisonStore, formatPct } from '../src/compare.js';
import type { JobRecord, RiskReport } from '../src/types.js';

const REPORT: RiskReport = {
  var: 0.021069,
  cvar: 0.026513,
  method: 'monte-carlo',
  alpha: 0.01,
  horizon_days: 2,
  paths: 1000,
  source_id: 'p',
  elapsed_s: 0.1,
};

function record(partial: Partial<JobRecord>): JobRecord {
  return {
    id: 'j1',
    config: {},
    status: 'done',
    result: REPORT,
    error: null,
    created: '',
    finished: null,
    ...partial,
  };
}

/** Client stub whose job transitions are scripted per submission. */
function scriptedClient(outcomes: ('done' | 'failed')[]): ApiClient {
  let submission = -1;
  const fetchFn = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    if (url.endsWith('/jobs') && init?.method === 'POST') {
      submission += 1;
      return Response.json(
        record({ id: `j${submission}`, status: 'queued', result: null }),
        { status: 201 },
      );
    }
    const id = url.split('/').pop()!;
    const outcome = outcomes[Number(id.slice(1))];
    if (outcome === 'failed') {
      return Response.json(
        record({
          id,
          status: 'failed',
          result: null,
          error: { code: 'entropy-exhausted', message: 'pool ran dry' },
        }),
      );
    }
    return Response.json(record({ id }));
  });
  return new ApiClient('http://svc', fetchFn as typeof fetch);
}

const REQUEST = {
  method: 'monte-carlo' as const,
  alpha: 0.01,
  paths: 1000,
  portfolio_id: 'pf',
  prices_id: 'px',
  source_id: 'p',
};

describe('formatPct', () => {
  it('renders 4-decimal percent', () => {
    expect(formatPct(0.021069)).toBe('2.1069%');
    expect(formatPct(1)).toBe('100.0000%');
    expect(formatPct(0)).toBe('0.0000%');
  });
});

describe('ComparisonStore', () => {
  it('keeps the service report verbatim on a done row', async () => {
    const store = new ComparisonStore();
    const row = await store.run(scriptedClient(['done']), 'MC pseudo', REQUEST, {
      intervalMs: 1,
    });
    expect(row.status).toBe('done');
    expect(row.report).toEqual(REPORT);
  });

  it('records failures without disturbing other rows', async () => {
    const store = new ComparisonStore();
    const client = scriptedClient(['done', 'failed']);
    await store.run(client, 'MC pseudo', REQUEST, { intervalMs: 1 });
    await store.run(client, 'MC pool', REQUEST, { intervalMs: 1 });
    const rows = store.list();
    expect(rows.map((r) => r.status)).toEqual(['done', 'failed']);
    expect(rows[1].error).toBe('pool ran dry');
    expect(rows[0].report).toEqual(REPORT);
  });

  it('re-running a label replaces its row and preserves the rest', async () => {
    const store = new ComparisonStore();
    const client = scriptedClient(['done', 'done', 'done']);
    await store.run(client, 'a', REQUEST, { intervalMs: 1 });
    await store.run(client, 'b', REQUEST, { intervalMs: 1 });
    await store.run(client, 'a', REQUEST, { intervalMs: 1 });
    const rows = store.list();
    expect(rows.map((r) => r.label)).toEqual(['a', 'b']);
    expect(rows[0].jobId).toBe('j2'); // replaced by the re-run
    expect(rows[1].jobId).toBe('j1'); // untouched
  });

  it('list() hands out copies, not live state', async () => {
    const store = new ComparisonStore();
    await store.run(scriptedClient(['done']), 'a', REQUEST, { intervalMs: 1 });
    const rows = store.list();
    rows[0].label = 'mutated';
    expect(store.list()[0].label).toBe('a');
  });
});
