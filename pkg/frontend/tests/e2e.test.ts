/** End-to-end dashboard test against the real risk service: a 2-asset
 * portfolio compared across historical, MC-pseudo, and MC-pool runs. */
import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { ComparisonStore } from '../src/compare.js';
import { histogramBars } from '../src/histogram.js';
import { PortfolioDraft } from '../src/portfolio.js';
import { renderComparisonTable, renderHistogram } from '../src/render.js';

const PORT = 8000 + Math.floor(Math.random() * 1000);
const BASE_URL = `http://127.0.0.1:${PORT}`;

// Creates a small entropy pool, then serves the API from a scratch data dir.
const BOOTSTRAP = `
import sys
import uvicorn
from qrisk.pool import pool_create
from qrisk.service import create_app
from qrisk.sources import PseudoByteSource

data_dir, port = sys.argv[1], int(sys.argv[2])
pool_create(f"{data_dir}/e2e.qpool", PseudoByteSource(77).take_bytes,
            2000 * 2 * 53 // 8, source_id="pseudo:seed=77")
uvicorn.run(create_app(data_dir), host="127.0.0.1", port=port,
            log_level="warning")
`;

const PRICES =
  'date,AA,BB\n' +
  Array.from(
    { length: 20 },
    (_, i) =>
      `2024-01-${String(i + 1).padStart(2, '0')},${100 + i},${50 + (i % 3)}`,
  ).join('\n') +
  '\n';

let server: ChildProcess;
let dataDir: string;
const client = new ApiClient(BASE_URL);

async function waitForHealth(timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await client.health();
      return;
    } catch {
      if (Date.now() >= deadline) {
        throw new Error('service did not come up');
      }
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), 'qrisk-e2e-'));
  server = spawn('python3', ['-c', BOOTSTRAP, dataDir, String(PORT)], {
    stdio: ['ignore', 'inherit', 'inherit'],
  });
  await waitForHealth();
  await client.uploadPrices('demo', PRICES);
  await client.registerSource({ id: 'mc-pseudo', kind: 'pseudo', params: { seed: 5 } });
  await client.registerSource({
    id: 'mc-pool',
    kind: 'pool',
    params: { path: join(dataDir, 'e2e.qpool') },
  });
}, 30_000);

afterAll(() => {
  server?.kill();
  rmSync(dataDir, { recursive: true, force: true });
});

describe('dashboard end to end', () => {
  it('builds a 2-asset portfolio, compares three methods, and renders service numbers byte-for-byte', async () => {
    // Portfolio builder: unbalanced draft is blocked, normalize unblocks it.
    const draft = new PortfolioDraft();
    draft.addRow('AA', 0.5);
    draft.addRow('BB', 0.6);
    expect(draft.status().submittable).toBe(false);
    draft.normalize();
    expect(draft.status().submittable).toBe(true);

    await client.createPortfolio('e2e-pf', draft.tickers(), draft.weights());

    const store = new ComparisonStore();
    const shared = { alpha: 0.1, portfolio_id: 'e2e-pf', prices_id: 'demo' };
    const runs: [string, Parameters<ComparisonStore['run']>[2]][] = [
      ['Historical', { method: 'historical', ...shared }],
      ['MC pseudo', { method: 'monte-carlo', paths: 2000, source_id: 'mc-pseudo', ...shared }],
      ['MC pool', { method: 'monte-carlo', paths: 2000, source_id: 'mc-pool', ...shared }],
    ];
    for (const [label, request] of runs) {
      const row = await store.run(client, label, request, { intervalMs: 100 });
      expect(row.status, `${label}: ${row.error}`).toBe('done');
    }

    const rows = store.list();
    expect(rows).toHaveLength(3);

    // Byte-for-byte: every displayed value equals GET /jobs/{id}/report.
    const html = renderComparisonTable(rows);
    expect(html.match(/data-raw=/g)).toHaveLength(6);
    for (const row of rows) {
      const refetched = await client.getReport(row.jobId!);
      expect(JSON.stringify(row.report)).toBe(JSON.stringify(refetched));
      expect(html).toContain(`data-raw="${refetched.var}"`);
      expect(html).toContain(`data-raw="${refetched.cvar}"`);
    }

    // 50-bin histogram: rendered bars carry the endpoint counts exactly.
    const mcRow = rows.find((r) => r.label === 'MC pseudo')!;
    const histogram = await client.getHistogram(mcRow.jobId!, 50);
    expect(histogram.counts).toHaveLength(50);
    expect(histogram.counts.reduce((a, b) => a + b, 0)).toBe(2000);
    const bars = histogramBars(histogram);
    const barHtml = renderHistogram(bars);
    expect(barHtml.match(/class="bar"/g)).toHaveLength(50);
    for (const [i, count] of histogram.counts.entries()) {
      expect(bars[i].count).toBe(count);
      expect(barHtml).toContain(`data-count="${count}"`);
    }
  }, 60_000);

  it('reports a failed pool run inline while other rows stay intact', async () => {
    // The consume-once pool was sized for one 2000-path run and is now dry.
    const store = new ComparisonStore();
    const shared = { alpha: 0.1, portfolio_id: 'e2e-pf', prices_id: 'demo' };
    const ok = await store.run(client, 'MC pseudo', {
      method: 'monte-carlo', paths: 2000, source_id: 'mc-pseudo', ...shared,
    }, { intervalMs: 100 });
    const dry = await store.run(client, 'MC pool', {
      method: 'monte-carlo', paths: 2000, source_id: 'mc-pool', ...shared,
    }, { intervalMs: 100 });
    expect(ok.status).toBe('done');
    expect(dry.status).toBe('failed');
    expect(dry.error).toBeTruthy();
    const html = renderComparisonTable(store.list());
    expect(html).toContain('class="failed"');
    expect(html).toContain(`data-raw="${ok.report!.var}"`);
  }, 60_000);

  it('flags a biased source in the health panel and passes a conforming one', async () => {
    await client.registerSource({
      id: 'biased',
      kind: 'mock',
      params: { seed: 3, p: 0.6 },
    });
    const good = await client.validateSource('mc-pseudo', 50_000);
    const bad = await client.validateSource('biased', 20_000);
    expect(good.verdict.overall).toBe(true);
    expect(bad.verdict.chi_square).toBe(false);
    expect(bad.verdict.overall).toBe(false);
  }, 60_000);
});
