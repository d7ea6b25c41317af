/** Browser entry point: wires the editor, comparison, and health views to
 * the DOM. All numbers shown come from the service — no risk math here. */
import { ApiClient, ServiceError } from './api.js';
import { ComparisonStore } from './compare.js';
import {
  errorHealthRow,
  healthRowFromReport,
  pendingHealthRow,
  type HealthRow,
} from './health.js';
import { histogramBars } from './histogram.js';
import { PortfolioDraft } from './portfolio.js';
import {
  renderComparisonTable,
  renderHealthPanel,
  renderHistogram,
  escapeHtml,
} from './render.js';
import type { JobRequest } from './types.js';

const VALIDATION_SAMPLES = 100_000;
const HISTOGRAM_BINS = 50;

interface Elements {
  banner: HTMLElement;
  editor: HTMLElement;
  results: HTMLElement;
  histogram: HTMLElement;
  health: HTMLElement;
}

function requireElement(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing #${id} in the host page`);
  }
  return el;
}

export class Dashboard {
  readonly draft = new PortfolioDraft();
  readonly store = new ComparisonStore();
  private healthRows: HealthRow[] = [];
  private pricesId = 'default';
  private portfolioSeq = 0;

  constructor(
    private readonly client: ApiClient,
    private readonly el: Elements,
  ) {}

  private banner(message: string | null): void {
    this.el.banner.textContent = message ?? '';
    this.el.banner.style.display = message ? 'block' : 'none';
  }

  renderEditor(): void {
    const status = this.draft.status();
    const rows = this.draft.rows
      .map(
        (row, i) =>
          `<tr><td><input data-role="ticker" data-index="${i}" ` +
          `value="${escapeHtml(row.ticker)}"></td>` +
          `<td><input data-role="weight" data-index="${i}" type="number" ` +
          `step="0.01" value="${row.weight}"></td>` +
          `<td><button data-role="remove" data-index="${i}">×</button></td></tr>`,
      )
      .join('');
    this.el.editor.innerHTML =
      `<table><tbody>${rows}</tbody></table>` +
      `<button data-role="add">add asset</button>` +
      `<button data-role="normalize" ${status.normalized ? 'disabled' : ''}>` +
      `normalize (Σ=${status.weightSum.toFixed(6)})</button>` +
      `<button data-role="submit" ${status.submittable ? '' : 'disabled'}>run</button>` +
      (status.reason ? `<p class="hint">${escapeHtml(status.reason)}</p>` : '');
  }

  renderResults(): void {
    this.el.results.innerHTML = renderComparisonTable(this.store.list());
  }

  renderHealth(): void {
    this.el.health.innerHTML = renderHealthPanel(this.healthRows);
  }

  async refreshTickers(): Promise<void> {
    try {
      const prices = await this.client.listPrices();
      if (prices.length > 0) {
        this.pricesId = prices[0].id;
        if (this.draft.rows.length === 0) {
          for (const ticker of prices[0].tickers) {
            this.draft.addRow(ticker, 1 / prices[0].tickers.length);
          }
        }
      }
      this.banner(null);
    } catch (error) {
      this.banner(
        `service unreachable: ${error instanceof Error ? error.message : error}`,
      );
    }
    this.renderEditor();
  }

  /** Submit one job per selected method and keep prior rows for comparison. */
  async runSelected(methods: { label: string; request: Omit<JobRequest, 'portfolio_id' | 'prices_id'> }[]): Promise<void> {
    const status = this.draft.status();
    if (!status.submittable) {
      this.banner(status.reason);
      return;
    }
    const portfolioId = `draft-${++this.portfolioSeq}`;
    await this.client.createPortfolio(
      portfolioId,
      this.draft.tickers(),
      this.draft.weights(),
    );
    await Promise.all(
      methods.map(async ({ label, request }) => {
        const row = await this.store.run(this.client, label, {
          ...request,
          portfolio_id: portfolioId,
          prices_id: this.pricesId,
        });
        this.renderResults();
        if (row.status === 'done' && row.jobId) {
          const histogram = await this.client.getHistogram(
            row.jobId,
            HISTOGRAM_BINS,
          );
          this.el.histogram.innerHTML = renderHistogram(
            histogramBars(histogram),
          );
        }
      }),
    );
  }

  async refreshHealth(): Promise<void> {
    const sources = await this.client.listSources();
    this.healthRows = sources.map((s) => pendingHealthRow(s.id));
    this.renderHealth();
    await Promise.all(
      sources.map(async (source, i) => {
        try {
          const report = await this.client.validateSource(
            source.id,
            VALIDATION_SAMPLES,
          );
          this.healthRows[i] = healthRowFromReport(report);
        } catch (error) {
          this.healthRows[i] = errorHealthRow(
            source.id,
            error instanceof ServiceError ? error.message : String(error),
          );
        }
        this.renderHealth();
      }),
    );
  }
}

export function mount(baseUrl: string): Dashboard {
  const dashboard = new Dashboard(new ApiClient(baseUrl), {
    banner: requireElement('banner'),
    editor: requireElement('portfolio-editor'),
    results: requireElement('results'),
    histogram: requireElement('histogram'),
    health: requireElement('source-health'),
  });
  void dashboard.refreshTickers();
  void dashboard.refreshHealth();
  return dashboard;
}
