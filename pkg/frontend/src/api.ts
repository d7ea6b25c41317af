import type {
  ApiError,
  Histogram,
  JobRecord,
  JobRequest,
  PriceTableSummary,
  RiskReport,
  SourceDescriptor,
  ValidationReport,
} from './types.js';

/** Error raised for non-2xx service responses, carrying the service's code. */
export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: Partial<ApiError>) {
    super(body.message ?? `request failed with status ${status}`);
    this.name = 'ServiceError';
    this.status = status;
    this.code = body.code ?? 'unknown';
  }
}

async function parseError(response: Response): Promise<never> {
  let body: Partial<ApiError> = {};
  try {
    body = (await response.json()) as Partial<ApiError>;
  } catch {
    // non-JSON error body; keep the status-based message
  }
  throw new ServiceError(response.status, body);
}

/** Thin typed client over the risk service; single base-URL configuration. */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request('/health');
  }

  listSources(): Promise<SourceDescriptor[]> {
    return this.request('/sources');
  }

  registerSource(source: SourceDescriptor): Promise<{ id: string }> {
    return this.post('/sources', source);
  }

  validateSource(sourceId: string, samples: number): Promise<ValidationReport> {
    return this.post(`/sources/${encodeURIComponent(sourceId)}/validate`, {
      samples,
    });
  }

  uploadPrices(id: string, csv: string): Promise<PriceTableSummary> {
    return this.request(`/prices?id=${encodeURIComponent(id)}`, {
      method: 'POST',
      headers: { 'Content-Type': 'text/csv' },
      body: csv,
    });
  }

  listPrices(): Promise<PriceTableSummary[]> {
    return this.request('/prices');
  }

  createPortfolio(
    id: string,
    tickers: string[],
    weights: number[],
  ): Promise<{ id: string; weights: number[] }> {
    return this.post('/portfolios', { id, tickers, weights });
  }

  submitJob(job: JobRequest): Promise<JobRecord> {
    return this.post('/jobs', job);
  }

  getJob(jobId: string): Promise<JobRecord> {
    return this.request(`/jobs/${encodeURIComponent(jobId)}`);
  }

  getReport(jobId: string): Promise<RiskReport> {
    return this.request(`/jobs/${encodeURIComponent(jobId)}/report`);
  }

  getHistogram(jobId: string, bins = 50): Promise<Histogram> {
    return this.request(
      `/jobs/${encodeURIComponent(jobId)}/histogram?bins=${bins}`,
    );
  }
}
