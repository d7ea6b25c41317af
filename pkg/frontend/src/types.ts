/** Wire types for the risk service HTTP API. */

export interface SourceDescriptor {
  id: string;
  kind: string;
  params: Record<string, unknown>;
}

export interface PriceTableSummary {
  id: string;
  tickers: string[];
  dates: number;
}

export interface RiskReport {
  var: number;
  cvar: number;
  method: string;
  alpha: number;
  horizon_days: number;
  paths: number;
  source_id: string;
  elapsed_s: number;
}

export interface ApiError {
  code: string;
  message: string;
  detail?: string;
}

export interface JobRecord {
  id: string;
  config: Record<string, unknown>;
  status: 'queued' | 'running' | 'done' | 'failed';
  result: RiskReport | null;
  error: ApiError | null;
  created: string;
  finished: string | null;
}

export interface JobRequest {
  method: 'historical' | 'monte-carlo';
  alpha: number;
  horizon_days?: number;
  paths?: number;
  portfolio_id: string;
  prices_id: string;
  source_id?: string;
  compounding?: 'sum' | 'sqrt_h';
  return_kind?: 'log' | 'simple';
}

export interface Histogram {
  bins: number;
  edges: number[];
  counts: number[];
}

export interface ValidationReport {
  id: string;
  source_id: string;
  sample_count: number;
  chi_square: { statistic: number; dof: number; p_value: number };
  ks: { statistic: number; critical_1pct: number };
  autocorrelation: { lag: number; r: number }[];
  entropy_bits: number;
  entropy_bins: number;
  verdict: {
    chi_square: boolean;
    ks: boolean;
    autocorrelation: boolean;
    entropy: boolean;
    overall: boolean;
  };
}
