/** Portfolio draft editing: rows of {ticker, weight} with a strict
 * sum-to-one gate before submission and one-click normalization. */

export interface DraftRow {
  ticker: string;
  weight: number;
}

export const WEIGHT_SUM_TOLERANCE = 1e-6;

export interface DraftStatus {
  submittable: boolean;
  weightSum: number;
  normalized: boolean;
  reason: string | null;
}

export class PortfolioDraft {
  rows: DraftRow[] = [];

  addRow(ticker = '', weight = 0): void {
    this.rows.push({ ticker, weight });
  }

  removeRow(index: number): void {
    this.rows.splice(index, 1);
  }

  setRow(index: number, row: Partial<DraftRow>): void {
    const current = this.rows[index];
    if (!current) {
      throw new RangeError(`no draft row at index ${index}`);
    }
    this.rows[index] = { ...current, ...row };
  }

  weightSum(): number {
    return this.rows.reduce((sum, row) => sum + row.weight, 0);
  }

  /** Rescale weights so they sum to exactly 1; no-op on a zero-sum draft. */
  normalize(): void {
    const sum = this.weightSum();
    if (sum === 0) {
      return;
    }
    this.rows = this.rows.map((row) => ({
      ticker: row.ticker,
      weight: row.weight / sum,
    }));
  }

  status(): DraftStatus {
    const weightSum = this.weightSum();
    const normalized = Math.abs(weightSum - 1) <= WEIGHT_SUM_TOLERANCE;
    let reason: string | null = null;
    if (this.rows.length === 0) {
      reason = 'add at least one asset';
    } else if (this.rows.some((row) => row.ticker.trim() === '')) {
      reason = 'every row needs a ticker';
    } else if (new Set(this.rows.map((r) => r.ticker)).size < this.rows.length) {
      reason = 'duplicate tickers';
    } else if (!normalized) {
      reason = `weights sum to ${weightSum}, not 1 (normalize?)`;
    }
    return { submittable: reason === null, weightSum, normalized, reason };
  }

  tickers(): string[] {
    return this.rows.map((row) => row.ticker);
  }

  weights(): number[] {
    return this.rows.map((row) => row.weight);
  }
}
