import { describe, expect, it } from 'vitest';

import { PortfolioDraft } from '../src/portfolio.js';

function draft(rows: [string, number][]): PortfolioDraft {
  const d = new PortfolioDraft();
  for (const [ticker, weight] of rows) {
    d.addRow(ticker, weight);
  }
  return d;
}

describe('PortfolioDraft', () => {
  it('enables submission for an even two-asset split', () => {
    const status = draft([['AA', 0.5], ['BB', 0.5]]).status();
    expect(status.submittable).toBe(true);
    expect(status.normalized).toBe(true);
  });

  it('blocks submission when weights do not sum to 1', () => {
    const status = draft([['AA', 0.5], ['BB', 0.6]]).status();
    expect(status.submittable).toBe(false);
    expect(status.reason).toContain('normalize');
  });

  it('blocks an empty draft', () => {
    const status = new PortfolioDraft().status();
    expect(status.submittable).toBe(false);
    expect(status.reason).toContain('at least one');
  });

  it('blocks blank tickers and duplicates', () => {
    expect(draft([['', 1.0]]).status().submittable).toBe(false);
    expect(draft([['AA', 0.5], ['AA', 0.5]]).status().submittable).toBe(false);
  });

  it('accepts a sum within 1e-6 of one', () => {
    expect(draft([['AA', 0.5 + 4e-7], ['BB', 0.5]]).status().submittable).toBe(
      true,
    );
    expect(draft([['AA', 0.5 + 2e-6], ['BB', 0.5]]).status().submittable).toBe(
      false,
    );
  });

  it('normalizes in one click', () => {
    const d = draft([['AA', 0.5], ['BB', 0.6]]);
    d.normalize();
    expect(d.weightSum()).toBeCloseTo(1, 12);
    expect(d.weights()[0]).toBeCloseTo(0.5 / 1.1, 12);
    expect(d.status().submittable).toBe(true);
  });

  it('leaves a zero-sum draft untouched on normalize', () => {
    const d = draft([['AA', 0]]);
    d.normalize();
    expect(d.weights()).toEqual([0]);
  });

  it('edits and removes rows', () => {
    const d = draft([['AA', 0.4], ['BB', 0.6]]);
    d.setRow(0, { weight: 0.3 });
    expect(d.rows[0]).toEqual({ ticker: 'AA', weight: 0.3 });
    d.removeRow(1);
    expect(d.tickers()).toEqual(['AA']);
    expect(() => d.setRow(5, { weight: 1 })).toThrow(RangeError);
  });
});
