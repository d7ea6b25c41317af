/** HTML renderers. Pure string-in/string-out so every view is testable
 * without a browser; main.ts mounts the output into the page. */
import type { ComparisonRow } from './compare.js';
import { formatPct } from './compare.js';
import type { HealthRow } from './health.js';
import type { HistogramBar } from './histogram.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

/** Side-by-side VaR/ES table, one row per method run. */
export function renderComparisonTable(rows: ComparisonRow[]): string {
  const body = rows
    .map((row) => {
      if (row.status === 'failed') {
        return (
          `<tr class="failed"><td>${escapeHtml(row.label)}</td>` +
          `<td colspan="4" class="error">${escapeHtml(row.error ?? 'failed')}</td></tr>`
        );
      }
      if (row.status === 'pending' || row.report === null) {
        return (
          `<tr class="pending"><td>${escapeHtml(row.label)}</td>` +
          `<td colspan="4" class="spinner">running…</td></tr>`
        );
      }
      const r = row.report;
      return (
        `<tr><td>${escapeHtml(row.label)}</td>` +
        `<td data-raw="${r.var}">${formatPct(r.var)}</td>` +
        `<td data-raw="${r.cvar}">${formatPct(r.cvar)}</td>` +
        `<td>${escapeHtml(r.source_id)}</td>` +
        `<td>${r.paths}</td></tr>`
      );
    })
    .join('');
  return (
    '<table class="comparison"><thead><tr>' +
    '<th>method</th><th>VaR</th><th>CVaR</th><th>source</th><th>paths</th>' +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderHistogram(bars: HistogramBar[]): string {
  const divs = bars
    .map(
      (bar) =>
        `<div class="bar" data-count="${bar.count}" ` +
        `title="[${bar.x0.toExponential(4)}, ${bar.x1.toExponential(4)}): ${bar.count}" ` +
        `style="height:${(100 * bar.height).toFixed(1)}%"></div>`,
    )
    .join('');
  return `<div class="histogram">${divs}</div>`;
}

export function renderHealthPanel(rows: HealthRow[]): string {
  const items = rows
    .map((row) => {
      if (row.state === 'pending') {
        return (
          `<li data-source="${escapeHtml(row.sourceId)}">` +
          `<span class="spinner">validating…</span></li>`
        );
      }
      if (row.state === 'error') {
        return (
          `<li data-source="${escapeHtml(row.sourceId)}">` +
          `<span class="error">${escapeHtml(row.error ?? 'error')}</span></li>`
        );
      }
      const badges = row.badges
        .map(
          (badge) =>
            `<span class="badge ${badge.pass ? 'pass' : 'fail'}" ` +
            `data-test="${badge.name}">${badge.name}: ${escapeHtml(badge.detail)}</span>`,
        )
        .join('');
      return `<li data-source="${escapeHtml(row.sourceId)}">${badges}</li>`;
    })
    .join('');
  return `<ul class="source-health">${items}</ul>`;
}
