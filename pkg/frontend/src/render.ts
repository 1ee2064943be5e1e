/**
 * Pure rendering helpers: service responses in, HTML strings out.
 * No probabilities or levels are computed here.
 */

import { badgeHtml } from './risk.js';
import type { EstimateReport, WhatIfEntry } from './types.js';

export function formatProbability(p: number): string {
  return `${(100 * p).toFixed(1)}%`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

const FIELD_LABELS: Record<string, string> = {
  HT: 'hometown',
  WE: 'work & education',
  F: 'friend list',
};

export function hideLabel(hide: string[]): string {
  return hide.map((h) => FIELD_LABELS[h] ?? h).join(' + ');
}

export function renderResult(report: EstimateReport): string {
  return [
    `<div class="prob" data-role="probability">${formatProbability(report.probability)}</div>`,
    `<div class="badge-slot" data-role="risk-badge" data-level="${report.risk_level}">`,
    badgeHtml(report.risk_level),
    '</div>',
    '<dl class="facts">',
    `<dt>visible</dt><dd data-role="category">${escapeHtml(report.category)}</dd>`,
    `<dt>cluster confidence</dt><dd data-role="confidence">${report.confidence.toFixed(3)}</dd>`,
    `<dt>within</dt><dd data-role="k">${report.K} km</dd>`,
    `<dt>model</dt><dd data-role="model-version">${escapeHtml(report.model_version)}</dd>`,
    '</dl>',
  ].join('');
}

/**
 * Ranked countermeasure rows, safest configuration first.  The service
 * already sorts ascending by probability; sorting again here is a
 * display guarantee, not a recomputation.
 */
export function renderWhatIfRows(entries: WhatIfEntry[]): string {
  const ordered = [...entries].sort((a, b) => a.probability - b.probability);
  return ordered
    .map(
      (e) =>
        `<tr class="whatif-row" data-hide="${e.hide.join('+')}">` +
        `<td>hide ${escapeHtml(hideLabel(e.hide))}</td>` +
        `<td class="num">${formatProbability(e.probability)}</td>` +
        `<td>${badgeHtml(e.risk_level)}</td>` +
        '</tr>',
    )
    .join('');
}

export function renderError(message: string): string {
  return `<div class="error" data-role="error">${escapeHtml(message)}</div>`;
}
