// @vitest-environment jsdom
/**
 * UI contract: the rendered numbers equal the service responses, the
 * what-if panel enumerates 2^(#visible)-1 rows ascending, and a hide
 * toggle triggers exactly one new API call that replaces the display.
 */
import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { initApp } from '../src/main.js';
import type { AppHandles } from '../src/main.js';
import type { EstimateReport, Profile, WhatIfEntry, WhatIfResponse } from '../src/types.js';

const HTML = readFileSync(
  join(dirname(fileURLToPath(import.meta.url)), '..', 'index.html'),
  'utf-8',
);

function mountDom(): void {
  const body = HTML.match(/<body>([\s\S]*)<\/body>/)?.[1] ?? '';
  document.body.innerHTML = body.replace(/<script[\s\S]*?<\/script>/g, '');
}

/** Scripted service: estimate/what-if payloads derived from the profile. */
function scriptedResponses(profile: Profile, k: number): {
  estimate: EstimateReport;
  whatif: WhatIfResponse;
} {
  const visible = [
    profile.hometown !== null ? 'HT' : null,
    profile.work_education !== null ? 'WE' : null,
    (profile.friend_count ?? profile.friends?.length ?? 0) > 0 ? 'F' : null,
  ].filter((v): v is 'HT' | 'WE' | 'F' => v !== null);

  const byCategory: Record<string, number> = {
    'HT+WE+F': 0.967,
    'HT+F': 0.936,
    'WE+F': 0.944,
    'HT+WE': 0.903,
    HT: 0.42,
    WE: 0.503,
    F: 0.31,
    '': 0.0,
  };
  const probability = byCategory[visible.join('+')] ?? 0.5;
  const level = probability >= 0.9 ? 5 : probability >= 0.75 ? 4 : probability >= 0.5 ? 3 : probability >= 0.25 ? 2 : 1;
  const estimate: EstimateReport = {
    category: visible.join('+') || 'NoSignal',
    confidence: 0.69,
    pct_friends_attrs: 0.009,
    K: k,
    probability,
    risk_level: level as EstimateReport['risk_level'] & number,
    model_version: '1-scripted',
  };

  const subsets: WhatIfEntry[] = [];
  for (let mask = 1; mask < 1 << visible.length; mask++) {
    const hide = visible.filter((_, i) => mask & (1 << i));
    const p = Math.max(0, probability - 0.12 * hide.length - (hide.includes('WE') ? 0.3 : 0));
    subsets.push({
      hide,
      probability: Number(p.toFixed(3)),
      risk_level: (p >= 0.9 ? 5 : p >= 0.75 ? 4 : p >= 0.5 ? 3 : p >= 0.25 ? 2 : 1),
    });
  }
  subsets.sort((a, b) => a.probability - b.probability);
  return { estimate, whatif: { K: k, what_if: subsets, model_version: '1-scripted' } };
}

interface Harness {
  handles: AppHandles;
  calls: Array<{ path: string; profile: Profile; k: number }>;
}

function mount(): Harness {
  mountDom();
  const calls: Harness['calls'] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const body = JSON.parse(String(init?.body)) as { profile: Profile; K: number };
    const path = url.replace(/^.*\/(estimate|whatif)$/, '/$1');
    calls.push({ path, profile: body.profile, k: body.K });
    const scripted = scriptedResponses(body.profile, body.K);
    const payload = path === '/estimate' ? scripted.estimate : scripted.whatif;
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { 'content-type': 'application/json' },
    });
  };
  const handles = initApp(document, new ApiClient('http://svc', fetchFn));
  return { handles, calls };
}

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function input(id: string): HTMLInputElement {
  return $(id) as HTMLInputElement;
}

function fillRichProfile(): void {
  input('hometown').value = 'town_001';
  input('hometown').dispatchEvent(new Event('input', { bubbles: true }));
  input('work').value = 'org_042';
  input('work').dispatchEvent(new Event('input', { bubbles: true }));
  input('friend-count').value = '12';
  input('friend-count').dispatchEvent(new Event('input', { bubbles: true }));
  input('pct-friends').value = '25';
  input('pct-friends').dispatchEvent(new Event('input', { bubbles: true }));
}

async function submit(h: Harness): Promise<void> {
  ($('estimate-form') as HTMLFormElement).dispatchEvent(
    new Event('submit', { bubbles: true, cancelable: true }),
  );
  await h.handles.lastOperation;
}

describe('what-if explorer', () => {
  let h: Harness;

  beforeEach(() => {
    h = mount();
  });

  it('disables submit on an empty form and enables it once anything is visible', () => {
    const button = $('analyze') as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    input('hometown').value = 'town_001';
    input('hometown').dispatchEvent(new Event('input', { bubbles: true }));
    expect(button.disabled).toBe(false);
  });

  it('renders exactly the /estimate response: probability and risk badge', async () => {
    fillRichProfile();
    await submit(h);
    const scripted = scriptedResponses(
      { hometown: 'town_001', work_education: 'org_042', friend_count: 12, pct_friends_with_attrs: 0.25 },
      100,
    ).estimate;
    expect($('result').querySelector('[data-role="probability"]')?.textContent).toBe('96.7%');
    expect(scripted.probability).toBe(0.967);
    const badge = $('result').querySelector('[data-role="risk-badge"]');
    expect(badge?.getAttribute('data-level')).toBe(String(scripted.risk_level));
    expect(badge?.textContent).toContain(`Level ${scripted.risk_level}`);
  });

  it('renders 2^(#visible)-1 what-if rows sorted ascending', async () => {
    fillRichProfile();
    await submit(h);
    const rows = [...document.querySelectorAll('#whatif-body tr')];
    expect(rows).toHaveLength(2 ** 3 - 1);
    const probs = rows.map((r) =>
      parseFloat((r.querySelector('td.num')?.textContent ?? '').replace('%', '')),
    );
    expect(probs).toEqual([...probs].sort((a, b) => a - b));
  });

  it('sends the slider value as K', async () => {
    fillRichProfile();
    input('k-slider').value = '20';
    input('k-slider').dispatchEvent(new Event('change', { bubbles: true }));
    await h.handles.lastOperation;
    expect(h.calls.at(-1)?.k).toBe(20);
  });

  it('toggling a hide option triggers exactly one call whose response replaces the display', async () => {
    fillRichProfile();
    await submit(h);
    h.calls.length = 0;

    const toggle = input('hide-we');
    toggle.checked = true;
    toggle.dispatchEvent(new Event('change', { bubbles: true }));
    await h.handles.lastOperation;

    expect(h.calls).toHaveLength(1);
    expect(h.calls[0]?.path).toBe('/estimate');
    expect(h.calls[0]?.profile.work_education).toBeNull();
    // Display replaced by the hidden-WE scripted response (HT+F -> 0.936).
    expect($('result').querySelector('[data-role="probability"]')?.textContent).toBe('93.6%');
    // The ranking panel is explicitly marked out of date, not silently wrong.
    expect($('whatif-panel').classList.contains('stale')).toBe(true);
  });

  it('clicking a what-if row applies that configuration with one estimate call', async () => {
    fillRichProfile();
    await submit(h);
    h.calls.length = 0;

    const rows = [...document.querySelectorAll('#whatif-body tr')];
    const target = rows.find((r) => r.getAttribute('data-hide') === 'HT+WE');
    expect(target).toBeDefined();
    target!.dispatchEvent(new Event('click', { bubbles: true }));
    await h.handles.lastOperation;

    expect(h.calls).toHaveLength(1);
    expect(h.calls[0]?.path).toBe('/estimate');
    expect(input('hide-ht').checked).toBe(true);
    expect(input('hide-we').checked).toBe(true);
    expect(input('hide-f').checked).toBe(false);
    expect(h.calls[0]?.profile.hometown).toBeNull();
    expect(h.calls[0]?.profile.work_education).toBeNull();
    // F stays visible: scripted F-only probability is 0.31 -> Level 2.
    expect($('result').querySelector('[data-role="probability"]')?.textContent).toBe('31.0%');
    expect(
      $('result').querySelector('[data-role="risk-badge"]')?.getAttribute('data-level'),
    ).toBe('2');
  });

  it('analyze refreshes both panels and clears staleness', async () => {
    fillRichProfile();
    await submit(h);
    input('hide-f').checked = true;
    input('hide-f').dispatchEvent(new Event('change', { bubbles: true }));
    await h.handles.lastOperation;
    expect($('whatif-panel').classList.contains('stale')).toBe(true);

    await submit(h);
    expect($('whatif-panel').classList.contains('stale')).toBe(false);
    // HT+WE visible now -> 3 subsets.
    expect([...document.querySelectorAll('#whatif-body tr')]).toHaveLength(3);
  });
});
