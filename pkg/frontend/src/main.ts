/**
 * DOM controller for the what-if explorer.
 *
 * Display rules: the probability and badge always show the latest
 * /estimate response for the current form state; the countermeasure
 * panel shows the latest /whatif response and is dimmed (marked stale)
 * whenever the form drifts from the state it was computed for.
 * Toggling a hide option or committing the slider issues exactly one
 * /estimate call; the Analyze button refreshes both panels.
 */

import { ApiClient, buildProfile, emptyFormState, isEmptyProfile } from './api.js';
import type { FormState } from './api.js';
import { parseFriendsCsv, summarizeFriends } from './friends.js';
import { renderError, renderResult, renderWhatIfRows } from './render.js';
import type { HideField } from './types.js';

export interface AppHandles {
  state: FormState;
  /** Settles when the most recent handler finished its service calls. */
  lastOperation: Promise<void>;
}

function must<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

export function initApp(doc: Document, api: ApiClient): AppHandles {
  const form = must<HTMLFormElement>(doc, 'estimate-form');
  const hometown = must<HTMLInputElement>(doc, 'hometown');
  const work = must<HTMLInputElement>(doc, 'work');
  const friendCount = must<HTMLInputElement>(doc, 'friend-count');
  const pctFriends = must<HTMLInputElement>(doc, 'pct-friends');
  const csvInput = must<HTMLInputElement>(doc, 'friends-csv');
  const csvNote = must<HTMLElement>(doc, 'csv-note');
  const kSlider = must<HTMLInputElement>(doc, 'k-slider');
  const kValue = must<HTMLElement>(doc, 'k-value');
  const analyze = must<HTMLButtonElement>(doc, 'analyze');
  const result = must<HTMLElement>(doc, 'result');
  const status = must<HTMLElement>(doc, 'status');
  const whatifPanel = must<HTMLElement>(doc, 'whatif-panel');
  const whatifBody = must<HTMLElement>(doc, 'whatif-body');
  const toggles: Record<HideField, HTMLInputElement> = {
    HT: must<HTMLInputElement>(doc, 'hide-ht'),
    WE: must<HTMLInputElement>(doc, 'hide-we'),
    F: must<HTMLInputElement>(doc, 'hide-f'),
  };

  const handles: AppHandles = { state: emptyFormState(), lastOperation: Promise.resolve() };

  function readState(): void {
    const s = handles.state;
    s.hometown = hometown.value;
    s.workEducation = work.value;
    s.friendCount = Number(friendCount.value) || 0;
    s.pctFriendsWithAttrs = Math.min(1, Math.max(0, (Number(pctFriends.value) || 0) / 100));
    s.hidden = new Set(
      (Object.keys(toggles) as HideField[]).filter((f) => toggles[f].checked),
    );
    s.k = Number(kSlider.value) || 100;
  }

  function syncControls(): void {
    readState();
    kValue.textContent = `${handles.state.k} km`;
    analyze.disabled = isEmptyProfile(handles.state);
  }

  function markWhatIfStale(): void {
    whatifPanel.classList.add('stale');
  }

  async function refreshEstimate(): Promise<void> {
    readState();
    const s = handles.state;
    try {
      const delivery = await api.estimate(buildProfile(s), s.k);
      if (delivery.stale) {
        return; // a newer request owns the display
      }
      status.innerHTML = '';
      result.innerHTML = renderResult(delivery.data);
    } catch (err) {
      status.innerHTML = renderError(`estimate failed: ${(err as Error).message}`);
    }
  }

  async function refreshWhatIf(): Promise<void> {
    readState();
    const s = handles.state;
    try {
      const delivery = await api.whatIf(buildProfile(s), s.k);
      if (delivery.stale) {
        return;
      }
      whatifBody.innerHTML = renderWhatIfRows(delivery.data.what_if);
      whatifPanel.classList.remove('stale');
    } catch (err) {
      status.innerHTML = renderError(`what-if failed: ${(err as Error).message}`);
    }
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    handles.lastOperation = Promise.all([refreshEstimate(), refreshWhatIf()]).then(() => {});
  });

  for (const field of Object.keys(toggles) as HideField[]) {
    toggles[field].addEventListener('change', () => {
      syncControls();
      markWhatIfStale();
      handles.lastOperation = refreshEstimate();
    });
  }

  kSlider.addEventListener('input', syncControls);
  kSlider.addEventListener('change', () => {
    syncControls();
    markWhatIfStale();
    handles.lastOperation = refreshEstimate();
  });

  for (const input of [hometown, work, friendCount, pctFriends]) {
    input.addEventListener('input', syncControls);
  }

  // Clicking a countermeasure row applies that privacy configuration.
  whatifBody.addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest('tr.whatif-row');
    if (!row) {
      return;
    }
    const hides = (row.getAttribute('data-hide') ?? '').split('+').filter(Boolean);
    for (const field of Object.keys(toggles) as HideField[]) {
      toggles[field].checked = hides.includes(field);
    }
    syncControls();
    markWhatIfStale();
    handles.lastOperation = refreshEstimate();
  });

  csvInput.addEventListener('change', () => {
    const file = csvInput.files?.[0];
    if (!file) {
      handles.state.friends = null;
      csvNote.textContent = '';
      return;
    }
    handles.lastOperation = file.text().then(
      (text) => {
        try {
          const friends = parseFriendsCsv(text);
          handles.state.friends = friends;
          const summary = summarizeFriends(friends);
          friendCount.value = String(summary.count);
          pctFriends.value = (100 * summary.pctWithAttrs).toFixed(0);
          csvNote.textContent =
            `${summary.count} friends parsed locally; detailed rows will be sent on analyze`;
          syncControls();
        } catch (err) {
          csvNote.textContent = (err as Error).message;
          handles.state.friends = null;
        }
      },
      (err) => {
        csvNote.textContent = `could not read file: ${(err as Error).message}`;
      },
    );
  });

  syncControls();
  return handles;
}
