/**
 * Client-side friend-list handling.
 *
 * By default only the count and the share of friends with attributes
 * leave the browser.  A CSV upload is the explicit opt-in for sending
 * per-friend rows (current_city, hometown, work_education columns;
 * empty cells mean hidden).
 */

import type { FriendEntry } from './types.js';

const COLUMNS = ['current_city', 'hometown', 'work_education'] as const;

function splitCsvLine(line: string): string[] {
  const out: string[] = [];
  let cell = '';
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        cell += '"';
        i++;
      } else if (ch === '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ',') {
      out.push(cell);
      cell = '';
    } else {
      cell += ch;
    }
  }
  out.push(cell);
  return out;
}

/** Parse a friends CSV; unknown columns are ignored, empty cells are null. */
export function parseFriendsCsv(text: string): FriendEntry[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    return [];
  }
  const header = splitCsvLine(lines[0]!).map((h) => h.trim().toLowerCase());
  const index = new Map<string, number>();
  for (const col of COLUMNS) {
    const at = header.indexOf(col);
    if (at >= 0) {
      index.set(col, at);
    }
  }
  if (index.size === 0) {
    throw new Error(
      `friends CSV needs at least one of the columns: ${COLUMNS.join(', ')}`,
    );
  }
  const entries: FriendEntry[] = [];
  for (const line of lines.slice(1)) {
    const cells = splitCsvLine(line);
    const pick = (col: (typeof COLUMNS)[number]): string | null => {
      const at = index.get(col);
      const value = at === undefined ? '' : (cells[at] ?? '').trim();
      return value === '' ? null : value;
    };
    entries.push({
      current_city: pick('current_city'),
      hometown: pick('hometown'),
      work_education: pick('work_education'),
    });
  }
  return entries;
}

/** The summary that substitutes for the raw list when no CSV is uploaded. */
export function summarizeFriends(friends: FriendEntry[]): {
  count: number;
  pctWithAttrs: number;
} {
  const withAttrs = friends.filter(
    (f) => f.hometown !== null || f.work_education !== null,
  ).length;
  return {
    count: friends.length,
    pctWithAttrs: friends.length ? withAttrs / friends.length : 0,
  };
}
