/**
 * Wire types shared with the exposure service.
 * The UI never recomputes any of these values; they arrive verbatim
 * from /estimate, /whatif and /predict.
 */

/** One friend row, as uploaded from a CSV. Null means hidden/unknown. */
export interface FriendEntry {
  current_city: string | null;
  hometown: string | null;
  work_education: string | null;
}

/** Profile body for /estimate, /whatif and /predict. */
export interface Profile {
  hometown: string | null;
  work_education: string | null;
  friends?: FriendEntry[];
  friend_count?: number;
  pct_friends_with_attrs?: number;
}

export type HideField = 'HT' | 'WE' | 'F';

export interface WhatIfEntry {
  hide: HideField[];
  probability: number;
  risk_level: number;
}

export interface EstimateReport {
  category: string;
  confidence: number;
  pct_friends_attrs: number;
  K: number;
  probability: number;
  risk_level: number;
  model_version: string;
}

export interface WhatIfResponse {
  K: number;
  what_if: WhatIfEntry[];
  model_version: string;
}
