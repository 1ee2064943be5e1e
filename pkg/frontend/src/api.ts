/**
 * Service client with a latest-request-wins guard.
 *
 * Every endpoint keeps a monotonically increasing sequence number; a
 * response is delivered only if no newer request for that endpoint was
 * issued in the meantime, so a slow early response can never overwrite
 * a fresh one.  In-flight requests are aborted when superseded.
 */

import type {
  EstimateReport,
  FriendEntry,
  HideField,
  Profile,
  WhatIfResponse,
} from './types.js';

/** Everything the form knows; hides are applied when building the body. */
export interface FormState {
  hometown: string;
  workEducation: string;
  friendCount: number;
  pctFriendsWithAttrs: number; // 0..1
  friends: FriendEntry[] | null; // non-null only after explicit CSV upload
  hidden: Set<HideField>;
  k: number;
}

export function emptyFormState(): FormState {
  return {
    hometown: '',
    workEducation: '',
    friendCount: 0,
    pctFriendsWithAttrs: 0,
    friends: null,
    hidden: new Set(),
    k: 100,
  };
}

/** True when there is nothing to submit (submit stays disabled). */
export function isEmptyProfile(state: FormState): boolean {
  return (
    state.hometown.trim() === '' &&
    state.workEducation.trim() === '' &&
    state.friendCount <= 0 &&
    (state.friends === null || state.friends.length === 0)
  );
}

/** Apply the hide toggles and serialize the form for the service. */
export function buildProfile(state: FormState): Profile {
  const profile: Profile = {
    hometown: state.hidden.has('HT') || state.hometown.trim() === ''
      ? null
      : state.hometown.trim(),
    work_education: state.hidden.has('WE') || state.workEducation.trim() === ''
      ? null
      : state.workEducation.trim(),
  };
  if (state.hidden.has('F')) {
    profile.friend_count = 0;
    profile.pct_friends_with_attrs = 0;
  } else if (state.friends !== null) {
    profile.friends = state.friends;
  } else {
    profile.friend_count = state.friendCount;
    profile.pct_friends_with_attrs = state.pctFriendsWithAttrs;
  }
  return profile;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type Delivery<T> = { stale: true } | { stale: false; data: T };

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  private seq: Record<string, number> = {};
  private controllers: Record<string, AbortController | undefined> = {};

  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<Delivery<T>> {
    const id = (this.seq[path] ?? 0) + 1;
    this.seq[path] = id;
    this.controllers[path]?.abort();
    const controller = typeof AbortController !== 'undefined' ? new AbortController() : undefined;
    this.controllers[path] = controller;
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(body),
        signal: controller?.signal,
      });
    } catch (err) {
      if (this.seq[path] !== id) {
        return { stale: true }; // superseded; the abort is expected
      }
      throw err;
    }
    if (this.seq[path] !== id) {
      return { stale: true };
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const payload = (await response.json()) as { error?: string };
        if (payload.error) {
          detail = payload.error;
        }
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return { stale: false, data: (await response.json()) as T };
  }

  estimate(profile: Profile, k: number): Promise<Delivery<EstimateReport>> {
    return this.post<EstimateReport>('/estimate', { profile, K: k });
  }

  whatIf(profile: Profile, k: number): Promise<Delivery<WhatIfResponse>> {
    return this.post<WhatIfResponse>('/whatif', { profile, K: k });
  }

  async health(): Promise<{ status: string; bundle: string | null }> {
    const response = await this.fetchFn(`${this.baseUrl}/health`);
    if (!response.ok) {
      throw new ApiError(response.status, `${response.status}`);
    }
    return (await response.json()) as { status: string; bundle: string | null };
  }
}
