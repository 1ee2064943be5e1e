import { describe, expect, it } from 'vitest';

import {
  ApiClient,
  ApiError,
  buildProfile,
  emptyFormState,
  isEmptyProfile,
} from '../src/api.js';
import type { FormState } from '../src/api.js';
import type { EstimateReport } from '../src/types.js';

function filled(): FormState {
  const s = emptyFormState();
  s.hometown = 'town_1';
  s.workEducation = 'org_2';
  s.friendCount = 10;
  s.pctFriendsWithAttrs = 0.3;
  return s;
}

function jsonResponse(data: unknown, status = 200): Response {
  return new Response(JSON.stringify(data), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

describe('buildProfile', () => {
  it('serializes the summary form', () => {
    expect(buildProfile(filled())).toEqual({
      hometown: 'town_1',
      work_education: 'org_2',
      friend_count: 10,
      pct_friends_with_attrs: 0.3,
    });
  });

  it('applies hide toggles', () => {
    const s = filled();
    s.hidden = new Set(['HT', 'F']);
    expect(buildProfile(s)).toEqual({
      hometown: null,
      work_education: 'org_2',
      friend_count: 0,
      pct_friends_with_attrs: 0,
    });
  });

  it('sends detailed friends only when a CSV was uploaded and F is visible', () => {
    const s = filled();
    s.friends = [{ current_city: 'c1', hometown: null, work_education: null }];
    expect(buildProfile(s).friends).toHaveLength(1);
    s.hidden = new Set(['F']);
    const hidden = buildProfile(s);
    expect(hidden.friends).toBeUndefined();
    expect(hidden.friend_count).toBe(0);
  });

  it('blank text fields become null', () => {
    const s = filled();
    s.hometown = '   ';
    expect(buildProfile(s).hometown).toBeNull();
  });
});

describe('isEmptyProfile', () => {
  it('is true only when nothing is filled in', () => {
    expect(isEmptyProfile(emptyFormState())).toBe(true);
    const s = emptyFormState();
    s.workEducation = 'org';
    expect(isEmptyProfile(s)).toBe(false);
    const f = emptyFormState();
    f.friendCount = 3;
    expect(isEmptyProfile(f)).toBe(false);
  });
});

describe('ApiClient', () => {
  const report: EstimateReport = {
    category: 'HT',
    confidence: 0.4,
    pct_friends_attrs: 0,
    K: 100,
    probability: 0.2,
    risk_level: 1,
    model_version: '1-x',
  };

  it('delivers a fresh response', async () => {
    const client = new ApiClient('http://svc', async () => jsonResponse(report));
    const delivery = await client.estimate({ hometown: null, work_education: null }, 100);
    expect(delivery).toEqual({ stale: false, data: report });
  });

  it('marks superseded responses stale (latest request wins)', async () => {
    const resolvers: Array<(r: Response) => void> = [];
    const client = new ApiClient(
      '',
      (_url, _init) => new Promise<Response>((resolve) => resolvers.push(resolve)),
    );
    const first = client.estimate({ hometown: 'a', work_education: null }, 100);
    const second = client.estimate({ hometown: 'b', work_education: null }, 100);
    expect(resolvers).toHaveLength(2);
    // Resolve the newer request first, then the stale one.
    resolvers[1]!(jsonResponse({ ...report, probability: 0.9 }));
    resolvers[0]!(jsonResponse({ ...report, probability: 0.1 }));
    const freshDelivery = await second;
    const staleDelivery = await first;
    expect(freshDelivery.stale).toBe(false);
    expect(staleDelivery.stale).toBe(true);
  });

  it('tracks endpoints independently', async () => {
    const client = new ApiClient('', async (url) =>
      jsonResponse(url.endsWith('/whatif') ? { K: 100, what_if: [], model_version: '1-x' } : report),
    );
    const [est, wi] = await Promise.all([
      client.estimate({ hometown: null, work_education: null }, 100),
      client.whatIf({ hometown: null, work_education: null }, 100),
    ]);
    expect(est.stale).toBe(false);
    expect(wi.stale).toBe(false);
  });

  it('raises ApiError with the service message on non-2xx', async () => {
    const client = new ApiClient('', async () => jsonResponse({ error: 'K must be in (0, 1000]' }, 422));
    await expect(
      client.estimate({ hometown: null, work_education: null }, 5000),
    ).rejects.toThrowError(ApiError);
  });

  it('sends profile and K in the body', async () => {
    let seen: unknown;
    const client = new ApiClient('', async (_url, init) => {
      seen = JSON.parse(String(init?.body));
      return jsonResponse(report);
    });
    await client.estimate({ hometown: 'town_9', work_education: null }, 20);
    expect(seen).toEqual({ profile: { hometown: 'town_9', work_education: null }, K: 20 });
  });
});
