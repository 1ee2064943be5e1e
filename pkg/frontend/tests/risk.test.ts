import { describe, expect, it } from 'vitest';

import { RISK_BUCKETS, badgeHtml, bucketForLevel, riskLevel } from '../src/risk.js';

describe('risk level bucketing', () => {
  it('maps every boundary exactly like the service', () => {
    expect(riskLevel(0)).toBe(1);
    expect(riskLevel(0.25)).toBe(2);
    expect(riskLevel(0.5)).toBe(3);
    expect(riskLevel(0.75)).toBe(4);
    expect(riskLevel(0.9)).toBe(5);
    expect(riskLevel(1)).toBe(5);
  });

  it('maps values just below each boundary to the lower level', () => {
    expect(riskLevel(0.2499)).toBe(1);
    expect(riskLevel(0.4999)).toBe(2);
    expect(riskLevel(0.7499)).toBe(3);
    expect(riskLevel(0.8999)).toBe(4);
  });

  it('matches the published spot values', () => {
    expect(riskLevel(0.967)).toBe(5);
    expect(riskLevel(0.059)).toBe(1);
  });

  it('rejects out-of-range probabilities', () => {
    expect(() => riskLevel(-0.01)).toThrow(RangeError);
    expect(() => riskLevel(1.01)).toThrow(RangeError);
    expect(() => riskLevel(Number.NaN)).toThrow(RangeError);
  });

  it('declares five buckets with descending inclusive lower bounds', () => {
    expect(RISK_BUCKETS.map((b) => b.level)).toEqual([5, 4, 3, 2, 1]);
    expect(RISK_BUCKETS.map((b) => b.min)).toEqual([0.9, 0.75, 0.5, 0.25, 0]);
  });
});

describe('badgeHtml', () => {
  it('renders the level label with its bucket color', () => {
    for (const level of [1, 2, 3, 4, 5]) {
      const html = badgeHtml(level);
      expect(html).toContain(`Level ${level}`);
      expect(html).toContain(bucketForLevel(level).color);
      expect(html).toContain(`badge-l${level}`);
    }
  });

  it('rejects unknown levels', () => {
    expect(() => badgeHtml(0)).toThrow(RangeError);
    expect(() => badgeHtml(6)).toThrow(RangeError);
  });
});
