/**
 * Risk-level bucketing and badge styling.
 *
 * The buckets mirror the service exactly and are the single place the
 * mapping lives in the UI:
 *
 *   [0.00, 0.25) -> Level 1    [0.25, 0.50) -> Level 2
 *   [0.50, 0.75) -> Level 3    [0.75, 0.90) -> Level 4
 *   [0.90, 1.00] -> Level 5
 *
 * Each lower boundary belongs to the higher level (0.25 is Level 2,
 * 0.9 is Level 5).  The badge rendered next to a probability always
 * uses the `risk_level` field of the service response; `riskLevel`
 * exists for display consistency checks, never for inference.
 */

export interface RiskBucket {
  level: 1 | 2 | 3 | 4 | 5;
  min: number; // inclusive lower bound of the bucket
  label: string;
  color: string;
}

export const RISK_BUCKETS: readonly RiskBucket[] = [
  { level: 5, min: 0.9, label: 'Level 5', color: '#c0392b' },
  { level: 4, min: 0.75, label: 'Level 4', color: '#e67e22' },
  { level: 3, min: 0.5, label: 'Level 3', color: '#f1c40f' },
  { level: 2, min: 0.25, label: 'Level 2', color: '#27ae60' },
  { level: 1, min: 0.0, label: 'Level 1', color: '#2980b9' },
] as const;

export function riskLevel(probability: number): 1 | 2 | 3 | 4 | 5 {
  if (!(probability >= 0 && probability <= 1)) {
    throw new RangeError(`probability ${probability} outside [0, 1]`);
  }
  for (const bucket of RISK_BUCKETS) {
    if (probability >= bucket.min) {
      return bucket.level;
    }
  }
  return 1;
}

export function bucketForLevel(level: number): RiskBucket {
  const bucket = RISK_BUCKETS.find((b) => b.level === level);
  if (!bucket) {
    throw new RangeError(`unknown risk level ${level}`);
  }
  return bucket;
}

/** Color-coded badge for a service-reported risk level. */
export function badgeHtml(level: number): string {
  const bucket = bucketForLevel(level);
  return `<span class="badge badge-l${bucket.level}" style="background:${bucket.color}">${bucket.label}</span>`;
}
