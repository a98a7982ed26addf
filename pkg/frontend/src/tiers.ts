/**
 * Client-side mirror of the service admission limits for exposure jobs,
 * so an obvious violation is reported inline before anything is sent.
 * The service remains authoritative: its 403 body is surfaced verbatim
 * whenever a submitted job is rejected.
 */

import { Extent } from './types';

export interface TierLimits {
  maxSelDays: number;
  maxSelAreaDeg2: number;
}

export function defaultTiers(): Record<string, TierLimits> {
  return {
    guest: { maxSelDays: 1, maxSelAreaDeg2: 4 },
    registered: { maxSelDays: 30, maxSelAreaDeg2: 100 },
  };
}

export function windowDays(startDate: string, endDate: string): number {
  const start = Date.parse(`${startDate}T00:00:00Z`);
  const end = Date.parse(`${endDate}T00:00:00Z`);
  return (end - start) / 86_400_000;
}

export function areaDeg2(extent: Extent): number {
  return (extent.max_lat - extent.min_lat) * (extent.max_lon - extent.min_lon);
}

/**
 * First limit the request would break, phrased like the service's own 403,
 * or null when the request fits the tier.
 */
export function tierViolation(
  tier: string,
  limits: TierLimits,
  startDate: string,
  endDate: string,
  area: Extent | null,
): string | null {
  const days = windowDays(startDate, endDate);
  if (Number.isFinite(days) && days > limits.maxSelDays) {
    return `window of ${days} days exceeds the ${tier} tier limit of `
      + `${limits.maxSelDays} day(s)`;
  }
  if (area) {
    const deg2 = areaDeg2(area);
    if (deg2 > limits.maxSelAreaDeg2) {
      return `extent of ${deg2} square degrees exceeds the ${tier} tier `
        + `limit of ${limits.maxSelAreaDeg2}`;
    }
  }
  return null;
}
