/**
 * Shared test scaffolding: an in-memory stand-in for the noise service
 * (routes keyed by "METHOD /path", every call recorded for assertions)
 * and payload fixtures shaped like real service responses.
 */

import {
  FeatureCollection,
  GridPayload,
  LivePayload,
  SelJobPayload,
  VesselDetail,
  VesselPayload,
} from '../src/types';

export interface RecordedCall {
  method: string;
  url: URL;
  body: unknown;
  headers: Record<string, string>;
}

export type RouteHandler = (call: RecordedCall) => Response;

export interface MockService {
  fetchFn: typeof fetch;
  calls: RecordedCall[];
}

export function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

export function csvAttachment(text: string, filename: string): Response {
  return new Response(text, {
    status: 200,
    headers: {
      'content-type': 'text/csv',
      'content-disposition': `attachment; filename="${filename}"`,
    },
  });
}

/** Routes are matched on "METHOD /pathname"; unmatched requests 404. */
export function mockService(routes: Record<string, RouteHandler>): MockService {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), 'http://service.test');
    const call: RecordedCall = {
      method: init?.method ?? 'GET',
      url,
      body: init?.body ? JSON.parse(String(init.body)) : null,
      headers: { ...((init?.headers ?? {}) as Record<string, string>) },
    };
    calls.push(call);
    const handler = routes[`${call.method} ${url.pathname}`];
    if (!handler) {
      return json({ detail: `no route for ${call.method} ${url.pathname}` }, 404);
    }
    return handler(call);
  }) as typeof fetch;
  return { fetchFn, calls };
}

// -- fixtures -----------------------------------------------------------------

export function gridFixture(): GridPayload {
  return {
    extent: { min_lat: 44, min_lon: 2, max_lat: 44.1, max_lon: 2.1 },
    resolution_deg: 0.05,
    n_rows: 2,
    n_cols: 2,
    values: [[95.2, null], [101.7, 88.4]],
  };
}

export function cargoVessel(): VesselPayload {
  return {
    mmsi: 219018271,
    name: 'NORDIC TRADER',
    timestamp: '2025-03-14T10:00:00Z',
    lat: 44.05,
    lon: 2.05,
    sog_kn: 12.3,
    cog_deg: 245,
    ais_type: 70,
    category: 'cargo',
    nav_status: 0,
    length_m: 180,
    beam_m: 28,
    draft_m: 7.5,
    estimated: { length_m: false, beam_m: false, draft_m: true },
    radiating: true,
    supported: true,
    sl_db: { '63': 168.2, '125': 152.34, broadband: 171.9 },
  };
}

export function fishingVessel(): VesselPayload {
  return {
    mmsi: 367001234,
    name: null,
    timestamp: '2025-03-14T10:00:20Z',
    lat: 44.02,
    lon: 2.08,
    sog_kn: 4.2,
    cog_deg: null,
    ais_type: 30,
    category: 'fishing',
    nav_status: 0,
    length_m: null,
    beam_m: null,
    draft_m: null,
    estimated: { length_m: true, beam_m: true, draft_m: true },
    radiating: true,
    supported: true,
    sl_db: { '63': 141.0, '125': 139.5, broadband: 149.8 },
  };
}

export function liveFixture(): LivePayload {
  return {
    band: 'broadband',
    model: 'COMBINED',
    vessel_count: 2,
    truncated: false,
    vessels: [cargoVessel(), fishingVessel()],
    diagnostics: { gridded: 2, not_radiating: 0, unsupported: 0, no_water: 0 },
    grid: gridFixture(),
    last_poll: '2025-03-14T10:00:30Z',
  };
}

export function vesselDetailFixture(): VesselDetail {
  return { ...cargoVessel(), model: 'COMBINED', source: 'live' };
}

export function regionsFixture(): FeatureCollection {
  return {
    type: 'FeatureCollection',
    features: [{
      type: 'Feature',
      properties: { name: 'testsea' },
      geometry: {
        type: 'Polygon',
        coordinates: [[[-5, 40], [5, 40], [5, 50], [-5, 50], [-5, 40]]],
      },
    }],
  };
}

export function mpaFixture(): FeatureCollection {
  return {
    type: 'FeatureCollection',
    features: [{
      type: 'Feature',
      properties: { id: 'mpa-1', name: 'Cetacean Reserve', designation: 'SPA' },
      geometry: {
        type: 'Polygon',
        coordinates: [[[2, 44], [2.3, 44], [2.3, 44.2], [2, 44.2], [2, 44]]],
      },
    }],
  };
}

export function selJobDone(withScenario = false): SelJobPayload {
  const bands = (v63: number, v125: number, vbb: number) =>
    ({ '63': v63, '125': v125, broadband: vbb });
  return {
    job_id: 'j1',
    status: 'done',
    progress: 1,
    submitted_at: '2025-03-15T08:00:00Z',
    params: {
      extent: { min_lat: 44, min_lon: 2, max_lat: 45, max_lon: 3 },
      start: '2025-03-01T00:00:00Z',
      end: '2025-03-02T00:00:00Z',
      scenario: withScenario
        ? { cap_kn: 11, zone: { mpa_id: 'mpa-1' }, buffer_km: 20 }
        : null,
    },
    result: {
      baseline: {
        '63': gridFixture(), '125': gridFixture(), broadband: gridFixture(),
      },
      scenario: withScenario
        ? { '63': gridFixture(), '125': gridFixture(), broadband: gridFixture() }
        : null,
      mpa_means: [{
        mpa_id: 'mpa-1',
        name: 'Cetacean Reserve',
        baseline: bands(150, 145, 155),
        scenario: withScenario ? bands(147, 143, 151.5) : null,
      }],
      diagnostics: {
        segments: 1200, used: 1100, not_radiating: 40,
        unsupported: 30, no_water: 30, sl_errors: 0,
      },
    },
  };
}
