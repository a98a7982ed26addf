/**
 * Payload shapes of the noise service HTTP API, plus the unified AIS record
 * shape shared by API responses and client-side CSV uploads.
 *
 * Every acoustic level displayed by the client originates from the service;
 * nothing here is computed locally beyond display scaling.
 */

export type BandKey = '63' | '125' | 'broadband';

export const BAND_KEYS: BandKey[] = ['63', '125', 'broadband'];

export const BAND_LABELS: Record<BandKey, string> = {
  '63': '63 Hz',
  '125': '125 Hz',
  broadband: '20–2000 Hz',
};

export type ModelKey = 'RANDI' | 'JE' | 'LBDS' | 'AQUO' | 'SRV' | 'COMBINED';

export const MODEL_KEYS: ModelKey[] = ['RANDI', 'JE', 'LBDS', 'AQUO', 'SRV', 'COMBINED'];

export type VesselCategory =
  | 'cargo' | 'tanker' | 'passenger' | 'fishing' | 'sailing' | 'pleasure' | 'other';

export interface Extent {
  min_lat: number;
  min_lon: number;
  max_lat: number;
  max_lon: number;
}

export interface VesselPayload {
  mmsi: number;
  name: string | null;
  timestamp: string;
  lat: number;
  lon: number;
  sog_kn: number;
  cog_deg: number | null;
  ais_type: number | null;
  category: VesselCategory;
  nav_status: number | null;
  length_m: number | null;
  beam_m: number | null;
  draft_m: number | null;
  estimated: { length_m: boolean; beam_m: boolean; draft_m: boolean };
  radiating: boolean;
  supported: boolean;
  sl_db: Record<BandKey, number | null>;
}

/** Single-band grid; rows run south to north, columns west to east. */
export interface GridPayload {
  extent: Extent;
  resolution_deg: number;
  n_rows: number;
  n_cols: number;
  values: (number | null)[][];
}

export interface ScenePayload {
  band: BandKey;
  model: ModelKey;
  vessel_count: number;
  truncated: boolean;
  vessels: VesselPayload[];
  diagnostics: { gridded: number; not_radiating: number; unsupported: number; no_water: number };
  grid: GridPayload;
}

export interface LivePayload extends ScenePayload {
  last_poll: string | null;
}

export interface HistoryPayload extends ScenePayload {
  region: string;
  t: string;
}

export interface VesselDetail extends VesselPayload {
  model: ModelKey;
  source: 'live' | 'stored';
}

export interface SelScenario {
  cap_kn: number;
  zone: { mpa_id: string } | Record<string, unknown>;
  buffer_km?: number;
}

export interface SelRequest {
  extent: Extent;
  start: string;
  end: string;
  scenario?: SelScenario;
}

export interface MpaMeansRow {
  mpa_id: string;
  name: string;
  baseline: Record<BandKey, number | null>;
  scenario?: Record<BandKey, number | null> | null;
}

export interface SelResultPayload {
  baseline: Record<BandKey, GridPayload>;
  scenario: Record<BandKey, GridPayload> | null;
  mpa_means: MpaMeansRow[];
  diagnostics: {
    segments: number;
    used: number;
    not_radiating: number;
    unsupported: number;
    no_water: number;
    sl_errors: number;
  };
}

export type SelJobStatus = 'queued' | 'running' | 'done' | 'error';

export interface SelJobPayload {
  job_id: string;
  status: SelJobStatus;
  progress: number;
  submitted_at: string;
  params: { extent: Extent; start: string; end: string; scenario: SelScenario | null };
  error?: string;
  result?: SelResultPayload;
}

export interface PolygonFeature {
  type: 'Feature';
  properties: Record<string, unknown>;
  geometry: { type: 'Polygon'; coordinates: number[][][] };
}

export interface FeatureCollection {
  type: 'FeatureCollection';
  features: PolygonFeature[];
}

/**
 * One AIS position report. API vessels and uploaded CSV rows are both
 * normalized into this shape so playback works the same either way.
 */
export interface AisRecord {
  mmsi: number;
  timestamp: string;
  lat: number;
  lon: number;
  sog_kn: number;
  cog_deg: number | null;
  ais_type: number | null;
  length_m: number | null;
  beam_m: number | null;
  draft_m: number | null;
  nav_status: number | null;
  name: string | null;
  je_class: number | null;
}

/** AIS type code to category, matching the service-side grouping. */
export function categoryOfAisType(aisType: number | null): VesselCategory {
  if (aisType == null) return 'other';
  if (aisType >= 60 && aisType <= 69) return 'passenger';
  if (aisType >= 70 && aisType <= 79) return 'cargo';
  if (aisType >= 80 && aisType <= 89) return 'tanker';
  if (aisType === 30) return 'fishing';
  if (aisType === 36) return 'sailing';
  if (aisType === 37) return 'pleasure';
  return 'other';
}
