/**
 * UI state and its URL-hash serialization.
 *
 * The whole interactive state lives in one plain object so a deep link
 * reproduces the session: mode, viewport, band, model, layers, statuses,
 * playback position and the exposure form all round-trip through the hash.
 */

import { BandKey, Extent, ModelKey } from './types';

export type Mode = 'LVM' | 'HM' | 'SELM';

export interface LayerToggles {
  vessels: boolean;
  heatmap: boolean;
  mpa: boolean;
}

export interface SelForm {
  start: string;          // YYYY-MM-DD, window opens at 00:00 UTC
  end: string;            // YYYY-MM-DD, exclusive upper edge at 00:00 UTC
  area: Extent | null;    // area of interest drawn on the map
  scenario: boolean;
  capKn: number;
  bufferKm: number;
  zoneMpa: string | null; // MPA the speed cap applies around
}

export interface UiState {
  mode: Mode;
  extent: Extent;
  band: BandKey;
  model: ModelKey;
  layers: LayerToggles;
  statuses: number[];
  region: string;
  source: 'stored' | 'upload';
  date: string;           // YYYY-MM-DD playback date
  clockS: number;         // playback position, seconds since midnight UTC
  speed: number;          // playback multiplier
  sel: SelForm;
  selectedMmsi: number | null;
}

export function defaultState(): UiState {
  return {
    mode: 'LVM',
    extent: { min_lat: 30, min_lon: -15, max_lat: 65, max_lon: 40 },
    band: 'broadband',
    model: 'COMBINED',
    layers: { vessels: true, heatmap: true, mpa: false },
    statuses: [0, 1],
    region: '',
    source: 'stored',
    date: '',
    clockS: 12 * 3600,
    speed: 1,
    sel: {
      start: '',
      end: '',
      area: null,
      scenario: false,
      capKn: 11,
      bufferKm: 20,
      zoneMpa: null,
    },
    selectedMmsi: null,
  };
}

/** Exposure maps always use the energetic mean across models. */
export function effectiveModel(state: UiState): ModelKey {
  return state.mode === 'SELM' ? 'COMBINED' : state.model;
}

/** Switch display mode; viewport, band and every other selection carry over. */
export function withMode(state: UiState, mode: Mode): UiState {
  return { ...state, mode };
}

const MODES: Record<string, Mode> = { lvm: 'LVM', hm: 'HM', selm: 'SELM' };
const BANDS: BandKey[] = ['63', '125', 'broadband'];
const MODELS: ModelKey[] = ['RANDI', 'JE', 'LBDS', 'AQUO', 'SRV', 'COMBINED'];

function extentParam(e: Extent): string {
  return [e.min_lat, e.min_lon, e.max_lat, e.max_lon].map(String).join(',');
}

function parseExtent(raw: string | null): Extent | null {
  if (!raw) return null;
  const parts = raw.split(',').map(Number);
  if (parts.length !== 4 || parts.some((v) => !Number.isFinite(v))) return null;
  const [min_lat, min_lon, max_lat, max_lon] = parts;
  if (!(min_lat < max_lat && min_lon < max_lon)) return null;
  return { min_lat, min_lon, max_lat, max_lon };
}

/** Seconds since midnight as HH:MM:SS, the service's `t` parameter. */
export function formatClock(clockS: number): string {
  const h = Math.floor(clockS / 3600);
  const m = Math.floor((clockS % 3600) / 60);
  const s = Math.floor(clockS % 60);
  const pad = (v: number) => String(v).padStart(2, '0');
  return `${pad(h)}:${pad(m)}:${pad(s)}`;
}

function parseClock(raw: string | null): number | null {
  if (!raw || !/^\d{2}:\d{2}:\d{2}$/.test(raw)) return null;
  const [h, m, s] = raw.split(':').map(Number);
  if (h > 23 || m > 59 || s > 59) return null;
  return h * 3600 + m * 60 + s;
}

const DATE_RE = /^\d{4}-\d{2}-\d{2}$/;

/** Serialize state into hash parameters (without the leading '#'). */
export function encodeState(state: UiState): string {
  const q = new URLSearchParams();
  q.set('mode', state.mode.toLowerCase());
  q.set('bbox', extentParam(state.extent));
  q.set('band', state.band);
  q.set('model', state.model.toLowerCase());
  const layers = (['vessels', 'heatmap', 'mpa'] as const)
    .filter((name) => state.layers[name]);
  q.set('layers', layers.join(','));
  q.set('st', state.statuses.join(','));
  if (state.region) q.set('region', state.region);
  q.set('src', state.source);
  if (state.date) q.set('date', state.date);
  q.set('t', formatClock(state.clockS));
  q.set('speed', String(state.speed));
  if (state.sel.start) q.set('ss', state.sel.start);
  if (state.sel.end) q.set('se', state.sel.end);
  if (state.sel.area) q.set('area', extentParam(state.sel.area));
  if (state.sel.scenario) q.set('scn', '1');
  q.set('cap', String(state.sel.capKn));
  q.set('buf', String(state.sel.bufferKm));
  if (state.sel.zoneMpa) q.set('zone', state.sel.zoneMpa);
  if (state.selectedMmsi != null) q.set('v', String(state.selectedMmsi));
  return q.toString();
}

/**
 * Rebuild state from hash parameters. Unknown or malformed values fall back
 * to `base` field by field, so a stale link still loads.
 */
export function decodeState(hash: string, base: UiState = defaultState()): UiState {
  const q = new URLSearchParams(hash.replace(/^#/, ''));
  const state: UiState = {
    ...base,
    layers: { ...base.layers },
    statuses: [...base.statuses],
    sel: { ...base.sel },
  };

  const mode = MODES[(q.get('mode') ?? '').toLowerCase()];
  if (mode) state.mode = mode;
  const extent = parseExtent(q.get('bbox'));
  if (extent) state.extent = extent;
  const band = q.get('band');
  if (band && (BANDS as string[]).includes(band)) state.band = band as BandKey;
  const model = (q.get('model') ?? '').toUpperCase();
  if ((MODELS as string[]).includes(model)) state.model = model as ModelKey;

  const layers = q.get('layers');
  if (layers != null) {
    const names = layers.split(',');
    state.layers = {
      vessels: names.includes('vessels'),
      heatmap: names.includes('heatmap'),
      mpa: names.includes('mpa'),
    };
  }
  const statuses = q.get('st');
  if (statuses) {
    const codes = statuses.split(',').map(Number)
      .filter((v) => Number.isInteger(v) && v >= 0);
    if (codes.length) state.statuses = codes;
  }

  const region = q.get('region');
  if (region) state.region = region;
  const source = q.get('src');
  if (source === 'stored' || source === 'upload') state.source = source;
  const date = q.get('date');
  if (date && DATE_RE.test(date)) state.date = date;
  const clockS = parseClock(q.get('t'));
  if (clockS != null) state.clockS = clockS;
  const speed = Number(q.get('speed'));
  if (Number.isFinite(speed) && speed > 0) state.speed = speed;

  const selStart = q.get('ss');
  if (selStart && DATE_RE.test(selStart)) state.sel.start = selStart;
  const selEnd = q.get('se');
  if (selEnd && DATE_RE.test(selEnd)) state.sel.end = selEnd;
  const area = parseExtent(q.get('area'));
  if (area) state.sel.area = area;
  state.sel.scenario = q.get('scn') === '1' ? true : state.sel.scenario;
  const cap = Number(q.get('cap'));
  if (Number.isFinite(cap) && cap > 0) state.sel.capKn = cap;
  const bufferRaw = q.get('buf');
  if (bufferRaw) {
    const buffer = Number(bufferRaw);
    if (Number.isFinite(buffer) && buffer >= 0) state.sel.bufferKm = buffer;
  }
  const zone = q.get('zone');
  if (zone) state.sel.zoneMpa = zone;

  const selected = Number(q.get('v'));
  if (Number.isInteger(selected) && selected > 0) state.selectedMmsi = selected;
  return state;
}
