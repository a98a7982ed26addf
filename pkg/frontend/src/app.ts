/**
 * Application shell: wires the map, the control panel and the service
 * client into the three display modes.
 *
 * LVM shows the latest poll as vessels plus an SPL heatmap and refreshes
 * itself. HM replays stored dates or an uploaded CSV against a playback
 * clock. SELM submits exposure jobs over a drawn area and renders the
 * returned SEL grids, per-MPA means and the speed-cap comparison.
 */

import { ApiClient, ApiError } from './api';
import { PlaybackClock } from './clock';
import { ScaleConfig, defaultScales } from './colors';
import { downloadCsv, parseAisCsv } from './csv';
import { MapView } from './map';
import {
  el,
  mpaMeansTable,
  progressBar,
  scaleLegend,
  scenarioBars,
  uploadVesselPanel,
  vesselLegend,
  vesselPanel,
  warningsList,
} from './panels';
import {
  Mode,
  UiState,
  decodeState,
  effectiveModel,
  encodeState,
  formatClock,
  withMode,
} from './state';
import { TierLimits, defaultTiers, tierViolation } from './tiers';
import {
  AisRecord,
  BandKey,
  Extent,
  ModelKey,
  PolygonFeature,
  SelJobPayload,
  SelRequest,
  VesselPayload,
  categoryOfAisType,
} from './types';

export interface AppConfig {
  apiBase: string;
  pollIntervalMs: number;    // 0 disables the live auto-refresh
  jobPollMs: number;
  debounceMs: number;
  clockTickMs: number;
  historyValidityS: number;  // visibility window for uploaded playback
  scales: ScaleConfig;
  tiers: Record<string, TierLimits>;
  fetchFn?: typeof fetch;
  now?: () => number;
}

export function defaultConfig(): AppConfig {
  return {
    apiBase: '',
    pollIntervalMs: 30_000,
    jobPollMs: 700,
    debounceMs: 250,
    clockTickMs: 500,
    historyValidityS: 600,
    scales: defaultScales(),
    tiers: defaultTiers(),
  };
}

const MODE_LABELS: Record<Mode, string> = {
  LVM: 'Live vessel mode',
  HM: 'History mode',
  SELM: 'Sound exposure mode',
};

function debounce<A extends unknown[]>(ms: number, fn: (...args: A) => void) {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

function shiftDate(date: string, days: number): string {
  const ms = Date.parse(`${date}T00:00:00Z`) + days * 86_400_000;
  return new Date(ms).toISOString().slice(0, 10);
}

function todayUtc(now: () => number): string {
  return new Date(now()).toISOString().slice(0, 10);
}

function extentParams(extent: Extent): Record<string, string> {
  return {
    min_lat: String(extent.min_lat),
    min_lon: String(extent.min_lon),
    max_lat: String(extent.max_lat),
    max_lon: String(extent.max_lon),
  };
}

const TEMPLATE = `
<div class="app-shell">
  <header class="app-header">
    <span class="app-title">vesselnoise</span>
    <span id="mode-label"></span>
    <span id="last-update"></span>
    <span id="stale-badge" class="stale-badge" hidden>
      <span id="stale-text"></span>
      <button id="retry-btn" type="button">Retry</button>
    </span>
  </header>
  <div class="app-body">
    <nav class="sidebar">
      <button type="button" class="mode-btn" data-mode="LVM">Live vessels</button>
      <button type="button" class="mode-btn" data-mode="HM">History</button>
      <button type="button" class="mode-btn" data-mode="SELM">Sound exposure</button>
      <a class="docs-link" href="../docs/formats.md" target="_blank">File formats</a>
    </nav>
    <main class="map-wrap">
      <canvas id="map" width="800" height="520"></canvas>
      <div id="map-message" class="map-message" hidden></div>
      <div id="band-bar" class="band-bar">
        <label><input type="radio" name="band" value="63"> 63 Hz</label>
        <label><input type="radio" name="band" value="125"> 125 Hz</label>
        <label><input type="radio" name="band" value="broadband"> 20&ndash;2000 Hz</label>
      </div>
      <div id="legend-slot" class="legend-slot"></div>
    </main>
    <aside class="controls">
      <section class="control-section">
        <label for="model-select">SL model</label>
        <select id="model-select">
          <option>RANDI</option><option>JE</option><option>LBDS</option>
          <option>AQUO</option><option>SRV</option><option>COMBINED</option>
        </select>
        <div id="model-note" class="control-note" hidden>
          Exposure maps always use the Combined model.
        </div>
      </section>
      <section class="control-section">
        <div class="section-title">Layers</div>
        <label><input type="checkbox" id="layer-vessels"> Show vessels</label>
        <label><input type="checkbox" id="layer-heatmap"> Show noise heatmap</label>
        <label><input type="checkbox" id="layer-mpa"> Show MPAs</label>
        <div class="section-title">Navigation status</div>
        <label><input type="checkbox" id="status-0"> Underway (0)</label>
        <label><input type="checkbox" id="status-1"> At anchor (1)</label>
      </section>
      <section class="control-section" id="hm-section" hidden>
        <div class="section-title">Playback</div>
        <label for="source-select">Data source</label>
        <select id="source-select">
          <option value="stored">Stored reports</option>
          <option value="upload">Uploaded CSV</option>
        </select>
        <label for="region-select">Region</label>
        <select id="region-select"></select>
        <input type="file" id="upload-input" accept=".csv,text/csv" hidden>
        <label for="date-input">Date</label>
        <input type="date" id="date-input">
        <div class="playback-row">
          <button type="button" id="back-10">&minus;10 min</button>
          <button type="button" id="start-btn">Start</button>
          <button type="button" id="fwd-10">+10 min</button>
          <button type="button" id="next-day">Next day</button>
        </div>
        <input type="range" id="time-slider" min="0" max="86399" step="60">
        <div id="time-label" class="time-label"></div>
        <label for="speed-slider">Playback speed <span id="speed-label"></span></label>
        <input type="range" id="speed-slider" min="0" max="6" step="1">
        <div id="hm-message" class="inline-message"></div>
        <div id="warnings-slot"></div>
      </section>
      <section class="control-section" id="sel-section" hidden>
        <div class="section-title">Sound exposure</div>
        <label for="sel-start">Start date</label>
        <input type="date" id="sel-start">
        <label for="sel-end">End date (exclusive)</label>
        <input type="date" id="sel-end">
        <div class="playback-row">
          <button type="button" id="draw-area">Draw area</button>
          <button type="button" id="use-view">Use current view</button>
        </div>
        <div id="sel-area-label" class="control-note"></div>
        <label for="api-key">API key (optional)</label>
        <input type="text" id="api-key" autocomplete="off">
        <label><input type="checkbox" id="scenario-toggle"> Speed-cap scenario</label>
        <div id="scenario-fields" hidden>
          <label for="cap-input">Cap (kn)</label>
          <input type="number" id="cap-input" min="1" step="0.5">
          <label for="buffer-input">Buffer around zone (km)</label>
          <input type="number" id="buffer-input" min="0" step="1">
          <label for="zone-select">Cap zone (MPA)</label>
          <select id="zone-select"></select>
        </div>
        <button type="button" id="sel-submit">Generate SEL map</button>
        <div id="sel-message" class="inline-message"></div>
        <div id="sel-results"></div>
      </section>
      <div id="panel-slot"></div>
    </aside>
  </div>
</div>
`;

export class App {
  state: UiState;

  private config: AppConfig;
  private api: ApiClient;
  private map: MapView;
  private clock: PlaybackClock;
  private root: HTMLElement;
  private now: () => number;

  private mpaFeatures: PolygonFeature[] = [];
  private regionNames: string[] = [];
  private uploadRecords: AisRecord[] | null = null;
  private lastGoodUpdate: string | null = null;
  private selJob: SelJobPayload | null = null;
  private selVariant: 'baseline' | 'scenario' = 'baseline';
  private lastWrittenHash = '';
  private hadInitialExtent: boolean;
  private clockTimer: ReturnType<typeof setInterval> | null = null;
  private jobTimer: ReturnType<typeof setTimeout> | null = null;
  private fetchHistoryDebounced: () => void;

  constructor(root: HTMLElement, config: AppConfig = defaultConfig()) {
    this.root = root;
    this.config = config;
    this.now = config.now ?? (() => Date.now());
    this.api = new ApiClient(config.apiBase, config.fetchFn);
    this.clock = new PlaybackClock(this.now);
    // remembered before writeHash canonicalizes the fragment, which always
    // carries a bbox afterwards
    this.hadInitialExtent = new URLSearchParams(
      window.location.hash.replace(/^#/, '')).has('bbox');
    this.state = decodeState(window.location.hash);

    root.innerHTML = TEMPLATE;
    this.map = new MapView(this.ref<HTMLCanvasElement>('#map'), {
      onSelect: (mmsi) => void this.selectVessel(mmsi),
      onExtentChange: (extent) => {
        this.state.extent = extent;
        this.writeHash();
        void this.refresh();
      },
      onAreaDrawn: (extent) => {
        this.state.sel.area = extent;
        this.map.setAreaOfInterest(extent);
        this.writeHash();
        this.syncControls();
      },
    });
    this.fetchHistoryDebounced = debounce(config.debounceMs, () => {
      void this.fetchHistory();
    });
    this.wireControls();
    this.syncControls();
    this.writeHash();

    window.addEventListener('hashchange', () => {
      if (window.location.hash === this.lastWrittenHash) return;
      this.state = decodeState(window.location.hash);
      this.syncControls();
      void this.refresh();
    });
    if (config.pollIntervalMs > 0) {
      setInterval(() => {
        if (this.state.mode === 'LVM') void this.fetchLive();
      }, config.pollIntervalMs);
    }
  }

  /** Load static geography, fit the default view, then enter the mode. */
  async start(): Promise<void> {
    try {
      const [regions, mpas] = await Promise.all([
        this.api.regions(), this.api.mpas(),
      ]);
      this.mpaFeatures = mpas.features;
      this.map.setMpas(this.mpaFeatures);
      this.regionNames = regions.features
        .map((f) => String(f.properties.name ?? ''))
        .filter(Boolean);
      if (!this.state.region && this.regionNames.length) {
        this.state.region = this.regionNames[0];
      }
      if (!this.hadInitialExtent && regions.features.length) {
        const ring = regions.features[0].geometry.coordinates[0];
        const lats = ring.map(([, lat]) => lat);
        const lons = ring.map(([lon]) => lon);
        this.state.extent = {
          min_lat: Math.min(...lats), max_lat: Math.max(...lats),
          min_lon: Math.min(...lons), max_lon: Math.max(...lons),
        };
      }
      this.syncControls();
      this.writeHash();
    } catch {
      this.showStale();
    }
    await this.refresh();
    if (this.state.selectedMmsi != null) {
      await this.selectVessel(this.state.selectedMmsi);
    }
  }

  private ref<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  }

  // -- control wiring -------------------------------------------------------

  private wireControls(): void {
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>('.mode-btn')) {
      btn.addEventListener('click', () => this.setMode(btn.dataset.mode as Mode));
    }
    this.ref<HTMLButtonElement>('#retry-btn').addEventListener('click', () => {
      void this.refresh();
    });

    for (const radio of this.root.querySelectorAll<HTMLInputElement>('input[name="band"]')) {
      radio.addEventListener('change', () => {
        if (!radio.checked) return;
        this.state.band = radio.value as BandKey;
        this.writeHash();
        this.renderLegend();
        if (this.state.mode === 'SELM') this.renderSelGrid();
        else void this.refresh();
      });
    }
    this.ref<HTMLSelectElement>('#model-select').addEventListener('change', (e) => {
      this.state.model = (e.target as HTMLSelectElement).value as ModelKey;
      this.writeHash();
      this.renderLegend();
      void this.refresh();
    });

    const layerInput = (id: string, name: 'vessels' | 'heatmap' | 'mpa') => {
      this.ref<HTMLInputElement>(id).addEventListener('change', (e) => {
        this.state.layers[name] = (e.target as HTMLInputElement).checked;
        this.map.setLayers({ ...this.state.layers });
        this.writeHash();
      });
    };
    layerInput('#layer-vessels', 'vessels');
    layerInput('#layer-heatmap', 'heatmap');
    layerInput('#layer-mpa', 'mpa');

    const statusInput = (id: string, code: number) => {
      const input = this.ref<HTMLInputElement>(id);
      input.addEventListener('change', () => {
        const next = new Set(this.state.statuses);
        if (input.checked) next.add(code);
        else next.delete(code);
        if (!next.size) {
          input.checked = true; // the filter must keep at least one status
          return;
        }
        this.state.statuses = [...next].sort((a, b) => a - b);
        this.writeHash();
        void this.refresh();
      });
    };
    statusInput('#status-0', 0);
    statusInput('#status-1', 1);

    // playback
    this.ref<HTMLSelectElement>('#source-select').addEventListener('change', (e) => {
      this.state.source = (e.target as HTMLSelectElement).value as 'stored' | 'upload';
      this.writeHash();
      this.syncControls();
      if (this.state.source === 'upload' && !this.uploadRecords) {
        this.ref<HTMLInputElement>('#upload-input').click();
      } else {
        void this.refresh();
      }
    });
    this.ref<HTMLSelectElement>('#region-select').addEventListener('change', (e) => {
      this.state.region = (e.target as HTMLSelectElement).value;
      this.writeHash();
      void this.refresh();
    });
    this.ref<HTMLInputElement>('#upload-input').addEventListener('change', (e) => {
      const file = (e.target as HTMLInputElement).files?.[0];
      if (file) void this.loadUpload(file);
    });
    this.ref<HTMLInputElement>('#date-input').addEventListener('change', (e) => {
      const value = (e.target as HTMLInputElement).value;
      if (!value) return;
      this.state.date = value;
      this.writeHash();
      void this.refresh();
    });
    this.ref<HTMLInputElement>('#time-slider').addEventListener('input', (e) => {
      this.state.clockS = Number((e.target as HTMLInputElement).value);
      this.clock.seek(this.state.clockS);
      this.updateTimeLabel();
      this.writeHash();
      if (this.state.source === 'stored') this.fetchHistoryDebounced();
      else this.renderUploadFrame();
    });
    this.ref<HTMLInputElement>('#speed-slider').addEventListener('input', (e) => {
      this.state.speed = 2 ** Number((e.target as HTMLInputElement).value);
      this.clock.setSpeed(this.state.speed);
      this.ref('#speed-label').textContent = `×${this.state.speed}`;
      this.writeHash();
    });
    this.ref<HTMLButtonElement>('#start-btn').addEventListener('click', () => {
      this.togglePlayback();
    });
    this.ref<HTMLButtonElement>('#back-10').addEventListener('click', () => {
      this.stepClock(-600);
    });
    this.ref<HTMLButtonElement>('#fwd-10').addEventListener('click', () => {
      this.stepClock(600);
    });
    this.ref<HTMLButtonElement>('#next-day').addEventListener('click', () => {
      if (!this.state.date) return;
      this.state.date = shiftDate(this.state.date, 1);
      this.writeHash();
      this.syncControls();
      void this.refresh();
    });

    // exposure form
    this.ref<HTMLInputElement>('#sel-start').addEventListener('change', (e) => {
      this.state.sel.start = (e.target as HTMLInputElement).value;
      this.writeHash();
    });
    this.ref<HTMLInputElement>('#sel-end').addEventListener('change', (e) => {
      this.state.sel.end = (e.target as HTMLInputElement).value;
      this.writeHash();
    });
    this.ref<HTMLButtonElement>('#draw-area').addEventListener('click', () => {
      this.map.setDrawMode(true);
    });
    this.ref<HTMLButtonElement>('#use-view').addEventListener('click', () => {
      this.state.sel.area = { ...this.state.extent };
      this.map.setAreaOfInterest(this.state.sel.area);
      this.writeHash();
      this.syncControls();
    });
    this.ref<HTMLInputElement>('#scenario-toggle').addEventListener('change', (e) => {
      this.state.sel.scenario = (e.target as HTMLInputElement).checked;
      this.ref('#scenario-fields').hidden = !this.state.sel.scenario;
      this.writeHash();
      this.renderSelResults();
    });
    this.ref<HTMLInputElement>('#cap-input').addEventListener('change', (e) => {
      this.state.sel.capKn = Number((e.target as HTMLInputElement).value) || 0;
      this.writeHash();
    });
    this.ref<HTMLInputElement>('#buffer-input').addEventListener('change', (e) => {
      this.state.sel.bufferKm = Number((e.target as HTMLInputElement).value) || 0;
      this.writeHash();
    });
    this.ref<HTMLSelectElement>('#zone-select').addEventListener('change', (e) => {
      this.state.sel.zoneMpa = (e.target as HTMLSelectElement).value || null;
      this.writeHash();
    });
    this.ref<HTMLButtonElement>('#sel-submit').addEventListener('click', () => {
      void this.submitSel();
    });
  }

  private setMode(mode: Mode): void {
    this.pausePlayback();
    this.state = withMode(this.state, mode);
    this.writeHash();
    this.syncControls();
    void this.refresh();
  }

  /** Reflect state into every control; called after any state replacement. */
  syncControls(): void {
    const s = this.state;
    for (const btn of this.root.querySelectorAll<HTMLButtonElement>('.mode-btn')) {
      btn.classList.toggle('active', btn.dataset.mode === s.mode);
    }
    this.ref('#mode-label').textContent = MODE_LABELS[s.mode];
    for (const radio of this.root.querySelectorAll<HTMLInputElement>('input[name="band"]')) {
      radio.checked = radio.value === s.band;
    }
    const modelSelect = this.ref<HTMLSelectElement>('#model-select');
    modelSelect.value = effectiveModel(s);
    modelSelect.disabled = s.mode === 'SELM';
    this.ref('#model-note').hidden = s.mode !== 'SELM';
    this.ref<HTMLInputElement>('#layer-vessels').checked = s.layers.vessels;
    this.ref<HTMLInputElement>('#layer-heatmap').checked = s.layers.heatmap;
    this.ref<HTMLInputElement>('#layer-mpa').checked = s.layers.mpa;
    this.ref<HTMLInputElement>('#status-0').checked = s.statuses.includes(0);
    this.ref<HTMLInputElement>('#status-1').checked = s.statuses.includes(1);

    this.ref('#hm-section').hidden = s.mode !== 'HM';
    this.ref('#sel-section').hidden = s.mode !== 'SELM';

    const regionSelect = this.ref<HTMLSelectElement>('#region-select');
    if (regionSelect.options.length !== this.regionNames.length) {
      regionSelect.replaceChildren(
        ...this.regionNames.map((name) => new Option(name, name)));
    }
    if (s.region) regionSelect.value = s.region;
    this.ref<HTMLSelectElement>('#source-select').value = s.source;
    regionSelect.disabled = s.source === 'upload';
    const dateInput = this.ref<HTMLInputElement>('#date-input');
    dateInput.value = s.date;
    // dates after today cannot have stored reports; the picker blocks them
    dateInput.max = todayUtc(this.now);
    this.ref<HTMLInputElement>('#time-slider').value = String(Math.floor(s.clockS));
    this.updateTimeLabel();
    this.ref<HTMLInputElement>('#speed-slider').value =
      String(Math.round(Math.log2(Math.max(1, s.speed))));
    this.ref('#speed-label').textContent = `×${s.speed}`;

    this.ref<HTMLInputElement>('#sel-start').value = s.sel.start;
    this.ref<HTMLInputElement>('#sel-end').value = s.sel.end;
    const area = s.sel.area;
    this.ref('#sel-area-label').textContent = area
      ? `Area: ${area.min_lat.toFixed(3)},${area.min_lon.toFixed(3)} to `
        + `${area.max_lat.toFixed(3)},${area.max_lon.toFixed(3)}`
      : 'No area selected';
    this.ref<HTMLInputElement>('#scenario-toggle').checked = s.sel.scenario;
    this.ref('#scenario-fields').hidden = !s.sel.scenario;
    this.ref<HTMLInputElement>('#cap-input').value = String(s.sel.capKn);
    this.ref<HTMLInputElement>('#buffer-input').value = String(s.sel.bufferKm);
    const zoneSelect = this.ref<HTMLSelectElement>('#zone-select');
    if (zoneSelect.options.length !== this.mpaFeatures.length) {
      zoneSelect.replaceChildren(...this.mpaFeatures.map((f) => new Option(
        String(f.properties.name ?? f.properties.id),
        String(f.properties.id))));
    }
    if (s.sel.zoneMpa) zoneSelect.value = s.sel.zoneMpa;

    this.map.setLayers({ ...s.layers });
    this.map.setExtent({ ...s.extent });
    this.map.setAreaOfInterest(s.mode === 'SELM' ? s.sel.area : null);
    this.map.setSelected(s.selectedMmsi);
    this.renderLegend();
  }

  private writeHash(): void {
    const hash = `#${encodeState(this.state)}`;
    this.lastWrittenHash = hash;
    window.history.replaceState(null, '', hash);
  }

  // -- data flows -----------------------------------------------------------

  async refresh(): Promise<void> {
    switch (this.state.mode) {
      case 'LVM':
        await this.fetchLive();
        break;
      case 'HM':
        if (this.state.source === 'upload') this.renderUploadFrame();
        else await this.fetchHistory();
        break;
      case 'SELM':
        this.map.setVessels([]);
        this.renderSelGrid();
        this.renderSelResults();
        break;
    }
  }

  private sceneVessels(vessels: VesselPayload[]): void {
    this.map.setVessels(vessels.map((v) => ({
      mmsi: v.mmsi,
      lat: v.lat,
      lon: v.lon,
      cog_deg: v.cog_deg,
      category: v.category,
    })));
  }

  private async fetchLive(): Promise<void> {
    const s = this.state;
    try {
      const body = await this.api.live({
        ...extentParams(s.extent),
        band: s.band,
        model: effectiveModel(s),
        statuses: s.statuses.join(','),
      });
      if (!body) return; // a newer request superseded this one
      this.hideStale();
      this.clearMapMessage();
      this.lastGoodUpdate = body.last_poll;
      this.ref('#last-update').textContent =
        body.last_poll ? `last AIS update ${body.last_poll}` : 'no AIS update yet';
      this.sceneVessels(body.vessels);
      this.map.setGrid(body.grid, this.config.scales.spl[s.band]);
    } catch (err) {
      if (err instanceof ApiError && err.status < 500) {
        this.showMapMessage(err.detail);
      } else {
        this.showStale();
      }
    }
  }

  private async fetchHistory(): Promise<void> {
    const s = this.state;
    const message = this.ref('#hm-message');
    if (!s.region || !s.date) {
      message.textContent = 'Pick a region and a date to start playback.';
      return;
    }
    try {
      const body = await this.api.history({
        region: s.region,
        date: s.date,
        t: formatClock(s.clockS),
        band: s.band,
        model: effectiveModel(s),
        statuses: s.statuses.join(','),
      });
      if (!body) return;
      this.hideStale();
      message.textContent = '';
      this.ref('#last-update').textContent = `showing ${body.t}`;
      this.sceneVessels(body.vessels);
      this.map.setGrid(body.grid, this.config.scales.spl[s.band]);
    } catch (err) {
      if (err instanceof ApiError && err.status < 500) {
        message.textContent = err.detail;
      } else {
        this.showStale();
      }
    }
  }

  private async loadUpload(file: File): Promise<void> {
    const message = this.ref('#hm-message');
    try {
      const parsed = parseAisCsv(await file.text());
      this.uploadRecords = parsed.records;
      this.ref('#warnings-slot').replaceChildren(warningsList(parsed.warnings));
      message.textContent = `${parsed.records.length} report(s) loaded`;
      if (parsed.records.length && !this.state.date) {
        this.state.date = parsed.records
          .map((r) => r.timestamp.slice(0, 10))
          .sort()[0];
        this.writeHash();
        this.syncControls();
      }
      this.renderUploadFrame();
    } catch (err) {
      this.uploadRecords = null;
      message.textContent = (err as Error).message;
    }
  }

  /** Show uploaded reports valid at the playback instant. */
  private renderUploadFrame(): void {
    if (!this.uploadRecords || !this.state.date) return;
    const tMs = Date.parse(`${this.state.date}T00:00:00Z`) + this.state.clockS * 1000;
    const validity = this.config.historyValidityS * 1000;
    const latest = new Map<number, AisRecord>();
    for (const record of this.uploadRecords) {
      const ms = Date.parse(record.timestamp);
      if (ms <= tMs && ms > tMs - validity) latest.set(record.mmsi, record);
    }
    this.map.setVessels([...latest.values()].map((r) => ({
      mmsi: r.mmsi,
      lat: r.lat,
      lon: r.lon,
      cog_deg: r.cog_deg,
      category: categoryOfAisType(r.ais_type),
    })));
    this.map.setGrid(null, this.config.scales.spl[this.state.band]);
    this.ref('#last-update').textContent =
      `showing ${this.state.date}T${formatClock(this.state.clockS)}Z (uploaded)`;
  }

  async selectVessel(mmsi: number | null): Promise<void> {
    this.state.selectedMmsi = mmsi;
    this.map.setSelected(mmsi);
    this.writeHash();
    const slot = this.ref('#panel-slot');
    slot.replaceChildren();
    if (mmsi == null) return;
    if (this.state.mode === 'HM' && this.state.source === 'upload') {
      const record = this.uploadRecords
        ?.filter((r) => r.mmsi === mmsi)
        .sort((a, b) => a.timestamp.localeCompare(b.timestamp))
        .pop();
      if (record) slot.replaceChildren(uploadVesselPanel(record));
      return;
    }
    try {
      const detail = await this.api.vessel(mmsi, effectiveModel(this.state));
      slot.replaceChildren(vesselPanel(detail, this.state.band));
    } catch (err) {
      slot.replaceChildren(el('div', 'inline-message',
        err instanceof ApiError ? err.detail : 'vessel lookup failed'));
    }
  }

  // -- playback clock ---------------------------------------------------------

  private togglePlayback(): void {
    if (this.clock.running) {
      this.pausePlayback();
      return;
    }
    if (!this.state.date) return;
    this.clock.seek(this.state.clockS);
    this.clock.setSpeed(this.state.speed);
    this.clock.start();
    this.ref('#start-btn').textContent = 'Pause';
    this.clockTimer = setInterval(() => this.clockTick(), this.config.clockTickMs);
  }

  private pausePlayback(): void {
    if (this.clockTimer) {
      clearInterval(this.clockTimer);
      this.clockTimer = null;
    }
    if (this.clock.running) this.clock.pause();
    const btn = this.root.querySelector('#start-btn');
    if (btn) btn.textContent = 'Start';
  }

  private clockTick(): void {
    let s = this.clock.currentS();
    if (s >= 86_400) {
      this.state.date = shiftDate(this.state.date, 1);
      s -= 86_400;
      this.clock.seek(s);
      this.ref<HTMLInputElement>('#date-input').value = this.state.date;
    }
    this.state.clockS = Math.floor(s);
    this.ref<HTMLInputElement>('#time-slider').value = String(this.state.clockS);
    this.updateTimeLabel();
    this.writeHash();
    if (this.state.source === 'stored') this.fetchHistoryDebounced();
    else this.renderUploadFrame();
  }

  private stepClock(deltaS: number): void {
    let next = this.state.clockS + deltaS;
    if (next < 0 && this.state.date) {
      this.state.date = shiftDate(this.state.date, -1);
      next += 86_400;
    } else if (next >= 86_400 && this.state.date) {
      this.state.date = shiftDate(this.state.date, 1);
      next -= 86_400;
    }
    this.state.clockS = Math.max(0, Math.min(86_399, next));
    this.clock.seek(this.state.clockS);
    this.writeHash();
    this.syncControls();
    if (this.state.source === 'stored') this.fetchHistoryDebounced();
    else this.renderUploadFrame();
  }

  private updateTimeLabel(): void {
    this.ref('#time-label').textContent =
      `${this.state.date || 'no date'} ${formatClock(this.state.clockS)} UTC`;
  }

  // -- exposure workflow ------------------------------------------------------

  async submitSel(): Promise<void> {
    const s = this.state;
    const message = this.ref('#sel-message');
    message.classList.remove('tier-warning');
    if (!s.sel.start || !s.sel.end) {
      message.textContent = 'Pick a start and an end date.';
      return;
    }
    if (s.sel.end <= s.sel.start) {
      message.textContent = 'End date must be after the start date.';
      return;
    }
    if (!s.sel.area) {
      message.textContent = 'Draw an area of interest first.';
      return;
    }
    const apiKey = this.ref<HTMLInputElement>('#api-key').value.trim();
    const tier = apiKey ? 'registered' : 'guest';
    const limits = this.config.tiers[tier];
    const violation = tierViolation(tier, limits, s.sel.start, s.sel.end, s.sel.area);
    if (violation) {
      // caught before anything is sent; the service would 403 with the same
      message.textContent = violation;
      message.classList.add('tier-warning');
      return;
    }

    const request: SelRequest = {
      extent: s.sel.area,
      start: `${s.sel.start}T00:00:00Z`,
      end: `${s.sel.end}T00:00:00Z`,
    };
    if (s.sel.scenario) {
      if (!s.sel.zoneMpa) {
        message.textContent = 'Pick the MPA the speed cap applies around.';
        return;
      }
      request.scenario = {
        cap_kn: s.sel.capKn,
        zone: { mpa_id: s.sel.zoneMpa },
        buffer_km: s.sel.bufferKm,
      };
    }
    message.textContent = 'Submitting…';
    try {
      const submitted = await this.api.submitSel(request, apiKey || undefined);
      message.textContent = '';
      await this.pollJob(submitted.job_id);
    } catch (err) {
      if (err instanceof ApiError) {
        const body = err.body as { job_id?: string } | null;
        if (err.status === 409 && body?.job_id) {
          await this.pollJob(body.job_id); // identical job already running
          return;
        }
        message.textContent = err.detail; // 403 tier text arrives verbatim
        if (err.status === 403) message.classList.add('tier-warning');
      } else {
        message.textContent = 'service unreachable';
      }
    }
  }

  private async pollJob(jobId: string): Promise<void> {
    if (this.jobTimer) {
      clearTimeout(this.jobTimer);
      this.jobTimer = null;
    }
    try {
      const job = await this.api.selJob(jobId);
      this.selJob = job;
      this.renderSelResults();
      if (job.status === 'queued' || job.status === 'running') {
        this.jobTimer = setTimeout(() => {
          void this.pollJob(jobId);
        }, this.config.jobPollMs);
        return;
      }
      this.renderSelGrid();
    } catch (err) {
      this.ref('#sel-message').textContent =
        err instanceof ApiError ? err.detail : 'service unreachable';
    }
  }

  /** Push the selected variant and band of the finished job to the map. */
  private renderSelGrid(): void {
    const result = this.selJob?.result;
    if (!result) {
      this.map.setGrid(null, this.config.scales.sel[this.state.band]);
      return;
    }
    const variant = this.selVariant === 'scenario' && result.scenario
      ? result.scenario : result.baseline;
    this.map.setGrid(variant[this.state.band],
      this.config.scales.sel[this.state.band]);
  }

  private renderSelResults(): void {
    const slot = this.ref('#sel-results');
    slot.replaceChildren();
    const job = this.selJob;
    if (!job) return;

    const status = el('div', 'job-status',
      `job ${job.job_id}: ${job.status}`);
    slot.appendChild(status);
    if (job.status === 'queued' || job.status === 'running') {
      slot.appendChild(progressBar(job.progress));
      this.ref('#last-update').textContent =
        `exposure job ${Math.round(job.progress * 100)}%`;
      return;
    }
    if (job.status === 'error') {
      slot.appendChild(el('div', 'inline-message', job.error ?? 'job failed'));
      return;
    }
    const result = job.result;
    if (!result) return;
    this.ref('#last-update').textContent = `exposure job done (${job.job_id})`;

    const diag = result.diagnostics;
    slot.appendChild(el('div', 'job-diagnostics',
      `${diag.used} of ${diag.segments} track segments used`));

    const hasScenario = result.scenario != null;
    if (hasScenario) {
      const toggle = el('div', 'variant-toggle');
      for (const variant of ['baseline', 'scenario'] as const) {
        const label = el('label');
        const radio = el('input') as HTMLInputElement;
        radio.type = 'radio';
        radio.name = 'variant';
        radio.value = variant;
        radio.checked = this.selVariant === variant;
        radio.addEventListener('change', () => {
          if (!radio.checked) return;
          this.selVariant = variant;
          this.renderSelGrid();
        });
        label.appendChild(radio);
        label.appendChild(document.createTextNode(
          variant === 'baseline' ? ' Baseline' : ' Speed-cap scenario'));
        toggle.appendChild(label);
      }
      slot.appendChild(toggle);
    }

    slot.appendChild(mpaMeansTable(result.mpa_means, hasScenario));
    if (hasScenario) {
      for (const row of result.mpa_means) {
        if (row.scenario) {
          slot.appendChild(scenarioBars(row, this.config.scales.sel.broadband));
        }
      }
    }

    const exports = el('div', 'export-row');
    const exportBtn = (variant: 'baseline' | 'scenario', label: string) => {
      const btn = el('button', 'export-btn', label) as HTMLButtonElement;
      btn.type = 'button';
      btn.id = `sel-export-${variant}`;
      btn.addEventListener('click', () => {
        void this.exportSel(job.job_id, variant);
      });
      return btn;
    };
    exports.appendChild(exportBtn('baseline', 'Export SEL'));
    if (hasScenario) {
      exports.appendChild(exportBtn('scenario', 'Export scenario SEL'));
    }
    slot.appendChild(exports);
  }

  private async exportSel(jobId: string, variant: 'baseline' | 'scenario'): Promise<void> {
    try {
      const download = await this.api.selExport(jobId, variant);
      downloadCsv(download.filename, download.text);
    } catch (err) {
      this.ref('#sel-message').textContent =
        err instanceof ApiError ? err.detail : 'export failed';
    }
  }

  // -- shared chrome ----------------------------------------------------------

  private renderLegend(): void {
    const metric = this.state.mode === 'SELM' ? 'sel' : 'spl';
    const bounds = this.config.scales[metric][this.state.band];
    const slot = this.ref('#legend-slot');
    slot.replaceChildren(
      scaleLegend(metric, this.state.band, bounds),
      vesselLegend(effectiveModel(this.state)),
    );
  }

  private showStale(): void {
    this.ref('#stale-badge').hidden = false;
    this.ref('#stale-text').textContent = this.lastGoodUpdate
      ? `service unreachable — showing data from ${this.lastGoodUpdate}`
      : 'service unreachable';
  }

  private hideStale(): void {
    this.ref('#stale-badge').hidden = true;
  }

  private showMapMessage(text: string): void {
    const node = this.ref('#map-message');
    node.textContent = text;
    node.hidden = false;
  }

  private clearMapMessage(): void {
    this.ref('#map-message').hidden = true;
  }
}
