/**
 * DOM builders for the information panels: vessel details, map legends,
 * exposure results and upload warnings. Pure functions from payloads to
 * elements; the app owns where they mount.
 */

import {
  CATEGORY_ORDER,
  CATEGORY_PALETTE,
  METRIC_UNITS,
  Metric,
  MODEL_COVERAGE,
  ScaleBounds,
  scaleGradient,
} from './colors';
import { RowWarning } from './csv';
import {
  AisRecord,
  BAND_KEYS,
  BAND_LABELS,
  BandKey,
  ModelKey,
  MpaMeansRow,
  VesselDetail,
} from './types';

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = '',
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

interface PanelRow {
  field: string;
  label: string;
  value: string;
}

function panelFrom(title: string, rows: PanelRow[]): HTMLElement {
  const panel = el('div', 'vessel-panel');
  panel.appendChild(el('h3', '', title));
  const list = el('dl');
  for (const row of rows) {
    const dt = el('dt', '', row.label);
    const dd = el('dd', '', row.value);
    dd.dataset.field = row.field;
    list.appendChild(dt);
    list.appendChild(dd);
  }
  panel.appendChild(list);
  return panel;
}

function dim(value: number | null, unit: string, estimated: boolean): string {
  if (value == null) return 'n/a';
  return `${value} ${unit}${estimated ? ' (est.)' : ''}`;
}

/** Information panel for a service-backed vessel selection. */
export function vesselPanel(detail: VesselDetail, band: BandKey): HTMLElement {
  const sl = detail.sl_db[band];
  const panel = panelFrom(detail.name ?? `MMSI ${detail.mmsi}`, [
    { field: 'name', label: 'Name', value: detail.name ?? 'n/a' },
    { field: 'mmsi', label: 'MMSI', value: String(detail.mmsi) },
    { field: 'timestamp', label: 'Last update', value: detail.timestamp },
    { field: 'speed', label: 'Speed', value: `${detail.sog_kn} kn` },
    {
      field: 'course',
      label: 'Course',
      value: detail.cog_deg == null ? 'n/a' : `${detail.cog_deg}°`,
    },
    { field: 'length', label: 'Length', value: dim(detail.length_m, 'm', detail.estimated.length_m) },
    { field: 'draft', label: 'Draft', value: dim(detail.draft_m, 'm', detail.estimated.draft_m) },
    {
      field: 'sl',
      label: `SL ${BAND_LABELS[band]} (${detail.model})`,
      value: sl == null ? 'not supported by model' : `${sl.toFixed(1)} dB re 1 µPa`,
    },
  ]);
  panel.classList.add(`source-${detail.source}`);
  return panel;
}

/** Panel for a vessel from an uploaded file; levels stay server-side. */
export function uploadVesselPanel(record: AisRecord): HTMLElement {
  return panelFrom(record.name ?? `MMSI ${record.mmsi}`, [
    { field: 'name', label: 'Name', value: record.name ?? 'n/a' },
    { field: 'mmsi', label: 'MMSI', value: String(record.mmsi) },
    { field: 'timestamp', label: 'Last update', value: record.timestamp },
    { field: 'speed', label: 'Speed', value: `${record.sog_kn} kn` },
    {
      field: 'course',
      label: 'Course',
      value: record.cog_deg == null ? 'n/a' : `${record.cog_deg}°`,
    },
    { field: 'length', label: 'Length', value: record.length_m == null ? 'n/a' : `${record.length_m} m` },
    { field: 'draft', label: 'Draft', value: record.draft_m == null ? 'n/a' : `${record.draft_m} m` },
    { field: 'sl', label: 'SL', value: 'n/a (uploaded data)' },
  ]);
}

/** Color-scale legend with explicit bounds, shown in the map corner. */
export function scaleLegend(metric: Metric, band: BandKey, bounds: ScaleBounds): HTMLElement {
  const box = el('div', 'scale-legend');
  box.appendChild(el('div', 'scale-title',
    `${metric.toUpperCase()} ${BAND_LABELS[band]} (${METRIC_UNITS[metric]})`));
  const ramp = el('div', 'scale-ramp');
  ramp.style.background = scaleGradient();
  box.appendChild(ramp);
  const labels = el('div', 'scale-labels');
  labels.appendChild(el('span', 'scale-min', String(bounds.min)));
  labels.appendChild(el('span', 'scale-max', String(bounds.max)));
  box.appendChild(labels);
  return box;
}

/** Vessel-category legend; a check marks categories the model covers. */
export function vesselLegend(model: ModelKey): HTMLElement {
  const box = el('div', 'vessel-legend');
  box.appendChild(el('div', 'legend-title', 'Vessel categories'));
  for (const category of CATEGORY_ORDER) {
    const row = el('div', 'legend-row');
    const swatch = el('span', 'legend-swatch');
    swatch.style.background = CATEGORY_PALETTE[category];
    row.appendChild(swatch);
    row.appendChild(el('span', 'legend-name', category));
    const covered = MODEL_COVERAGE[model].includes(category);
    row.appendChild(el('span', covered ? 'legend-check' : 'legend-cross',
      covered ? '✓' : '–'));
    box.appendChild(row);
  }
  return box;
}

/** Row-level upload problems; valid rows have already been kept. */
export function warningsList(warnings: RowWarning[]): HTMLElement {
  const box = el('div', 'upload-warnings');
  if (!warnings.length) return box;
  box.appendChild(el('div', 'warnings-title',
    `${warnings.length} row(s) skipped`));
  const list = el('ul');
  for (const warning of warnings) {
    list.appendChild(el('li', '', `row ${warning.row}: ${warning.message}`));
  }
  box.appendChild(list);
  return box;
}

export function progressBar(fraction: number): HTMLElement {
  const outer = el('div', 'progress-outer');
  const inner = el('div', 'progress-inner');
  inner.style.width = `${Math.round(fraction * 100)}%`;
  outer.appendChild(inner);
  outer.appendChild(el('span', 'progress-label', `${Math.round(fraction * 100)}%`));
  return outer;
}

function formatLevel(value: number | null | undefined): string {
  return value == null ? 'n/a' : value.toFixed(2);
}

/** Per-MPA energetic-mean readout for a finished exposure job. */
export function mpaMeansTable(rows: MpaMeansRow[], hasScenario: boolean): HTMLElement {
  const box = el('div', 'mpa-means');
  if (!rows.length) {
    box.appendChild(el('div', 'mpa-means-empty', 'No MPA intersects the grid.'));
    return box;
  }
  const table = el('table');
  const head = el('tr');
  head.appendChild(el('th', '', 'MPA'));
  for (const band of BAND_KEYS) {
    head.appendChild(el('th', '', `${BAND_LABELS[band]}${hasScenario ? ' base / capped' : ''}`));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el('tr');
    tr.appendChild(el('td', 'mpa-name', row.name));
    for (const band of BAND_KEYS) {
      const base = formatLevel(row.baseline[band]);
      const scen = row.scenario ? ` / ${formatLevel(row.scenario[band])}` : '';
      tr.appendChild(el('td', '', `${base}${scen}`));
    }
    table.appendChild(tr);
  }
  box.appendChild(table);
  return box;
}

/**
 * Bar-style baseline-vs-scenario comparison of a zone's energetic means,
 * one pair of bars per indicator band with the delta spelled out.
 */
export function scenarioBars(row: MpaMeansRow, bounds: ScaleBounds): HTMLElement {
  const box = el('div', 'scenario-bars');
  box.appendChild(el('div', 'bars-title', `Energetic-mean SEL, ${row.name}`));
  const span = bounds.max - bounds.min;
  const width = (value: number | null | undefined): string => {
    if (value == null) return '0%';
    const t = Math.min(1, Math.max(0, (value - bounds.min) / span));
    return `${(t * 100).toFixed(1)}%`;
  };
  for (const band of BAND_KEYS) {
    const group = el('div', 'bar-group');
    group.dataset.band = band;
    group.appendChild(el('div', 'bar-band', BAND_LABELS[band]));
    const baseline = row.baseline[band];
    const scenario = row.scenario?.[band] ?? null;
    for (const [cls, value] of [['baseline', baseline], ['scenario', scenario]] as const) {
      const track = el('div', 'bar-track');
      const bar = el('div', `bar bar-${cls}`);
      bar.style.width = width(value);
      track.appendChild(bar);
      track.appendChild(el('span', 'bar-value', formatLevel(value)));
      group.appendChild(track);
    }
    const delta = baseline != null && scenario != null ? scenario - baseline : null;
    group.appendChild(el('div', 'bar-delta',
      delta == null ? '' : `Δ ${delta >= 0 ? '+' : ''}${delta.toFixed(2)} dB`));
    box.appendChild(group);
  }
  return box;
}
