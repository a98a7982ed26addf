/**
 * Client-side AIS CSV handling: uploads are parsed and normalized in the
 * browser into the same record shape the API delivers, and exports are
 * handed to the browser as file downloads.
 *
 * Upload schema (one row per position report): required columns mmsi,
 * timestamp, lat, lon, sog_kn, ais_type; optional cog_deg, length_m,
 * beam_m, draft_m, nav_status, name, je_class. Empty fields mean
 * "not reported". A malformed row is reported and skipped; the rest of
 * the file still loads.
 */

import Papa from 'papaparse';
import { AisRecord } from './types';

export interface RowWarning {
  row: number; // 1-based data row number, header excluded
  message: string;
}

export interface ParsedUpload {
  records: AisRecord[];
  warnings: RowWarning[];
}

const REQUIRED = ['mmsi', 'timestamp', 'lat', 'lon', 'sog_kn', 'ais_type'];

function cell(row: Record<string, string>, name: string): string {
  return (row[name] ?? '').trim();
}

function parseInteger(raw: string, name: string): number {
  if (!/^-?\d+$/.test(raw)) throw new Error(`${name} must be an integer, got '${raw}'`);
  return Number(raw);
}

function parseNumber(raw: string, name: string): number {
  const value = Number(raw);
  if (raw === '' || !Number.isFinite(value)) {
    throw new Error(`${name} must be a number, got '${raw}'`);
  }
  return value;
}

function optionalNumber(row: Record<string, string>, name: string): number | null {
  const raw = cell(row, name);
  return raw === '' ? null : parseNumber(raw, name);
}

function optionalInteger(row: Record<string, string>, name: string): number | null {
  const raw = cell(row, name);
  return raw === '' ? null : parseInteger(raw, name);
}

function parseRow(row: Record<string, string>): AisRecord {
  const timestamp = cell(row, 'timestamp');
  const ms = Date.parse(timestamp);
  if (!Number.isFinite(ms)) {
    throw new Error(`timestamp must be ISO 8601, got '${timestamp}'`);
  }
  const lat = parseNumber(cell(row, 'lat'), 'lat');
  const lon = parseNumber(cell(row, 'lon'), 'lon');
  if (lat < -90 || lat > 90) throw new Error(`lat out of range: ${lat}`);
  if (lon < -180 || lon > 180) throw new Error(`lon out of range: ${lon}`);
  const sog = parseNumber(cell(row, 'sog_kn'), 'sog_kn');
  if (sog < 0) throw new Error(`sog_kn must be non-negative, got ${sog}`);
  return {
    mmsi: parseInteger(cell(row, 'mmsi'), 'mmsi'),
    timestamp: new Date(ms).toISOString().replace(/\.\d{3}Z$/, 'Z'),
    lat,
    lon,
    sog_kn: sog,
    cog_deg: optionalNumber(row, 'cog_deg'),
    ais_type: optionalInteger(row, 'ais_type'),
    length_m: optionalNumber(row, 'length_m'),
    beam_m: optionalNumber(row, 'beam_m'),
    draft_m: optionalNumber(row, 'draft_m'),
    nav_status: optionalInteger(row, 'nav_status'),
    name: cell(row, 'name') || null,
    je_class: optionalInteger(row, 'je_class'),
  };
}

/**
 * Parse an uploaded AIS CSV. A missing required column rejects the whole
 * file; a bad row becomes a warning naming the row and the reason while
 * the remaining rows proceed.
 */
export function parseAisCsv(text: string): ParsedUpload {
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  const missing = REQUIRED.filter((name) => !fields.includes(name));
  if (missing.length) {
    throw new Error(`missing required column(s): ${missing.join(', ')}`);
  }

  const warnings: RowWarning[] = parsed.errors.map((err) => ({
    row: (err.row ?? 0) + 1,
    message: err.message,
  }));
  const records: AisRecord[] = [];
  parsed.data.forEach((row, i) => {
    try {
      records.push(parseRow(row));
    } catch (err) {
      warnings.push({ row: i + 1, message: (err as Error).message });
    }
  });
  warnings.sort((a, b) => a.row - b.row);
  return { records, warnings };
}

/** Hand a CSV to the browser as a named file download. */
export function downloadCsv(filename: string, text: string): void {
  const blob = new Blob([text], { type: 'text/csv' });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = filename;
  document.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}
