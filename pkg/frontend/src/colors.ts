/**
 * Display scaling: fixed color scales for the noise grids and the default
 * vessel-category palette.
 *
 * Scales are fixed per band with explicit bounds so two maps are visually
 * comparable; the legend always shows min and max. Bounds are configurable
 * but default to 60-140 dB for SPL and 120-180 dB for SEL.
 */

import { interpolateViridis } from 'd3-scale-chromatic';
import { BandKey, ModelKey, VesselCategory } from './types';

export type Metric = 'spl' | 'sel';

export interface ScaleBounds {
  min: number;
  max: number;
}

export type ScaleConfig = Record<Metric, Record<BandKey, ScaleBounds>>;

export function defaultScales(): ScaleConfig {
  const spl: ScaleBounds = { min: 60, max: 140 };
  const sel: ScaleBounds = { min: 120, max: 180 };
  return {
    spl: { '63': { ...spl }, '125': { ...spl }, broadband: { ...spl } },
    sel: { '63': { ...sel }, '125': { ...sel }, broadband: { ...sel } },
  };
}

/** Color for a level in dB; values outside the bounds clamp to the ends. */
export function levelColor(value: number, bounds: ScaleBounds): string {
  const span = bounds.max - bounds.min;
  const t = span > 0 ? (value - bounds.min) / span : 0;
  return interpolateViridis(Math.min(1, Math.max(0, t)));
}

/** CSS gradient stops matching levelColor, for the legend ramp. */
export function scaleGradient(steps = 12): string {
  const stops: string[] = [];
  for (let i = 0; i < steps; i++) {
    stops.push(interpolateViridis(i / (steps - 1)));
  }
  return `linear-gradient(to right, ${stops.join(', ')})`;
}

export const METRIC_UNITS: Record<Metric, string> = {
  spl: 'dB re 1 µPa',
  sel: 'dB re 1 µPa²·s',
};

/**
 * Default vessel-category palette. Categories follow the AIS type groups
 * (60-69 passenger, 70-79 cargo, 80-89 tanker, 30 fishing, 36 sailing,
 * 37 pleasure craft); everything else is "other".
 */
export const CATEGORY_PALETTE: Record<VesselCategory, string> = {
  cargo: '#2e7d32',
  tanker: '#c62828',
  passenger: '#1565c0',
  fishing: '#ef6c00',
  sailing: '#6a1b9a',
  pleasure: '#00838f',
  other: '#757575',
};

export const CATEGORY_ORDER: VesselCategory[] = [
  'cargo', 'tanker', 'passenger', 'fishing', 'sailing', 'pleasure', 'other',
];

/**
 * Vessel categories each SL model accepts; drives the checkmarks in the
 * vessel legend. Mirrors the service-side model coverage.
 */
export const MODEL_COVERAGE: Record<ModelKey, VesselCategory[]> = {
  RANDI: ['cargo', 'tanker', 'passenger'],
  JE: ['cargo', 'tanker', 'passenger', 'fishing'],
  LBDS: ['cargo', 'tanker', 'passenger'],
  AQUO: ['cargo', 'tanker', 'passenger', 'fishing', 'sailing', 'pleasure'],
  SRV: ['sailing', 'pleasure'],
  COMBINED: ['cargo', 'tanker', 'passenger', 'fishing', 'sailing', 'pleasure'],
};
