/**
 * Canvas map: noise heatmap, vessel symbols, MPA outlines and the
 * area-of-interest tool, over a plain graticule (no external basemap).
 *
 * Vessels are oriented triangles colored by category. Below zoom 9 the
 * symbols are aggregated into count bubbles to keep wide views readable;
 * clicking a bubble zooms into its contents.
 */

import { CATEGORY_PALETTE, ScaleBounds, levelColor } from './colors';
import { Extent, GridPayload, PolygonFeature, VesselCategory } from './types';

export interface MapVessel {
  mmsi: number;
  lat: number;
  lon: number;
  cog_deg: number | null;
  category: VesselCategory;
}

export interface Cluster {
  lat: number;
  lon: number;
  count: number;
  bbox: Extent;
}

/** Slippy-map style zoom: 360 degrees of longitude at zoom 0. */
export function zoomLevel(extent: Extent): number {
  return Math.log2(360 / (extent.max_lon - extent.min_lon));
}

export const CLUSTER_MAX_ZOOM = 8;

/** Aggregate vessels on a coarse grid over the viewport. */
export function clusterVessels(
  vessels: MapVessel[],
  extent: Extent,
  cellsAcross = 12,
): Cluster[] {
  const lonStep = (extent.max_lon - extent.min_lon) / cellsAcross;
  const latStep = lonStep; // square-ish buckets
  const buckets = new Map<string, MapVessel[]>();
  for (const vessel of vessels) {
    const col = Math.floor((vessel.lon - extent.min_lon) / lonStep);
    const row = Math.floor((vessel.lat - extent.min_lat) / latStep);
    const key = `${row}:${col}`;
    const bucket = buckets.get(key);
    if (bucket) bucket.push(vessel);
    else buckets.set(key, [vessel]);
  }
  const clusters: Cluster[] = [];
  for (const bucket of buckets.values()) {
    let latSum = 0;
    let lonSum = 0;
    const bbox: Extent = {
      min_lat: Infinity, min_lon: Infinity, max_lat: -Infinity, max_lon: -Infinity,
    };
    for (const v of bucket) {
      latSum += v.lat;
      lonSum += v.lon;
      bbox.min_lat = Math.min(bbox.min_lat, v.lat);
      bbox.max_lat = Math.max(bbox.max_lat, v.lat);
      bbox.min_lon = Math.min(bbox.min_lon, v.lon);
      bbox.max_lon = Math.max(bbox.max_lon, v.lon);
    }
    clusters.push({
      lat: latSum / bucket.length,
      lon: lonSum / bucket.length,
      count: bucket.length,
      bbox,
    });
  }
  return clusters;
}

export interface Projection {
  toPx(lat: number, lon: number): [number, number];
  toGeo(x: number, y: number): [number, number];
}

export function makeProjection(extent: Extent, width: number, height: number): Projection {
  const lonSpan = extent.max_lon - extent.min_lon;
  const latSpan = extent.max_lat - extent.min_lat;
  return {
    toPx(lat, lon) {
      return [
        ((lon - extent.min_lon) / lonSpan) * width,
        // canvas y grows downward, latitude grows upward
        height - ((lat - extent.min_lat) / latSpan) * height,
      ];
    },
    toGeo(x, y) {
      return [
        extent.min_lat + ((height - y) / height) * latSpan,
        extent.min_lon + (x / width) * lonSpan,
      ];
    },
  };
}

function graticuleStep(span: number): number {
  // nice 1/2/5 step giving around five lines across the view
  const raw = span / 5;
  const mag = 10 ** Math.floor(Math.log10(raw));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

export interface MapLayers {
  vessels: boolean;
  heatmap: boolean;
  mpa: boolean;
}

export interface MapHandlers {
  onSelect(mmsi: number | null): void;
  onExtentChange(extent: Extent): void;
  onAreaDrawn(extent: Extent): void;
}

interface DrawnVessel {
  vessel: MapVessel;
  x: number;
  y: number;
}

interface DrawnCluster {
  cluster: Cluster;
  x: number;
  y: number;
  r: number;
}

export class MapView {
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D | null;
  private handlers: MapHandlers;

  private extent: Extent = { min_lat: 30, min_lon: -15, max_lat: 65, max_lon: 40 };
  private vessels: MapVessel[] = [];
  private grid: GridPayload | null = null;
  private gridBounds: ScaleBounds = { min: 60, max: 140 };
  private mpas: PolygonFeature[] = [];
  private layers: MapLayers = { vessels: true, heatmap: true, mpa: false };
  private selectedMmsi: number | null = null;
  private areaOfInterest: Extent | null = null;

  private drawMode = false;
  private drawnVessels: DrawnVessel[] = [];
  private drawnClusters: DrawnCluster[] = [];
  private dragStart: { x: number; y: number; extent: Extent } | null = null;
  private rubberBand: { x0: number; y0: number; x1: number; y1: number } | null = null;
  private moved = false;

  constructor(canvas: HTMLCanvasElement, handlers: MapHandlers) {
    this.canvas = canvas;
    this.ctx = canvas.getContext('2d');
    this.handlers = handlers;
    canvas.addEventListener('mousedown', (e) => this.onDown(e));
    canvas.addEventListener('mousemove', (e) => this.onMove(e));
    window.addEventListener('mouseup', (e) => this.onUp(e));
    canvas.addEventListener('wheel', (e) => this.onWheel(e), { passive: false });
  }

  setExtent(extent: Extent): void {
    this.extent = extent;
    this.render();
  }

  getExtent(): Extent {
    return this.extent;
  }

  setVessels(vessels: MapVessel[]): void {
    this.vessels = vessels;
    this.render();
  }

  setGrid(grid: GridPayload | null, bounds: ScaleBounds): void {
    this.grid = grid;
    this.gridBounds = bounds;
    this.render();
  }

  setMpas(features: PolygonFeature[]): void {
    this.mpas = features;
    this.render();
  }

  setLayers(layers: MapLayers): void {
    this.layers = layers;
    this.render();
  }

  setSelected(mmsi: number | null): void {
    this.selectedMmsi = mmsi;
    this.render();
  }

  setAreaOfInterest(area: Extent | null): void {
    this.areaOfInterest = area;
    this.render();
  }

  /** Arm the area-of-interest tool; the next drag draws the rectangle. */
  setDrawMode(on: boolean): void {
    this.drawMode = on;
    this.canvas.style.cursor = on ? 'crosshair' : 'grab';
  }

  private pos(e: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    const scaleX = rect.width > 0 ? this.canvas.width / rect.width : 1;
    const scaleY = rect.height > 0 ? this.canvas.height / rect.height : 1;
    return { x: (e.clientX - rect.left) * scaleX, y: (e.clientY - rect.top) * scaleY };
  }

  private onDown(e: MouseEvent): void {
    const { x, y } = this.pos(e);
    this.moved = false;
    if (this.drawMode) {
      this.rubberBand = { x0: x, y0: y, x1: x, y1: y };
    } else {
      this.dragStart = { x, y, extent: { ...this.extent } };
    }
  }

  private onMove(e: MouseEvent): void {
    const { x, y } = this.pos(e);
    if (this.rubberBand) {
      this.rubberBand.x1 = x;
      this.rubberBand.y1 = y;
      this.moved = true;
      this.render();
      return;
    }
    if (!this.dragStart) return;
    const dx = x - this.dragStart.x;
    const dy = y - this.dragStart.y;
    if (Math.abs(dx) + Math.abs(dy) > 3) this.moved = true;
    const start = this.dragStart.extent;
    const lonSpan = start.max_lon - start.min_lon;
    const latSpan = start.max_lat - start.min_lat;
    const dLon = (-dx / this.canvas.width) * lonSpan;
    const dLat = (dy / this.canvas.height) * latSpan;
    this.extent = {
      min_lat: start.min_lat + dLat,
      max_lat: start.max_lat + dLat,
      min_lon: start.min_lon + dLon,
      max_lon: start.max_lon + dLon,
    };
    this.render();
  }

  private onUp(e: MouseEvent): void {
    if (this.rubberBand) {
      const band = this.rubberBand;
      this.rubberBand = null;
      this.setDrawMode(false);
      const proj = this.projection();
      const [latA, lonA] = proj.toGeo(band.x0, band.y0);
      const [latB, lonB] = proj.toGeo(band.x1, band.y1);
      if (this.moved) {
        this.handlers.onAreaDrawn({
          min_lat: Math.min(latA, latB),
          max_lat: Math.max(latA, latB),
          min_lon: Math.min(lonA, lonB),
          max_lon: Math.max(lonA, lonB),
        });
      }
      this.render();
      return;
    }
    if (!this.dragStart) return;
    this.dragStart = null;
    if (this.moved) {
      this.handlers.onExtentChange(this.extent);
      return;
    }
    // a stationary press is a selection
    const { x, y } = this.pos(e);
    const cluster = this.hitCluster(x, y);
    if (cluster) {
      this.zoomTo(cluster.bbox);
      return;
    }
    this.handlers.onSelect(this.hitVessel(x, y));
  }

  private onWheel(e: WheelEvent): void {
    e.preventDefault();
    const { x, y } = this.pos(e);
    const factor = e.deltaY < 0 ? 0.8 : 1.25;
    const proj = this.projection();
    const [lat, lon] = proj.toGeo(x, y);
    const next = {
      min_lat: lat - (lat - this.extent.min_lat) * factor,
      max_lat: lat + (this.extent.max_lat - lat) * factor,
      min_lon: lon - (lon - this.extent.min_lon) * factor,
      max_lon: lon + (this.extent.max_lon - lon) * factor,
    };
    if (next.max_lon - next.min_lon < 0.01 || next.max_lon - next.min_lon > 360) return;
    this.extent = next;
    this.render();
    this.handlers.onExtentChange(this.extent);
  }

  private zoomTo(bbox: Extent): void {
    const padLat = Math.max((bbox.max_lat - bbox.min_lat) * 0.3, 0.05);
    const padLon = Math.max((bbox.max_lon - bbox.min_lon) * 0.3, 0.05);
    this.extent = {
      min_lat: bbox.min_lat - padLat,
      max_lat: bbox.max_lat + padLat,
      min_lon: bbox.min_lon - padLon,
      max_lon: bbox.max_lon + padLon,
    };
    this.render();
    this.handlers.onExtentChange(this.extent);
  }

  hitVessel(x: number, y: number): number | null {
    let best: number | null = null;
    let bestD = 12; // px tolerance
    for (const drawn of this.drawnVessels) {
      const d = Math.hypot(drawn.x - x, drawn.y - y);
      if (d < bestD) {
        bestD = d;
        best = drawn.vessel.mmsi;
      }
    }
    return best;
  }

  private hitCluster(x: number, y: number): Cluster | null {
    for (const drawn of this.drawnClusters) {
      if (Math.hypot(drawn.x - x, drawn.y - y) <= drawn.r) return drawn.cluster;
    }
    return null;
  }

  private projection(): Projection {
    return makeProjection(this.extent, this.canvas.width, this.canvas.height);
  }

  render(): void {
    const ctx = this.ctx;
    if (!ctx) return; // non-rendering environments still exercise state
    const { width, height } = this.canvas;
    const proj = this.projection();

    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = '#10293f';
    ctx.fillRect(0, 0, width, height);
    this.drawGraticule(ctx, proj);
    if (this.layers.heatmap && this.grid) this.drawGrid(ctx, proj, this.grid);
    if (this.layers.mpa) this.drawMpas(ctx, proj);
    if (this.areaOfInterest) this.drawArea(ctx, proj, this.areaOfInterest);
    this.drawnVessels = [];
    this.drawnClusters = [];
    if (this.layers.vessels) {
      if (zoomLevel(this.extent) <= CLUSTER_MAX_ZOOM) this.drawClusters(ctx, proj);
      else this.drawVessels(ctx, proj);
    }
    if (this.rubberBand) {
      const b = this.rubberBand;
      ctx.save();
      ctx.strokeStyle = '#ffb74d';
      ctx.setLineDash([5, 4]);
      ctx.strokeRect(Math.min(b.x0, b.x1), Math.min(b.y0, b.y1),
        Math.abs(b.x1 - b.x0), Math.abs(b.y1 - b.y0));
      ctx.restore();
    }
  }

  private drawGraticule(ctx: CanvasRenderingContext2D, proj: Projection): void {
    const step = graticuleStep(this.extent.max_lon - this.extent.min_lon);
    ctx.save();
    ctx.strokeStyle = 'rgba(255,255,255,0.12)';
    ctx.fillStyle = 'rgba(255,255,255,0.45)';
    ctx.font = '10px system-ui, sans-serif';
    ctx.lineWidth = 1;
    const lon0 = Math.ceil(this.extent.min_lon / step) * step;
    for (let lon = lon0; lon <= this.extent.max_lon; lon += step) {
      const [x] = proj.toPx(this.extent.min_lat, lon);
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, this.canvas.height);
      ctx.stroke();
      ctx.fillText(`${+lon.toFixed(3)}°`, x + 3, this.canvas.height - 4);
    }
    const lat0 = Math.ceil(this.extent.min_lat / step) * step;
    for (let lat = lat0; lat <= this.extent.max_lat; lat += step) {
      const [, y] = proj.toPx(lat, this.extent.min_lon);
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(this.canvas.width, y);
      ctx.stroke();
      ctx.fillText(`${+lat.toFixed(3)}°`, 4, y - 3);
    }
    ctx.restore();
  }

  private drawGrid(ctx: CanvasRenderingContext2D, proj: Projection, grid: GridPayload): void {
    const { extent, resolution_deg: cell } = grid;
    ctx.save();
    ctx.globalAlpha = 0.78;
    for (let row = 0; row < grid.n_rows; row++) {
      const lat0 = extent.min_lat + row * cell;
      for (let col = 0; col < grid.n_cols; col++) {
        const value = grid.values[row]?.[col];
        if (value == null) continue;
        const lon0 = extent.min_lon + col * cell;
        const [x0, y1] = proj.toPx(lat0, lon0);
        const [x1, y0] = proj.toPx(lat0 + cell, lon0 + cell);
        ctx.fillStyle = levelColor(value, this.gridBounds);
        // half-pixel overlap hides seams between cells
        ctx.fillRect(x0, y0, x1 - x0 + 0.5, y1 - y0 + 0.5);
      }
    }
    ctx.restore();
  }

  private drawMpas(ctx: CanvasRenderingContext2D, proj: Projection): void {
    ctx.save();
    ctx.strokeStyle = '#0a0a0a';
    ctx.lineWidth = 1.6;
    ctx.setLineDash([6, 4]);
    ctx.fillStyle = 'rgba(255,255,255,0.75)';
    ctx.font = '11px system-ui, sans-serif';
    for (const feature of this.mpas) {
      const ring = feature.geometry.coordinates[0] ?? [];
      if (ring.length < 3) continue;
      ctx.beginPath();
      ring.forEach(([lon, lat], i) => {
        const [x, y] = proj.toPx(lat, lon);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.closePath();
      ctx.stroke();
      const name = String(feature.properties.name ?? '');
      if (name) {
        const [cx, cy] = ring.reduce(
          ([sx, sy], [lon, lat]) => {
            const [x, y] = proj.toPx(lat, lon);
            return [sx + x / ring.length, sy + y / ring.length];
          },
          [0, 0],
        );
        ctx.fillText(name, cx + 4, cy);
      }
    }
    ctx.restore();
  }

  private drawArea(ctx: CanvasRenderingContext2D, proj: Projection, area: Extent): void {
    const [x0, y1] = proj.toPx(area.min_lat, area.min_lon);
    const [x1, y0] = proj.toPx(area.max_lat, area.max_lon);
    ctx.save();
    ctx.strokeStyle = '#ffb74d';
    ctx.lineWidth = 2;
    ctx.setLineDash([7, 4]);
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
    ctx.restore();
  }

  private drawVessels(ctx: CanvasRenderingContext2D, proj: Projection): void {
    for (const vessel of this.vessels) {
      if (!this.inView(vessel.lat, vessel.lon)) continue;
      const [x, y] = proj.toPx(vessel.lat, vessel.lon);
      this.drawnVessels.push({ vessel, x, y });
      const heading = ((vessel.cog_deg ?? 0) * Math.PI) / 180;
      ctx.save();
      ctx.translate(x, y);
      ctx.rotate(heading);
      ctx.beginPath();
      ctx.moveTo(0, -7);
      ctx.lineTo(4.5, 5);
      ctx.lineTo(-4.5, 5);
      ctx.closePath();
      ctx.fillStyle = CATEGORY_PALETTE[vessel.category] ?? CATEGORY_PALETTE.other;
      ctx.fill();
      ctx.lineWidth = vessel.mmsi === this.selectedMmsi ? 2.5 : 1;
      ctx.strokeStyle = vessel.mmsi === this.selectedMmsi ? '#ffffff' : 'rgba(0,0,0,0.6)';
      ctx.stroke();
      ctx.restore();
    }
  }

  private drawClusters(ctx: CanvasRenderingContext2D, proj: Projection): void {
    const visible = this.vessels.filter((v) => this.inView(v.lat, v.lon));
    for (const cluster of clusterVessels(visible, this.extent)) {
      const [x, y] = proj.toPx(cluster.lat, cluster.lon);
      const r = 9 + 3 * Math.log2(cluster.count);
      this.drawnClusters.push({ cluster, x, y, r });
      ctx.save();
      ctx.beginPath();
      ctx.arc(x, y, r, 0, Math.PI * 2);
      ctx.fillStyle = 'rgba(38,50,56,0.88)';
      ctx.fill();
      ctx.strokeStyle = '#cfd8dc';
      ctx.stroke();
      ctx.fillStyle = '#ffffff';
      ctx.font = '11px system-ui, sans-serif';
      ctx.textAlign = 'center';
      ctx.textBaseline = 'middle';
      ctx.fillText(String(cluster.count), x, y);
      ctx.restore();
    }
  }

  private inView(lat: number, lon: number): boolean {
    return lat >= this.extent.min_lat && lat <= this.extent.max_lat
      && lon >= this.extent.min_lon && lon <= this.extent.max_lon;
  }
}
