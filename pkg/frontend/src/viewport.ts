/**
 * Per-pane display state and pixel transforms.
 *
 * A pane shows one radiograph with its overlays. Zoom and pan (and any
 * rotation used for alignment) are viewing aids only: they map between
 * image pixels and screen pixels and never touch the geometry that the
 * server owns.
 */

import type { PaneKey, ProjectionPayload } from "./protocol.js";

export type HitRegion = "body" | "target_endpoint" | "entry_endpoint" | "none";

export interface PaneState {
  pane: PaneKey;
  /** Display scale, screen px per image px. Always > 0. */
  zoom: number;
  /** Screen position of the image origin. */
  panX: number;
  panY: number;
  /** Display rotation in degrees about the pane center; viewing aid only. */
  rotationDeg: number;
  /** Whether the radiograph has arrived; overlays degrade gracefully. */
  imageLoaded: boolean;
}

export interface ViewportState {
  panes: { ap: PaneState; lp: PaneState };
  /** At most one screw selected across both panes. */
  selectedScrewId: string | null;
  hover: HitRegion;
}

export function defaultPane(pane: PaneKey): PaneState {
  return { pane, zoom: 1, panX: 0, panY: 0, rotationDeg: 0, imageLoaded: false };
}

export function createViewport(): ViewportState {
  return {
    panes: { ap: defaultPane("ap"), lp: defaultPane("lp") },
    selectedScrewId: null,
    hover: "none",
  };
}

export function setZoom(pane: PaneState, zoom: number): PaneState {
  if (!(zoom > 0) || !Number.isFinite(zoom)) {
    throw new RangeError(`zoom must be > 0, got ${zoom}`);
  }
  return { ...pane, zoom };
}

export interface ScreenPoint {
  x: number;
  y: number;
}

/** Image px -> screen px under the pane's zoom and pan. */
export function toScreen(pane: PaneState, u: number, v: number): ScreenPoint {
  return { x: pane.panX + u * pane.zoom, y: pane.panY + v * pane.zoom };
}

/** Screen px -> image px; inverse of toScreen. */
export function toImage(pane: PaneState, x: number, y: number): [number, number] {
  return [(x - pane.panX) / pane.zoom, (y - pane.panY) / pane.zoom];
}

export const GRAB_PX = 8;

/**
 * Classify a click against one screw's server-sent projection.
 *
 * Endpoint discs win over the body: a click within grab range of an
 * endpoint never reads as body even when it also lies on the segment.
 * All distances are in image pixels, so zoom does not change behaviour.
 */
export function hitTestProjection(
  u: number,
  v: number,
  proj: ProjectionPayload,
  grabPx: number = GRAB_PX,
): HitRegion {
  const dTarget = Math.hypot(u - proj.target_px[0], v - proj.target_px[1]);
  const dEntry = Math.hypot(u - proj.entry_px[0], v - proj.entry_px[1]);
  const endpointGrab = Math.max(grabPx, proj.radius_px);
  if (dTarget <= endpointGrab || dEntry <= endpointGrab) {
    return dTarget <= dEntry ? "target_endpoint" : "entry_endpoint";
  }
  if (segmentDistance(u, v, proj) <= Math.max(grabPx, proj.radius_px)) {
    return "body";
  }
  return "none";
}

function segmentDistance(u: number, v: number, proj: ProjectionPayload): number {
  const [au, av] = proj.target_px;
  const [bu, bv] = proj.entry_px;
  const abU = bu - au;
  const abV = bv - av;
  const denom = abU * abU + abV * abV;
  if (denom === 0) {
    return Math.hypot(u - au, v - av);
  }
  const t = Math.max(0, Math.min(1, ((u - au) * abU + (v - av) * abV) / denom));
  return Math.hypot(u - (au + t * abU), v - (av + t * abV));
}
