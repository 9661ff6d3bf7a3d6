/**
 * Pointer gesture interpretation.
 *
 * The engine is a deterministic state machine: feed it pointer event
 * records (screen coordinates plus the event timestamp) and it returns
 * the effects to perform. Edits come out as screw-id + operation pairs;
 * the session client wraps them with the revision guard and sends them.
 * Timing uses the timestamps carried by the events, never the wall
 * clock, so a recorded event log always replays to the same messages.
 *
 * Gesture grammar:
 *   - drag starting on a capsule body   -> translate deltas, coalesced
 *     so at most one message goes out per send interval (60/s)
 *   - drag starting on an endpoint disc -> move_endpoint with the live
 *     pointer position, same coalescing
 *   - wheel over an endpoint disc       -> one resize step per notch
 *   - click on empty background         -> vertebra selection message,
 *     never an edit; dragging the background pans the pane instead
 */

import type { EditOp, PaneKey, StateSnapshot, ViewName } from "./protocol.js";
import type { HitRegion, ViewportState } from "./viewport.js";
import { hitTestProjection, toImage } from "./viewport.js";

export interface PointerEventRecord {
  kind: "down" | "move" | "up" | "wheel";
  pane: PaneKey;
  /** Screen position within the pane. */
  x: number;
  y: number;
  /** Event timestamp in ms; the only clock the engine sees. */
  t: number;
  /** Wheel only; sign follows the DOM convention. */
  deltaY?: number;
}

export type GestureEffect =
  | { kind: "edit"; screwId: string; op: EditOp }
  | { kind: "select_vertebra"; view: ViewName; pointPx: [number, number] }
  | { kind: "select_screw"; screwId: string | null }
  | { kind: "pan"; pane: PaneKey; dx: number; dy: number }
  | { kind: "hover"; pane: PaneKey; region: HitRegion };

export const SEND_INTERVAL_MS = 1000 / 60;
export const CLICK_SLOP_PX = 3;
export const RESIZE_STEP_MM = 0.25;
export const MIN_RADIUS_MM = 0.25;

type Mode =
  | { kind: "idle" }
  | { kind: "maybe_select"; pane: PaneKey; downX: number; downY: number }
  | { kind: "pan"; pane: PaneKey; lastX: number; lastY: number }
  | {
      kind: "body_drag";
      pane: PaneKey;
      screwId: string;
      lastX: number;
      lastY: number;
      pendingDu: number;
      pendingDv: number;
      lastSendT: number;
    }
  | {
      kind: "endpoint_drag";
      pane: PaneKey;
      screwId: string;
      endpoint: "target" | "entry";
      pending: [number, number] | null;
      lastSent: [number, number] | null;
      lastSendT: number;
    };

function viewName(pane: PaneKey): ViewName {
  return pane === "ap" ? "AP" : "LP";
}

interface Hit {
  screwId: string;
  region: Exclude<HitRegion, "none">;
}

function hitScrew(
  pane: PaneKey,
  u: number,
  v: number,
  snapshot: StateSnapshot | null,
): Hit | null {
  if (snapshot === null) {
    return null;
  }
  // Later screws draw on top, so they win the hit test.
  for (let i = snapshot.screws.length - 1; i >= 0; i--) {
    const screw = snapshot.screws[i];
    const region = hitTestProjection(u, v, screw.projections[pane]);
    if (region !== "none") {
      return { screwId: screw.screw_id, region };
    }
  }
  return null;
}

export class GestureEngine {
  private mode: Mode = { kind: "idle" };

  /** Abandon any in-flight gesture (pointer capture lost, pane swap). */
  reset(): void {
    this.mode = { kind: "idle" };
  }

  get dragging(): boolean {
    return this.mode.kind === "body_drag" || this.mode.kind === "endpoint_drag";
  }

  handle(
    event: PointerEventRecord,
    viewport: ViewportState,
    snapshot: StateSnapshot | null,
  ): GestureEffect[] {
    switch (event.kind) {
      case "down":
        return this.onDown(event, viewport, snapshot);
      case "move":
        return this.onMove(event, viewport, snapshot);
      case "up":
        return this.onUp(event, viewport);
      case "wheel":
        return this.onWheel(event, viewport, snapshot);
    }
  }

  private onDown(
    event: PointerEventRecord,
    viewport: ViewportState,
    snapshot: StateSnapshot | null,
  ): GestureEffect[] {
    const pane = viewport.panes[event.pane];
    const [u, v] = toImage(pane, event.x, event.y);
    const hit = hitScrew(event.pane, u, v, snapshot);
    if (hit === null) {
      this.mode = {
        kind: "maybe_select",
        pane: event.pane,
        downX: event.x,
        downY: event.y,
      };
      return [];
    }
    // Let the first move send immediately; only the stream after it is
    // rate limited.
    const lastSendT = event.t - SEND_INTERVAL_MS;
    if (hit.region === "body") {
      this.mode = {
        kind: "body_drag",
        pane: event.pane,
        screwId: hit.screwId,
        lastX: event.x,
        lastY: event.y,
        pendingDu: 0,
        pendingDv: 0,
        lastSendT,
      };
    } else {
      this.mode = {
        kind: "endpoint_drag",
        pane: event.pane,
        screwId: hit.screwId,
        endpoint: hit.region === "target_endpoint" ? "target" : "entry",
        pending: null,
        lastSent: null,
        lastSendT,
      };
    }
    return [{ kind: "select_screw", screwId: hit.screwId }];
  }

  private onMove(
    event: PointerEventRecord,
    viewport: ViewportState,
    snapshot: StateSnapshot | null,
  ): GestureEffect[] {
    const mode = this.mode;
    const pane = viewport.panes[event.pane];
    switch (mode.kind) {
      case "idle": {
        const [u, v] = toImage(pane, event.x, event.y);
        const hit = hitScrew(event.pane, u, v, snapshot);
        return [
          {
            kind: "hover",
            pane: event.pane,
            region: hit === null ? "none" : hit.region,
          },
        ];
      }
      case "maybe_select": {
        if (
          Math.hypot(event.x - mode.downX, event.y - mode.downY) <= CLICK_SLOP_PX
        ) {
          return [];
        }
        this.mode = {
          kind: "pan",
          pane: mode.pane,
          lastX: event.x,
          lastY: event.y,
        };
        return [
          {
            kind: "pan",
            pane: mode.pane,
            dx: event.x - mode.downX,
            dy: event.y - mode.downY,
          },
        ];
      }
      case "pan": {
        const dx = event.x - mode.lastX;
        const dy = event.y - mode.lastY;
        mode.lastX = event.x;
        mode.lastY = event.y;
        return [{ kind: "pan", pane: mode.pane, dx, dy }];
      }
      case "body_drag": {
        mode.pendingDu += (event.x - mode.lastX) / pane.zoom;
        mode.pendingDv += (event.y - mode.lastY) / pane.zoom;
        mode.lastX = event.x;
        mode.lastY = event.y;
        if (
          event.t - mode.lastSendT >= SEND_INTERVAL_MS &&
          (mode.pendingDu !== 0 || mode.pendingDv !== 0)
        ) {
          const op: EditOp = {
            kind: "translate",
            view: viewName(mode.pane),
            du_px: mode.pendingDu,
            dv_px: mode.pendingDv,
          };
          mode.pendingDu = 0;
          mode.pendingDv = 0;
          mode.lastSendT = event.t;
          return [{ kind: "edit", screwId: mode.screwId, op }];
        }
        return [];
      }
      case "endpoint_drag": {
        const at = toImage(pane, event.x, event.y);
        mode.pending = at;
        if (
          event.t - mode.lastSendT >= SEND_INTERVAL_MS &&
          !samePoint(mode.pending, mode.lastSent)
        ) {
          const op: EditOp = {
            kind: "move_endpoint",
            view: viewName(mode.pane),
            endpoint: mode.endpoint,
            new_px: at,
          };
          mode.lastSent = at;
          mode.pending = null;
          mode.lastSendT = event.t;
          return [{ kind: "edit", screwId: mode.screwId, op }];
        }
        return [];
      }
    }
  }

  private onUp(
    event: PointerEventRecord,
    viewport: ViewportState,
  ): GestureEffect[] {
    const mode = this.mode;
    this.mode = { kind: "idle" };
    switch (mode.kind) {
      case "idle":
      case "pan":
        return [];
      case "maybe_select": {
        const pane = viewport.panes[mode.pane];
        return [
          { kind: "select_screw", screwId: null },
          {
            kind: "select_vertebra",
            view: viewName(mode.pane),
            pointPx: toImage(pane, mode.downX, mode.downY),
          },
        ];
      }
      case "body_drag": {
        const pane = viewport.panes[mode.pane];
        const du = mode.pendingDu + (event.x - mode.lastX) / pane.zoom;
        const dv = mode.pendingDv + (event.y - mode.lastY) / pane.zoom;
        if (du === 0 && dv === 0) {
          return [];
        }
        return [
          {
            kind: "edit",
            screwId: mode.screwId,
            op: {
              kind: "translate",
              view: viewName(mode.pane),
              du_px: du,
              dv_px: dv,
            },
          },
        ];
      }
      case "endpoint_drag": {
        const pane = viewport.panes[mode.pane];
        const at = toImage(pane, event.x, event.y);
        if (samePoint(at, mode.lastSent)) {
          return [];
        }
        return [
          {
            kind: "edit",
            screwId: mode.screwId,
            op: {
              kind: "move_endpoint",
              view: viewName(mode.pane),
              endpoint: mode.endpoint,
              new_px: at,
            },
          },
        ];
      }
    }
  }

  private onWheel(
    event: PointerEventRecord,
    viewport: ViewportState,
    snapshot: StateSnapshot | null,
  ): GestureEffect[] {
    if (this.mode.kind !== "idle" || snapshot === null) {
      return [];
    }
    const pane = viewport.panes[event.pane];
    const [u, v] = toImage(pane, event.x, event.y);
    const hit = hitScrew(event.pane, u, v, snapshot);
    if (hit === null || hit.region === "body") {
      return [];
    }
    const screw = snapshot.screws.find((s) => s.screw_id === hit.screwId);
    if (screw === undefined) {
      return [];
    }
    // Each notch is one step from the latest server-confirmed radius;
    // there is no local echo, so repeated notches before the next reply
    // deliberately re-request the same value.
    const step = (event.deltaY ?? 0) < 0 ? RESIZE_STEP_MM : -RESIZE_STEP_MM;
    const next = Math.max(MIN_RADIUS_MM, screw.screw.radius_mm + step);
    if (next === screw.screw.radius_mm) {
      return [];
    }
    return [
      {
        kind: "edit",
        screwId: hit.screwId,
        op: { kind: "resize", new_radius_mm: next },
      },
    ];
  }
}

function samePoint(
  a: [number, number] | null,
  b: [number, number] | null,
): boolean {
  if (a === null || b === null) {
    return a === b;
  }
  return a[0] === b[0] && a[1] === b[1];
}
