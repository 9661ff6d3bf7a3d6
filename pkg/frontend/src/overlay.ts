/**
 * Overlay scene construction.
 *
 * renderOverlay turns the latest server snapshot plus the viewport state
 * into a flat list of drawing commands in screen coordinates. It is a
 * pure function so tests can assert on the scene without a canvas, and
 * the painter stays a dumb interpreter. Every coordinate comes from the
 * server's projections; the client never recomputes screw geometry.
 */

import type {
  PaneKey,
  ScrewPayload,
  StateSnapshot,
} from "./protocol.js";
import { specText } from "./protocol.js";
import type { PaneState, ViewportState } from "./viewport.js";
import { toScreen } from "./viewport.js";

export interface CapsuleCommand {
  kind: "capsule";
  pane: PaneKey;
  screwId: string;
  selected: boolean;
  target: { x: number; y: number };
  entry: { x: number; y: number };
  /** Half the capsule width on screen; the screw radius under zoom. */
  halfWidth: number;
  /** Endpoint handle radius on screen. */
  handleRadius: number;
}

export interface LabelHighlightCommand {
  kind: "label_highlight";
  pane: PaneKey;
  label: string;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface SelectedPointCommand {
  kind: "selected_point";
  pane: PaneKey;
  x: number;
  y: number;
  label: string | null;
}

export interface SpecTextCommand {
  kind: "spec_text";
  pane: PaneKey;
  x: number;
  y: number;
  text: string;
}

export type DrawCommand =
  | CapsuleCommand
  | LabelHighlightCommand
  | SelectedPointCommand
  | SpecTextCommand;

const HANDLE_MIN_PX = 4;
const SPEC_TEXT_OFFSET_PX = 12;

function capsuleFor(
  pane: PaneState,
  paneKey: PaneKey,
  screw: ScrewPayload,
  selected: boolean,
): CapsuleCommand {
  const proj = screw.projections[paneKey];
  return {
    kind: "capsule",
    pane: paneKey,
    screwId: screw.screw_id,
    selected,
    target: toScreen(pane, proj.target_px[0], proj.target_px[1]),
    entry: toScreen(pane, proj.entry_px[0], proj.entry_px[1]),
    halfWidth: proj.radius_px * pane.zoom,
    handleRadius: Math.max(proj.radius_px, HANDLE_MIN_PX) * pane.zoom,
  };
}

/**
 * Build the overlay scene for both panes.
 *
 * With no snapshot the scene is empty (the radiographs alone degrade
 * gracefully). Labeled vertebrae get green highlight boxes, per-view
 * selections their blue click points, and the selected screw carries
 * its sizing text next to the entry handle.
 */
export function renderOverlay(
  viewport: ViewportState,
  snapshot: StateSnapshot | null,
): DrawCommand[] {
  if (snapshot === null) {
    return [];
  }
  const commands: DrawCommand[] = [];
  for (const paneKey of ["ap", "lp"] as PaneKey[]) {
    const pane = viewport.panes[paneKey];
    for (const pair of snapshot.pairs) {
      const box = paneKey === "ap" ? pair.ap_box : pair.lp_box;
      const a = toScreen(pane, box.x_min_px, box.y_min_px);
      const b = toScreen(pane, box.x_max_px, box.y_max_px);
      commands.push({
        kind: "label_highlight",
        pane: paneKey,
        label: pair.label,
        x: a.x,
        y: a.y,
        width: b.x - a.x,
        height: b.y - a.y,
      });
    }
    for (const screw of snapshot.screws) {
      const selected = screw.screw_id === viewport.selectedScrewId;
      commands.push(capsuleFor(pane, paneKey, screw, selected));
      if (selected) {
        const proj = screw.projections[paneKey];
        const at = toScreen(pane, proj.entry_px[0], proj.entry_px[1]);
        commands.push({
          kind: "spec_text",
          pane: paneKey,
          x: at.x + SPEC_TEXT_OFFSET_PX,
          y: at.y,
          text: specText(screw),
        });
      }
    }
    const selection = snapshot.selection[paneKey];
    if (selection !== null && selection !== undefined) {
      const at = toScreen(pane, selection.point_px[0], selection.point_px[1]);
      commands.push({
        kind: "selected_point",
        pane: paneKey,
        x: at.x,
        y: at.y,
        label: selection.label,
      });
    }
  }
  return commands;
}

/** The capsule drawn for one screw in one pane, if any. */
export function findCapsule(
  commands: DrawCommand[],
  pane: PaneKey,
  screwId: string,
): CapsuleCommand | null {
  for (const c of commands) {
    if (c.kind === "capsule" && c.pane === pane && c.screwId === screwId) {
      return c;
    }
  }
  return null;
}
