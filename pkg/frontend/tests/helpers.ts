/**
 * Test fixtures: a session snapshot with the familiar two-level case,
 * and a scriptable fake planning service.
 *
 * The fake service mirrors the server's visible arithmetic for identity
 * calibrations (1 mm/px, origin 0, no mirroring): a translate in one
 * view moves that view's u and v and the other view's v only, endpoint
 * moves behave likewise, and the revision advances on every applied
 * edit. Tests assert that the client renders whatever the reply says,
 * so the fake being simple is fine; being shaped exactly like the wire
 * protocol is what matters.
 */

import type { Transport } from "../src/client";
import type {
  EditOp,
  PaneKey,
  ProjectionPayload,
  Reply,
  ScrewPayload,
  StateSnapshot,
} from "../src/protocol";

export function demoScrew(): ScrewPayload {
  return {
    screw_id: "L4-L",
    screw: {
      id: "L4-L",
      label: "L4",
      side: "L",
      target_c1_mm: [206, 134, 58],
      entry_c2_mm: [274, 106, 102],
      radius_mm: 3.25,
    },
    projections: {
      ap: { target_px: [134, 58], entry_px: [106, 102], radius_px: 3.25 },
      lp: { target_px: [206, 58], entry_px: [274, 102], radius_px: 3.25 },
    },
    spec: {
      length_mm: 85.6971411425142,
      diameter_mm: 6.5,
      catalog_length_mm: 55,
      catalog_diameter_mm: 6.5,
    },
    warnings: [],
  };
}

export function demoSnapshot(screws: ScrewPayload[] = [demoScrew()]): StateSnapshot {
  const calib = {
    mm_per_px_u: 1,
    mm_per_px_v: 1,
    origin_px: [0, 0] as [number, number],
    image_size_px: [320, 240] as [number, number],
  };
  const box = (view: "AP" | "LP", label: string, x0: number, y0: number) => ({
    view,
    label,
    x_min_px: x0,
    y_min_px: y0,
    x_max_px: x0 + 80,
    y_max_px: y0 + 60,
    confidence: 1,
  });
  return {
    session: "s1",
    case_path: "/cases/demo/case.json",
    labels: ["L4", "L5"],
    pairs: [
      { label: "L4", ap_box: box("AP", "L4", 100, 50), lp_box: box("LP", "L4", 200, 50) },
      { label: "L5", ap_box: box("AP", "L5", 100, 102), lp_box: box("LP", "L5", 200, 102) },
    ],
    calibration: {
      ap: { ...calib },
      lp: { ...calib, anterior_at: "left" },
    },
    image_size_px: { ap: [320, 240], lp: [320, 240] },
    discrepancy: { gain_a: 1, offset_b_mm: 0 },
    revision: 2,
    warnings: [],
    screws,
    selection: { ap: null, lp: null },
  };
}

interface FakeScrew {
  payload: ScrewPayload;
}

export class FakeService {
  /** Every request object the client sent, in order. */
  log: Record<string, unknown>[] = [];
  revision: number;
  screws = new Map<string, FakeScrew>();
  /** Queued forced errors, consumed one per edit request. */
  failNextEdits: { code: string; message: string }[] = [];

  constructor(snapshot: StateSnapshot) {
    this.revision = snapshot.revision;
    for (const screw of snapshot.screws) {
      this.screws.set(screw.screw_id, {
        payload: JSON.parse(JSON.stringify(screw)) as ScrewPayload,
      });
    }
    this.snapshotTemplate = snapshot;
  }

  private snapshotTemplate: StateSnapshot;

  transport(): Transport {
    return async (msg) => this.handle(msg);
  }

  handle(msg: Record<string, unknown>): Reply {
    this.log.push(msg);
    const req = msg.req as number;
    switch (msg.type) {
      case "get_state":
        return { req, ok: true, result: this.state() as never, session: "s1" };
      case "edit":
        return this.edit(msg);
      default:
        return {
          req,
          ok: false,
          error: { code: "unknown_message", message: `no ${msg.type} in fake` },
        };
    }
  }

  state(): StateSnapshot {
    return {
      ...this.snapshotTemplate,
      screws: [...this.screws.values()].map(
        (s) => JSON.parse(JSON.stringify(s.payload)) as ScrewPayload,
      ),
      revision: this.revision,
    };
  }

  private edit(msg: Record<string, unknown>): Reply {
    const req = msg.req as number;
    const forced = this.failNextEdits.shift();
    if (forced !== undefined) {
      return { req, ok: false, error: forced };
    }
    const expected = msg.expected_revision as number | undefined;
    if (expected !== undefined && expected !== this.revision) {
      return {
        req,
        ok: false,
        error: {
          code: "stale_revision",
          message: `expected revision ${expected}, session is at ${this.revision}`,
          details: { expected, actual: this.revision },
        },
      };
    }
    const record = this.screws.get(msg.screw_id as string);
    if (record === undefined) {
      return {
        req,
        ok: false,
        error: { code: "unknown_screw", message: `no screw ${msg.screw_id}` },
      };
    }
    this.applyOp(record.payload, msg.op as EditOp);
    this.revision += 1;
    const result = {
      ...(JSON.parse(JSON.stringify(record.payload)) as ScrewPayload),
      revision: this.revision,
    };
    return { req, ok: true, result: result as never, session: "s1" };
  }

  private applyOp(payload: ScrewPayload, op: EditOp): void {
    const edited: PaneKey = "view" in op && op.view === "LP" ? "lp" : "ap";
    const other: PaneKey = edited === "ap" ? "lp" : "ap";
    const a = payload.projections[edited];
    const b = payload.projections[other];
    if (op.kind === "translate") {
      shift(a, op.du_px, op.dv_px);
      shift(b, 0, op.dv_px); // shared vertical axis; hidden axis frozen
    } else if (op.kind === "move_endpoint") {
      const key = op.endpoint === "target" ? "target_px" : "entry_px";
      const dv = op.new_px[1] - a[key][1];
      a[key] = [op.new_px[0], op.new_px[1]];
      b[key] = [b[key][0], b[key][1] + dv];
    } else {
      payload.screw.radius_mm = op.new_radius_mm;
      payload.projections.ap.radius_px = op.new_radius_mm;
      payload.projections.lp.radius_px = op.new_radius_mm;
    }
  }
}

function shift(proj: ProjectionPayload, du: number, dv: number): void {
  proj.target_px = [proj.target_px[0] + du, proj.target_px[1] + dv];
  proj.entry_px = [proj.entry_px[0] + du, proj.entry_px[1] + dv];
}
