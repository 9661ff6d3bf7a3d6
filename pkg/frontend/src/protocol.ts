/**
 * Wire types for the planning service protocol.
 *
 * Requests and replies are single JSON objects; the same shapes travel
 * over the HTTP bridge used here and the line-oriented TCP transport.
 * Nothing in this file computes geometry: these are transcriptions of
 * what the server sends, and the server is authoritative.
 */

export type ViewName = "AP" | "LP";
/** Lowercase pane keys as used in reply payloads. */
export type PaneKey = "ap" | "lp";

export interface TranslateOp {
  kind: "translate";
  view: ViewName;
  du_px: number;
  dv_px: number;
}

export interface MoveEndpointOp {
  kind: "move_endpoint";
  view: ViewName;
  endpoint: "target" | "entry";
  new_px: [number, number];
}

export interface ResizeOp {
  kind: "resize";
  new_radius_mm: number;
}

export type EditOp = TranslateOp | MoveEndpointOp | ResizeOp;

export interface OpenCaseRequest {
  req: number;
  type: "open_case";
  path: string;
}

export interface SelectVertebraRequest {
  req: number;
  type: "select_vertebra";
  session: string;
  view: ViewName;
  point_px: [number, number];
}

export interface InitScrewRequest {
  req: number;
  type: "init_screw";
  session: string;
  label: string;
  side: "L" | "R";
  expected_revision?: number;
}

export interface EditRequest {
  req: number;
  type: "edit";
  session: string;
  screw_id: string;
  op: EditOp;
  expected_revision?: number;
}

export interface DeleteScrewRequest {
  req: number;
  type: "delete_screw";
  session: string;
  screw_id: string;
  expected_revision?: number;
}

export interface GetStateRequest {
  req: number;
  type: "get_state";
  session: string;
}

export interface ExportPlanRequest {
  req: number;
  type: "export_plan";
  session: string;
  path: string;
}

export type Request =
  | OpenCaseRequest
  | SelectVertebraRequest
  | InitScrewRequest
  | EditRequest
  | DeleteScrewRequest
  | GetStateRequest
  | ExportPlanRequest;

export interface BoxPayload {
  view: ViewName;
  label: string;
  x_min_px: number;
  y_min_px: number;
  x_max_px: number;
  y_max_px: number;
  confidence: number;
}

export interface PairPayload {
  label: string;
  ap_box: BoxPayload;
  lp_box: BoxPayload;
}

export interface CalibrationPayload {
  mm_per_px_u: number;
  mm_per_px_v: number;
  origin_px: [number, number];
  image_size_px: [number, number];
  anterior_at?: "left" | "right";
}

export interface ProjectionPayload {
  target_px: [number, number];
  entry_px: [number, number];
  radius_px: number;
}

export interface ScrewPayload {
  screw_id: string;
  screw: {
    id: string;
    label: string;
    side: "L" | "R";
    target_c1_mm: [number, number, number];
    entry_c2_mm: [number, number, number];
    radius_mm: number;
  };
  projections: { ap: ProjectionPayload; lp: ProjectionPayload };
  spec: {
    length_mm: number;
    diameter_mm: number;
    catalog_length_mm: number | null;
    catalog_diameter_mm: number | null;
  };
  warnings: string[];
}

export interface SelectionPayload {
  point_px: [number, number];
  label: string | null;
}

export interface CaseSummary {
  session: string;
  case_path: string;
  labels: string[];
  pairs: PairPayload[];
  calibration: { ap: CalibrationPayload; lp: CalibrationPayload };
  image_size_px: { ap: [number, number]; lp: [number, number] };
  discrepancy: { gain_a: number; offset_b_mm: number };
  revision: number;
  warnings: string[];
}

export interface StateSnapshot extends CaseSummary {
  screws: ScrewPayload[];
  selection: { ap: SelectionPayload | null; lp: SelectionPayload | null };
}

export interface ScrewResult extends ScrewPayload {
  revision: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  details?: Record<string, unknown>;
}

export interface Reply {
  req: number | null;
  ok: boolean;
  result?: Record<string, unknown>;
  error?: ErrorBody;
  session?: string;
}

/** Per-screw fields shown beside the selected screw. */
export function specText(screw: ScrewPayload): string {
  const s = screw.spec;
  const len =
    s.catalog_length_mm === null ? "no fit" : `${s.catalog_length_mm} mm`;
  const dia =
    s.catalog_diameter_mm === null ? "no fit" : `${s.catalog_diameter_mm} mm`;
  return (
    `${screw.screw_id}  length ${s.length_mm.toFixed(1)} mm (${len})  ` +
    `diameter ${s.diameter_mm.toFixed(1)} mm (${dia})`
  );
}
