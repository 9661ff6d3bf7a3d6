"""Cross-view synchronization: gesture hit-testing, 2D edits lifted to 3D,
and the shared-axis discrepancy correction.

There is no per-view screw state. A gesture arrives in one view's pixels,
is lifted onto the 3D screw (the hidden axis never moves), and both views
re-render from the same object, so their shared-Z coordinates agree by
construction rather than by approximation.

The two shots come from different C-arm poses, so their craniocaudal
readings can disagree by a small affine mismatch. ``fit_discrepancy``
estimates that mismatch from matched landmarks (box top/bottom edges of the
same vertebra) and ``apply_discrepancy`` rewrites the lateral annotations
onto the AP reference frame once, at case load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .anatomy import BBox2D, VertebraPair
from .errors import (
    DegenerateFit,
    InsufficientCorrespondences,
    NonPositiveGain,
    ValidationError,
)
from .geometry import (
    Point2,
    Point3,
    ScrewProjection2D,
    ViewCalibration,
    ViewKind,
    backproject_point,
    pixel_delta_to_world,
    v_to_world,
    world_to_v,
)
from .planning import Screw3D

#: Endpoint grab disc radius; UI ergonomics, configurable per call.
DEFAULT_GRAB_PX = 8.0


class HitRegion(Enum):
    """What part of the screw glyph a click landed on."""

    BODY = "body"
    TARGET_ENDPOINT = "target_endpoint"
    ENTRY_ENDPOINT = "entry_endpoint"
    NONE = "none"


@dataclass(frozen=True)
class Translate:
    """Drag of the cylinder body: whole-screw shift in one view's pixels."""

    view: ViewKind
    du_px: float
    dv_px: float


@dataclass(frozen=True)
class MoveEndpoint:
    """Drag of one endpoint circle: rotation + length change about the other end."""

    view: ViewKind
    endpoint: str  # "target" | "entry"
    new_px: Point2

    def __post_init__(self):
        if self.endpoint not in ("target", "entry"):
            raise ValidationError(
                f"endpoint must be 'target' or 'entry', got {self.endpoint!r}"
            )


@dataclass(frozen=True)
class Resize:
    """Radius change; view-independent."""

    new_radius_mm: float

    def __post_init__(self):
        if not (self.new_radius_mm > 0 and math.isfinite(self.new_radius_mm)):
            raise ValidationError("new_radius_mm must be > 0")


EditOp = Translate | MoveEndpoint | Resize


@dataclass(frozen=True)
class DiscrepancyModel:
    """Affine map z_corrected = gain_a * z_LP + offset_b onto the AP Z axis."""

    gain_a: float = 1.0
    offset_b: float = 0.0

    def __post_init__(self):
        if not (self.gain_a > 0 and math.isfinite(self.gain_a)):
            raise NonPositiveGain(f"gain must be > 0, got {self.gain_a}")
        if not math.isfinite(self.offset_b):
            raise ValidationError("offset must be finite")

    def correct(self, z_lp: float) -> float:
        return self.gain_a * z_lp + self.offset_b

    @property
    def is_identity(self) -> bool:
        return self.gain_a == 1.0 and self.offset_b == 0.0


def _dist_point_segment(p: Point2, a: Point2, b: Point2) -> float:
    """Euclidean distance from p to segment [a, b]."""
    ab_u, ab_v = b.u - a.u, b.v - a.v
    ap_u, ap_v = p.u - a.u, p.v - a.v
    denom = ab_u * ab_u + ab_v * ab_v
    if denom == 0.0:
        return math.hypot(ap_u, ap_v)
    t = max(0.0, min(1.0, (ap_u * ab_u + ap_v * ab_v) / denom))
    return math.hypot(ap_u - t * ab_u, ap_v - t * ab_v)


def hit_test_screw(
    click: Point2, proj: ScrewProjection2D, grab_px: float = DEFAULT_GRAB_PX
) -> HitRegion:
    """Classify a click against a screw glyph.

    Endpoint discs take priority over the body (a click within ``grab_px``
    of an endpoint never reads as Body); between the two endpoints the
    nearer one wins, target on an exact tie. Body hits are clicks within
    the glyph radius of the axis segment, boundary inclusive.
    """
    if grab_px <= 0:
        raise ValidationError("grab_px must be > 0")
    d_target = math.hypot(click.u - proj.target_px.u, click.v - proj.target_px.v)
    d_entry = math.hypot(click.u - proj.entry_px.u, click.v - proj.entry_px.v)
    if min(d_target, d_entry) <= grab_px:
        return (
            HitRegion.TARGET_ENDPOINT
            if d_target <= d_entry
            else HitRegion.ENTRY_ENDPOINT
        )
    if _dist_point_segment(click, proj.target_px, proj.entry_px) <= proj.radius_px:
        return HitRegion.BODY
    return HitRegion.NONE


def _calib_for(
    view: ViewKind, ap_calib: ViewCalibration, lp_calib: ViewCalibration
) -> ViewCalibration:
    return ap_calib if view is ViewKind.AP else lp_calib


def apply_edit(
    screw: Screw3D,
    op: EditOp,
    ap_calib: ViewCalibration,
    lp_calib: ViewCalibration,
) -> Screw3D:
    """Lift a 2D gesture onto the 3D screw; both projections update from it.

    Translate shifts both endpoints along the edited view's visible axes.
    MoveEndpoint backprojects the new pixel with the endpoint's current
    hidden-axis value (the other endpoint stays fixed, which realizes
    rotation and length change). Resize replaces the radius. The edited
    view's hidden axis is never touched, and the shared Z change appears
    identically in both views.

    Raises DegenerateScrew when an edit collapses the axis to zero length.
    """
    if isinstance(op, Translate):
        calib = _calib_for(op.view, ap_calib, lp_calib)
        dx, dy, dz = pixel_delta_to_world(calib, op.du_px, op.dv_px)
        moved = {
            name: Point3(p.x + dx, p.y + dy, p.z + dz)
            for name, p in (("target", screw.target_c1), ("entry", screw.entry_c2))
        }
        return _replace_points(screw, moved["target"], moved["entry"])

    if isinstance(op, MoveEndpoint):
        calib = _calib_for(op.view, ap_calib, lp_calib)
        current = screw.target_c1 if op.endpoint == "target" else screw.entry_c2
        hidden = current.x if op.view is ViewKind.AP else current.y
        new_point = backproject_point(op.new_px, calib, hidden)
        if op.endpoint == "target":
            return _replace_points(screw, new_point, screw.entry_c2)
        return _replace_points(screw, screw.target_c1, new_point)

    if isinstance(op, Resize):
        return Screw3D(
            id=screw.id,
            label=screw.label,
            side=screw.side,
            target_c1=screw.target_c1,
            entry_c2=screw.entry_c2,
            radius=op.new_radius_mm,
        )

    raise ValidationError(f"unknown edit op {op!r}")


def _replace_points(screw: Screw3D, target: Point3, entry: Point3) -> Screw3D:
    return Screw3D(
        id=screw.id,
        label=screw.label,
        side=screw.side,
        target_c1=target,
        entry_c2=entry,
        radius=screw.radius,
    )


def correspondences_from_pairs(
    pairs: list[VertebraPair],
    ap_calib: ViewCalibration,
    lp_calib: ViewCalibration,
) -> list[tuple[float, float]]:
    """(z_AP, z_LP) landmark pairs: top and bottom edges of each vertebra's boxes."""
    out: list[tuple[float, float]] = []
    for pair in pairs:
        for ap_v, lp_v in (
            (pair.ap_box.y_min, pair.lp_box.y_min),
            (pair.ap_box.y_max, pair.lp_box.y_max),
        ):
            out.append((v_to_world(ap_calib, ap_v), v_to_world(lp_calib, lp_v)))
    return out


def fit_discrepancy(
    correspondences: list[tuple[float, float]]
) -> DiscrepancyModel:
    """Least-squares z_AP = a * z_LP + b over matched landmarks.

    Exact interpolation with two points. Raises
    InsufficientCorrespondences (< 2 pairs), DegenerateFit (all z_LP
    equal) or NonPositiveGain (vertically mirrored views).
    """
    if len(correspondences) < 2:
        raise InsufficientCorrespondences(
            f"need >= 2 landmark pairs, got {len(correspondences)}"
        )
    z_lp = np.asarray([c[1] for c in correspondences], dtype=float)
    z_ap = np.asarray([c[0] for c in correspondences], dtype=float)
    if np.ptp(z_lp) == 0.0:
        raise DegenerateFit("all lateral landmark values coincide")
    x_mean = z_lp.mean()
    y_mean = z_ap.mean()
    dx = z_lp - x_mean
    a = float(np.dot(dx, z_ap - y_mean) / np.dot(dx, dx))
    b = float(y_mean - a * x_mean)
    if a <= 0:
        raise NonPositiveGain(f"fitted gain {a:g} <= 0")
    return DiscrepancyModel(gain_a=a, offset_b=b)


def apply_discrepancy(
    model: DiscrepancyModel,
    lp_boxes: list[BBox2D],
    lp_calib: ViewCalibration,
) -> list[BBox2D]:
    """Rewrite LP boxes' vertical bounds onto the AP Z axis.

    Horizontal bounds are untouched; the positive gain preserves the
    y_min < y_max ordering. An identity model returns the boxes unchanged
    (bitwise: the px->mm->px round trip is skipped, not trusted to be
    exact).
    """
    for box in lp_boxes:
        if box.view is not ViewKind.LP:
            raise ValidationError(
                f"apply_discrepancy expects LP boxes, got {box.view.value}"
            )
    if model.is_identity:
        return list(lp_boxes)
    corrected = []
    for box in lp_boxes:
        corrected.append(
            BBox2D(
                view=box.view,
                label=box.label,
                x_min=box.x_min,
                y_min=world_to_v(lp_calib, model.correct(v_to_world(lp_calib, box.y_min))),
                x_max=box.x_max,
                y_max=world_to_v(lp_calib, model.correct(v_to_world(lp_calib, box.y_max))),
                confidence=box.confidence,
            )
        )
    return corrected
