"""Vertebral bounding boxes: AP/LP pairing, click hit-testing, disk-length handling.

Boxes are axis-aligned rectangles in one view's pixel space, labeled with a
vertebral level. They stand in for detector output and are the raw material
for screw initialization: adjacent boxes of the same view overlap vertically
by the intervertebral disk, and that overlap is what
:func:`ivdl_from_overlap` measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DegenerateTrim,
    DuplicateLabel,
    NoHit,
    NoOverlap,
    TooManyVertebrae,
    UnpairedLabel,
    ValidationError,
)
from .geometry import Point2, ViewKind

#: Supported vertebral levels, cranial to caudal.
SUPPORTED_LABELS = ("T12", "L1", "L2", "L3", "L4", "L5", "S1")

#: A single fluoroscopic shot captures at most 2-3 full vertebrae.
MAX_VERTEBRAE = 3

SIDES = ("L", "R")


@dataclass(frozen=True)
class BBox2D:
    """Labeled axis-aligned vertebra box in one view, pixel units."""

    view: ViewKind
    label: str
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    confidence: float = 1.0

    def __post_init__(self):
        if self.label not in SUPPORTED_LABELS:
            raise ValidationError(
                f"unsupported vertebra label {self.label!r}", field="label"
            )
        if not (self.x_min < self.x_max):
            raise ValidationError(
                f"box {self.label}: x_min must be < x_max "
                f"({self.x_min} >= {self.x_max})",
                field="x_min",
            )
        if not (self.y_min < self.y_max):
            raise ValidationError(
                f"box {self.label}: y_min must be < y_max "
                f"({self.y_min} >= {self.y_max})",
                field="y_min",
            )
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(
                f"box {self.label}: confidence must be in [0, 1]", field="confidence"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> Point2:
        return Point2((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains(self, p: Point2) -> bool:
        """Inclusive containment, so edge/corner clicks count as hits."""
        return self.x_min <= p.u <= self.x_max and self.y_min <= p.v <= self.y_max


@dataclass(frozen=True)
class VertebraPair:
    """One vertebra's AP and LP boxes, matched by label."""

    label: str
    ap_box: BBox2D
    lp_box: BBox2D

    def __post_init__(self):
        if self.ap_box.view is not ViewKind.AP or self.lp_box.view is not ViewKind.LP:
            raise ValidationError(
                f"pair {self.label}: boxes carry wrong views", field="view"
            )
        if not (self.label == self.ap_box.label == self.lp_box.label):
            raise ValidationError(
                f"pair {self.label}: box labels disagree", field="label"
            )


@dataclass(frozen=True)
class IvdlPolicy:
    """How the intervertebral disk length is obtained.

    mode "overlap" measures it from adjacent-box overlap and falls back to
    ``fixed_mm`` (with a recorded warning) when no overlap is available;
    mode "fixed" always uses ``fixed_mm``.
    """

    mode: str = "overlap"
    fixed_mm: float = 8.0

    def __post_init__(self):
        if self.mode not in ("fixed", "overlap"):
            raise ValidationError(
                f"ivdl mode must be 'fixed' or 'overlap', got {self.mode!r}",
                field="mode",
            )
        if not (self.fixed_mm >= 0 and math.isfinite(self.fixed_mm)):
            raise ValidationError("fixed_mm must be >= 0", field="fixed_mm")


def pair_views(boxes: list[BBox2D]) -> list[VertebraPair]:
    """Match AP and LP boxes by label, ordered cranially to caudally.

    Ordering is by AP y_min (v grows caudally), so the output is stable
    regardless of input order. Raises DuplicateLabel, UnpairedLabel (listing
    every offender), or TooManyVertebrae.
    """
    by_view: dict[ViewKind, dict[str, BBox2D]] = {ViewKind.AP: {}, ViewKind.LP: {}}
    for box in boxes:
        slot = by_view[box.view]
        if box.label in slot:
            raise DuplicateLabel(
                f"label {box.label} appears twice in {box.view.value}",
                label=box.label,
                view=box.view.value,
            )
        slot[box.label] = box

    ap, lp = by_view[ViewKind.AP], by_view[ViewKind.LP]
    unpaired = sorted(set(ap) ^ set(lp), key=SUPPORTED_LABELS.index)
    if unpaired:
        raise UnpairedLabel(
            "labels present in only one view: " + ", ".join(unpaired),
            labels=unpaired,
        )

    common = sorted(ap, key=lambda lbl: ap[lbl].y_min)
    if len(common) > MAX_VERTEBRAE:
        raise TooManyVertebrae(
            f"{len(common)} paired vertebrae, at most {MAX_VERTEBRAE} supported",
            count=len(common),
        )
    return [VertebraPair(lbl, ap[lbl], lp[lbl]) for lbl in common]


def hit_test_vertebra(click: Point2, view: ViewKind, boxes: list[BBox2D]) -> str:
    """Label of the box containing the click in this view.

    Overlapping boxes tie-break on nearest box center (then label order, so
    the result is deterministic). Raises NoHit when the click lands outside
    every box.
    """
    hits = [b for b in boxes if b.view is view and b.contains(click)]
    if not hits:
        raise NoHit(
            f"click ({click.u}, {click.v}) is outside every {view.value} box"
        )
    best = min(
        hits,
        key=lambda b: (
            math.hypot(b.center.u - click.u, b.center.v - click.v),
            SUPPORTED_LABELS.index(b.label),
        ),
    )
    return best.label


def ivdl_from_overlap(upper: BBox2D, lower: BBox2D, mm_per_px_v: float) -> float:
    """Disk length in mm from the vertical overlap of two stacked boxes.

    ``upper`` is the cranial box. The overlap is ``upper.y_max - lower.y_min``
    converted through the view's vertical scale. Raises NoOverlap when the
    boxes merely touch or are separated (callers fall back to the fixed
    policy value).
    """
    if upper.view is not lower.view:
        raise ValidationError("overlap boxes must come from the same view")
    # Both bounds must be ordered: nested boxes are not a vertebra stack,
    # and on true stacks this formula equals the interval intersection.
    if not (upper.y_min < lower.y_min and upper.y_max < lower.y_max):
        raise ValidationError(
            f"boxes must be vertically stacked, cranial first "
            f"({upper.label} vs {lower.label})"
        )
    overlap_px = upper.y_max - lower.y_min
    if overlap_px <= 0:
        raise NoOverlap(
            f"boxes {upper.label}/{lower.label} do not overlap "
            f"(gap {-overlap_px} px)"
        )
    return overlap_px * mm_per_px_v


def trim_box(box: BBox2D, ivdl_px: float) -> BBox2D:
    """Shrink a box vertically by the disk length on both ends.

    Raises DegenerateTrim when 2*ivdl_px consumes the whole box height.
    """
    if ivdl_px < 0:
        raise ValidationError("ivdl_px must be >= 0")
    if 2 * ivdl_px >= box.height:
        raise DegenerateTrim(
            f"trim of {ivdl_px} px consumes box {box.label} "
            f"(height {box.height} px)"
        )
    return BBox2D(
        view=box.view,
        label=box.label,
        x_min=box.x_min,
        y_min=box.y_min + ivdl_px,
        x_max=box.x_max,
        y_max=box.y_max - ivdl_px,
        confidence=box.confidence,
    )


def split_half(ap_box: BBox2D, side: str) -> BBox2D:
    """Left or right vertical half of an AP box (pedicles sit either side).

    The halves partition the box: they share the center edge and the full
    y extent.
    """
    if ap_box.view is not ViewKind.AP:
        raise ValidationError("split_half applies to AP boxes only")
    if side not in SIDES:
        raise ValidationError(f"side must be 'L' or 'R', got {side!r}")
    x_center = (ap_box.x_min + ap_box.x_max) / 2.0
    if side == "L":
        x_min, x_max = ap_box.x_min, x_center
    else:
        x_min, x_max = x_center, ap_box.x_max
    return BBox2D(
        view=ap_box.view,
        label=ap_box.label,
        x_min=x_min,
        y_min=ap_box.y_min,
        x_max=x_max,
        y_max=ap_box.y_max,
        confidence=ap_box.confidence,
    )


def resolve_ivdl(
    pairs: list[VertebraPair],
    label: str,
    policy: IvdlPolicy,
    ap_mm_per_px_v: float,
) -> tuple[float, list[str]]:
    """Disk length for one vertebra under the configured policy.

    Overlap mode averages the overlaps this vertebra has with its cranial
    and caudal neighbors (a lone vertebra has none, and touching boxes
    contribute none); when nothing is measurable it falls back to the fixed
    value and reports a warning for the plan.
    """
    if policy.mode == "fixed":
        return policy.fixed_mm, []

    ordered = sorted(pairs, key=lambda p: p.ap_box.y_min)
    idx = next((i for i, p in enumerate(ordered) if p.label == label), None)
    if idx is None:
        raise ValidationError(f"label {label} not among the paired vertebrae")

    overlaps: list[float] = []
    for upper_i, lower_i in ((idx - 1, idx), (idx, idx + 1)):
        if upper_i < 0 or lower_i >= len(ordered):
            continue
        try:
            overlaps.append(
                ivdl_from_overlap(
                    ordered[upper_i].ap_box, ordered[lower_i].ap_box, ap_mm_per_px_v
                )
            )
        except NoOverlap:
            continue
    if overlaps:
        return sum(overlaps) / len(overlaps), []
    return policy.fixed_mm, [
        f"ivdl_fallback:{label}: no adjacent-box overlap, "
        f"using fixed {policy.fixed_mm} mm"
    ]
