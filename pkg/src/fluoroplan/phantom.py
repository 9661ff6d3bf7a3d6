"""Synthetic biplanar lumbar cases with known pedicle-corridor ground truth.

The images are schematic: bright vertebral rectangles over a noisy
background. The bounding boxes carry all the geometry; pixels exist to
exercise IO and the viewer. Layout happens on an integer pixel grid so
that adjacent boxes overlap by exactly the disk height, and the disk
length measured back from the generated boxes reproduces the configured
one bit for bit.

Ground-truth corridors are straight capsules through each pedicle,
written with arithmetic local to this module (never by running the
planner), so that comparing planner output against them is a real
cross-check rather than a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .anatomy import SIDES, BBox2D, IvdlPolicy
from .caseio import (
    SCHEMA_VERSION,
    CaseFile,
    PlanDocument,
    _check_schema,
    _num_field,
    _read_json,
    _str_field,
    _write_json,
    _xyz_field,
    load_case,
    save_case,
)
from .errors import MissingTruth, SpecError, ValidationError
from .geometry import Point3, ViewCalibration, ViewKind
from .planning import PaddingConfig

#: Pixel anchors of the schematic anatomy inside the image.
TOP_MARGIN_PX = 60
ANTERIOR_PX = 120

# Rendering constants: background level, vertebra brightness lift, noise.
_BACKGROUND = 64.0
_BODY_CONTRAST = 96.0
_NOISE_SIGMA = 8.0

#: Cranial-to-caudal defaults; the last ``levels`` entries apply, so the
#: caudal-most (widest) vertebra is always L5.
_LEVEL_LABELS = ("L3", "L4", "L5")
_DEFAULT_HEIGHTS_MM = (27.0, 28.0, 29.0)
_DEFAULT_WIDTHS_MM = (46.0, 48.0, 50.0)


@dataclass(frozen=True)
class Corridor:
    """One pedicle's safe axis segment, world mm: entry (posterior) to
    target (anterior), with the allowed radial clearance around it."""

    label: str
    side: str
    entry_mm: Point3
    target_mm: Point3
    radius_mm: float

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValidationError(f"side must be 'L' or 'R', got {self.side!r}")
        if not self.radius_mm > 0:
            raise ValidationError("corridor radius must be > 0")
        if self.entry_mm == self.target_mm:
            raise ValidationError(
                f"corridor {self.label}-{self.side} has a zero-length axis"
            )


@dataclass(frozen=True)
class PlanError:
    """Plan-versus-truth metrics for one screw."""

    screw_id: str
    label: str
    side: str
    entry_error_mm: float
    target_error_mm: float
    contained: bool


def _whole_px(value_mm: float, mm_per_px: float, what: str) -> float:
    """mm -> px under the grid constraint: px integral and exactly invertible.

    The overlap-equals-disk-height guarantee is stated as exact equality,
    which only survives floating point when the box edges sit on whole
    pixels and the px->mm conversion loses nothing.
    """
    px = value_mm / mm_per_px
    if not (px > 0 and px.is_integer() and px * mm_per_px == value_mm):
        raise SpecError(
            f"{what} {value_mm} mm is not a positive whole number of pixels "
            f"at {mm_per_px} mm/px"
        )
    return px


def _per_level(
    given: tuple[float, ...] | None,
    defaults: tuple[float, ...],
    levels: int,
    what: str,
) -> tuple[float, ...]:
    if given is None:
        return defaults[len(defaults) - levels :]
    if len(given) != levels:
        raise SpecError(f"{what} must list one value per level, got {len(given)}")
    return tuple(float(v) for v in given)


@dataclass(frozen=True)
class PhantomSpec:
    """Everything that determines a synthetic case, images included.

    Per-level sizes run cranial to caudal and default to a slightly
    tapering stack. ``corridor_pad_mm`` insets the corridor endpoints from
    the box faces exactly as the planner's padding does, so the default
    corridors surround the screws a default-configured planner produces.
    The seed feeds image noise only: boxes and truth are seed-independent.
    """

    levels: int = 2
    body_widths_mm: tuple[float, ...] | None = None
    body_heights_mm: tuple[float, ...] | None = None
    body_depth_mm: float = 42.0
    disk_height_mm: float = 8.0
    corridor_radius_mm: float = 8.0
    corridor_pad_mm: float = 5.0
    mm_per_px: float = 1.0
    image_size_px: tuple[int, int] = (320, 240)
    lp_mirrored: bool = False
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.levels, int) or not 1 <= self.levels <= 3:
            raise SpecError(f"levels must be 1..3, got {self.levels!r}")
        if not (self.mm_per_px > 0 and math.isfinite(self.mm_per_px)):
            raise SpecError("mm_per_px must be > 0")
        for name in ("body_depth_mm", "disk_height_mm", "corridor_radius_mm"):
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be > 0")
        if self.corridor_pad_mm < 0:
            raise SpecError("corridor_pad_mm must be >= 0")
        w, h = self.image_size_px
        if not (isinstance(w, int) and isinstance(h, int) and w > 0 and h > 0):
            raise SpecError(f"image_size_px must be positive integers, got {w}x{h}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise SpecError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        # Resolve per-level sizes now so a bad spec fails at construction.
        heights = self.heights_mm()
        widths = self.widths_mm()
        if any(v <= 0 for v in heights + widths):
            raise SpecError("per-level sizes must be > 0")
        _whole_px(self.disk_height_mm, self.mm_per_px, "disk height")
        for v in heights:
            _whole_px(v, self.mm_per_px, "body height")
        # A plannable level needs room for the disk trim and the pads.
        if 2.0 * self.disk_height_mm >= min(heights):
            raise SpecError(
                f"disk trim 2*{self.disk_height_mm} mm consumes the shortest "
                f"body ({min(heights)} mm)"
            )
        if 2.0 * self.corridor_pad_mm >= min(min(widths) / 2.0, self.body_depth_mm):
            raise SpecError("corridor_pad_mm too large for the body sizes")
        self._bounds_check()

    def heights_mm(self) -> tuple[float, ...]:
        return _per_level(
            self.body_heights_mm, _DEFAULT_HEIGHTS_MM, self.levels, "body_heights_mm"
        )

    def widths_mm(self) -> tuple[float, ...]:
        return _per_level(
            self.body_widths_mm, _DEFAULT_WIDTHS_MM, self.levels, "body_widths_mm"
        )

    def labels(self) -> tuple[str, ...]:
        return _LEVEL_LABELS[len(_LEVEL_LABELS) - self.levels :]

    def _bounds_check(self) -> None:
        width_px, height_px = self.image_size_px
        for box in self._ap_boxes() + self._lp_boxes():
            if not (
                0 <= box.x_min
                and box.x_max <= width_px
                and 0 <= box.y_min
                and box.y_max <= height_px
            ):
                raise SpecError(
                    f"{box.view.value} box {box.label} "
                    f"[{box.x_min}, {box.y_min}, {box.x_max}, {box.y_max}] "
                    f"exceeds the {width_px}x{height_px} image"
                )

    # -- pixel-grid layout ---------------------------------------------------

    def _v_spans(self) -> list[tuple[float, float]]:
        """Per-level (v_top, v_bottom) px; consecutive spans share exactly
        disk_height px, which is what makes the measured disk exact."""
        m = self.mm_per_px
        disk_px = self.disk_height_mm / m
        spans = []
        top = float(TOP_MARGIN_PX)
        for h in self.heights_mm():
            spans.append((top, top + h / m))
            top = top + h / m - disk_px
        return spans

    def _ap_boxes(self) -> list[BBox2D]:
        m = self.mm_per_px
        center_u = self.image_size_px[0] / 2.0
        boxes = []
        for label, w, span in zip(self.labels(), self.widths_mm(), self._v_spans()):
            half = w / m / 2.0
            boxes.append(
                BBox2D(ViewKind.AP, label, center_u - half, span[0], center_u + half, span[1])
            )
        return boxes

    def _lp_boxes(self) -> list[BBox2D]:
        m = self.mm_per_px
        u0 = float(ANTERIOR_PX)
        u1 = u0 + self.body_depth_mm / m
        if self.lp_mirrored:
            u0, u1 = self.image_size_px[0] - u1, self.image_size_px[0] - u0
        return [
            BBox2D(ViewKind.LP, label, u0, span[0], u1, span[1])
            for label, span in zip(self.labels(), self._v_spans())
        ]

    def annotations(self) -> list[BBox2D]:
        return self._ap_boxes() + self._lp_boxes()

    # -- world-mm truth ------------------------------------------------------

    def corridors(self) -> tuple[Corridor, ...]:
        """Both pedicle corridors per level, left before right.

        Endpoint arithmetic mirrors the pad geometry directly in world mm:
        target near the anterior face just off the midline, entry near the
        posterior face inside the lateral quarter, Z one disk height inside
        the top/bottom faces.
        """
        m = self.mm_per_px
        pad = self.corridor_pad_mm
        disk = self.disk_height_mm
        x0 = ANTERIOR_PX * m
        x1 = x0 + self.body_depth_mm
        yc = self.image_size_px[0] / 2.0 * m
        out = []
        for label, w, span in zip(self.labels(), self.widths_mm(), self._v_spans()):
            z0, z1 = span[0] * m, span[1] * m
            for side, s in (("L", -1.0), ("R", 1.0)):
                out.append(
                    Corridor(
                        label=label,
                        side=side,
                        entry_mm=Point3(x1 - pad, yc + s * (w / 2.0 - pad), z1 - disk),
                        target_mm=Point3(x0 + pad, yc + s * pad, z0 + disk),
                        radius_mm=self.corridor_radius_mm,
                    )
                )
        return tuple(out)


def _render(
    size: tuple[int, int], boxes: Sequence[BBox2D], rng: np.random.Generator
) -> np.ndarray:
    """Noisy background with one brightness-lifted rectangle per box."""
    width, height = size
    img = rng.normal(_BACKGROUND, _NOISE_SIGMA, (height, width))
    for box in boxes:
        u0, v0 = int(round(box.x_min)), int(round(box.y_min))
        u1, v1 = int(round(box.x_max)), int(round(box.y_max))
        img[v0:v1, u0:u1] += _BODY_CONTRAST
    return np.clip(img, 0.0, 255.0).astype(np.uint8)


def save_truth(corridors: Sequence[Corridor], path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "schema": SCHEMA_VERSION,
        "screws": [
            {
                "label": c.label,
                "side": c.side,
                "entry_mm": list(c.entry_mm.as_tuple()),
                "target_mm": list(c.target_mm.as_tuple()),
                "corridor_radius_mm": c.radius_mm,
            }
            for c in corridors
        ],
    }
    _write_json(payload, path, "truth file")
    return path


def load_truth(path: str | Path) -> tuple[Corridor, ...]:
    path = Path(path)
    obj = _read_json(path, "truth file")
    _check_schema(obj, path)
    entries = obj.get("screws")
    if not isinstance(entries, list):
        raise ValidationError("screws: expected a list", field="screws")
    out = []
    for i, entry in enumerate(entries):
        where = f"screws[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object", field=where)
        out.append(
            Corridor(
                label=_str_field(entry, "label", where),
                side=_str_field(entry, "side", where),
                entry_mm=Point3(*_xyz_field(entry, "entry_mm", where)),
                target_mm=Point3(*_xyz_field(entry, "target_mm", where)),
                radius_mm=_num_field(entry, "corridor_radius_mm", where),
            )
        )
    return tuple(out)


def generate_phantom(
    spec: PhantomSpec, out_dir: str | Path
) -> tuple[CaseFile, tuple[Corridor, ...]]:
    """Write ap.png/lp.png/case.json/truth.json and load the case back.

    Returning the loaded (not in-memory) case means every generated
    artifact has passed the same validation a hand-authored case would.
    The case's disk-length policy falls back to the spec disk height, so
    a single-level phantom (no overlap to measure) still plans on-truth.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(spec.seed)
    Image.fromarray(_render(spec.image_size_px, spec._ap_boxes(), rng)).save(
        out / "ap.png"
    )
    Image.fromarray(_render(spec.image_size_px, spec._lp_boxes(), rng)).save(
        out / "lp.png"
    )

    case_path = save_case(
        out / "case.json",
        ap_image="ap.png",
        lp_image="lp.png",
        ap_calibration=ViewCalibration(
            view=ViewKind.AP,
            mm_per_px_u=spec.mm_per_px,
            mm_per_px_v=spec.mm_per_px,
            image_size=spec.image_size_px,
        ),
        lp_calibration=ViewCalibration(
            view=ViewKind.LP,
            mm_per_px_u=spec.mm_per_px,
            mm_per_px_v=spec.mm_per_px,
            image_size=spec.image_size_px,
            anterior_at="right" if spec.lp_mirrored else "left",
        ),
        annotations=spec.annotations(),
        ivdl=IvdlPolicy(mode="overlap", fixed_mm=spec.disk_height_mm),
        padding=PaddingConfig(),
    )
    corridors = spec.corridors()
    save_truth(corridors, out / "truth.json")
    return load_case(case_path), corridors


def _segment_distance_mm(p: Point3, a: Point3, b: Point3) -> float:
    """Distance from p to the segment a-b (callers guarantee a != b)."""
    ab = (b.x - a.x, b.y - a.y, b.z - a.z)
    ap = (p.x - a.x, p.y - a.y, p.z - a.z)
    t = (ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / (
        ab[0] ** 2 + ab[1] ** 2 + ab[2] ** 2
    )
    t = min(1.0, max(0.0, t))
    return math.sqrt(
        (ap[0] - t * ab[0]) ** 2 + (ap[1] - t * ab[1]) ** 2 + (ap[2] - t * ab[2]) ** 2
    )


def _point_distance_mm(p: Point3, q: Point3) -> float:
    return math.hypot(p.x - q.x, p.y - q.y, p.z - q.z)


def evaluate_plan(
    plan: PlanDocument, truth: Sequence[Corridor]
) -> list[PlanError]:
    """Per-screw endpoint errors and corridor containment, plan order.

    Errors are Euclidean distances from the planned target/entry to the
    matching truth endpoints; containment asks whether both planned
    endpoints lie within the corridor capsule (distance to the truth axis
    segment at most the corridor radius).
    """
    by_key: dict[tuple[str, str], Corridor] = {}
    for corridor in truth:
        by_key[(corridor.label, corridor.side)] = corridor

    out = []
    for planned in plan.screws:
        screw = planned.screw
        corridor = by_key.get((screw.label, screw.side))
        if corridor is None:
            raise MissingTruth(
                f"no truth corridor for {screw.label}-{screw.side}",
                label=screw.label,
                side=screw.side,
            )
        contained = (
            _segment_distance_mm(screw.target_c1, corridor.entry_mm, corridor.target_mm)
            <= corridor.radius_mm
            and _segment_distance_mm(
                screw.entry_c2, corridor.entry_mm, corridor.target_mm
            )
            <= corridor.radius_mm
        )
        out.append(
            PlanError(
                screw_id=screw.id,
                label=screw.label,
                side=screw.side,
                entry_error_mm=_point_distance_mm(screw.entry_c2, corridor.entry_mm),
                target_error_mm=_point_distance_mm(screw.target_c1, corridor.target_mm),
                contained=contained,
            )
        )
    return out
