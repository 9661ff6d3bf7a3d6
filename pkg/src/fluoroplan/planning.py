"""Screw initialization from paired bounding boxes, sizing, and containment checks.

The initializer reads both views' box extents back into world mm and places
the screw inside the vertebral body: the target point just inside the
anterior edge near the midline, the entry point at the lateral edge of the
chosen half-box posteriorly, with the disk length excluded vertically.
Left/right placements mirror about the box midline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .anatomy import SIDES, BBox2D, VertebraPair, split_half, trim_box
from .errors import (
    CatalogUnderflow,
    DegenerateScrew,
    DegenerateTrim,
    PadTooLarge,
    ValidationError,
)
from .geometry import (
    Point3,
    ViewCalibration,
    ViewKind,
    project_point,
    u_to_world,
    v_to_world,
)

#: Slack for inclusive containment checks, absorbs px<->mm rounding.
CONTAINMENT_EPS_PX = 1e-9

Z_POLICIES = ("paper_literal", "centered")


@dataclass(frozen=True)
class Screw3D:
    """The single source of truth: a cylinder from entry C2 to target C1.

    Both views render projections of this one object; every edit in either
    view is applied here and re-projected.
    """

    id: str
    label: str
    side: str
    target_c1: Point3
    entry_c2: Point3
    radius: float

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValidationError(f"side must be 'L' or 'R', got {self.side!r}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValidationError("radius must be > 0", field="radius")
        if self.length == 0.0:
            raise DegenerateScrew(
                f"screw {self.id}: entry and target coincide at "
                f"{self.target_c1.as_tuple()}"
            )

    @property
    def length(self) -> float:
        """Euclidean distance from entry to target, mm."""
        return math.dist(self.target_c1.as_tuple(), self.entry_c2.as_tuple())

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class PaddingConfig:
    """Free parameters of the initializer.

    ``pad_target`` insets the target point from the anterior edge and the
    midline; ``pad_entry`` insets the entry point from the posterior edge
    and the lateral edge of the half-box. ``z_policy`` "paper_literal"
    spans the trimmed box vertically; "centered" puts both endpoints at
    mid-height (horizontal screw in the lateral view).
    """

    pad_target: float = 5.0
    pad_entry: float = 5.0
    z_policy: str = "paper_literal"
    default_radius: float = 3.25

    def __post_init__(self):
        if self.pad_target < 0 or self.pad_entry < 0:
            raise ValidationError("pads must be >= 0")
        if self.z_policy not in Z_POLICIES:
            raise ValidationError(
                f"z_policy must be one of {Z_POLICIES}, got {self.z_policy!r}",
                field="z_policy",
            )
        if not self.default_radius > 0:
            raise ValidationError("default_radius must be > 0")


@dataclass(frozen=True)
class ScrewCatalog:
    """Commercially available screw dimensions, each list sorted ascending."""

    diameters_mm: tuple[float, ...]
    lengths_mm: tuple[float, ...]

    def __post_init__(self):
        for name in ("diameters_mm", "lengths_mm"):
            entries = getattr(self, name)
            if not entries:
                raise ValidationError(f"catalog {name} must be non-empty", field=name)
            if any(e <= 0 for e in entries):
                raise ValidationError(f"catalog {name} must be positive", field=name)
            if list(entries) != sorted(entries):
                raise ValidationError(
                    f"catalog {name} must be sorted ascending", field=name
                )


#: Common lumbar pedicle screw sizes; overridable per case via a catalog file.
DEFAULT_CATALOG = ScrewCatalog(
    diameters_mm=(4.5, 5.5, 6.5, 7.5),
    lengths_mm=(30.0, 35.0, 40.0, 45.0, 50.0, 55.0),
)


@dataclass(frozen=True)
class ScrewSpec:
    """Raw planned dimensions plus their safe (round-down) catalog matches.

    Catalog fields are None only when the raw value underflows the catalog
    and the caller asked for a non-strict computation.
    """

    length_mm: float
    diameter_mm: float
    catalog_length_mm: float | None
    catalog_diameter_mm: float | None


def snap_down(value: float, entries: tuple[float, ...]) -> float:
    """Largest catalog entry <= value; raises CatalogUnderflow below the minimum.

    Never rounds up: a screw must not be reported longer or thicker than
    planned.
    """
    if value < entries[0]:
        raise CatalogUnderflow(
            f"value {value:g} mm is below the smallest catalog entry "
            f"{entries[0]:g} mm"
        )
    candidate = entries[0]
    for e in entries:
        if e <= value:
            candidate = e
    return candidate


def compute_screw_spec(
    screw: Screw3D, catalog: ScrewCatalog = DEFAULT_CATALOG, *, strict: bool = True
) -> tuple[ScrewSpec, list[str]]:
    """Sizing report for a screw: raw length/diameter and catalog matches.

    Values beyond the catalog maximum snap down to the maximum and add an
    out-of-range warning. Underflow raises CatalogUnderflow when ``strict``;
    otherwise the catalog field comes back None with a warning, so a live
    session can keep reporting dimensions mid-edit.
    """
    warnings: list[str] = []
    raw = {"length": screw.length, "diameter": screw.diameter}
    entries = {"length": catalog.lengths_mm, "diameter": catalog.diameters_mm}
    snapped: dict[str, float | None] = {}
    for dim in ("length", "diameter"):
        try:
            snapped[dim] = snap_down(raw[dim], entries[dim])
        except CatalogUnderflow:
            if strict:
                raise
            snapped[dim] = None
            warnings.append(
                f"catalog_underflow:{dim}: raw {raw[dim]:.2f} mm below "
                f"catalog minimum {entries[dim][0]:g} mm"
            )
            continue
        if raw[dim] > entries[dim][-1]:
            warnings.append(
                f"catalog_out_of_range:{dim}: raw {raw[dim]:.2f} mm exceeds "
                f"catalog maximum {entries[dim][-1]:g} mm"
            )
    spec = ScrewSpec(
        length_mm=raw["length"],
        diameter_mm=raw["diameter"],
        catalog_length_mm=snapped["length"],
        catalog_diameter_mm=snapped["diameter"],
    )
    return spec, warnings


def _world_extents(
    pair: VertebraPair, ap_calib: ViewCalibration, lp_calib: ViewCalibration
) -> tuple[float, float, float, float, float, float]:
    """Box extents in world mm: (y0, y1, z0, z1, x0, x1), x0 anterior."""
    ap, lp = pair.ap_box, pair.lp_box
    y0 = u_to_world(ap_calib, ap.x_min)
    y1 = u_to_world(ap_calib, ap.x_max)
    z0 = v_to_world(ap_calib, ap.y_min)
    z1 = v_to_world(ap_calib, ap.y_max)
    xa = u_to_world(lp_calib, lp.x_min)
    xb = u_to_world(lp_calib, lp.x_max)
    # Anterior is always the smaller world X; a mirrored LP image only
    # changes which pixel edge maps there.
    return y0, y1, z0, z1, min(xa, xb), max(xa, xb)


def side_sign(side: str) -> float:
    """-1 for the left half (lower Y), +1 for the right half."""
    if side not in SIDES:
        raise ValidationError(f"side must be 'L' or 'R', got {side!r}")
    return -1.0 if side == "L" else 1.0


def init_screw(
    pair: VertebraPair,
    side: str,
    ivdl_mm: float,
    cfg: PaddingConfig,
    ap_calib: ViewCalibration,
    lp_calib: ViewCalibration,
) -> Screw3D:
    """Place a screw inside one vertebra from its two bounding boxes.

    All arithmetic happens in world mm after backprojecting the box corners
    through the calibrations. With half-box width W and midline Yc:

      target C1: Y = Yc -/+ pad_target, X = anterior edge + pad_target,
                 Z = box top + ivdl ("paper_literal") or mid-height
      entry  C2: Y = Yc -/+ (W/2 - pad_entry), X = posterior edge - pad_entry,
                 Z = box bottom - ivdl or mid-height

    The sign mirrors left/right placements exactly about Yc. The result's
    projections land inside the trimmed (and for AP, halved) boxes.
    """
    s = side_sign(side)
    y0, y1, z0, z1, x0, x1 = _world_extents(pair, ap_calib, lp_calib)
    width = y1 - y0
    depth = x1 - x0
    yc = (y0 + y1) / 2.0

    if 2.0 * ivdl_mm >= (z1 - z0):
        raise DegenerateTrim(
            f"{pair.label}: disk trim {ivdl_mm} mm consumes the box "
            f"(height {z1 - z0} mm)"
        )
    if cfg.pad_target >= width / 2.0 or cfg.pad_entry >= width / 2.0:
        raise PadTooLarge(
            f"{pair.label}: pads ({cfg.pad_target}, {cfg.pad_entry}) mm do not "
            f"fit in the {width / 2.0} mm half-box"
        )
    if cfg.pad_target >= depth or cfg.pad_entry >= depth:
        raise PadTooLarge(
            f"{pair.label}: pads exceed the lateral box depth {depth} mm"
        )

    if cfg.z_policy == "paper_literal":
        z_target = z0 + ivdl_mm
        z_entry = z1 - ivdl_mm
    else:
        z_target = z_entry = (z0 + z1) / 2.0

    target = Point3(x=x0 + cfg.pad_target, y=yc + s * cfg.pad_target, z=z_target)
    entry = Point3(
        x=x1 - cfg.pad_entry,
        y=yc + s * (width / 2.0 - cfg.pad_entry),
        z=z_entry,
    )
    return Screw3D(
        id=f"{pair.label}-{side}",
        label=pair.label,
        side=side,
        target_c1=target,
        entry_c2=entry,
        radius=cfg.default_radius,
    )


def _inside(
    box: BBox2D, u: float, v: float, eps: float = CONTAINMENT_EPS_PX
) -> bool:
    return (
        box.x_min - eps <= u <= box.x_max + eps
        and box.y_min - eps <= v <= box.y_max + eps
    )


def validate_containment(
    screw: Screw3D,
    pair: VertebraPair,
    ivdl_mm: float,
    ap_calib: ViewCalibration,
    lp_calib: ViewCalibration,
) -> list[str]:
    """Warnings for screw endpoints leaving their planning regions.

    AP endpoints must stay inside the side's half of the disk-trimmed AP
    box; LP endpoints inside the disk-trimmed LP box. These are warnings,
    not failures: a surgeon may deliberately plan outside the box. A Z
    violation shows up in both views because Z is the shared axis.
    """
    warnings: list[str] = []
    for view, calib, box in (
        (ViewKind.AP, ap_calib, pair.ap_box),
        (ViewKind.LP, lp_calib, pair.lp_box),
    ):
        tag = view.value.lower()
        ivdl_px = ivdl_mm / calib.mm_per_px_v
        try:
            region = trim_box(box, ivdl_px)
        except DegenerateTrim:
            warnings.append(f"{tag}_trim_degenerate:{box.label}")
            continue
        if view is ViewKind.AP:
            region = split_half(region, screw.side)
        for endpoint, point in (("target", screw.target_c1), ("entry", screw.entry_c2)):
            px = project_point(point, calib)
            if not _inside(region, px.u, px.v):
                warnings.append(f"{tag}_out_of_box:{endpoint}")
    return warnings
