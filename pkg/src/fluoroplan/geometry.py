"""Coordinate frames, per-view calibration, projection and backprojection.

Coordinate conventions
======================
World frame (mm, right-handed for our purposes):
  - X: anteroposterior, increasing anterior -> posterior. Visible in the
    lateral (LP) view only.
  - Y: mediolateral, increasing patient-left -> patient-right as drawn on
    the AP image (i.e. along image u). Visible in the AP view only.
  - Z: craniocaudal, increasing caudally, aligned with the image v axis.
    Z is the one axis both views observe, and the channel through which
    they are reconciled.

Image frames (pixels):
  - u: horizontal, increasing rightward; v: vertical, increasing downward.
  - AP view: u <-> Y, v <-> Z.
  - LP view: u <-> X (orientation set by ``anterior_at``), v <-> Z.

Calibration is an axis-aligned affine map per view: a strictly positive
mm-per-pixel scale on each image axis plus a pixel origin. The LP image
may be mirrored left/right depending on which side of the patient the
detector stood; ``anterior_at`` declares where the anterior edge of the
anatomy appears on the image.

All functions here are pure and operate on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .errors import DegenerateProjection, ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .planning import Screw3D


class ViewKind(str, Enum):
    """The two fluoroscopic shots: anterior-posterior and lateral."""

    AP = "AP"
    LP = "LP"


@dataclass(frozen=True)
class Point3:
    """World-space point in mm (x anteroposterior, y mediolateral, z craniocaudal)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"Point3.{name} must be finite", field=name)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Point2:
    """Image-space point in pixels (u rightward, v downward)."""

    u: float
    v: float

    def __post_init__(self):
        for name in ("u", "v"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"Point2.{name} must be finite", field=name)

    def as_tuple(self) -> tuple[float, float]:
        return (self.u, self.v)


@dataclass(frozen=True)
class ViewCalibration:
    """Axis-aligned affine map between world mm and one view's pixels.

    ``anterior_at`` matters only for LP: "left" means the anterior edge of
    the anatomy sits at low u, "right" means the image is mirrored so the
    anterior edge sits at high u.
    """

    view: ViewKind
    mm_per_px_u: float
    mm_per_px_v: float
    origin_px: tuple[float, float] = (0.0, 0.0)
    image_size: tuple[int, int] = (512, 512)
    anterior_at: str = "left"

    def __post_init__(self):
        if not (self.mm_per_px_u > 0 and math.isfinite(self.mm_per_px_u)):
            raise ValidationError("mm_per_px_u must be > 0", field="mm_per_px_u")
        if not (self.mm_per_px_v > 0 and math.isfinite(self.mm_per_px_v)):
            raise ValidationError("mm_per_px_v must be > 0", field="mm_per_px_v")
        if self.image_size[0] <= 0 or self.image_size[1] <= 0:
            raise ValidationError("image_size must be positive", field="image_size")
        if self.anterior_at not in ("left", "right"):
            raise ValidationError(
                f"anterior_at must be 'left' or 'right', got {self.anterior_at!r}",
                field="anterior_at",
            )

    @property
    def mirrored(self) -> bool:
        """True when this LP image runs posterior -> anterior along u."""
        return self.view is ViewKind.LP and self.anterior_at == "right"


@dataclass(frozen=True)
class ScrewProjection2D:
    """One view's 2D shadow of a screw: endpoint pixels plus glyph radius."""

    view: ViewKind
    target_px: Point2
    entry_px: Point2
    radius_px: float

    def __post_init__(self):
        if self.radius_px <= 0:
            raise ValidationError("radius_px must be > 0", field="radius_px")
        if self.target_px == self.entry_px:
            raise DegenerateProjection(
                f"screw projects to a single {self.view.value} pixel "
                f"({self.target_px.u}, {self.target_px.v})"
            )


def hidden_axis(view: ViewKind) -> str:
    """Name of the world axis a view cannot observe ('x' for AP, 'y' for LP)."""
    return "x" if view is ViewKind.AP else "y"


def _horizontal_world(p: Point3, view: ViewKind) -> float:
    return p.y if view is ViewKind.AP else p.x


def world_to_u(calib: ViewCalibration, w: float) -> float:
    """Map a world coordinate on this view's horizontal axis to pixel u."""
    u = calib.origin_px[0] + w / calib.mm_per_px_u
    if calib.mirrored:
        u = calib.image_size[0] - u
    return u


def world_to_v(calib: ViewCalibration, z: float) -> float:
    """Map world Z to pixel v (identical form in both views)."""
    return calib.origin_px[1] + z / calib.mm_per_px_v


def u_to_world(calib: ViewCalibration, u: float) -> float:
    """Inverse of :func:`world_to_u`."""
    if calib.mirrored:
        u = calib.image_size[0] - u
    return (u - calib.origin_px[0]) * calib.mm_per_px_u


def v_to_world(calib: ViewCalibration, v: float) -> float:
    """Inverse of :func:`world_to_v`."""
    return (v - calib.origin_px[1]) * calib.mm_per_px_v


def project_point(p: Point3, calib: ViewCalibration) -> Point2:
    """Project a world point into one view (parallel-beam axis drop + affine)."""
    return Point2(
        u=world_to_u(calib, _horizontal_world(p, calib.view)),
        v=world_to_v(calib, p.z),
    )


def backproject_point(q: Point2, calib: ViewCalibration, hidden: float) -> Point3:
    """Lift a pixel back to 3D, supplying the axis this view cannot see.

    ``hidden`` is the world X for an AP pixel and the world Y for an LP
    pixel. The result is the unique point that projects back onto ``q``.
    """
    w = u_to_world(calib, q.u)
    z = v_to_world(calib, q.v)
    if calib.view is ViewKind.AP:
        return Point3(x=hidden, y=w, z=z)
    return Point3(x=w, y=hidden, z=z)


def pixel_delta_to_world(
    calib: ViewCalibration, du_px: float, dv_px: float
) -> tuple[float, float, float]:
    """World-space displacement produced by a pixel drag in one view.

    The hidden axis component is always zero; a mirrored LP image flips
    the sign of the X component.
    """
    dw = du_px * calib.mm_per_px_u
    if calib.mirrored:
        dw = -dw
    dz = dv_px * calib.mm_per_px_v
    if calib.view is ViewKind.AP:
        return (0.0, dw, dz)
    return (dw, 0.0, dz)


def project_screw(screw: "Screw3D", calib: ViewCalibration) -> ScrewProjection2D:
    """Project both screw endpoints and the glyph radius into one view.

    The glyph radius uses the horizontal scale; the drawn circle stays
    circular even under anisotropic calibration.

    Raises DegenerateProjection when the screw is viewed exactly end-on
    (both endpoints land on the same pixel).
    """
    return ScrewProjection2D(
        view=calib.view,
        target_px=project_point(screw.target_c1, calib),
        entry_px=project_point(screw.entry_c2, calib),
        radius_px=screw.radius / calib.mm_per_px_u,
    )
