"""Case and plan files: JSON parsing/serialization plus image decoding.

A case bundles the two fluoroscopic images, their calibrations, the
vertebra annotations, and the planning configuration. A plan records the
produced screws with sizing, per-view projections, and warnings. Both are
versioned JSON ("schema": "1"); numeric field names carry their unit
(``_mm`` or ``_px``), and floats survive a save/load round trip bit for
bit because the writer emits shortest round-trip representations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .anatomy import BBox2D, IvdlPolicy, VertebraPair, pair_views
from .errors import (
    ImageError,
    IoError,
    ParseError,
    SchemaVersionError,
    ValidationError,
)
from .geometry import (
    Point2,
    Point3,
    ScrewProjection2D,
    ViewCalibration,
    ViewKind,
    project_screw,
)
from .planning import (
    DEFAULT_CATALOG,
    PaddingConfig,
    Screw3D,
    ScrewCatalog,
    ScrewSpec,
)
from .sync import (
    DiscrepancyModel,
    apply_discrepancy,
    correspondences_from_pairs,
    fit_discrepancy,
)

SCHEMA_VERSION = "1"

#: Stored projections are a cache of the screw's true projections; beyond
#: this pixel drift from a fresh projection they are reported stale.
STALE_PROJECTION_PX = 1e-6

#: Pillow modes accepted as single-channel grayscale. PNG stores at most
#: 16 bits per channel, so even mode "I" values fit in uint16.
_GRAY_MODES = ("L", "I", "I;16", "I;16B", "I;16L", "I;16N")


# ---------------------------------------------------------------------------
# JSON field helpers. Every failure names the offending field path.


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}: expected a number", field=where)
    return float(value)


def _as_string(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{where}: expected a string", field=where)
    return value


def _num_field(obj: dict, key: str, path: str, default: float | None = None) -> float:
    if key not in obj:
        if default is not None:
            return default
        raise ValidationError(f"{_join(path, key)}: missing", field=_join(path, key))
    return _as_number(obj[key], _join(path, key))


def _str_field(obj: dict, key: str, path: str, default: str | None = None) -> str:
    if key not in obj:
        if default is not None:
            return default
        raise ValidationError(f"{_join(path, key)}: missing", field=_join(path, key))
    return _as_string(obj[key], _join(path, key))


def _xy_field(
    obj: dict, key: str, path: str, default: tuple[float, float] | None = None
) -> tuple[float, float]:
    if key not in obj:
        if default is not None:
            return default
        raise ValidationError(f"{_join(path, key)}: missing", field=_join(path, key))
    where = _join(path, key)
    v = obj[key]
    if not isinstance(v, list) or len(v) != 2:
        raise ValidationError(f"{where}: expected a [x, y] pair", field=where)
    return (_as_number(v[0], where), _as_number(v[1], where))


def _xyz_field(obj: dict, key: str, path: str) -> tuple[float, float, float]:
    where = _join(path, key)
    if key not in obj:
        raise ValidationError(f"{where}: missing", field=where)
    v = obj[key]
    if not isinstance(v, list) or len(v) != 3:
        raise ValidationError(f"{where}: expected a [x, y, z] triple", field=where)
    return (_as_number(v[0], where), _as_number(v[1], where), _as_number(v[2], where))


def _size_field(
    obj: dict, key: str, path: str, default: tuple[int, int] | None = None
) -> tuple[int, int]:
    if key not in obj:
        if default is not None:
            return default
        raise ValidationError(f"{_join(path, key)}: missing", field=_join(path, key))
    where = _join(path, key)
    v = obj[key]
    if (
        not isinstance(v, list)
        or len(v) != 2
        or any(isinstance(e, bool) or not isinstance(e, int) for e in v)
    ):
        raise ValidationError(
            f"{where}: expected [width, height] integers", field=where
        )
    return (v[0], v[1])


def _object_field(obj: dict, key: str, path: str) -> dict:
    where = _join(path, key)
    v = obj.get(key)
    if not isinstance(v, dict):
        raise ValidationError(f"{where}: missing or not an object", field=where)
    return v


def _build(ctor, path: str, /, **kwargs):
    """Run a value constructor, prefixing its ValidationError with the path."""
    try:
        return ctor(**kwargs)
    except ValidationError as e:
        raise type(e)(f"{path}: {e.message}", field=path) from e


def _read_json(path: Path, what: str) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {what} {path}: {e}") from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return obj


def _check_schema(obj: dict, path: Path) -> None:
    version = obj.get("schema")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path}: unsupported schema {version!r}, "
            f"expected {SCHEMA_VERSION!r}",
            schema=version,
        )


def _write_json(payload: dict, path: Path, what: str) -> Path:
    try:
        path.write_text(
            json.dumps(payload, indent=2, allow_nan=False) + "\n", encoding="utf-8"
        )
    except OSError as e:
        raise IoError(f"cannot write {what} {path}: {e}") from e
    return path


# ---------------------------------------------------------------------------
# Images


def load_grayscale(path: str | Path) -> np.ndarray:
    """Decode a grayscale PNG to a (height, width) uint8 or uint16 array."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise ImageError(
                    f"{path}: expected PNG, got {im.format or 'unknown format'}"
                )
            if im.mode not in _GRAY_MODES:
                raise ImageError(
                    f"{path}: mode {im.mode} is not single-channel grayscale"
                )
            arr = np.asarray(im)
    except FileNotFoundError as e:
        raise ImageError(f"image file not found: {path}") from e
    except UnidentifiedImageError as e:
        raise ImageError(f"{path}: not a decodable image") from e
    except OSError as e:
        raise ImageError(f"{path}: {e}") from e
    if arr.dtype == np.uint8:
        return arr
    return arr.astype(np.uint16)


# ---------------------------------------------------------------------------
# Shared sub-schemas


def calibration_json(calib: ViewCalibration) -> dict:
    out: dict[str, Any] = {
        "mm_per_px_u": calib.mm_per_px_u,
        "mm_per_px_v": calib.mm_per_px_v,
        "origin_px": list(calib.origin_px),
        "image_size_px": list(calib.image_size),
    }
    if calib.view is ViewKind.LP:
        out["anterior_at"] = calib.anterior_at
    return out


def _calibration_from_json(
    obj: Any,
    view: ViewKind,
    path: str,
    default_size: tuple[int, int] | None = None,
) -> ViewCalibration:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: missing or not an object", field=path)
    return _build(
        ViewCalibration,
        path,
        view=view,
        mm_per_px_u=_num_field(obj, "mm_per_px_u", path),
        mm_per_px_v=_num_field(obj, "mm_per_px_v", path),
        origin_px=_xy_field(obj, "origin_px", path, default=(0.0, 0.0)),
        image_size=_size_field(obj, "image_size_px", path, default=default_size),
        anterior_at=_str_field(obj, "anterior_at", path, default="left"),
    )


def bbox_json(box: BBox2D) -> dict:
    return {
        "view": box.view.value,
        "label": box.label,
        "x_min_px": box.x_min,
        "y_min_px": box.y_min,
        "x_max_px": box.x_max,
        "y_max_px": box.y_max,
        "confidence": box.confidence,
    }


def _bbox_from_json(obj: Any, path: str) -> BBox2D:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object", field=path)
    view_name = _str_field(obj, "view", path)
    if view_name not in ("AP", "LP"):
        raise ValidationError(
            f"{path}.view: must be 'AP' or 'LP', got {view_name!r}",
            field=f"{path}.view",
        )
    return _build(
        BBox2D,
        path,
        view=ViewKind(view_name),
        label=_str_field(obj, "label", path),
        x_min=_num_field(obj, "x_min_px", path),
        y_min=_num_field(obj, "y_min_px", path),
        x_max=_num_field(obj, "x_max_px", path),
        y_max=_num_field(obj, "y_max_px", path),
        confidence=_num_field(obj, "confidence", path, default=1.0),
    )


def _ivdl_from_json(obj: Any, path: str) -> IvdlPolicy:
    if obj is None:
        return IvdlPolicy()
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object", field=path)
    base = IvdlPolicy()
    return _build(
        IvdlPolicy,
        path,
        mode=_str_field(obj, "mode", path, default=base.mode),
        fixed_mm=_num_field(obj, "fixed_mm", path, default=base.fixed_mm),
    )


def _padding_from_json(obj: Any, path: str) -> PaddingConfig:
    if obj is None:
        return PaddingConfig()
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object", field=path)
    base = PaddingConfig()
    return _build(
        PaddingConfig,
        path,
        pad_target=_num_field(obj, "pad_target_mm", path, default=base.pad_target),
        pad_entry=_num_field(obj, "pad_entry_mm", path, default=base.pad_entry),
        z_policy=_str_field(obj, "z_policy", path, default=base.z_policy),
        default_radius=_num_field(
            obj, "default_radius_mm", path, default=base.default_radius
        ),
    )


# ---------------------------------------------------------------------------
# Cases


@dataclass(frozen=True)
class CaseFile:
    """A loaded, validated case: everything screw planning needs.

    LP annotations have already been rewritten onto the AP craniocaudal
    axis using ``discrepancy``; ``annotations`` holds the corrected boxes
    in file order and ``pairs`` the same boxes matched by label, cranial
    to caudal. Pixel payloads are excluded from equality.
    """

    path: Path
    ap_image_path: Path
    lp_image_path: Path
    ap_calibration: ViewCalibration
    lp_calibration: ViewCalibration
    annotations: tuple[BBox2D, ...]
    pairs: tuple[VertebraPair, ...]
    ivdl: IvdlPolicy
    padding: PaddingConfig
    catalog: ScrewCatalog
    catalog_path: Path | None
    discrepancy: DiscrepancyModel
    warnings: tuple[str, ...]
    ap_pixels: np.ndarray = field(compare=False, repr=False)
    lp_pixels: np.ndarray = field(compare=False, repr=False)

    def calibration(self, view: ViewKind) -> ViewCalibration:
        return self.ap_calibration if view is ViewKind.AP else self.lp_calibration

    def pixels(self, view: ViewKind) -> np.ndarray:
        return self.ap_pixels if view is ViewKind.AP else self.lp_pixels

    def find_pair(self, label: str) -> VertebraPair | None:
        for pair in self.pairs:
            if pair.label == label:
                return pair
        return None


def load_catalog(path: str | Path) -> ScrewCatalog:
    """Read a screw catalog: ascending positive diameters_mm and lengths_mm."""
    path = Path(path)
    obj = _read_json(path, "catalog file")
    _check_schema(obj, path)

    def entries(key: str) -> tuple[float, ...]:
        v = obj.get(key)
        if not isinstance(v, list) or not v:
            raise ValidationError(f"{key}: expected a non-empty array", field=key)
        return tuple(_as_number(e, f"{key}[{i}]") for i, e in enumerate(v))

    return _build(
        ScrewCatalog,
        "catalog",
        diameters_mm=entries("diameters_mm"),
        lengths_mm=entries("lengths_mm"),
    )


def load_case(path: str | Path) -> CaseFile:
    """Read, validate, and normalize a case file.

    Both images are decoded (grayscale PNG, 8 or 16 bit) and checked
    against the calibration sizes, boxes are paired by label, and the
    craniocaudal discrepancy between the views is fitted from box
    top/bottom edges and applied to the LP annotations. Identical file
    bytes always produce identical in-memory state, warnings included.
    """
    path = Path(path)
    obj = _read_json(path, "case file")
    _check_schema(obj, path)
    base = path.parent

    ap_image_path = (base / _str_field(obj, "ap_image", "")).resolve()
    lp_image_path = (base / _str_field(obj, "lp_image", "")).resolve()
    ap_pixels = load_grayscale(ap_image_path)
    lp_pixels = load_grayscale(lp_image_path)

    calib_obj = _object_field(obj, "calibration", "")
    ap_calib = _calibration_from_json(
        calib_obj.get("ap"),
        ViewKind.AP,
        "calibration.ap",
        default_size=(ap_pixels.shape[1], ap_pixels.shape[0]),
    )
    lp_calib = _calibration_from_json(
        calib_obj.get("lp"),
        ViewKind.LP,
        "calibration.lp",
        default_size=(lp_pixels.shape[1], lp_pixels.shape[0]),
    )
    for name, calib, arr in (("ap", ap_calib, ap_pixels), ("lp", lp_calib, lp_pixels)):
        actual = (arr.shape[1], arr.shape[0])
        if tuple(calib.image_size) != actual:
            raise ValidationError(
                f"calibration.{name}.image_size_px {list(calib.image_size)} does "
                f"not match the decoded image size {list(actual)}",
                field=f"calibration.{name}.image_size_px",
            )

    ann_items = obj.get("annotations", [])
    if not isinstance(ann_items, list):
        raise ValidationError("annotations: expected an array", field="annotations")
    boxes = [
        _bbox_from_json(item, f"annotations[{i}]")
        for i, item in enumerate(ann_items)
    ]

    warnings: list[str] = []
    raw_pairs = pair_views(boxes)
    if raw_pairs:
        model = fit_discrepancy(
            correspondences_from_pairs(raw_pairs, ap_calib, lp_calib)
        )
    else:
        model = DiscrepancyModel()
        warnings.append(
            "discrepancy_identity: no paired vertebrae, assuming aligned views"
        )
    corrected_lp = iter(
        apply_discrepancy(
            model, [b for b in boxes if b.view is ViewKind.LP], lp_calib
        )
    )
    annotations = tuple(
        next(corrected_lp) if b.view is ViewKind.LP else b for b in boxes
    )
    pairs = tuple(pair_views(list(annotations)))

    catalog_ref = obj.get("catalog")
    if catalog_ref is None:
        catalog, catalog_path = DEFAULT_CATALOG, None
    else:
        catalog_path = (base / _as_string(catalog_ref, "catalog")).resolve()
        catalog = load_catalog(catalog_path)

    return CaseFile(
        path=path,
        ap_image_path=ap_image_path,
        lp_image_path=lp_image_path,
        ap_calibration=ap_calib,
        lp_calibration=lp_calib,
        annotations=annotations,
        pairs=pairs,
        ivdl=_ivdl_from_json(obj.get("ivdl"), "ivdl"),
        padding=_padding_from_json(obj.get("padding"), "padding"),
        catalog=catalog,
        catalog_path=catalog_path,
        discrepancy=model,
        warnings=tuple(warnings),
        ap_pixels=ap_pixels,
        lp_pixels=lp_pixels,
    )


def save_case(
    path: str | Path,
    *,
    ap_image: str,
    lp_image: str,
    ap_calibration: ViewCalibration,
    lp_calibration: ViewCalibration,
    annotations: Sequence[BBox2D] = (),
    ivdl: IvdlPolicy = IvdlPolicy(),
    padding: PaddingConfig = PaddingConfig(),
    catalog: str | None = None,
) -> Path:
    """Write a case file; image paths are stored as given (usually relative).

    Annotations are written raw: load_case owns the discrepancy
    correction, so saving corrected boxes would correct them twice.
    """
    payload: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "ap_image": ap_image,
        "lp_image": lp_image,
        "calibration": {
            "ap": calibration_json(ap_calibration),
            "lp": calibration_json(lp_calibration),
        },
        "annotations": [bbox_json(b) for b in annotations],
        "ivdl": {"mode": ivdl.mode, "fixed_mm": ivdl.fixed_mm},
        "padding": {
            "pad_target_mm": padding.pad_target,
            "pad_entry_mm": padding.pad_entry,
            "z_policy": padding.z_policy,
            "default_radius_mm": padding.default_radius,
        },
    }
    if catalog is not None:
        payload["catalog"] = catalog
    return _write_json(payload, Path(path), "case file")


# ---------------------------------------------------------------------------
# Plans


@dataclass(frozen=True)
class PlannedScrew:
    """One plan entry: the 3D screw, its sizing, cached projections, warnings."""

    screw: Screw3D
    spec: ScrewSpec
    ap_projection: ScrewProjection2D
    lp_projection: ScrewProjection2D
    warnings: tuple[str, ...] = ()

    @classmethod
    def from_screw(
        cls,
        screw: Screw3D,
        spec: ScrewSpec,
        ap_calib: ViewCalibration,
        lp_calib: ViewCalibration,
        warnings: Sequence[str] = (),
    ) -> "PlannedScrew":
        """Entry with freshly computed projections."""
        return cls(
            screw=screw,
            spec=spec,
            ap_projection=project_screw(screw, ap_calib),
            lp_projection=project_screw(screw, lp_calib),
            warnings=tuple(warnings),
        )


@dataclass(frozen=True)
class PlanDocument:
    """An exported surgical plan.

    Calibrations are embedded so the document is self-contained: stored
    projections can always be checked against a fresh projection of the
    stored screws without the case file at hand.
    """

    case_ref: str
    ap_calibration: ViewCalibration
    lp_calibration: ViewCalibration
    discrepancy: DiscrepancyModel
    screws: tuple[PlannedScrew, ...]
    revision: int
    created_at: str

    def __post_init__(self):
        if self.revision < 0:
            raise ValidationError("revision must be >= 0", field="revision")
        if (
            self.ap_calibration.view is not ViewKind.AP
            or self.lp_calibration.view is not ViewKind.LP
        ):
            raise ValidationError(
                "calibrations carry the wrong views", field="calibration"
            )


def screw_json(screw: Screw3D) -> dict:
    return {
        "id": screw.id,
        "label": screw.label,
        "side": screw.side,
        "target_c1_mm": list(screw.target_c1.as_tuple()),
        "entry_c2_mm": list(screw.entry_c2.as_tuple()),
        "radius_mm": screw.radius,
    }


def _screw_from_json(obj: Any, path: str) -> Screw3D:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: missing or not an object", field=path)
    tx, ty, tz = _xyz_field(obj, "target_c1_mm", path)
    ex, ey, ez = _xyz_field(obj, "entry_c2_mm", path)
    return _build(
        Screw3D,
        path,
        id=_str_field(obj, "id", path),
        label=_str_field(obj, "label", path),
        side=_str_field(obj, "side", path),
        target_c1=Point3(tx, ty, tz),
        entry_c2=Point3(ex, ey, ez),
        radius=_num_field(obj, "radius_mm", path),
    )


def spec_json(spec: ScrewSpec) -> dict:
    return {
        "length_mm": spec.length_mm,
        "diameter_mm": spec.diameter_mm,
        "catalog_length_mm": spec.catalog_length_mm,
        "catalog_diameter_mm": spec.catalog_diameter_mm,
    }


def _spec_from_json(obj: Any, path: str) -> ScrewSpec:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: missing or not an object", field=path)

    def optional(key: str) -> float | None:
        v = obj.get(key)
        return None if v is None else _as_number(v, _join(path, key))

    return ScrewSpec(
        length_mm=_num_field(obj, "length_mm", path),
        diameter_mm=_num_field(obj, "diameter_mm", path),
        catalog_length_mm=optional("catalog_length_mm"),
        catalog_diameter_mm=optional("catalog_diameter_mm"),
    )


def projection_json(proj: ScrewProjection2D) -> dict:
    return {
        "target_px": [proj.target_px.u, proj.target_px.v],
        "entry_px": [proj.entry_px.u, proj.entry_px.v],
        "radius_px": proj.radius_px,
    }


def _projection_from_json(obj: Any, view: ViewKind, path: str) -> ScrewProjection2D:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object", field=path)
    tu, tv = _xy_field(obj, "target_px", path)
    eu, ev = _xy_field(obj, "entry_px", path)
    return _build(
        ScrewProjection2D,
        path,
        view=view,
        target_px=Point2(tu, tv),
        entry_px=Point2(eu, ev),
        radius_px=_num_field(obj, "radius_px", path),
    )


def _projection_drift(stored: ScrewProjection2D, fresh: ScrewProjection2D) -> float:
    return max(
        abs(stored.target_px.u - fresh.target_px.u),
        abs(stored.target_px.v - fresh.target_px.v),
        abs(stored.entry_px.u - fresh.entry_px.u),
        abs(stored.entry_px.v - fresh.entry_px.v),
        abs(stored.radius_px - fresh.radius_px),
    )


def plan_to_json(doc: PlanDocument) -> dict:
    """The file/wire form of a plan; also used by the service's export reply."""
    return {
        "schema": SCHEMA_VERSION,
        "case": doc.case_ref,
        "calibration": {
            "ap": calibration_json(doc.ap_calibration),
            "lp": calibration_json(doc.lp_calibration),
        },
        "discrepancy": {
            "gain_a": doc.discrepancy.gain_a,
            "offset_b_mm": doc.discrepancy.offset_b,
        },
        "revision": doc.revision,
        "created_at": doc.created_at,
        "screws": [
            {
                "screw": screw_json(e.screw),
                "spec": spec_json(e.spec),
                "projections": {
                    "ap": projection_json(e.ap_projection),
                    "lp": projection_json(e.lp_projection),
                },
                "warnings": list(e.warnings),
            }
            for e in doc.screws
        ],
    }


def save_plan(doc: PlanDocument, path: str | Path) -> Path:
    """Write a plan as indented JSON, full float precision."""
    return _write_json(plan_to_json(doc), Path(path), "plan file")


def load_plan(path: str | Path) -> PlanDocument:
    """Read a plan; stored projections are revalidated against fresh ones.

    The fresh per-view projections of each stored screw always win. When a
    stored projection drifts more than STALE_PROJECTION_PX from the fresh
    one, the entry gains a ``stale_projection:`` warning, so hand-edited
    or outdated plans surface instead of silently disagreeing with their
    own screws.
    """
    path = Path(path)
    obj = _read_json(path, "plan file")
    _check_schema(obj, path)

    calib_obj = _object_field(obj, "calibration", "")
    ap_calib = _calibration_from_json(calib_obj.get("ap"), ViewKind.AP, "calibration.ap")
    lp_calib = _calibration_from_json(calib_obj.get("lp"), ViewKind.LP, "calibration.lp")

    disc_obj = _object_field(obj, "discrepancy", "")
    discrepancy = _build(
        DiscrepancyModel,
        "discrepancy",
        gain_a=_num_field(disc_obj, "gain_a", "discrepancy"),
        offset_b=_num_field(disc_obj, "offset_b_mm", "discrepancy"),
    )

    revision = obj.get("revision")
    if isinstance(revision, bool) or not isinstance(revision, int):
        raise ValidationError("revision: expected an integer", field="revision")

    items = obj.get("screws", [])
    if not isinstance(items, list):
        raise ValidationError("screws: expected an array", field="screws")
    entries: list[PlannedScrew] = []
    for i, item in enumerate(items):
        spath = f"screws[{i}]"
        if not isinstance(item, dict):
            raise ValidationError(f"{spath}: expected an object", field=spath)
        screw = _screw_from_json(item.get("screw"), f"{spath}.screw")
        spec = _spec_from_json(item.get("spec"), f"{spath}.spec")
        warn_items = item.get("warnings", [])
        if not isinstance(warn_items, list) or not all(
            isinstance(w, str) for w in warn_items
        ):
            raise ValidationError(
                f"{spath}.warnings: expected an array of strings",
                field=f"{spath}.warnings",
            )
        warnings = list(warn_items)
        fresh = {
            "ap": project_screw(screw, ap_calib),
            "lp": project_screw(screw, lp_calib),
        }
        projs_obj = item.get("projections")
        if projs_obj is not None and not isinstance(projs_obj, dict):
            raise ValidationError(
                f"{spath}.projections: expected an object",
                field=f"{spath}.projections",
            )
        for name, calib in (("ap", ap_calib), ("lp", lp_calib)):
            stored_obj = projs_obj.get(name) if projs_obj else None
            if stored_obj is None:
                continue
            stored = _projection_from_json(
                stored_obj, calib.view, f"{spath}.projections.{name}"
            )
            drift = _projection_drift(stored, fresh[name])
            if drift > STALE_PROJECTION_PX:
                warnings.append(
                    f"stale_projection:{name}:{screw.id}: stored projection "
                    f"off by {drift:.3g} px, recomputed"
                )
        entries.append(
            PlannedScrew(
                screw=screw,
                spec=spec,
                ap_projection=fresh["ap"],
                lp_projection=fresh["lp"],
                warnings=tuple(warnings),
            )
        )

    return PlanDocument(
        case_ref=_str_field(obj, "case", ""),
        ap_calibration=ap_calib,
        lp_calibration=lp_calib,
        discrepancy=discrepancy,
        screws=tuple(entries),
        revision=revision,
        created_at=_str_field(obj, "created_at", ""),
    )
