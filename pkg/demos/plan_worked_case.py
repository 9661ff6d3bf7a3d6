"""Walk through planning on a small hand-made two-level case.

Builds a case directory from scratch (two synthetic radiographs plus a
case file with L4/L5 boxes in both views), then narrates the planning
steps: pairing the annotations, measuring the disk from box overlap,
placing screws on both sides of L4, sizing them against the implant
catalog, and finally editing one screw in the AP view to show the
lateral view following along.

Run:  python3 demos/plan_worked_case.py [output_dir]
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from fluoroplan import (
    BBox2D,
    PaddingConfig,
    PlanDocument,
    PlannedScrew,
    Translate,
    ViewCalibration,
    ViewKind,
    apply_edit,
    compute_screw_spec,
    init_screw,
    load_case,
    load_plan,
    project_screw,
    resolve_ivdl,
    save_case,
    save_plan,
    validate_containment,
)


def build_case(case_dir: Path) -> Path:
    """Two vertebrae, identity calibrations, an 8 px disk overlap."""
    case_dir.mkdir(parents=True, exist_ok=True)
    size = (320, 240)
    rng = np.random.default_rng(7)
    for name in ("ap", "lp"):
        pixels = rng.integers(40, 90, (size[1], size[0])).astype(np.uint8)
        Image.fromarray(pixels).save(case_dir / f"{name}.png")
    boxes = [
        BBox2D(ViewKind.AP, "L4", 100, 50, 180, 110),
        BBox2D(ViewKind.AP, "L5", 100, 102, 180, 162),
        BBox2D(ViewKind.LP, "L4", 200, 50, 280, 110),
        BBox2D(ViewKind.LP, "L5", 200, 102, 280, 162),
    ]
    return save_case(
        case_dir / "case.json",
        ap_image="ap.png",
        lp_image="lp.png",
        ap_calibration=ViewCalibration(
            view=ViewKind.AP, mm_per_px_u=1.0, mm_per_px_v=1.0, image_size=size
        ),
        lp_calibration=ViewCalibration(
            view=ViewKind.LP, mm_per_px_u=1.0, mm_per_px_v=1.0, image_size=size
        ),
        annotations=boxes,
        padding=PaddingConfig(pad_target=6.0, pad_entry=6.0),
    )


def fmt(p) -> str:
    return f"({p.x:.1f}, {p.y:.1f}, {p.z:.1f})"


def main(argv: list[str]) -> int:
    if len(argv) > 1:
        case_dir = Path(argv[1])
        case_dir.mkdir(parents=True, exist_ok=True)
    else:
        case_dir = Path(tempfile.mkdtemp(prefix="fluoroplan-demo-"))
    print(f"case directory: {case_dir}")

    case_path = build_case(case_dir)
    case = load_case(case_path)
    print(f"loaded {case_path.name}: {len(case.pairs)} vertebra pairs "
          f"({', '.join(p.label for p in case.pairs)})")

    # The disk length comes straight from the vertical overlap of the
    # stacked boxes; with identity calibration the 8 px overlap is 8 mm.
    ivdl, ivdl_warnings = resolve_ivdl(
        list(case.pairs), "L4", case.ivdl, case.ap_calibration.mm_per_px_v
    )
    print(f"\ndisk length below L4: {ivdl:.1f} mm "
          f"({'measured from overlap' if not ivdl_warnings else ivdl_warnings[0]})")

    pair = next(p for p in case.pairs if p.label == "L4")
    for side in ("L", "R"):
        screw = init_screw(
            pair, side, ivdl, case.padding, case.ap_calibration, case.lp_calibration
        )
        spec, warnings = compute_screw_spec(screw, case.catalog, strict=False)
        warnings += validate_containment(
            screw, pair, ivdl, case.ap_calibration, case.lp_calibration
        )
        print(f"\n{screw.id}:")
        print(f"  target C1 {fmt(screw.target_c1)} mm, entry C2 {fmt(screw.entry_c2)} mm")
        print(f"  raw length {spec.length_mm:.2f} mm, diameter {spec.diameter_mm:.2f} mm")
        print(f"  catalog pick: length {spec.catalog_length_mm}, "
              f"diameter {spec.catalog_diameter_mm}")
        for w in warnings:
            print(f"  warning: {w}")
        if side == "L":
            left = screw

    # Drag the whole left screw 5 px right and 3 px up in the AP image.
    # The AP view cannot see world X, so the lateral view only moves
    # vertically, and by exactly the same 3 px.
    print("\nedit: translate L4-L by (+5, -3) px in the AP view")
    before_lp = project_screw(left, case.lp_calibration)
    edited = apply_edit(
        left,
        Translate(view=ViewKind.AP, du_px=5.0, dv_px=-3.0),
        case.ap_calibration,
        case.lp_calibration,
    )
    after_lp = project_screw(edited, case.lp_calibration)
    print(f"  LP target moved by "
          f"({after_lp.target_px.u - before_lp.target_px.u:+.1f}, "
          f"{after_lp.target_px.v - before_lp.target_px.v:+.1f}) px")

    spec, warnings = compute_screw_spec(edited, case.catalog, strict=False)
    doc = PlanDocument(
        case_ref=str(case_path),
        ap_calibration=case.ap_calibration,
        lp_calibration=case.lp_calibration,
        discrepancy=case.discrepancy,
        screws=(
            PlannedScrew.from_screw(
                edited, spec, case.ap_calibration, case.lp_calibration, warnings
            ),
        ),
        revision=1,
        created_at="demo",
    )
    plan_path = save_plan(doc, case_dir / "plan.json")
    reloaded = load_plan(plan_path)
    print(f"\nsaved {plan_path.name} and reloaded it: "
          f"{len(reloaded.screws)} screw, "
          f"round trip {'exact' if reloaded == doc else 'NOT exact'}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
