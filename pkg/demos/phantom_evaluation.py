"""Generate a synthetic spine phantom and score plans against its truth.

The phantom generator writes a complete case directory (two schematic
radiographs, bounding boxes, calibrations) plus a truth file with the
corridors it drew. Planning on the generated case with default settings
lands exactly on those corridors, which this script shows first; it then
nudges one screw a known distance off its corridor so the evaluation
report has something to complain about.

Run:  python3 demos/phantom_evaluation.py [seed]
"""

from __future__ import annotations

import math
import sys
import tempfile
from pathlib import Path

from fluoroplan import (
    PhantomSpec,
    PlanDocument,
    PlannedScrew,
    Point3,
    Screw3D,
    compute_screw_spec,
    evaluate_plan,
    generate_phantom,
    init_screw,
    resolve_ivdl,
)


def plan_all(case) -> list[Screw3D]:
    screws = []
    for pair in case.pairs:
        ivdl, _ = resolve_ivdl(
            list(case.pairs), pair.label, case.ivdl, case.ap_calibration.mm_per_px_v
        )
        for side in ("L", "R"):
            screws.append(
                init_screw(
                    pair, side, ivdl, case.padding,
                    case.ap_calibration, case.lp_calibration,
                )
            )
    return screws


def as_plan(case, screws) -> PlanDocument:
    planned = []
    for screw in screws:
        spec, warnings = compute_screw_spec(screw, case.catalog, strict=False)
        planned.append(
            PlannedScrew.from_screw(
                screw, spec, case.ap_calibration, case.lp_calibration, warnings
            )
        )
    return PlanDocument(
        case_ref=str(case.path),
        ap_calibration=case.ap_calibration,
        lp_calibration=case.lp_calibration,
        discrepancy=case.discrepancy,
        screws=tuple(planned),
        revision=0,
        created_at="demo",
    )


def print_report(title: str, results) -> None:
    print(f"\n{title}")
    print(f"  {'screw':<8} {'entry_err_mm':>12} {'target_err_mm':>13} {'contained':>9}")
    for r in results:
        print(f"  {r.screw_id:<8} {r.entry_error_mm:>12.3f} "
              f"{r.target_error_mm:>13.3f} {'yes' if r.contained else 'NO':>9}")


def main(argv: list[str]) -> int:
    seed = int(argv[1]) if len(argv) > 1 else 42
    out = Path(tempfile.mkdtemp(prefix="fluoroplan-phantom-"))
    print(f"phantom directory: {out} (seed {seed})")

    case, truth = generate_phantom(PhantomSpec(levels=3, seed=seed), out)
    print(f"generated {len(case.pairs)} levels "
          f"({', '.join(p.label for p in case.pairs)}), "
          f"{len(truth)} truth corridors of radius {truth[0].radius_mm:g} mm")

    screws = plan_all(case)
    print_report("default planner against truth:", evaluate_plan(as_plan(case, screws), truth))

    # Push one screw 3-4-0 mm off its corridor: a 5 mm error, still
    # inside the 8 mm corridor radius. Push it 9-12-0 next: 15 mm is
    # well outside and the containment flag flips.
    for dx, dy in ((3.0, 4.0), (9.0, 12.0)):
        victim = screws[0]
        moved = Screw3D(
            id=victim.id, label=victim.label, side=victim.side,
            target_c1=Point3(
                victim.target_c1.x + dx, victim.target_c1.y + dy, victim.target_c1.z
            ),
            entry_c2=Point3(
                victim.entry_c2.x + dx, victim.entry_c2.y + dy, victim.entry_c2.z
            ),
            radius=victim.radius,
        )
        shifted = [moved] + screws[1:]
        offset = math.hypot(dx, dy)
        print_report(
            f"after moving {victim.id} by ({dx:g}, {dy:g}, 0) mm "
            f"(|offset| = {offset:g} mm):",
            evaluate_plan(as_plan(case, shifted), truth),
        )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
