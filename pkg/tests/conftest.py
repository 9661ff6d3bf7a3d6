from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from fluoroplan import (
    BBox2D,
    PaddingConfig,
    VertebraPair,
    ViewCalibration,
    ViewKind,
    save_case,
)

# Worked geometry used across modules: with identity calibrations the AP box
# spans world Y in [100, 180] and Z in [50, 110]; the LP box spans X in
# [200, 280] over the same Z. Disk length 8 mm, pads 6 mm, side L gives
# C1 = (206, 134, 58) and C2 = (274, 106, 102).


@pytest.fixture
def ap_identity() -> ViewCalibration:
    return ViewCalibration(view=ViewKind.AP, mm_per_px_u=1.0, mm_per_px_v=1.0)


@pytest.fixture
def lp_identity() -> ViewCalibration:
    return ViewCalibration(view=ViewKind.LP, mm_per_px_u=1.0, mm_per_px_v=1.0)


@pytest.fixture
def worked_pair() -> VertebraPair:
    return VertebraPair(
        label="L4",
        ap_box=BBox2D(ViewKind.AP, "L4", 100, 50, 180, 110),
        lp_box=BBox2D(ViewKind.LP, "L4", 200, 50, 280, 110),
    )


@pytest.fixture
def worked_cfg() -> PaddingConfig:
    return PaddingConfig(pad_target=6.0, pad_entry=6.0, z_policy="paper_literal")


def random_calibration(rng: np.random.Generator, view: ViewKind) -> ViewCalibration:
    """A valid random calibration: positive anisotropic scales, offset origin."""
    return ViewCalibration(
        view=view,
        mm_per_px_u=float(rng.uniform(0.1, 2.0)),
        mm_per_px_v=float(rng.uniform(0.1, 2.0)),
        origin_px=(float(rng.uniform(-50, 50)), float(rng.uniform(-50, 50))),
        image_size=(int(rng.integers(256, 1024)), int(rng.integers(256, 1024))),
        anterior_at=("left", "right")[int(rng.integers(0, 2))]
        if view is ViewKind.LP
        else "left",
    )


def write_demo_case(d: Path, pads: tuple[float, float] = (6.0, 6.0)) -> Path:
    """Write the worked two-level case to disk; returns the case.json path.

    L4 sits over L5 with an 8 px vertical overlap in both views, identity
    calibrations, 320x240 images. Initializing L4/L therefore gives the
    worked screw C1 = (206, 134, 58), C2 = (274, 106, 102).
    """
    size = (320, 240)
    rng = np.random.default_rng(0)
    for name in ("ap", "lp"):
        arr = rng.integers(0, 256, (size[1], size[0])).astype(np.uint8)
        Image.fromarray(arr).save(d / f"{name}.png")
    boxes = [
        BBox2D(ViewKind.AP, "L4", 100, 50, 180, 110),
        BBox2D(ViewKind.AP, "L5", 100, 102, 180, 162),
        BBox2D(ViewKind.LP, "L4", 200, 50, 280, 110),
        BBox2D(ViewKind.LP, "L5", 200, 102, 280, 162),
    ]
    return save_case(
        d / "case.json",
        ap_image="ap.png",
        lp_image="lp.png",
        ap_calibration=ViewCalibration(
            view=ViewKind.AP, mm_per_px_u=1.0, mm_per_px_v=1.0, image_size=size
        ),
        lp_calibration=ViewCalibration(
            view=ViewKind.LP, mm_per_px_u=1.0, mm_per_px_v=1.0, image_size=size
        ),
        annotations=boxes,
        padding=PaddingConfig(pad_target=pads[0], pad_entry=pads[1]),
    )


def random_world_pair(
    rng: np.random.Generator,
    ap_calib: ViewCalibration,
    lp_calib: ViewCalibration,
    label: str = "L4",
) -> VertebraPair:
    """A vertebra pair with plausible world-mm extents, expressed in pixels.

    Sampling in world space keeps the boxes large enough for default pads
    whatever the pixel scales are.
    """
    from fluoroplan.geometry import world_to_u, world_to_v

    y0 = float(rng.uniform(60, 140))
    width = float(rng.uniform(35, 60))
    z0 = float(rng.uniform(40, 120))
    height = float(rng.uniform(30, 50))
    x0 = float(rng.uniform(150, 250))
    depth = float(rng.uniform(40, 70))

    ap_u = sorted((world_to_u(ap_calib, y0), world_to_u(ap_calib, y0 + width)))
    ap_v = sorted((world_to_v(ap_calib, z0), world_to_v(ap_calib, z0 + height)))
    lp_u = sorted((world_to_u(lp_calib, x0), world_to_u(lp_calib, x0 + depth)))
    lp_v = sorted((world_to_v(lp_calib, z0), world_to_v(lp_calib, z0 + height)))
    return VertebraPair(
        label,
        BBox2D(ViewKind.AP, label, ap_u[0], ap_v[0], ap_u[1], ap_v[1]),
        BBox2D(ViewKind.LP, label, lp_u[0], lp_v[0], lp_u[1], lp_v[1]),
    )
