"""Whole-system checks, one release criterion per test.

Every test here states its tolerance inline and prints a single PASS
line with the measured figure (visible under ``pytest -s``). These
thresholds are the contract for the package as a whole; loosening one
to make a run green is never the fix.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from fluoroplan import (
    BBox2D,
    DiscrepancyModel,
    MoveEndpoint,
    PaddingConfig,
    PhantomSpec,
    PlanDocument,
    PlannedScrew,
    Point2,
    Point3,
    Resize,
    Screw3D,
    Translate,
    ViewCalibration,
    ViewKind,
    apply_edit,
    backproject_point,
    compute_screw_spec,
    evaluate_plan,
    fit_discrepancy,
    generate_phantom,
    init_screw,
    ivdl_from_overlap,
    load_plan,
    project_point,
    resolve_ivdl,
    save_plan,
    validate_containment,
)
from fluoroplan.errors import NoOverlap
from fluoroplan.geometry import u_to_world
from fluoroplan.service import PlanningService, canonical_json

from conftest import random_calibration, random_world_pair, write_demo_case


def _report(criterion: str, detail: str) -> None:
    print(f"PASS {criterion}: {detail}")


def test_projection_round_trip_identity():
    # 1000 random points through random valid calibrations: backprojecting
    # a projection (with the true hidden coordinate) must reproduce the
    # point to 1e-9 mm, and the whole pass must stay under a second.
    rng = np.random.default_rng(101)
    cases = []
    for i in range(1000):
        view = ViewKind.AP if i % 2 == 0 else ViewKind.LP
        calib = random_calibration(rng, view)
        p = Point3(*(float(c) for c in rng.uniform(-500.0, 500.0, 3)))
        cases.append((calib, p))

    worst = 0.0
    t0 = time.perf_counter()
    for calib, p in cases:
        q = project_point(p, calib)
        hidden = p.x if calib.view is ViewKind.AP else p.y
        r = backproject_point(q, calib, hidden)
        worst = max(worst, abs(r.x - p.x), abs(r.y - p.y), abs(r.z - p.z))
    elapsed = time.perf_counter() - t0

    assert worst <= 1e-9
    assert elapsed < 1.0
    _report(
        "projection round-trip",
        f"1000 points, max |error| {worst:.3e} mm (<= 1e-9), {elapsed:.3f} s",
    )


def _shared_row_calibrations(rng: np.random.Generator):
    """Random AP/LP pair whose vertical affines coincide.

    Both shots rendered at the same vertical scale and offset put the
    shared craniocaudal axis on the same pixel row in both panes, so the
    cross-view v comparison below can demand bitwise equality.
    """
    ap = random_calibration(rng, ViewKind.AP)
    lp = ViewCalibration(
        view=ViewKind.LP,
        mm_per_px_u=float(rng.uniform(0.1, 2.0)),
        mm_per_px_v=ap.mm_per_px_v,
        origin_px=(float(rng.uniform(-50, 50)), ap.origin_px[1]),
        image_size=(int(rng.integers(256, 1024)), int(rng.integers(256, 1024))),
        anterior_at=("left", "right")[int(rng.integers(0, 2))],
    )
    return ap, lp


def _random_screw(rng: np.random.Generator) -> Screw3D:
    a = Point3(*(float(c) for c in rng.uniform(-200.0, 200.0, 3)))
    b = Point3(*(float(c) for c in rng.uniform(-200.0, 200.0, 3)))
    return Screw3D(
        id="L4-L",
        label="L4",
        side="L",
        target_c1=a,
        entry_c2=b,
        radius=float(rng.uniform(1.0, 5.0)),
    )


def _random_edit(rng: np.random.Generator, view: ViewKind):
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return Translate(
            view=view,
            du_px=float(rng.uniform(-20.0, 20.0)),
            dv_px=float(rng.uniform(-20.0, 20.0)),
        )
    if kind == 1:
        return MoveEndpoint(
            view=view,
            endpoint=("target", "entry")[int(rng.integers(0, 2))],
            new_px=Point2(float(rng.uniform(0.0, 256.0)), float(rng.uniform(0.0, 256.0))),
        )
    return Resize(new_radius_mm=float(rng.uniform(0.5, 6.0)))


def test_synchronization_exact_across_views():
    # 200 random screws, 50 random edits each, strictly alternating the
    # edited view. After every edit the two projections must agree on v
    # bitwise (one Z drives both) and the edited view's hidden axis must
    # be untouched. Budget: under five seconds for the 10k edits.
    rng = np.random.default_rng(211)
    edits = 0
    t0 = time.perf_counter()
    for _ in range(200):
        ap, lp = _shared_row_calibrations(rng)
        screw = _random_screw(rng)
        for k in range(50):
            view = ViewKind.AP if k % 2 == 0 else ViewKind.LP
            before = (screw.target_c1, screw.entry_c2)
            screw = apply_edit(screw, _random_edit(rng, view), ap, lp)
            edits += 1
            for pt, prev in zip((screw.target_c1, screw.entry_c2), before):
                assert project_point(pt, ap).v == project_point(pt, lp).v
                if view is ViewKind.AP:
                    assert pt.x == prev.x
                else:
                    assert pt.y == prev.y
    elapsed = time.perf_counter() - t0

    assert edits == 10_000
    assert elapsed < 5.0
    _report(
        "synchronization exactness",
        f"{edits} edits, v bitwise-equal across views, hidden axes frozen, "
        f"{elapsed:.3f} s",
    )


def test_initialization_contained_and_mirror_symmetric():
    # 100 random box pairs: both sides must validate with zero containment
    # warnings, and the left/right placements must mirror about the
    # midline recomputed here from the AP box alone. Shared components
    # (X, Z, radius) compare bitwise; the Y reflection residual is allowed
    # rounding headroom of 1e-9 mm.
    rng = np.random.default_rng(307)
    worst_reflection = 0.0
    for _ in range(100):
        ap = random_calibration(rng, ViewKind.AP)
        lp = random_calibration(rng, ViewKind.LP)
        pair = random_world_pair(rng, ap, lp)
        ivdl = float(rng.uniform(0.0, 5.0))
        cfg = PaddingConfig(
            pad_target=float(rng.uniform(1.0, 8.0)),
            pad_entry=float(rng.uniform(1.0, 8.0)),
        )
        left = init_screw(pair, "L", ivdl, cfg, ap, lp)
        right = init_screw(pair, "R", ivdl, cfg, ap, lp)
        assert validate_containment(left, pair, ivdl, ap, lp) == []
        assert validate_containment(right, pair, ivdl, ap, lp) == []

        yc = (
            u_to_world(ap, pair.ap_box.x_min) + u_to_world(ap, pair.ap_box.x_max)
        ) / 2.0
        for l_pt, r_pt in (
            (left.target_c1, right.target_c1),
            (left.entry_c2, right.entry_c2),
        ):
            worst_reflection = max(
                worst_reflection, abs((l_pt.y - yc) + (r_pt.y - yc))
            )
            assert l_pt.x == r_pt.x
            assert l_pt.z == r_pt.z
        assert left.radius == right.radius

    assert worst_reflection <= 1e-9
    _report(
        "initialization conformance",
        f"100 pairs, zero warnings, mirror residual {worst_reflection:.3e} mm "
        f"(<= 1e-9)",
    )


def test_disk_length_matches_interval_intersection():
    # 10^4 random integer box pairs against a brute-force interval
    # intersection computed right here. Positive overlaps must agree
    # exactly at several binary pixel scales; zero and negative overlaps
    # (touching or separated boxes) must raise.
    rng = np.random.default_rng(41)
    scales = (1.0, 0.5, 0.25)
    overlapping = touching = separated = 0
    for i in range(10_000):
        y0u = int(rng.integers(0, 200))
        h_u = int(rng.integers(20, 120))
        h_l = int(rng.integers(20, 120))
        # Overlap below both heights keeps the stack ordered cranial-first.
        ov = 0 if i % 10 == 0 else int(rng.integers(-30, min(h_u, h_l)))
        y1u = y0u + h_u
        y0l = y1u - ov
        y1l = y0l + h_l
        upper = BBox2D(ViewKind.AP, "L4", 10, y0u, 90, y1u)
        lower = BBox2D(ViewKind.AP, "L5", 10, y0l, 90, y1l)
        m = scales[i % 3]

        inter = min(y1u, y1l) - max(y0u, y0l)
        if inter > 0:
            assert ivdl_from_overlap(upper, lower, m) == inter * m
            overlapping += 1
        else:
            with pytest.raises(NoOverlap):
                ivdl_from_overlap(upper, lower, m)
            if inter == 0:
                touching += 1
            else:
                separated += 1

    assert touching >= 500  # the boundary case is genuinely exercised
    _report(
        "disk length oracle",
        f"10000 pairs exact ({overlapping} overlapping, {touching} touching, "
        f"{separated} separated)",
    )


def test_discrepancy_fit_recovers_synthetic_tilt():
    # 100 synthetic tilts z_LP = (z_AP - b) / a with a in [0.9, 1.1] and
    # b in [-10, 10] mm: the fit must return (a, b) to 1e-9 and correcting
    # the landmarks must cancel the mismatch to 1e-9 mm.
    rng = np.random.default_rng(59)
    worst_param = 0.0
    worst_residual = 0.0
    for _ in range(100):
        a = float(rng.uniform(0.9, 1.1))
        b = float(rng.uniform(-10.0, 10.0))
        n = int(rng.integers(2, 8))
        z_ap = rng.uniform(0.0, 300.0, n)
        while float(np.ptp(z_ap)) < 20.0:  # keep the fit well conditioned
            z_ap = rng.uniform(0.0, 300.0, n)
        corrs = [(float(z), (float(z) - b) / a) for z in z_ap]

        model = fit_discrepancy(corrs)
        worst_param = max(
            worst_param, abs(model.gain_a - a), abs(model.offset_b - b)
        )
        for z_ap_i, z_lp_i in corrs:
            worst_residual = max(worst_residual, abs(model.correct(z_lp_i) - z_ap_i))

    assert worst_param <= 1e-9
    assert worst_residual <= 1e-9
    _report(
        "discrepancy recovery",
        f"100 trials, max parameter error {worst_param:.3e}, "
        f"max residual {worst_residual:.3e} mm (<= 1e-9)",
    )


def _plan_screws(case) -> list[Screw3D]:
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


def _plan_document(case, screws) -> PlanDocument:
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
        created_at="2026-08-23T00:00:00+00:00",
    )


def test_phantom_plans_land_in_truth_corridors(tmp_path):
    # 30 seeded phantoms spanning 1..3 levels, both lateral orientations
    # and two pixel scales. The default planner must be contained in the
    # truth corridors every single time, and the evaluator's reported
    # errors must equal independently computed Euclidean norms to 1e-9:
    # zero for the planner output, |offset| for a deliberately shifted copy.
    rng = np.random.default_rng(73)
    total = contained = 0
    worst_planner_err = 0.0
    worst_norm_gap = 0.0
    for i in range(30):
        spec = PhantomSpec(
            levels=i % 3 + 1,
            seed=7000 + 13 * i,
            lp_mirrored=i % 2 == 1,
            mm_per_px=0.5 if i % 5 == 0 else 1.0,
        )
        case, truth = generate_phantom(spec, tmp_path / f"p{i:02d}")
        screws = _plan_screws(case)

        for err in evaluate_plan(_plan_document(case, screws), truth):
            total += 1
            contained += err.contained
            worst_planner_err = max(
                worst_planner_err, err.entry_error_mm, err.target_error_mm
            )

        moved = []
        offsets = []
        for screw in screws:
            d_t = tuple(float(c) for c in rng.uniform(-3.0, 3.0, 3))
            d_e = tuple(float(c) for c in rng.uniform(-3.0, 3.0, 3))
            offsets.append((d_t, d_e))
            moved.append(
                Screw3D(
                    id=screw.id,
                    label=screw.label,
                    side=screw.side,
                    target_c1=Point3(
                        screw.target_c1.x + d_t[0],
                        screw.target_c1.y + d_t[1],
                        screw.target_c1.z + d_t[2],
                    ),
                    entry_c2=Point3(
                        screw.entry_c2.x + d_e[0],
                        screw.entry_c2.y + d_e[1],
                        screw.entry_c2.z + d_e[2],
                    ),
                    radius=screw.radius,
                )
            )
        results = evaluate_plan(_plan_document(case, moved), truth)
        for err, (d_t, d_e) in zip(results, offsets):
            expect_t = math.sqrt(d_t[0] ** 2 + d_t[1] ** 2 + d_t[2] ** 2)
            expect_e = math.sqrt(d_e[0] ** 2 + d_e[1] ** 2 + d_e[2] ** 2)
            worst_norm_gap = max(
                worst_norm_gap,
                abs(err.target_error_mm - expect_t),
                abs(err.entry_error_mm - expect_e),
            )

    assert total == 120  # 10 cycles of 1+2+3 levels, two sides each
    assert contained == total
    assert worst_planner_err <= 1e-9
    assert worst_norm_gap <= 1e-9
    _report(
        "phantom end-to-end",
        f"30 phantoms, {contained}/{total} contained, planner error "
        f"{worst_planner_err:.3e} mm, norm mismatch {worst_norm_gap:.3e} mm",
    )


def _transcript() -> list[dict]:
    """Exactly one hundred requests covering every message type.

    The mix includes steady edit traffic plus deliberate failures (an
    unknown screw id, a stale revision guard, a background click) so the
    replay also pins down error replies and their no-op semantics.
    """
    msgs = [{"req": 1, "type": "open_case", "path": "case.json"}]

    def add(type_: str, **fields) -> None:
        msgs.append({"req": len(msgs) + 1, "type": type_, "session": "s1", **fields})

    add("select_vertebra", view="AP", point_px=[140.0, 80.0])
    for label, side in (("L4", "L"), ("L4", "R"), ("L5", "L"), ("L5", "R")):
        add("init_screw", label=label, side=side)

    ids = ("L4-L", "L4-R", "L5-L", "L5-R")
    k = 0
    while len(msgs) < 94:
        sid = ids[k % 4]
        step = k % 6
        if step == 0:
            add("edit", screw_id=sid,
                op={"kind": "translate", "view": "AP", "du_px": 2.0, "dv_px": -1.0})
        elif step == 1:
            add("edit", screw_id=sid,
                op={"kind": "translate", "view": "LP", "du_px": -2.0, "dv_px": 1.0})
        elif step == 2:
            add("edit", screw_id=sid,
                op={"kind": "move_endpoint", "view": "AP", "endpoint": "entry",
                    "new_px": [107.0 + k % 5, 101.0 - k % 3]})
        elif step == 3:
            add("edit", screw_id=sid,
                op={"kind": "resize", "new_radius_mm": 2.0 + (k % 4) * 0.5})
        elif step == 4:
            add("edit", screw_id="L9-X",
                op={"kind": "resize", "new_radius_mm": 3.0})
        else:
            add("get_state")
        k += 1

    add("edit", screw_id="L4-L",
        op={"kind": "translate", "view": "AP", "du_px": 0.5, "dv_px": 0.5},
        expected_revision=0)
    add("select_vertebra", view="AP", point_px=[0.0, 0.0])
    add("delete_screw", screw_id="L5-R")
    add("init_screw", label="L5", side="R")
    add("select_vertebra", view="LP", point_px=[240.0, 130.0])
    add("get_state")
    assert len(msgs) == 100
    return msgs


def test_service_transcript_replay_is_byte_identical(tmp_path):
    # The recorded 100-message transcript, replayed against a fresh
    # service over the same case, must produce byte-identical replies all
    # the way through, the final get_state snapshot included.
    write_demo_case(tmp_path)

    def run() -> list[str]:
        service = PlanningService(case_root=tmp_path)
        return [canonical_json(service.handle_message(m)) for m in _transcript()]

    first = run()
    second = run()
    assert len(first) == 100
    assert first == second
    assert first[-1] == second[-1]  # the get_state snapshot itself

    replies = [json.loads(r) for r in first]
    assert replies[-1]["ok"] and replies[-1]["result"]["screws"]
    errors = sum(1 for r in replies if not r["ok"])
    _report(
        "protocol replay",
        f"100 messages ({errors} deliberate errors), replies byte-identical",
    )


def test_plan_round_trip_is_lossless(tmp_path):
    # Saving and reloading a plan full of awkward floats must preserve
    # every numeric field to 1e-12 relative (and in fact bitwise).
    ap = ViewCalibration(
        view=ViewKind.AP,
        mm_per_px_u=0.1 + 0.2,
        mm_per_px_v=math.pi / 10.0,
        origin_px=(-12.5, 7.75),
        image_size=(641, 483),
    )
    lp = ViewCalibration(
        view=ViewKind.LP,
        mm_per_px_u=math.sqrt(2.0) / 3.0,
        mm_per_px_v=math.pi / 10.0,
        origin_px=(3.1, -44.0),
        image_size=(512, 512),
        anterior_at="right",
    )
    screws = (
        Screw3D(
            id="L4-L", label="L4", side="L",
            target_c1=Point3(206.0 + 1e-7, 134.0 - 1e-7, 58.0 + math.pi * 1e-6),
            entry_c2=Point3(274.0 / 3.0 * 3.0, 106.0, 102.0),
            radius=1.05,  # diameter below the catalog, spec keeps None there
        ),
        Screw3D(
            id="L5-R", label="L5", side="R",
            target_c1=Point3(206.0, 146.0, 110.0),
            entry_c2=Point3(274.0, 174.0, 154.0),
            radius=3.25,
        ),
    )
    planned = []
    for screw in screws:
        spec, warnings = compute_screw_spec(screw, strict=False)
        planned.append(PlannedScrew.from_screw(screw, spec, ap, lp, warnings))
    doc = PlanDocument(
        case_ref="cases/demo/case.json",
        ap_calibration=ap,
        lp_calibration=lp,
        discrepancy=DiscrepancyModel(gain_a=1.0000000001, offset_b=-0.75),
        screws=tuple(planned),
        revision=7,
        created_at="2026-08-23T10:00:00+00:00",
    )

    loaded = load_plan(save_plan(doc, tmp_path / "plan.json"))

    def close(a: float | None, b: float | None) -> bool:
        if a is None or b is None:
            return a is None and b is None
        return math.isclose(a, b, rel_tol=1e-12, abs_tol=0.0)

    for got, want in ((loaded.ap_calibration, ap), (loaded.lp_calibration, lp)):
        assert got.view is want.view
        assert close(got.mm_per_px_u, want.mm_per_px_u)
        assert close(got.mm_per_px_v, want.mm_per_px_v)
        assert all(close(g, w) for g, w in zip(got.origin_px, want.origin_px))
        assert got.image_size == want.image_size
        assert got.anterior_at == want.anterior_at
    assert close(loaded.discrepancy.gain_a, doc.discrepancy.gain_a)
    assert close(loaded.discrepancy.offset_b, doc.discrepancy.offset_b)
    assert loaded.case_ref == doc.case_ref
    assert loaded.revision == doc.revision
    assert loaded.created_at == doc.created_at

    assert len(loaded.screws) == len(doc.screws)
    for got, want in zip(loaded.screws, doc.screws):
        assert got.screw.id == want.screw.id
        assert got.screw.label == want.screw.label
        assert got.screw.side == want.screw.side
        for g_pt, w_pt in (
            (got.screw.target_c1, want.screw.target_c1),
            (got.screw.entry_c2, want.screw.entry_c2),
        ):
            assert close(g_pt.x, w_pt.x) and close(g_pt.y, w_pt.y) and close(g_pt.z, w_pt.z)
        assert close(got.screw.radius, want.screw.radius)
        assert close(got.spec.length_mm, want.spec.length_mm)
        assert close(got.spec.diameter_mm, want.spec.diameter_mm)
        assert close(got.spec.catalog_length_mm, want.spec.catalog_length_mm)
        assert close(got.spec.catalog_diameter_mm, want.spec.catalog_diameter_mm)
        for g_proj, w_proj in (
            (got.ap_projection, want.ap_projection),
            (got.lp_projection, want.lp_projection),
        ):
            assert close(g_proj.target_px.u, w_proj.target_px.u)
            assert close(g_proj.target_px.v, w_proj.target_px.v)
            assert close(g_proj.entry_px.u, w_proj.entry_px.u)
            assert close(g_proj.entry_px.v, w_proj.entry_px.v)
            assert close(g_proj.radius_px, w_proj.radius_px)
        assert got.warnings == want.warnings

    assert loaded == doc  # the round trip is in fact bitwise
    _report(
        "plan round-trip",
        f"{len(doc.screws)} screws, all fields within 1e-12 relative, "
        f"reload compares equal",
    )
