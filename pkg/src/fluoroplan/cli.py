"""Command-line front end: batch planning, phantom generation, plan scoring,
and the network service.

Exit codes: 0 success, 2 validation error (including bad arguments), 3 IO
error, 4 degenerate geometry.
"""

from __future__ import annotations

import argparse
import sys
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .anatomy import resolve_ivdl
from .caseio import (
    CaseFile,
    PlanDocument,
    PlannedScrew,
    load_case,
    load_plan,
    save_plan,
)
from .errors import (
    DegenerateGeometry,
    FluoroplanError,
    IoError,
    UnknownLabel,
    ValidationError,
)
from .phantom import PhantomSpec, evaluate_plan, generate_phantom, load_truth
from .planning import ScrewSpec, compute_screw_spec, init_screw, validate_containment
from .server import HttpApiServer, NdjsonServer
from .service import PlanningService


def _exit_code(e: FluoroplanError) -> int:
    if isinstance(e, DegenerateGeometry):
        return 4
    if isinstance(e, IoError):
        return 3
    return 2


def _catalog_text(value: float | None) -> str:
    return "none" if value is None else f"{value:g} mm"


def _spec_line(screw_id: str, spec: ScrewSpec) -> str:
    return (
        f"{screw_id}: length {spec.length_mm:.2f} mm "
        f"(catalog {_catalog_text(spec.catalog_length_mm)}), "
        f"diameter {spec.diameter_mm:.2f} mm "
        f"(catalog {_catalog_text(spec.catalog_diameter_mm)})"
    )


def _plan_one(case: CaseFile, label: str, side: str) -> tuple[PlannedScrew, ScrewSpec]:
    pair = case.find_pair(label)
    if pair is None:
        raise UnknownLabel(
            f"no paired vertebra labeled {label!r} in {case.path}"
        )
    ivdl_mm, warnings = resolve_ivdl(
        list(case.pairs), label, case.ivdl, case.ap_calibration.mm_per_px_v
    )
    screw = init_screw(
        pair, side, ivdl_mm, case.padding, case.ap_calibration, case.lp_calibration
    )
    spec, catalog_warnings = compute_screw_spec(screw, case.catalog, strict=False)
    warnings = list(warnings) + catalog_warnings
    warnings += validate_containment(
        screw, pair, ivdl_mm, case.ap_calibration, case.lp_calibration
    )
    planned = PlannedScrew.from_screw(
        screw, spec, case.ap_calibration, case.lp_calibration, warnings
    )
    return planned, spec


def cmd_plan(args: argparse.Namespace) -> int:
    if len(args.vertebra) != len(args.side):
        raise ValidationError(
            f"each --vertebra needs a matching --side "
            f"(got {len(args.vertebra)} and {len(args.side)})"
        )
    case = load_case(args.case)
    planned = []
    for label, side in zip(args.vertebra, args.side):
        entry, spec = _plan_one(case, label, side)
        planned.append(entry)
        print(_spec_line(entry.screw.id, spec))
        for warning in entry.warnings:
            print(f"  warning: {warning}")
    if args.out:
        doc = PlanDocument(
            case_ref=str(case.path),
            ap_calibration=case.ap_calibration,
            lp_calibration=case.lp_calibration,
            discrepancy=case.discrepancy,
            screws=tuple(planned),
            revision=0,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        print(f"wrote {save_plan(doc, args.out)}")
    return 0


def cmd_phantom(args: argparse.Namespace) -> int:
    spec = PhantomSpec(levels=args.levels, seed=args.seed)
    case, corridors = generate_phantom(spec, args.out)
    labels = ", ".join(p.label for p in case.pairs)
    print(
        f"wrote {Path(args.out).resolve()}: ap.png, lp.png, case.json, "
        f"truth.json ({labels}; {len(corridors)} corridors)"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    plan = load_plan(args.plan)
    truth = load_truth(args.truth)
    results = evaluate_plan(plan, truth)
    print(f"{'screw':<8} {'entry_err_mm':>12} {'target_err_mm':>13} {'contained':>9}")
    for r in results:
        verdict = "yes" if r.contained else "NO"
        print(
            f"{r.screw_id:<8} {r.entry_error_mm:>12.3f} "
            f"{r.target_error_mm:>13.3f} {verdict:>9}"
        )
    contained = sum(1 for r in results if r.contained)
    print(f"contained: {contained}/{len(results)}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    service = PlanningService(case_root=args.case_root)
    http_server = HttpApiServer((args.host, args.port), service, static_dir=args.static)
    host, port = http_server.server_address[:2]
    root = service.case_root if service.case_root is not None else "unrestricted"
    print(f"serving HTTP on http://{host}:{port}/ (case root: {root})", flush=True)
    ndjson_server = None
    if args.ndjson_port is not None:
        ndjson_server = NdjsonServer((args.host, args.ndjson_port), service)
        nhost, nport = ndjson_server.server_address[:2]
        threading.Thread(target=ndjson_server.serve_forever, daemon=True).start()
        print(f"serving NDJSON on {nhost}:{nport}", flush=True)
    try:
        http_server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        http_server.server_close()
        if ndjson_server is not None:
            ndjson_server.shutdown()
            ndjson_server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluoroplan",
        description="Pedicle-screw planning on biplanar fluoroscopic images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "plan", help="initialize screws for labeled vertebrae and print sizing"
    )
    p.add_argument("--case", required=True, help="case file (JSON)")
    p.add_argument(
        "--vertebra",
        action="append",
        required=True,
        metavar="LABEL",
        help="vertebra label; repeat together with --side for several screws",
    )
    p.add_argument(
        "--side",
        action="append",
        required=True,
        choices=("L", "R"),
        help="pedicle side for the matching --vertebra",
    )
    p.add_argument("--out", help="also write the plan document to this path")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("phantom", help="emit a synthetic case with ground truth")
    p.add_argument("--levels", type=int, required=True, help="vertebra count, 1..3")
    p.add_argument("--seed", type=int, required=True, help="image-noise seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("evaluate", help="score a plan against phantom ground truth")
    p.add_argument("--plan", required=True, help="plan document (JSON)")
    p.add_argument("--truth", required=True, help="truth file (JSON)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the planning session service")
    p.add_argument("--port", type=int, required=True, help="HTTP port (0 picks one)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--case-root",
        help="confine case/plan paths to this directory "
        "(default: FLUOROPLAN_CASE_ROOT)",
    )
    p.add_argument("--static", help="serve this directory as the web frontend")
    p.add_argument(
        "--ndjson-port",
        type=int,
        help="also speak newline-delimited JSON over TCP on this port",
    )
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FluoroplanError as e:
        print(f"error[{e.code}]: {e.message}", file=sys.stderr)
        return _exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
