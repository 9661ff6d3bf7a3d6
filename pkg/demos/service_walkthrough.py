"""Drive the planning service through one complete editing session.

The service speaks single-line JSON messages; the same dialogue works
over the TCP transport, the HTTP endpoint, or in process as done here.
This script prints each request and reply as wire bytes so the protocol
is visible, and pauses to explain the interesting replies: the revision
counter, the stale-edit guard, and why a failed request never moves the
session state.

Run:  python3 demos/service_walkthrough.py
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from fluoroplan.service import PlanningService, canonical_json


def main() -> int:
    # The demo builds its case with the library, but talks to the service
    # purely through messages afterwards, exactly like a remote client.
    sys.path.insert(0, str(Path(__file__).resolve().parent))
    from plan_worked_case import build_case

    case_dir = Path(tempfile.mkdtemp(prefix="fluoroplan-session-"))
    build_case(case_dir)
    service = PlanningService(case_root=case_dir)
    req = 0

    def send(note: str, **msg):
        nonlocal req
        req += 1
        msg = {"req": req, **msg}
        reply = service.handle_message(msg)
        print(f"\n# {note}")
        print(f"-> {canonical_json(msg)}")
        print(f"<- {canonical_json(reply)}")
        return reply

    reply = send("open the case; the reply issues a session id",
                 type="open_case", path="case.json")
    sid = reply["session"]

    send("click inside the L4 box in the AP view",
         type="select_vertebra", session=sid, view="AP", point_px=[140.0, 80.0])

    reply = send("drop a left screw into L4; note projections for both views",
                 type="init_screw", session=sid, label="L4", side="L")
    revision = reply["result"]["revision"]

    send(f"drag the screw in AP, guarded by expected_revision={revision}",
         type="edit", session=sid, screw_id="L4-L",
         op={"kind": "translate", "view": "AP", "du_px": 5.0, "dv_px": -3.0},
         expected_revision=revision)

    send("replaying the same guard now fails: the session moved on",
         type="edit", session=sid, screw_id="L4-L",
         op={"kind": "translate", "view": "AP", "du_px": 5.0, "dv_px": -3.0},
         expected_revision=revision)

    send("errors are replies, not crashes, and change nothing",
         type="edit", session=sid, screw_id="L9-X",
         op={"kind": "resize", "new_radius_mm": 2.0})

    send("the state snapshot: one screw, revision 3",
         type="get_state", session=sid)

    send("write the plan file next to the case",
         type="export_plan", session=sid, path="plan.json")

    print(f"\nexported plan: {case_dir / 'plan.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
