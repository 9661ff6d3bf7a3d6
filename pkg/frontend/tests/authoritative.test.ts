/**
 * Server-authoritative rendering checks: panes draw only what the last
 * reply said. A body drag in one pane must move the opposite pane's
 * rendered endpoints by exactly the vertical delta the reply reports,
 * and nothing may move before that reply has been applied.
 */

import { expect, test } from "vitest";

import { SessionClient, type Transport } from "../src/client";
import { GestureEngine, type PointerEventRecord } from "../src/gestures";
import { findCapsule, renderOverlay, type CapsuleCommand } from "../src/overlay";
import type { ScrewResult } from "../src/protocol";
import { createViewport, toScreen, type ViewportState } from "../src/viewport";
import { demoSnapshot, FakeService } from "./helpers";

async function makeClient(service: FakeService): Promise<SessionClient> {
  const client = new SessionClient(service.transport());
  client.session = "s1";
  await client.refetch();
  return client;
}

function lpViewport(): ViewportState {
  const viewport = createViewport();
  viewport.panes.lp = { ...viewport.panes.lp, zoom: 2, panX: 20, panY: 10 };
  return viewport;
}

function capsule(
  viewport: ViewportState,
  client: SessionClient,
  pane: "ap" | "lp",
): CapsuleCommand {
  const found = findCapsule(renderOverlay(viewport, client.snapshot), pane, "L4-L");
  expect(found).not.toBeNull();
  return found!;
}

/** Replay a pointer log through engine and client; collect edit replies. */
async function drag(
  log: PointerEventRecord[],
  viewport: ViewportState,
  client: SessionClient,
): Promise<ScrewResult[]> {
  const engine = new GestureEngine();
  const replies: ScrewResult[] = [];
  for (const event of log) {
    for (const effect of engine.handle(event, viewport, client.snapshot)) {
      if (effect.kind === "edit") {
        replies.push(await client.sendEdit(effect.screwId, effect.op));
      }
    }
  }
  return replies;
}

test("AP body drag moves rendered LP endpoints by exactly the reply's dv", async () => {
  const service = new FakeService(demoSnapshot());
  const client = await makeClient(service);
  const viewport = lpViewport();
  const before = capsule(viewport, client, "lp");

  const replies = await drag(
    [
      { kind: "down", pane: "ap", x: 120, y: 80, t: 0 },
      { kind: "move", pane: "ap", x: 125, y: 73, t: 20 },
      { kind: "up", pane: "ap", x: 125, y: 73, t: 25 },
    ],
    viewport,
    client,
  );
  expect(replies).toHaveLength(1);

  // The authoritative delta is whatever the reply carries.
  const reply = replies[0];
  const dvReply = reply.projections.lp.target_px[1] - 58;
  expect(dvReply).toBe(-7);
  expect(reply.projections.lp.entry_px[1] - 102).toBe(dvReply);

  const after = capsule(viewport, client, "lp");
  const zoom = viewport.panes.lp.zoom;
  expect(after.target.y - before.target.y).toBe(zoom * dvReply);
  expect(after.entry.y - before.entry.y).toBe(zoom * dvReply);
  expect(after.target.x).toBe(before.target.x); // hidden axis untouched
  expect(after.entry.x).toBe(before.entry.x);

  // Both panes are verbatim projections of the reply, nothing local.
  expect(after.target).toEqual(
    toScreen(viewport.panes.lp, ...reply.projections.lp.target_px),
  );
  expect(after.entry).toEqual(
    toScreen(viewport.panes.lp, ...reply.projections.lp.entry_px),
  );
  const ap = capsule(viewport, client, "ap");
  expect(ap.target).toEqual(
    toScreen(viewport.panes.ap, ...reply.projections.ap.target_px),
  );
  expect(ap.entry).toEqual(
    toScreen(viewport.panes.ap, ...reply.projections.ap.entry_px),
  );

  const editMsg = service.log.find((m) => m.type === "edit")!;
  expect(editMsg.expected_revision).toBe(2);
  expect(client.snapshot!.revision).toBe(3);
});

test("a coalesced drag accumulates to the full reply delta", async () => {
  const service = new FakeService(demoSnapshot());
  const client = await makeClient(service);
  const viewport = lpViewport();
  const before = capsule(viewport, client, "lp");

  const replies = await drag(
    [
      { kind: "down", pane: "ap", x: 120, y: 80, t: 1000 },
      { kind: "move", pane: "ap", x: 124, y: 78, t: 1005 },
      { kind: "move", pane: "ap", x: 127, y: 77, t: 1010 },
      { kind: "move", pane: "ap", x: 130, y: 76, t: 1025 },
      { kind: "up", pane: "ap", x: 132, y: 75, t: 1030 },
    ],
    viewport,
    client,
  );
  expect(replies).toHaveLength(3);

  // Pointer went (+12, -5); the replies together must say the same.
  const last = replies[2];
  expect(last.projections.ap.target_px).toEqual([146, 53]);
  expect(last.projections.lp.target_px).toEqual([206, 53]);

  const after = capsule(viewport, client, "lp");
  expect(after.target.y - before.target.y).toBe(2 * -5);
  expect(after.target.x).toBe(before.target.x);
  expect(client.snapshot!.revision).toBe(5);
});

test("nothing is rendered locally before the reply applies", async () => {
  const service = new FakeService(demoSnapshot());
  let release = (): void => undefined;
  const gate = new Promise<void>((resolve) => {
    release = resolve;
  });
  const inner = service.transport();
  const gated: Transport = async (msg) => {
    if (msg.type === "edit") {
      await gate;
    }
    return inner(msg);
  };
  const client = new SessionClient(gated);
  client.session = "s1";
  await client.refetch();

  const viewport = lpViewport();
  const before = capsule(viewport, client, "lp");
  const pending = client.sendEdit("L4-L", {
    kind: "translate",
    view: "AP",
    du_px: 3,
    dv_px: -4,
  });
  await Promise.resolve();
  await Promise.resolve();
  // Edit is in flight but unanswered: the scene must not have moved.
  expect(capsule(viewport, client, "lp")).toEqual(before);

  release();
  await pending;
  const after = capsule(viewport, client, "lp");
  expect(after.target.y - before.target.y).toBe(2 * -4);
  expect(after.target.x).toBe(before.target.x);
});

test("every applied reply fires one change notification", async () => {
  const service = new FakeService(demoSnapshot());
  const client = await makeClient(service);
  let fired = 0;
  client.onChange = () => {
    fired += 1;
  };
  await drag(
    [
      { kind: "down", pane: "ap", x: 120, y: 80, t: 1000 },
      { kind: "move", pane: "ap", x: 124, y: 78, t: 1005 },
      { kind: "move", pane: "ap", x: 130, y: 76, t: 1025 },
      { kind: "up", pane: "ap", x: 132, y: 75, t: 1030 },
    ],
    lpViewport(),
    client,
  );
  expect(fired).toBe(3);
});
