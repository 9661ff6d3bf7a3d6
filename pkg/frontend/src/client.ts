/**
 * Session client: the only writer of client-side planning state.
 *
 * Every message goes through one promise chain so edits are sequenced:
 * the revision guard for a message is read only after the previous
 * reply has been applied. Successful replies update the snapshot (the
 * single source every pane renders from); error replies change nothing
 * except that a stale revision guard triggers a silent state refetch
 * and one retry of the same operation, which is what lets an in-flight
 * drag survive a concurrent change.
 */

import type {
  CaseSummary,
  EditOp,
  ErrorBody,
  Reply,
  ScrewResult,
  StateSnapshot,
  ViewName,
} from "./protocol.js";

export type Transport = (msg: Record<string, unknown>) => Promise<Reply>;

/** POST bridge: one request object in, one reply object out. */
export function httpTransport(base: string = ""): Transport {
  return async (msg) => {
    const response = await fetch(`${base}/api/message`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(msg),
    });
    return (await response.json()) as Reply;
  };
}

export class ProtocolError extends Error {
  constructor(public body: ErrorBody) {
    super(body.message);
  }
}

export class SessionClient {
  snapshot: StateSnapshot | null = null;
  session: string | null = null;
  /** Fired after every snapshot change, i.e. after applied replies only. */
  onChange: (() => void) | null = null;
  /** Fired for surfaced (non-silent) error replies; feeds the toast. */
  onErrorReply: ((error: ErrorBody) => void) | null = null;

  private req = 0;
  private chain: Promise<unknown> = Promise.resolve();

  constructor(private transport: Transport) {}

  /** Serialize all sends; replies apply in request order. */
  private run<T>(fn: () => Promise<T>): Promise<T> {
    const next = this.chain.then(fn, fn);
    this.chain = next.catch(() => undefined);
    return next;
  }

  private async send(msg: Record<string, unknown>): Promise<Reply> {
    const withReq = { req: ++this.req, ...msg };
    if (this.session !== null && !("session" in withReq)) {
      (withReq as Record<string, unknown>).session = this.session;
    }
    return this.transport(withReq);
  }

  private surface(error: ErrorBody): never {
    if (this.onErrorReply !== null) {
      this.onErrorReply(error);
    }
    throw new ProtocolError(error);
  }

  private changed(): void {
    if (this.onChange !== null) {
      this.onChange();
    }
  }

  openCase(path: string): Promise<StateSnapshot> {
    return this.run(async () => {
      const reply = await this.send({ type: "open_case", path });
      if (!reply.ok) {
        this.surface(reply.error!);
      }
      const summary = reply.result as unknown as CaseSummary;
      this.session = summary.session;
      this.snapshot = { ...summary, screws: [], selection: { ap: null, lp: null } };
      this.changed();
      return this.snapshot;
    });
  }

  refetch(): Promise<StateSnapshot> {
    return this.run(() => this.fetchState());
  }

  private async fetchState(): Promise<StateSnapshot> {
    const reply = await this.send({ type: "get_state" });
    if (!reply.ok) {
      this.surface(reply.error!);
    }
    this.snapshot = reply.result as unknown as StateSnapshot;
    this.changed();
    return this.snapshot;
  }

  selectVertebra(view: ViewName, pointPx: [number, number]): Promise<string | null> {
    return this.run(async () => {
      const reply = await this.send({
        type: "select_vertebra",
        view,
        point_px: pointPx,
      });
      if (!reply.ok) {
        if (reply.error!.code === "no_hit") {
          return null; // background click on bone-free film; nothing selected
        }
        this.surface(reply.error!);
      }
      const result = reply.result as { label: string | null; revision: number };
      if (this.snapshot !== null) {
        const key = view === "AP" ? "ap" : "lp";
        this.snapshot.selection[key] = { point_px: pointPx, label: result.label };
        this.snapshot.revision = result.revision;
        this.changed();
      }
      return result.label;
    });
  }

  initScrew(label: string, side: "L" | "R"): Promise<ScrewResult> {
    return this.run(async () => {
      const reply = await this.send({
        type: "init_screw",
        label,
        side,
        expected_revision: this.snapshot?.revision,
      });
      if (!reply.ok) {
        this.surface(reply.error!);
      }
      const result = reply.result as unknown as ScrewResult;
      this.applyScrewResult(result);
      return result;
    });
  }

  /**
   * Send one edit with the current revision guard.
   *
   * A stale_revision reply is handled silently: refetch the state, then
   * retry the identical operation once under the fresh revision. Any
   * other error is surfaced and leaves the snapshot as it was.
   */
  sendEdit(screwId: string, op: EditOp): Promise<ScrewResult> {
    return this.run(async () => {
      let reply = await this.send(this.editMessage(screwId, op));
      if (!reply.ok && reply.error!.code === "stale_revision") {
        await this.fetchState();
        reply = await this.send(this.editMessage(screwId, op));
      }
      if (!reply.ok) {
        this.surface(reply.error!);
      }
      const result = reply.result as unknown as ScrewResult;
      this.applyScrewResult(result);
      return result;
    });
  }

  private editMessage(screwId: string, op: EditOp): Record<string, unknown> {
    return {
      type: "edit",
      screw_id: screwId,
      op,
      expected_revision: this.snapshot?.revision,
    };
  }

  deleteScrew(screwId: string): Promise<void> {
    return this.run(async () => {
      const reply = await this.send({
        type: "delete_screw",
        screw_id: screwId,
        expected_revision: this.snapshot?.revision,
      });
      if (!reply.ok) {
        this.surface(reply.error!);
      }
      const result = reply.result as { revision: number };
      if (this.snapshot !== null) {
        this.snapshot.screws = this.snapshot.screws.filter(
          (s) => s.screw_id !== screwId,
        );
        this.snapshot.revision = result.revision;
        this.changed();
      }
    });
  }

  exportPlan(path: string): Promise<string> {
    return this.run(async () => {
      const reply = await this.send({ type: "export_plan", path });
      if (!reply.ok) {
        this.surface(reply.error!);
      }
      return (reply.result as { path: string }).path;
    });
  }

  private applyScrewResult(result: ScrewResult): void {
    if (this.snapshot === null) {
      return;
    }
    const entry = {
      screw_id: result.screw_id,
      screw: result.screw,
      projections: result.projections,
      spec: result.spec,
      warnings: result.warnings,
    };
    const index = this.snapshot.screws.findIndex(
      (s) => s.screw_id === result.screw_id,
    );
    if (index >= 0) {
      this.snapshot.screws[index] = entry;
    } else {
      this.snapshot.screws.push(entry);
    }
    this.snapshot.revision = result.revision;
    this.changed();
  }
}
