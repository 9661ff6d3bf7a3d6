/**
 * Application wiring: DOM, panes, toolbar, and the event plumbing
 * between the gesture engine, the session client, and the painter.
 * Policy lives in the imported modules; this file only connects them.
 */

import { httpTransport, ProtocolError, SessionClient } from "./client.js";
import { GestureEngine } from "./gestures.js";
import type { PointerEventRecord } from "./gestures.js";
import { renderOverlay } from "./overlay.js";
import { paintPane } from "./painter.js";
import type { PaneKey } from "./protocol.js";
import { specText } from "./protocol.js";
import { createViewport, setZoom } from "./viewport.js";

const client = new SessionClient(httpTransport());
const viewport = createViewport();
const engine = new GestureEngine();
const images: { ap: ImageBitmap | null; lp: ImageBitmap | null } = {
  ap: null,
  lp: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const canvases: Record<PaneKey, HTMLCanvasElement> = {
  ap: el<HTMLCanvasElement>("pane-ap"),
  lp: el<HTMLCanvasElement>("pane-lp"),
};

function toast(text: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = text;
  box.classList.add("visible");
  window.setTimeout(() => box.classList.remove("visible"), 4000);
}

function render(): void {
  const commands = renderOverlay(viewport, client.snapshot);
  for (const paneKey of ["ap", "lp"] as PaneKey[]) {
    const ctx = canvases[paneKey].getContext("2d");
    if (ctx !== null) {
      paintPane(ctx, paneKey, viewport.panes[paneKey], images[paneKey], commands);
    }
  }
  renderSidePanel();
}

function renderSidePanel(): void {
  const labels = el<HTMLUListElement>("labels");
  labels.replaceChildren();
  const screws = el<HTMLUListElement>("screws");
  screws.replaceChildren();
  const snapshot = client.snapshot;
  if (snapshot === null) {
    return;
  }
  for (const label of snapshot.labels) {
    const item = document.createElement("li");
    item.textContent = label;
    item.className = "labeled";
    labels.appendChild(item);
  }
  for (const screw of snapshot.screws) {
    const item = document.createElement("li");
    item.textContent = specText(screw);
    if (screw.warnings.length > 0) {
      item.title = screw.warnings.join("\n");
      item.classList.add("warned");
    }
    if (screw.screw_id === viewport.selectedScrewId) {
      item.classList.add("selected");
    }
    item.addEventListener("click", () => {
      viewport.selectedScrewId = screw.screw_id;
      render();
    });
    screws.appendChild(item);
  }
  el<HTMLSpanElement>("revision").textContent = `rev ${snapshot.revision}`;
}

async function loadImages(): Promise<void> {
  if (client.session === null) {
    return;
  }
  for (const paneKey of ["ap", "lp"] as PaneKey[]) {
    const response = await fetch(`/api/image/${client.session}/${paneKey}`);
    if (!response.ok) {
      continue;
    }
    images[paneKey] = await createImageBitmap(await response.blob());
    viewport.panes[paneKey].imageLoaded = true;
  }
  render();
}

function record(
  paneKey: PaneKey,
  kind: PointerEventRecord["kind"],
  event: MouseEvent,
  deltaY?: number,
): PointerEventRecord {
  const rect = canvases[paneKey].getBoundingClientRect();
  return {
    kind,
    pane: paneKey,
    x: event.clientX - rect.left,
    y: event.clientY - rect.top,
    t: event.timeStamp,
    deltaY,
  };
}

function applyEffects(effects: ReturnType<GestureEngine["handle"]>): void {
  for (const effect of effects) {
    switch (effect.kind) {
      case "edit":
        client.sendEdit(effect.screwId, effect.op).catch(swallowProtocolError);
        break;
      case "select_vertebra":
        client
          .selectVertebra(effect.view, effect.pointPx)
          .catch(swallowProtocolError);
        break;
      case "select_screw":
        viewport.selectedScrewId = effect.screwId;
        render();
        break;
      case "pan": {
        const pane = viewport.panes[effect.pane];
        pane.panX += effect.dx;
        pane.panY += effect.dy;
        render();
        break;
      }
      case "hover":
        canvases[effect.pane].style.cursor =
          effect.region === "none" ? "crosshair" : "pointer";
        break;
    }
  }
}

function swallowProtocolError(error: unknown): void {
  if (!(error instanceof ProtocolError)) {
    throw error;
  }
  // Already surfaced through onErrorReply; the chain must not die.
}

for (const paneKey of ["ap", "lp"] as PaneKey[]) {
  const canvas = canvases[paneKey];
  canvas.addEventListener("pointerdown", (event) => {
    canvas.setPointerCapture(event.pointerId);
    applyEffects(engine.handle(record(paneKey, "down", event), viewport, client.snapshot));
  });
  canvas.addEventListener("pointermove", (event) => {
    applyEffects(engine.handle(record(paneKey, "move", event), viewport, client.snapshot));
  });
  canvas.addEventListener("pointerup", (event) => {
    applyEffects(engine.handle(record(paneKey, "up", event), viewport, client.snapshot));
  });
  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    if (event.ctrlKey) {
      // Zoom about the pointer; a viewing aid, never a message.
      const pane = viewport.panes[paneKey];
      const factor = event.deltaY < 0 ? 1.25 : 0.8;
      const rect = canvas.getBoundingClientRect();
      const px = event.clientX - rect.left;
      const py = event.clientY - rect.top;
      const zoomed = setZoom(pane, pane.zoom * factor);
      zoomed.panX = px - (px - pane.panX) * factor;
      zoomed.panY = py - (py - pane.panY) * factor;
      viewport.panes[paneKey] = zoomed;
      render();
      return;
    }
    applyEffects(
      engine.handle(record(paneKey, "wheel", event, event.deltaY), viewport, client.snapshot),
    );
  });
  const rotation = el<HTMLInputElement>(`rotate-${paneKey}`);
  rotation.addEventListener("input", () => {
    viewport.panes[paneKey].rotationDeg = Number(rotation.value);
    render();
  });
}

el<HTMLButtonElement>("open").addEventListener("click", () => {
  const path = el<HTMLInputElement>("case-path").value.trim();
  if (path === "") {
    toast("enter a case path first");
    return;
  }
  client
    .openCase(path)
    .then(() => loadImages())
    .catch(swallowProtocolError);
});

for (const side of ["L", "R"] as const) {
  el<HTMLButtonElement>(`init-${side.toLowerCase()}`).addEventListener(
    "click",
    () => {
      const label = el<HTMLSelectElement>("label-pick").value;
      client
        .initScrew(label, side)
        .then((result) => {
          viewport.selectedScrewId = result.screw_id;
          render();
        })
        .catch(swallowProtocolError);
    },
  );
}

el<HTMLButtonElement>("delete").addEventListener("click", () => {
  if (viewport.selectedScrewId === null) {
    toast("select a screw first");
    return;
  }
  client.deleteScrew(viewport.selectedScrewId).catch(swallowProtocolError);
  viewport.selectedScrewId = null;
});

el<HTMLButtonElement>("export").addEventListener("click", () => {
  client
    .exportPlan("plan.json")
    .then((path) => toast(`plan written to ${path}`))
    .catch(swallowProtocolError);
});

client.onChange = () => {
  const snapshot = client.snapshot;
  if (snapshot !== null) {
    const pick = el<HTMLSelectElement>("label-pick");
    if (pick.options.length !== snapshot.labels.length) {
      pick.replaceChildren();
      for (const label of snapshot.labels) {
        const option = document.createElement("option");
        option.value = label;
        option.textContent = label;
        pick.appendChild(option);
      }
    }
    if (
      viewport.selectedScrewId !== null &&
      !snapshot.screws.some((s) => s.screw_id === viewport.selectedScrewId)
    ) {
      viewport.selectedScrewId = null;
    }
  }
  render();
};

client.onErrorReply = (error) => toast(`${error.code}: ${error.message}`);

render();
