/**
 * Canvas interpreter for the overlay display list.
 *
 * Pure drawing: everything to show has already been decided and placed
 * by renderOverlay. Pane rotation is applied here as a context
 * transform about the canvas center, keeping it a pure viewing aid.
 */

import type { DrawCommand } from "./overlay.js";
import type { PaneKey } from "./protocol.js";
import type { PaneState } from "./viewport.js";

const BODY_FILL = "rgba(255, 188, 64, 0.45)";
const BODY_FILL_SELECTED = "rgba(80, 200, 255, 0.55)";
const HANDLE_STROKE = "rgba(255, 255, 255, 0.9)";
const HIGHLIGHT_GREEN = "rgba(64, 220, 96, 0.9)";
const HIGHLIGHT_GREEN_FILL = "rgba(64, 220, 96, 0.12)";
const POINT_BLUE = "rgb(64, 128, 255)";
const TEXT_COLOR = "rgb(235, 235, 235)";
const TEXT_BACK = "rgba(20, 20, 20, 0.7)";

export function paintPane(
  ctx: CanvasRenderingContext2D,
  paneKey: PaneKey,
  pane: PaneState,
  image: ImageBitmap | null,
  commands: DrawCommand[],
): void {
  const { width, height } = ctx.canvas;
  ctx.save();
  ctx.clearRect(0, 0, width, height);
  if (pane.rotationDeg !== 0) {
    ctx.translate(width / 2, height / 2);
    ctx.rotate((pane.rotationDeg * Math.PI) / 180);
    ctx.translate(-width / 2, -height / 2);
  }
  if (image !== null) {
    ctx.imageSmoothingEnabled = pane.zoom < 1;
    ctx.drawImage(
      image,
      pane.panX,
      pane.panY,
      image.width * pane.zoom,
      image.height * pane.zoom,
    );
  }
  for (const command of commands) {
    if (command.pane !== paneKey) {
      continue;
    }
    switch (command.kind) {
      case "label_highlight": {
        ctx.fillStyle = HIGHLIGHT_GREEN_FILL;
        ctx.fillRect(command.x, command.y, command.width, command.height);
        ctx.strokeStyle = HIGHLIGHT_GREEN;
        ctx.lineWidth = 1.5;
        ctx.strokeRect(command.x, command.y, command.width, command.height);
        ctx.fillStyle = HIGHLIGHT_GREEN;
        ctx.font = "12px sans-serif";
        ctx.fillText(command.label, command.x + 4, command.y + 14);
        break;
      }
      case "capsule": {
        ctx.strokeStyle = command.selected ? BODY_FILL_SELECTED : BODY_FILL;
        ctx.lineWidth = Math.max(1, command.halfWidth * 2);
        ctx.lineCap = "round";
        ctx.beginPath();
        ctx.moveTo(command.target.x, command.target.y);
        ctx.lineTo(command.entry.x, command.entry.y);
        ctx.stroke();
        ctx.strokeStyle = HANDLE_STROKE;
        ctx.lineWidth = command.selected ? 2 : 1;
        for (const end of [command.target, command.entry]) {
          ctx.beginPath();
          ctx.arc(end.x, end.y, command.handleRadius, 0, 2 * Math.PI);
          ctx.stroke();
        }
        break;
      }
      case "selected_point": {
        ctx.fillStyle = POINT_BLUE;
        ctx.beginPath();
        ctx.arc(command.x, command.y, 4, 0, 2 * Math.PI);
        ctx.fill();
        if (command.label !== null) {
          ctx.font = "12px sans-serif";
          ctx.fillText(command.label, command.x + 7, command.y - 7);
        }
        break;
      }
      case "spec_text": {
        ctx.font = "12px sans-serif";
        const metrics = ctx.measureText(command.text);
        ctx.fillStyle = TEXT_BACK;
        ctx.fillRect(command.x - 2, command.y - 12, metrics.width + 6, 16);
        ctx.fillStyle = TEXT_COLOR;
        ctx.fillText(command.text, command.x, command.y);
        break;
      }
    }
  }
  ctx.restore();
}
