/** Canvas renderer: to-scale top-down plan view with a z side-gauge.
 *
 * Draw-call only; all decisions (colors, labels, what exists) come from the
 * view model. Works against any CanvasRenderingContext2D-compatible object,
 * which is what the headless tests exploit.
 */

import { ViewModel } from "./model";
import type { Pose } from "./types";

export const COLORS = {
  background: "#1b1e24",
  floor: "#262b33",
  staticFill: "#4a5261",
  doorClosed: "#8a4b4b",
  doorOpen: "#4b8a5d",
  objectFill: "#7f9db8",
  objectLimited: "#c0392b",
  selection: "#f1c40f",
  signifier: "#ffffff",
  robot: "#58d68d",
  chipBg: "#2c313a",
  text: "#e8e8e8",
};

export interface Ctx2D {
  canvas?: { width: number; height: number };
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
  scale(x: number, y: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export interface Viewport {
  width: number;
  height: number;
  scale: number;   // pixels per meter
  offsetX: number; // world origin in pixels
  offsetY: number;
}

const GAUGE_WIDTH = 46;

export function fitViewport(world: { bounds: [number, number, number, number] },
                            width: number, height: number): Viewport {
  const [x0, y0, x1, y1] = world.bounds;
  const usable = width - GAUGE_WIDTH - 16;
  const scale = Math.min(usable / (x1 - x0), (height - 16) / (y1 - y0));
  return { width, height, scale, offsetX: 8 - x0 * scale,
           offsetY: height - 8 + y0 * scale };
}

export function toScreen(view: Viewport, x: number, y: number): [number, number] {
  // world y grows up; canvas y grows down
  return [view.offsetX + x * view.scale, view.offsetY - y * view.scale];
}

export function toWorld(view: Viewport, px: number, py: number): [number, number] {
  return [(px - view.offsetX) / view.scale, (view.offsetY - py) / view.scale];
}

function drawBox(ctx: Ctx2D, view: Viewport, cx: number, cy: number,
                 w: number, d: number, yaw: number): void {
  const [sx, sy] = toScreen(view, cx, cy);
  ctx.save();
  ctx.translate(sx, sy);
  ctx.rotate(-yaw);
  ctx.fillRect(-w * view.scale / 2, -d * view.scale / 2,
               w * view.scale, d * view.scale);
  ctx.restore();
}

export function renderScene(ctx: Ctx2D, model: ViewModel, view: Viewport,
                            at?: number): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, view.width, view.height);
  const world = model.world;
  if (!world) return;

  const [x0, y0, x1, y1] = world.bounds;
  const [fx, fy] = toScreen(view, x0, y1);
  ctx.fillStyle = COLORS.floor;
  ctx.fillRect(fx, fy, (x1 - x0) * view.scale, (y1 - y0) * view.scale);

  for (const s of world.statics) {
    ctx.fillStyle = COLORS.staticFill;
    ctx.globalAlpha = s.blocks_navigation ? 1.0 : 0.55;
    drawBox(ctx, view, s.center[0], s.center[1], s.size[0], s.size[1], s.yaw);
    ctx.globalAlpha = 1.0;
  }
  for (const door of world.doors) {
    ctx.fillStyle = door.open ? COLORS.doorOpen : COLORS.doorClosed;
    drawBox(ctx, view, door.span.center[0], door.span.center[1],
            door.span.size[0], door.span.size[1], door.span.yaw);
  }

  const previewPoses = model.timeline && !model.timeline.done
    ? model.timelinePoses(at) : new Map<string, Pose>();

  for (const [oid, record] of Object.entries(world.objects)) {
    const live = model.livePoses.get(oid) ?? previewPoses.get(oid);
    const pose = live ?? (model.drag?.objectId === oid
      ? model.drag.pose : record.pose);
    const limited = model.displayColor(oid) === "Limited";
    ctx.fillStyle = limited ? COLORS.objectLimited : COLORS.objectFill;
    const [w, d] = footprintOf(model, record.class);
    drawBox(ctx, view, pose.x, pose.y, w, d, pose.yaw);
    const [sx, sy] = toScreen(view, pose.x, pose.y);
    ctx.fillStyle = COLORS.text;
    ctx.font = "10px sans-serif";
    ctx.fillText(record.class, sx + 6, sy - 6);
    if (model.selection.includes(oid)) {
      ctx.strokeStyle = COLORS.selection;
      ctx.lineWidth = 2;
      ctx.strokeRect(sx - 12, sy - 12, 24, 24);
    }
  }

  for (const [rid, robot] of Object.entries(world.robots)) {
    const pose = model.livePoses.get(rid) ?? previewPoses.get(rid)
      ?? robot.state.base_pose;
    const [sx, sy] = toScreen(view, pose.x, pose.y);
    ctx.fillStyle = COLORS.robot;
    ctx.beginPath();
    ctx.arc(sx, sy, robot.spec.base_footprint_radius * view.scale, 0,
            Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = COLORS.text;
    ctx.fillText(rid, sx + 4, sy - 4);
  }

  // hover signifier: the white circle marking an actionable object
  if (model.hover && world.objects[model.hover]) {
    const pose = world.objects[model.hover].pose;
    const [sx, sy] = toScreen(view, pose.x, pose.y);
    ctx.strokeStyle = COLORS.signifier;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(sx, sy, 14, 0, Math.PI * 2);
    ctx.stroke();
  }

  drawGauge(ctx, model, view);
  drawChip(ctx, model, view);
  drawMenu(ctx, model);
  drawBanner(ctx, model, view);
}

/** Height side-gauge: z of the selected or dragged object. */
function drawGauge(ctx: Ctx2D, model: ViewModel, view: Viewport): void {
  const world = model.world;
  if (!world) return;
  const gx = view.width - GAUGE_WIDTH;
  ctx.fillStyle = COLORS.floor;
  ctx.fillRect(gx, 8, GAUGE_WIDTH - 8, view.height - 16);
  const targetId = model.drag?.objectId ?? model.selection[0];
  if (!targetId || !world.objects[targetId]) return;
  const z = model.drag?.pose.z ?? world.objects[targetId].pose.z;
  const zMax = 2.0;
  const frac = Math.max(0, Math.min(z / zMax, 1));
  const barTop = 8 + (view.height - 16) * (1 - frac);
  ctx.fillStyle = COLORS.objectFill;
  ctx.fillRect(gx + 6, barTop, GAUGE_WIDTH - 20,
               view.height - 8 - barTop);
  ctx.fillStyle = COLORS.text;
  ctx.font = "10px sans-serif";
  ctx.fillText(`${z.toFixed(2)}m`, gx + 2, Math.max(barTop - 4, 16));
}

/** Explanation chip for the active verdict; tooltip when hovered. */
function drawChip(ctx: Ctx2D, model: ViewModel, view: Viewport): void {
  const tag = model.activeTag();
  if (!tag || !model.verdict || !model.world) return;
  const target = model.world.objects[model.verdict.object_id];
  const pose = model.drag?.objectId === model.verdict.object_id
    ? model.drag.pose : target?.pose;
  if (!pose) return;
  const [sx, sy] = toScreen(view, pose.x, pose.y);
  ctx.fillStyle = COLORS.objectLimited;
  ctx.fillRect(sx + 10, sy + 8, 8 + tag.length * 6, 18);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px sans-serif";
  ctx.fillText(tag, sx + 14, sy + 21);
  if (model.hover === model.verdict.object_id) {
    const tooltip = model.activeTooltip() ?? "";
    ctx.fillStyle = "#11141a";
    ctx.fillRect(sx + 10, sy + 30, Math.min(8 + tooltip.length * 5.5, 360), 20);
    ctx.fillStyle = COLORS.text;
    ctx.fillText(tooltip.slice(0, 64), sx + 14, sy + 44);
  }
}

/** Radial action menu: Available vs grayed-out entries around the object. */
function drawMenu(ctx: Ctx2D, model: ViewModel): void {
  const menu = model.menu;
  if (!menu) return;
  const entries = orderedEntries(menu.entries);
  const radius = 56;
  entries.forEach((entry, i) => {
    const angle = (Math.PI * 2 * i) / entries.length - Math.PI / 2;
    const ex = menu.screenX + radius * Math.cos(angle);
    const ey = menu.screenY + radius * Math.sin(angle);
    const available = entry.state === "Available";
    ctx.globalAlpha = available ? 1.0 : 0.4;
    ctx.fillStyle = available ? COLORS.objectFill : COLORS.staticFill;
    ctx.beginPath();
    ctx.arc(ex, ey, 20, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = COLORS.text;
    ctx.font = "10px sans-serif";
    ctx.fillText(entry.action.name, ex - 16, ey + 3);
    ctx.globalAlpha = 1.0;
  });
}

/** Move leads, then alphabetical: a stable radial layout. */
export function orderedEntries<T extends { action: { name: string } }>(
  entries: T[]): T[] {
  return [...entries].sort((a, b) => {
    if (a.action.name === "Move") return -1;
    if (b.action.name === "Move") return 1;
    return a.action.name.localeCompare(b.action.name);
  });
}

function drawBanner(ctx: Ctx2D, model: ViewModel, view: Viewport): void {
  const lines: string[] = [];
  if (model.awaitingPrompt) lines.push(`robot waiting: ${model.awaitingPrompt}`);
  if (model.timeline && !model.timeline.done) lines.push("previewing…");
  if (model.timeline?.done && model.confirmEnabled) {
    lines.push("preview finished — Confirm enabled");
  }
  for (const toast of model.toasts.slice(-2)) lines.push(toast);
  ctx.font = "12px sans-serif";
  lines.forEach((line, i) => {
    ctx.fillStyle = "#11141a";
    ctx.fillRect(8, 8 + i * 22, 12 + line.length * 6.5, 18);
    ctx.fillStyle = COLORS.text;
    ctx.fillText(line, 14, 21 + i * 22);
  });
}

/** To-scale footprint from the snapshot's class table, with a fallback. */
function footprintOf(model: ViewModel, cls: string): [number, number] {
  const size = model.world?.classes?.[cls]?.intrinsic.size;
  if (size) return [size[0], size[1]];
  return [0.12, 0.12];
}
