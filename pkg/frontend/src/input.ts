/** Pointer and keyboard handling: gestures in, protocol messages out.
 *
 * Drag samples are throttled to one per animation frame; the commit (mouse
 * up) sends end_drag with the final pose. Right-click opens the radial menu.
 */

import { GatewayClient } from "./client";
import { messages } from "./protocol";
import { ViewModel } from "./model";
import { Viewport, toWorld } from "./render";
import type { Pose } from "./types";

export class InputController {
  private client: GatewayClient;
  private model: ViewModel;
  private view: () => Viewport;
  private samplePending: Pose | null = null;
  private dragButtonDown = false;
  private dragHeight = 0;

  constructor(client: GatewayClient, view: () => Viewport) {
    this.client = client;
    this.model = client.model;
    this.view = view;
  }

  pointerDown(px: number, py: number, button: number): void {
    const [wx, wy] = toWorld(this.view(), px, py);
    if (button === 2) {
      const target = this.model.selection[0];
      if (target) {
        this.model.menu = {
          objectId: target, entries: [], screenX: px, screenY: py,
        };
        this.client.send(messages.openMenu(target));
      }
      return;
    }
    this.model.menu = null;
    const hit = this.hitTest(wx, wy);
    if (hit) {
      this.dragButtonDown = true;
      this.dragHeight = this.model.world?.objects[hit]?.pose.z ?? 0;
      this.client.send(messages.beginDrag(hit));
      this.model.drag = {
        objectId: hit,
        pose: { x: wx, y: wy, z: this.dragHeight, yaw: 0 },
        lastSampleId: null,
      };
    } else {
      this.client.send(messages.raycast(wx, wy));
    }
  }

  pointerMove(px: number, py: number): void {
    const [wx, wy] = toWorld(this.view(), px, py);
    this.model.hover = this.hitTest(wx, wy);
    if (this.dragButtonDown && this.model.drag) {
      const pose = { x: wx, y: wy, z: this.dragHeight, yaw: 0 };
      this.model.drag.pose = pose;
      this.samplePending = pose; // flushed once per animation frame
    }
  }

  pointerUp(px: number, py: number): void {
    if (!this.dragButtonDown) return;
    this.dragButtonDown = false;
    const drag = this.model.drag;
    if (!drag) return;
    const [wx, wy] = toWorld(this.view(), px, py);
    this.samplePending = null;
    this.client.send(messages.endDrag({ x: wx, y: wy, z: this.dragHeight,
                                        yaw: 0 }));
    this.model.drag = null;
  }

  /** Nudge the carried height with the wheel (the z gauge shows it). */
  wheel(deltaY: number): void {
    if (this.model.drag) {
      this.dragHeight = Math.max(0, this.dragHeight - deltaY * 0.0015);
      this.model.drag.pose = { ...this.model.drag.pose, z: this.dragHeight };
      this.samplePending = this.model.drag.pose;
    }
  }

  menuClick(actionName: string): void {
    const menu = this.model.menu;
    if (!menu) return;
    const entry = menu.entries.find((e) => e.action.name === actionName);
    if (!entry || entry.state !== "Available") return;
    if (actionName !== "Move") {
      this.client.send(messages.setParam(menu.objectId, actionName, null));
    }
    this.model.menu = null;
  }

  chooseResolution(choice: "Auto" | "Alternative" | "Ignore"): void {
    this.client.send(messages.chooseResolution(choice));
  }

  confirm(): void {
    if (!this.model.confirmEnabled &&
        !(this.model.verdict && this.model.verdict.feasible)) {
      return;
    }
    this.client.send(messages.confirm());
  }

  /** One drag sample per animation frame at most. */
  flushFrame(): void {
    if (this.samplePending && this.model.drag) {
      this.client.send(messages.dragSample(this.samplePending));
      this.samplePending = null;
    }
  }

  private hitTest(wx: number, wy: number): string | null {
    const world = this.model.world;
    if (!world) return null;
    let best: string | null = null;
    let bestD = 0.2; // generous pick radius in meters
    for (const [oid, record] of Object.entries(world.objects)) {
      const dx = record.pose.x - wx;
      const dy = record.pose.y - wy;
      const d = Math.hypot(dx, dy);
      if (d < bestD) {
        best = oid;
        bestD = d;
      }
    }
    return best;
  }
}
