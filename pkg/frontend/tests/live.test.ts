/** Scripted client loop against a live gateway.
 *
 * Exercises the real socket end to end: a drag crossing a blocked-to-free
 * boundary flips the tint red-to-normal (with the matching tag chip) within
 * two rendered frames of the verdict arriving; choosing Auto plays the whole
 * preview before Confirm unlocks; and every frame the client sent validates
 * against the published protocol schema.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { messages } from "../src/protocol";
import { COLORS, fitViewport, renderScene } from "../src/render";
import {
  LiveGateway, RecordingCtx, TestHarness, assertSchemaValid, connect,
  startGateway,
} from "./helpers";

let shelf: LiveGateway;
let basket: LiveGateway;

beforeAll(async () => {
  shelf = await startGateway("fig1_shelf.json");
  basket = await startGateway("fig6_basket.json");
}, 60000);

afterAll(() => {
  shelf?.stop();
  basket?.stop();
});

describe("drag across a blocked/free boundary", () => {
  it("tints red then back to normal within two frames of each verdict",
     async () => {
    const h: TestHarness = await connect(shelf.port);
    try {
      await h.waitFor((m) => m.type === "world_snapshot");
      const ctx = new RecordingCtx();
      const view = fitViewport(h.model.world!, 860, 640);

      h.client.send(messages.beginDrag("box_free"));
      const began = await h.waitFor((m) => m.type === "verdict");
      expect(began.payload.feasible).toBe(true);
      h.model.drag = { objectId: "box_free",
                       pose: { x: 3.3, y: 2.4, z: 0.0, yaw: 0 },
                       lastSampleId: null };

      // sample inside the big box: blocked
      const blocked = messages.dragSample({ x: 3.3, y: 2.4, z: 0.0, yaw: 0 });
      h.client.send(blocked);
      await h.waitFor((m) => m.type === "verdict"
        && m.request_id === blocked.request_id);
      expect(h.model.verdict?.feasible).toBe(false);
      const tag = h.model.activeTag();
      expect(tag).toBeTruthy();

      // within two frames the object renders red with the tag chip
      renderScene(ctx as never, h.model, view);
      renderScene(ctx as never, h.model, view);
      expect(ctx.drewWithStyle(COLORS.objectLimited)).toBe(true);
      expect(ctx.drewText(tag!)).toBe(true);

      // sample over free floor: feasible again
      h.model.drag.pose = { x: 2.0, y: 2.0, z: 0.0, yaw: 0 };
      const free = messages.dragSample({ x: 2.0, y: 2.0, z: 0.0, yaw: 0 });
      h.client.send(free);
      await h.waitFor((m) => m.type === "verdict"
        && m.request_id === free.request_id);
      expect(h.model.verdict?.feasible).toBe(true);

      ctx.reset();
      renderScene(ctx as never, h.model, view);
      renderScene(ctx as never, h.model, view);
      expect(ctx.drewWithStyle(COLORS.objectLimited)).toBe(false);
      expect(ctx.drewText("Too")).toBe(false);

      for (const message of h.client.sent) assertSchemaValid(message);
    } finally {
      h.close();
    }
  }, 30000);
});

describe("auto resolution preview gating", () => {
  it("plays the full timeline before Confirm enables, then executes",
     async () => {
    const h: TestHarness = await connect(basket.port);
    try {
      await h.waitFor((m) => m.type === "world_snapshot");

      h.client.send(messages.beginDrag("blocks"));
      await h.waitFor((m) => m.type === "verdict");
      h.model.drag = { objectId: "blocks",
                       pose: { x: 3.3, y: 3.0, z: 0.12, yaw: 0 },
                       lastSampleId: null };
      const drop = messages.endDrag({ x: 3.3, y: 3.0, z: 0.12, yaw: 0 });
      h.model.drag = null;
      h.client.send(drop);
      const verdict = await h.waitFor(
        (m) => m.type === "verdict" && m.request_id === drop.request_id);
      expect(verdict.payload.feasible).toBe(false);

      h.client.send(messages.requestResolutions());
      const offer = await h.waitFor((m) => m.type === "offer");
      expect(offer.payload.auto).not.toBeNull();

      h.client.send(messages.chooseResolution("Auto"));
      await h.waitFor((m) => m.type === "preview_timeline");
      expect(h.model.timeline).not.toBeNull();
      expect(h.model.timeline!.frames.length).toBeGreaterThan(10);
      expect(h.model.confirmEnabled).toBe(false);

      // stepping playback to just before the end keeps Confirm locked
      const start = h.model.timeline!.startedAt;
      const total = h.model.timeline!.frames.at(-1)!.t * 1000;
      h.model.tickTimeline(start + total * 0.7);
      expect(h.model.confirmEnabled).toBe(false);
      h.model.tickTimeline(start + total + 50);
      expect(h.model.confirmEnabled).toBe(true);

      h.client.send(messages.confirm());
      const done = await h.waitFor(
        (m) => m.type === "execution_event"
          && ["PlanSucceeded", "PlanFailed"].includes(
            String((m.payload as { kind: string }).kind)), 30000);
      expect((done.payload as { kind: string }).kind).toBe("PlanSucceeded");

      // the mirrored world followed execution: basket back home with blocks
      expect(h.model.world!.objects.blocks.supported_by).toBe("basket");
      expect(Math.abs(h.model.world!.objects.basket.pose.x - 3.3))
        .toBeLessThan(1e-6);

      for (const message of h.client.sent) assertSchemaValid(message);
    } finally {
      h.close();
    }
  }, 40000);
});
