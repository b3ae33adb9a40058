/** View model: delta mirroring, stale verdicts, preview gating, menu order. */

import { describe, expect, it } from "vitest";

import { ViewModel } from "../src/model";
import { orderedEntries } from "../src/render";
import type { Envelope, Keyframe } from "../src/types";

function snapshot(): Envelope {
  return {
    type: "world_snapshot",
    request_id: null,
    payload: {
      world: {
        revision: 0,
        bounds: [0, 0, 4, 4],
        classes: { Mug: { intrinsic: { size: [0.08, 0.08, 0.1],
                                       graspable: true, is_container: false },
                          methods: ["Move"] } },
        statics: [],
        doors: [{ id: "d1", open: false,
                  span: { center: [2, 2], size: [0.1, 0.6], z: [0, 2], yaw: 0 } }],
        objects: {
          mug1: { id: "mug1", class: "Mug",
                  pose: { x: 1, y: 1, z: 0, yaw: 0 },
                  color_state: "Normal", supported_by: "floor",
                  contains: [], fill_level: 0 },
        },
        robots: {
          mover: {
            spec: { id: "mover", capabilities: ["navigate"],
                    base_footprint_radius: 0.17 },
            state: { robot_id: "mover", base_pose: { x: 0.5, y: 0.5, z: 0, yaw: 0 },
                     lift_z: 0, arm_ext: 0, battery: 1, phase: "Idle",
                     holding: null },
          },
        },
      },
    },
  };
}

function verdict(requestId: string | null, feasible: boolean,
                 objectId = "mug1"): Envelope {
  return {
    type: "verdict",
    request_id: requestId,
    payload: {
      feasible,
      explanation: feasible ? null : {
        tag: "Too high to reach",
        tooltip: "way up there",
        condition: { variant: "HeightOutOfRange", data: { z: 2, z_max: 1 } },
      },
      checked_robot: "mover",
      evaluated_at_revision: 0,
      resolvable: null,
      object_id: objectId,
      color: feasible ? "Normal" : "Limited",
    },
  };
}

describe("delta mirroring", () => {
  it("applies object, door, and robot changes onto the snapshot", () => {
    const model = new ViewModel();
    model.apply(snapshot());
    model.apply({
      type: "world_delta",
      request_id: null,
      payload: {
        revision: 1,
        mutation: { kind: "set_pose" },
        changes: {
          objects: { mug1: { id: "mug1", class: "Mug",
                             pose: { x: 2, y: 2, z: 0, yaw: 0 },
                             color_state: "Limited", supported_by: "floor",
                             contains: [], fill_level: 0 } },
          doors: [{ id: "d1", open: true,
                    span: { center: [2, 2], size: [0.1, 0.6], z: [0, 2],
                            yaw: 0 } }],
          robots: { mover: { robot_id: "mover",
                             base_pose: { x: 1.5, y: 1.5, z: 0, yaw: 0 },
                             lift_z: 0.2, arm_ext: 0, battery: 1,
                             phase: "Idle", holding: null } },
        },
      },
    });
    expect(model.world?.revision).toBe(1);
    expect(model.world?.objects.mug1.pose.x).toBe(2);
    expect(model.world?.doors[0].open).toBe(true);
    expect(model.world?.robots.mover.state.lift_z).toBe(0.2);
  });

  it("never invents facts: unknown entities in deltas are ignored for doors", () => {
    const model = new ViewModel();
    model.apply(snapshot());
    model.apply({
      type: "world_delta",
      request_id: null,
      payload: {
        revision: 1,
        mutation: { kind: "set_door" },
        changes: { objects: {}, doors: [{ id: "ghost", open: true,
                                          span: { center: [0, 0], size: [1, 1],
                                                  z: [0, 1], yaw: 0 } }],
                   robots: {} },
      },
    });
    expect(model.world?.doors).toHaveLength(1);
    expect(model.world?.doors[0].id).toBe("d1");
  });
});

describe("stale verdict display rule", () => {
  it("renders only the verdict matching the newest drag sample", () => {
    const model = new ViewModel();
    model.apply(snapshot());
    model.drag = { objectId: "mug1", pose: { x: 1, y: 1, z: 0, yaw: 0 },
                   lastSampleId: "c9" };
    model.apply(verdict("c5", false)); // stale: superseded sample
    expect(model.verdict).toBeNull();
    model.apply(verdict("c9", true)); // current
    expect(model.verdict?.feasible).toBe(true);
  });

  it("accepts pushed (request-less) verdicts outside a drag", () => {
    const model = new ViewModel();
    model.apply(snapshot());
    model.apply(verdict(null, false));
    expect(model.verdict?.feasible).toBe(false);
    expect(model.activeTag()).toBe("Too high to reach");
  });
});

describe("preview gating", () => {
  it("enables confirm only after the timeline finishes", () => {
    const model = new ViewModel();
    model.apply(snapshot());
    const frames: Keyframe[] = [
      { t: 0.0, entity: "mover", pose: { x: 0.5, y: 0.5, z: 0, yaw: 0 } },
      { t: 1.0, entity: "mover", pose: { x: 1.5, y: 0.5, z: 0, yaw: 0 } },
    ];
    model.apply({ type: "preview_timeline", request_id: "p1",
                  payload: { plan_id: "plan-1", provenance: "Auto", frames } });
    expect(model.confirmEnabled).toBe(false);
    const start = model.timeline!.startedAt;
    model.tickTimeline(start + 500); // halfway
    expect(model.confirmEnabled).toBe(false);
    const mid = model.timelinePoses(start + 500);
    expect(mid.get("mover")?.x).toBe(0.5);
    model.tickTimeline(start + 1100); // past the end
    expect(model.confirmEnabled).toBe(true);
    const end = model.timelinePoses(start + 1100);
    expect(end.get("mover")?.x).toBe(1.5);
  });
});

describe("radial menu order", () => {
  it("puts Move first, remaining entries alphabetical", () => {
    const entries = [
      { action: { name: "Stack" } },
      { action: { name: "Fill" } },
      { action: { name: "Move" } },
      { action: { name: "Dust" } },
    ];
    expect(orderedEntries(entries).map((e) => e.action.name))
      .toEqual(["Move", "Dust", "Fill", "Stack"]);
  });
});

describe("execution events", () => {
  it("tracks live poses and clears them at step boundaries", () => {
    const model = new ViewModel();
    model.apply(snapshot());
    model.apply({
      type: "execution_event", request_id: null,
      payload: { timestamp: 0.05, robot_id: "mover", kind: "StepStarted",
                 plan_id: "p", step_index: 0, data: {} },
    });
    expect(model.executing).toBe(true);
    model.apply({
      type: "execution_event", request_id: null,
      payload: { timestamp: 0.1, robot_id: "mover", kind: "PoseUpdate",
                 plan_id: "p", step_index: 0,
                 data: { entity: "mover",
                         pose: { x: 1.2, y: 0.5, z: 0, yaw: 0 } } },
    });
    expect(model.livePoses.get("mover")?.x).toBe(1.2);
    model.apply({
      type: "execution_event", request_id: null,
      payload: { timestamp: 0.2, robot_id: "mover", kind: "PlanSucceeded",
                 plan_id: "p", step_index: null, data: {} },
    });
    expect(model.executing).toBe(false);
    expect(model.livePoses.size).toBe(0);
  });
});
