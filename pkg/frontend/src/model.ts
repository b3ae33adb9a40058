/** View model: a pure mirror of protocol messages plus local input state.
 *
 * Nothing here invents world facts: the world comes from the snapshot and
 * deltas, verdicts and offers come from the server, and the only local state
 * is what the pointer is doing. Stale verdicts are dropped: during a drag,
 * only the verdict answering the newest sent drag_sample is displayed.
 */

import type {
  DeltaPayload, Envelope, ExecutionEventPayload, Keyframe, MenuEntryPayload,
  OfferPayload, Pose, VerdictPayload, WorldDoc,
} from "./types";

export interface MenuState {
  objectId: string;
  entries: MenuEntryPayload[];
  screenX: number;
  screenY: number;
}

export interface DragState {
  objectId: string;
  pose: Pose;
  lastSampleId: string | null;
}

export interface TimelineState {
  planId: string;
  provenance: string;
  frames: Keyframe[];
  startedAt: number; // performance.now() ms
  done: boolean;
}

export class ViewModel {
  world: WorldDoc | null = null;
  sessionId: string | null = null;
  hover: string | null = null;
  selection: string[] = [];
  drag: DragState | null = null;
  menu: MenuState | null = null;
  verdict: VerdictPayload | null = null;
  offer: OfferPayload | null = null;
  timeline: TimelineState | null = null;
  executing = false;
  lastEvent: ExecutionEventPayload | null = null;
  awaitingPrompt: string | null = null;
  toasts: string[] = [];
  /** Entities animated by execution pose updates, drawn over the mirror. */
  livePoses: Map<string, Pose> = new Map();
  confirmEnabled = false;

  apply(message: Envelope): void {
    switch (message.type) {
      case "hello":
        this.sessionId = String(message.payload.session_id ?? "");
        break;
      case "world_snapshot":
        this.world = message.payload.world as unknown as WorldDoc;
        this.livePoses.clear();
        break;
      case "world_delta":
        this.applyDelta(message.payload as unknown as DeltaPayload);
        break;
      case "hit": {
        const id = message.payload.object_id as string | null;
        this.selection = id ? [id] : [];
        break;
      }
      case "selection":
        this.selection = (message.payload.object_ids as string[]) ?? [];
        break;
      case "menu":
        this.menu = {
          objectId: String(message.payload.object_id),
          entries: message.payload.entries as MenuEntryPayload[],
          screenX: this.menu?.screenX ?? 0,
          screenY: this.menu?.screenY ?? 0,
        };
        break;
      case "verdict": {
        const payload = message.payload as unknown as VerdictPayload;
        if (this.drag && this.drag.lastSampleId !== null &&
            message.request_id !== null &&
            message.request_id !== this.drag.lastSampleId) {
          break; // superseded sample: never display a stale verdict
        }
        this.verdict = payload;
        break;
      }
      case "offer":
        this.offer = message.payload as unknown as OfferPayload;
        break;
      case "preview_timeline":
        this.timeline = {
          planId: String(message.payload.plan_id),
          provenance: String(message.payload.provenance ?? ""),
          frames: message.payload.frames as Keyframe[],
          startedAt: now(),
          done: false,
        };
        this.confirmEnabled = false; // enabled once the preview finishes
        break;
      case "execution_event": {
        const event = message.payload as unknown as ExecutionEventPayload;
        this.lastEvent = event;
        if (event.kind === "PoseUpdate") {
          const entity = String(event.data.entity);
          this.livePoses.set(entity, event.data.pose as Pose);
        } else if (event.kind === "AwaitingHuman") {
          this.awaitingPrompt = String(event.data.prompt ?? "");
        } else if (event.kind === "StepSucceeded") {
          this.livePoses.clear(); // the delta now carries the truth
        } else if (event.kind === "PlanSucceeded" || event.kind === "PlanFailed"
                   || event.kind === "Preempted") {
          this.executing = false;
          this.awaitingPrompt = null;
          this.livePoses.clear();
          if (event.kind !== "PlanSucceeded") {
            this.toasts.push(`execution ${event.kind}`);
          }
        } else if (event.kind === "StepStarted") {
          this.executing = true;
        }
        break;
      }
      case "ack":
        break;
      case "error":
        this.toasts.push(
          `${message.payload.code}: ${message.payload.detail}`);
        break;
      default:
        this.toasts.push(`unknown message type ${message.type}`);
    }
  }

  private applyDelta(delta: DeltaPayload): void {
    if (!this.world) return;
    this.world.revision = delta.revision;
    for (const [oid, record] of Object.entries(delta.changes.objects)) {
      this.world.objects[oid] = record;
    }
    for (const door of delta.changes.doors) {
      const index = this.world.doors.findIndex((d) => d.id === door.id);
      if (index >= 0) this.world.doors[index] = door;
    }
    for (const [rid, state] of Object.entries(delta.changes.robots)) {
      if (this.world.robots[rid]) this.world.robots[rid].state = state;
    }
  }

  /** Advance preview playback; marks completion (enabling Confirm). */
  tickTimeline(at: number = now()): void {
    const timeline = this.timeline;
    if (!timeline || timeline.done) return;
    const elapsed = (at - timeline.startedAt) / 1000;
    const total = timeline.frames.length
      ? timeline.frames[timeline.frames.length - 1].t : 0;
    if (elapsed >= total) {
      timeline.done = true;
      this.confirmEnabled = true;
    }
  }

  /** Poses to draw at an instant: last keyframe per entity at playback time. */
  timelinePoses(at: number = now()): Map<string, Pose> {
    const out = new Map<string, Pose>();
    const timeline = this.timeline;
    if (!timeline) return out;
    const elapsed = Math.min(
      (at - timeline.startedAt) / 1000,
      timeline.frames.length ? timeline.frames[timeline.frames.length - 1].t : 0);
    for (const frame of timeline.frames) {
      if (frame.t <= elapsed) out.set(frame.entity, frame.pose);
    }
    return out;
  }

  displayColor(objectId: string): "Normal" | "Limited" {
    // the verdict's color directive leads for the instruction target so tint
    // changes land the moment the verdict does; the mirrored world covers
    // everything else
    if (this.verdict && this.verdict.object_id === objectId) {
      return this.verdict.color;
    }
    return this.world?.objects[objectId]?.color_state ?? "Normal";
  }

  activeTag(): string | null {
    if (!this.verdict || this.verdict.feasible) return null;
    return this.verdict.explanation?.tag ?? null;
  }

  activeTooltip(): string | null {
    if (!this.verdict || this.verdict.feasible) return null;
    return this.verdict.explanation?.tooltip ?? null;
  }
}

function now(): number {
  return typeof performance !== "undefined" ? performance.now() : Date.now();
}
