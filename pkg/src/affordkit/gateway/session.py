"""One interactive session: selection, drag evaluation, resolutions, execution.

The session serializes all world mutations (single writer) and pushes
snapshot/delta messages so any number of mirrors stay byte-identical. It is
transport-agnostic: `handle` consumes one decoded message and returns the
messages to send, so the same code drives live sockets and headless replays.
"""

from __future__ import annotations

import random
import uuid

from ..errors import (AffordkitError, NotDragging, StalePlan, UnknownObject,
                      UnknownPlan)
from ..executor.events import FaultProfile
from ..executor.runner import PlanExecutor, WorldHandle
from ..feasibility.catalog import ExplanationCatalog
from ..feasibility.engine import (FeasibilityEngine, PlacementTarget,
                                  param_from_dict, signifier_hit)
from ..geometry import Pose
from ..resolution.plan import ActionPlan, Instruction, PlanCompiler, PlanError
from ..resolution.preview import preview
from ..resolution.search import Resolver, ResolutionOffer
from ..world.state import (FLOOR_ID, SetColorState, WorldState, changed_entities,
                           mutation_from_dict, mutation_to_dict)
from .protocol import PROTOCOL_VERSION, error_message, make_message


class SessionHandle(WorldHandle):
    """World handle that records deltas for subscribers."""

    def __init__(self, world: WorldState, on_delta):
        super().__init__(world)
        self._on_delta = on_delta

    def apply(self, mutation):
        old = self.world
        new = super().apply(mutation)
        self._on_delta(old, new, mutation)
        return new


class Session:
    def __init__(self, world: WorldState, session_id: str | None = None,
                 fault_profile: FaultProfile | None = None,
                 catalog: ExplanationCatalog | None = None):
        self.session_id = session_id or uuid.uuid4().hex[:8]
        self.engine = FeasibilityEngine(catalog=catalog)
        self.compiler = PlanCompiler(self.engine)
        self.resolver = Resolver(self.engine)
        self.profile = fault_profile or FaultProfile()
        self.rng = random.Random(self.profile.seed)
        self.handle = SessionHandle(world, self._record_delta)
        self.selection: list[str] = []
        self.pending_action: str | None = None
        self.pending_param = None
        self.drag_object: str | None = None
        self.last_verdict = None
        self.last_offer: ResolutionOffer | None = None
        self.chosen_plan: ActionPlan | None = None
        self.executor: PlanExecutor | None = None
        self._instruction_object: str | None = None
        self._outbox: list[dict] = []
        # run plans to completion inside handlers; the paced service turns
        # this off and ticks on the wall clock instead
        self.auto_drive = True

    # -- world access -----------------------------------------------------------

    @property
    def world(self) -> WorldState:
        return self.handle.world

    def _record_delta(self, old: WorldState, new: WorldState, mutation) -> None:
        self._outbox.append(make_message("world_delta", {
            "revision": new.revision,
            "mutation": mutation_to_dict(mutation),
            "changes": changed_entities(old, new),
        }))

    def snapshot_message(self) -> dict:
        return make_message("world_snapshot", {
            "protocol_version": PROTOCOL_VERSION,
            "session_id": self.session_id,
            "world": self.world.to_dict(),
        })

    # -- dispatch ---------------------------------------------------------------

    def handle_message(self, message: dict) -> list[dict]:
        """Process one client message; returns responses plus queued pushes."""
        self._outbox = []
        msg_type = message.get("type")
        request_id = message.get("request_id")
        payload = message.get("payload") or {}
        handler = getattr(self, f"_on_{msg_type}", None)
        if handler is None or msg_type not in _CLIENT_TYPES:
            return [error_message("unknown_type", f"unknown type {msg_type!r}",
                                  request_id)]
        try:
            responses = handler(payload, request_id)
        except AffordkitError as exc:
            responses = [error_message(type(exc).__name__, str(exc), request_id)]
        except (KeyError, ValueError, TypeError) as exc:
            responses = [error_message("bad_payload", str(exc), request_id)]
        # any deltas not already drained by the handler happened before its
        # responses were built, so they go first
        return self._drain() + responses

    def _drain(self) -> list[dict]:
        queued, self._outbox = self._outbox, []
        return queued

    # -- handlers -----------------------------------------------------------------

    def _on_hello(self, payload: dict, request_id) -> list[dict]:
        return [make_message("hello", {
            "protocol_version": PROTOCOL_VERSION,
            "session_id": self.session_id,
        }, request_id)]

    def _on_load_scene(self, payload: dict, request_id) -> list[dict]:
        from ..world.loader import load_scene, load_scene_file

        if "path" in payload:
            world = load_scene_file(payload["path"])
        else:
            world = load_scene(payload["document"])
        self.handle.world = world
        self.selection = []
        self.pending_action = None
        self.pending_param = None
        self.last_verdict = None
        self.last_offer = None
        self.chosen_plan = None
        self.executor = None
        msg = self.snapshot_message()
        msg["request_id"] = request_id
        return [msg]

    def _on_raycast(self, payload: dict, request_id) -> list[dict]:
        origin = tuple(float(v) for v in payload["origin"])
        direction = tuple(float(v) for v in payload["direction"])
        hit = signifier_hit(self.world, origin, direction)
        if hit is not None:
            self.selection = [hit]
        return [make_message("hit", {"object_id": hit}, request_id)]

    def _on_lasso_select(self, payload: dict, request_id) -> list[dict]:
        polygon = [(float(x), float(y)) for x, y in payload["polygon"]]
        from ..geometry import point_in_polygon

        ids = []
        for oid in sorted(self.world.objects):
            box = self.world.object_box(oid)
            if point_in_polygon(box.cx, box.cy, polygon):
                ids.append(oid)
        self.selection = ids
        return [make_message("selection", {"object_ids": ids}, request_id)]

    def _on_open_menu(self, payload: dict, request_id) -> list[dict]:
        object_id = payload.get("object_id") or self._primary_selection()
        entries = self.engine.action_menu(self.world, object_id)
        return [make_message("menu", {
            "object_id": object_id,
            "entries": [e.to_dict() for e in entries],
        }, request_id)]

    def _on_begin_drag(self, payload: dict, request_id) -> list[dict]:
        object_id = payload["object_id"]
        verdict = self._evaluate_with_color(object_id, "Move", None)
        if verdict.feasible:
            self.drag_object = object_id
            self.selection = [object_id]
            self.pending_action = "Move"
            self.pending_param = None
        else:
            self.drag_object = None  # red and immovable
        return [self._verdict_message(object_id, verdict, request_id)]

    def _on_drag_sample(self, payload: dict, request_id) -> list[dict]:
        if self.drag_object is None:
            raise NotDragging("no drag in progress")
        pose = Pose.from_dict(payload["pose"])
        param = PlacementTarget(pose=pose)
        verdict = self._evaluate_with_color(self.drag_object, "Move", param)
        self.last_verdict = verdict
        return [self._verdict_message(self.drag_object, verdict, request_id)]

    def _on_end_drag(self, payload: dict, request_id) -> list[dict]:
        """Commit the drop: bind the final pose as the pending instruction."""
        if self.drag_object is None:
            raise NotDragging("no drag in progress")
        object_id = self.drag_object
        pose = Pose.from_dict(payload["pose"])
        into = self.engine._bind_container(self.world, object_id, pose)
        param = PlacementTarget(pose=None if into else pose, into=into)
        self.drag_object = None
        return self._set_instruction(object_id, "Move", param, request_id)

    def _on_set_param(self, payload: dict, request_id) -> list[dict]:
        object_id = payload.get("object_id") or self._primary_selection()
        action = payload["action"]
        param = param_from_dict(payload.get("param"))
        return self._set_instruction(object_id, action, param, request_id)

    def _set_instruction(self, object_id: str, action: str, param,
                         request_id) -> list[dict]:
        self.pending_action = action
        self.pending_param = param
        if object_id != FLOOR_ID:
            self.selection = [object_id]
        verdict = self._evaluate_with_color(object_id, action, param)
        self.last_verdict = verdict
        self.last_offer = None
        self.chosen_plan = None
        self._instruction_object = object_id
        return [self._verdict_message(object_id, verdict, request_id)]

    def _on_request_resolutions(self, payload: dict, request_id) -> list[dict]:
        object_id, verdict = self._pending()
        if verdict.feasible:
            offer = ResolutionOffer(auto=None, alternative=None)
        else:
            offer = self.resolver.build_offer(
                self.world, Instruction(object_id, self.pending_action,
                                        self.pending_param),
                verdict.explanation.condition)
        self.last_offer = offer
        self.last_verdict = verdict.with_resolvable(
            auto=offer.auto is not None,
            alternative=offer.alternative is not None)
        return [make_message("offer", offer.to_dict(), request_id)]

    def _on_choose_resolution(self, payload: dict, request_id) -> list[dict]:
        choice = payload["choice"]
        object_id, verdict = self._pending()
        if choice == "Ignore":
            failed = None if verdict.feasible else verdict.explanation.condition
            plan = self.resolver.ignore_override(
                self.world, Instruction(object_id, self.pending_action,
                                        self.pending_param), failed)
        elif choice == "Auto":
            if self.last_offer is None or self.last_offer.auto is None:
                return [error_message("no_resolution", "Auto is not available",
                                      request_id)]
            plan = self.last_offer.auto
        elif choice == "Alternative":
            if self.last_offer is None or self.last_offer.alternative is None:
                return [error_message("no_resolution",
                                      "Alternative is not available", request_id)]
            plan = self.last_offer.alternative.plan
        else:
            return [error_message("bad_payload", f"unknown choice {choice!r}",
                                  request_id)]
        self.chosen_plan = plan
        frames = preview(self.world, plan)
        return [make_message("preview_timeline", {
            "plan_id": plan.plan_id,
            "provenance": plan.provenance,
            "frames": [f.to_dict() for f in frames],
        }, request_id)]

    def _on_confirm(self, payload: dict, request_id) -> list[dict]:
        plan = self.chosen_plan
        if plan is None:
            object_id, verdict = self._pending()
            if not verdict.feasible:
                return [error_message(
                    "infeasible", "instruction is infeasible; resolve or ignore",
                    request_id)]
            plan = self.compiler.compile(
                self.world, Instruction(object_id, self.pending_action,
                                        self.pending_param))
        if plan.revision != self.world.revision:
            # instruction unchanged: recompile against the current world
            plan = self._recompile(plan)
        self.executor = PlanExecutor(self.handle, plan, profile=self.profile,
                                     rng=self.rng)
        ack = make_message("ack", {"plan_id": plan.plan_id,
                                   "steps": len(plan.steps)}, request_id)
        pushes: list[dict] = []
        if self.auto_drive:
            pushes = self.drive()
            if self.executor.done and self.executor.events and \
                    self.executor.events[-1].kind == "PlanSucceeded":
                # colors revert once the constraint is actually resolved;
                # failure leaves the red flag for the user to review
                pushes += self._reevaluate_pending()
        return [ack] + pushes

    def _recompile(self, plan: ActionPlan) -> ActionPlan:
        if plan.provenance == "IgnoreOverride":
            failed = plan.unresolved
            from ..feasibility.conditions import FailureCondition

            condition = FailureCondition.from_dict(failed) if failed else None
            return self.resolver.ignore_override(self.world, plan.instruction,
                                                 condition)
        if plan.provenance == "Auto":
            verdict = self.engine.evaluate(
                self.world, plan.instruction.object_id, plan.instruction.action,
                plan.instruction.param)
            if not verdict.feasible:
                replacement = self.resolver.auto_resolve(
                    self.world, plan.instruction, verdict.explanation.condition)
                if replacement is None:
                    raise StalePlan("auto resolution no longer applies")
                return replacement
        return self.compiler.compile(self.world, plan.instruction,
                                     provenance=plan.provenance)

    def _on_preempt(self, payload: dict, request_id) -> list[dict]:
        if self.executor is None or self.executor.done:
            raise UnknownPlan("no plan is running")
        self.executor.preempt()
        pushes = self.drive() if self.auto_drive else []
        return pushes + [make_message("ack", {"preempted": True}, request_id)]

    def _on_human_action(self, payload: dict, request_id) -> list[dict]:
        mutation = mutation_from_dict(payload["mutation"])
        self.handle.apply(mutation)
        pushes: list[dict] = []
        if self.executor is not None and not self.executor.done:
            self.executor.notify_mutation(mutation)
            if self.auto_drive:
                pushes = self.drive()
        if self.executor is None or self.executor.done:
            pushes += self._reevaluate_pending()
        return pushes + [make_message("ack", {"applied": True}, request_id)]

    # -- execution driving --------------------------------------------------------

    def drive(self, max_ticks: int = 2_000_000) -> list[dict]:
        """Tick the executor until it blocks or terminates; returns pushes."""
        if self.executor is None:
            return []
        out: list[dict] = []
        for _ in range(max_ticks):
            if self.executor.done or self.executor.awaiting is not None:
                break
            seen = len(self.executor.events)
            self.executor.tick()
            # interleave the tick's deltas (queued via the handle) with its events
            out.extend(self._drain())
            for event in self.executor.events[seen:]:
                out.append(make_message("execution_event", event.to_dict()))
        return out

    def tick_once(self) -> list[dict]:
        """Single tick for paced (wall-clock) serving."""
        if self.executor is None or self.executor.done:
            return []
        if self.executor.awaiting is not None:
            return []
        seen = len(self.executor.events)
        self.executor.tick()
        out = self._drain()
        out.extend(make_message("execution_event", e.to_dict())
                   for e in self.executor.events[seen:])
        return out

    # -- helpers ---------------------------------------------------------------------

    def _primary_selection(self) -> str:
        if not self.selection:
            raise UnknownObject("nothing selected")
        return self.selection[0]

    def _pending(self):
        if self.pending_action is None or self.last_verdict is None:
            raise NotDragging("no pending instruction")
        object_id = getattr(self, "_instruction_object", None) \
            or self._primary_selection()
        return object_id, self.last_verdict

    def _evaluate_with_color(self, object_id: str, action: str, param):
        verdict = self.engine.evaluate(self.world, object_id, action, param)
        verdict = self._sync_color(object_id, verdict)
        return verdict

    def _sync_color(self, object_id: str, verdict):
        """Red exactly while the latest verdict is infeasible."""
        if object_id not in self.world.objects:
            return verdict
        current = self.world.objects[object_id].color_state
        wanted = "Normal" if verdict.feasible else "Limited"
        if current != wanted:
            self.handle.apply(SetColorState(object_id, wanted))
            # color has no bearing on feasibility: restamp the verdict at the
            # new revision instead of re-running the chain
            verdict = self._reverdict(verdict)
        return verdict

    def _reverdict(self, verdict):
        from ..feasibility.engine import FeasibilityVerdict

        return FeasibilityVerdict(
            feasible=verdict.feasible, explanation=verdict.explanation,
            checked_robot=verdict.checked_robot,
            evaluated_at_revision=self.world.revision,
            resolvable=verdict.resolvable)

    def _reevaluate_pending(self) -> list[dict]:
        if self.pending_action is None:
            return []
        object_id = getattr(self, "_instruction_object", None)
        if object_id is None:
            return []
        if object_id != FLOOR_ID and object_id not in self.world.objects:
            return []
        verdict = self._evaluate_with_color(object_id, self.pending_action,
                                            self.pending_param)
        self.last_verdict = verdict
        # the color delta (if any) precedes the verdict that caused it
        return self._drain() + [self._verdict_message(object_id, verdict, None)]

    def _verdict_message(self, object_id: str, verdict, request_id) -> dict:
        payload = verdict.to_dict()
        payload["object_id"] = object_id
        payload["color"] = "Limited" if not verdict.feasible else "Normal"
        return make_message("verdict", payload, request_id)


_CLIENT_TYPES = set((
    "hello", "load_scene", "raycast", "lasso_select", "open_menu",
    "begin_drag", "drag_sample", "end_drag", "set_param",
    "request_resolutions", "choose_resolution", "confirm", "preempt",
    "human_action",
))
