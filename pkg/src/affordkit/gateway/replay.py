"""Headless scenario replay: scripted client messages plus assertions.

A scenario file is JSON: {"scene": <path>, "steps": [...]} where each step
either sends a protocol message ({"send": {"type": ..., "payload": {...}}})
or asserts on what the session produced ({"expect": {...}}). Replays run at
unbounded simulation speed and report one line per assertion.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from ..errors import ScenarioParseError
from ..executor.events import FaultProfile
from ..world.loader import load_scene_file
from .session import Session


@dataclass
class AssertionResult:
    index: int
    description: str
    passed: bool
    detail: str = ""


@dataclass
class ReplayReport:
    scenario: str
    results: list[AssertionResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            line = f"[{status}] #{r.index} {r.description}"
            if r.detail and not r.passed:
                line += f" -- {r.detail}"
            out.append(line)
        out.append(f"{'OK' if self.ok else 'FAILED'}: "
                   f"{sum(r.passed for r in self.results)}/{len(self.results)} "
                   f"assertions passed")
        return out


class ScenarioRunner:
    def __init__(self, scenario_path: str):
        with open(scenario_path, "r", encoding="utf-8") as fh:
            try:
                self.doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioParseError(f"{scenario_path}: {exc}") from None
        if "scene" not in self.doc or "steps" not in self.doc:
            raise ScenarioParseError(
                f"{scenario_path}: needs 'scene' and 'steps'")
        self.scenario_path = scenario_path
        base = os.path.dirname(os.path.abspath(scenario_path))
        scene_path = self.doc["scene"]
        if not os.path.isabs(scene_path):
            scene_path = os.path.join(base, scene_path)
        self.scene_path = scene_path

    def run(self) -> ReplayReport:
        world = load_scene_file(self.scene_path)
        profile = FaultProfile.from_dict(self.doc.get("fault_profile"))
        session = Session(world, fault_profile=profile)
        report = ReplayReport(scenario=self.scenario_path)
        collected: list[dict] = [session.snapshot_message()]
        counter = 0
        for step in self.doc["steps"]:
            if "send" in step:
                message = dict(step["send"])
                message.setdefault("request_id", f"replay-{counter}")
                message.setdefault("payload", {})
                counter += 1
                collected.extend(session.handle_message(message))
            elif "expect" in step:
                index = len(report.results) + 1
                result = _check(index, step["expect"], collected, session)
                report.results.append(result)
            else:
                raise ScenarioParseError(f"step needs 'send' or 'expect': {step}")
        return report


def _latest(collected: list[dict], msg_type: str) -> dict | None:
    for message in reversed(collected):
        if message["type"] == msg_type:
            return message
    return None


def _check(index: int, expect: dict, collected: list[dict],
           session: Session) -> AssertionResult:
    kind = expect.get("type")
    describe = expect.get("describe") or f"{kind} assertion"

    def fail(detail: str) -> AssertionResult:
        return AssertionResult(index, describe, False, detail)

    def ok() -> AssertionResult:
        return AssertionResult(index, describe, True)

    if kind == "verdict":
        msg = _latest(collected, "verdict")
        if msg is None:
            return fail("no verdict seen")
        p = msg["payload"]
        if "feasible" in expect and p["feasible"] != expect["feasible"]:
            return fail(f"feasible={p['feasible']}, wanted {expect['feasible']}")
        if "condition" in expect:
            got = (p.get("explanation") or {}).get("condition", {}).get("variant")
            if got != expect["condition"]:
                return fail(f"condition={got}, wanted {expect['condition']}")
        if "tag" in expect:
            got = (p.get("explanation") or {}).get("tag")
            if got != expect["tag"]:
                return fail(f"tag={got!r}, wanted {expect['tag']!r}")
        if "object" in expect and p.get("object_id") != expect["object"]:
            return fail(f"object={p.get('object_id')}, wanted {expect['object']}")
        return ok()

    if kind == "menu":
        msg = _latest(collected, "menu")
        if msg is None:
            return fail("no menu seen")
        entries = msg["payload"]["entries"]
        states = {e["action"]["name"]: e["state"] for e in entries}
        for name in expect.get("available", []):
            if states.get(name) != "Available":
                return fail(f"{name} not Available (got {states.get(name)})")
        for name in expect.get("grayed", []):
            if states.get(name) != "GrayedOut":
                return fail(f"{name} not GrayedOut (got {states.get(name)})")
        for name in expect.get("absent", []):
            if name in states:
                return fail(f"{name} unexpectedly present")
        return ok()

    if kind == "offer":
        msg = _latest(collected, "offer")
        if msg is None:
            return fail("no offer seen")
        p = msg["payload"]
        if "auto" in expect:
            has_auto = p.get("auto") is not None
            if has_auto != expect["auto"]:
                return fail(f"auto present={has_auto}, wanted {expect['auto']}")
        if "auto_steps" in expect:
            if p.get("auto") is None:
                return fail("no auto plan")
            got = len(p["auto"]["steps"])
            if got != expect["auto_steps"]:
                return fail(f"auto plan has {got} steps, wanted "
                            f"{expect['auto_steps']}")
        if "alternative" in expect:
            has_alt = p.get("alternative") is not None
            if has_alt != expect["alternative"]:
                return fail(f"alternative present={has_alt}, "
                            f"wanted {expect['alternative']}")
        if "alternative_kind" in expect:
            alt = p.get("alternative")
            if alt is None or alt["kind"] != expect["alternative_kind"]:
                return fail(f"alternative kind="
                            f"{None if alt is None else alt['kind']}")
        if "alternative_object" in expect:
            alt = p.get("alternative")
            got = None if alt is None else alt.get("object_id")
            if got != expect["alternative_object"]:
                return fail(f"alternative object={got}, wanted "
                            f"{expect['alternative_object']}")
        return ok()

    if kind == "event":
        wanted = expect["kind"]
        events = [m["payload"] for m in collected
                  if m["type"] == "execution_event"]
        if expect.get("last"):
            terminals = [e for e in events
                         if e["kind"] in ("PlanSucceeded", "PlanFailed",
                                          "Preempted")]
            if not terminals or terminals[-1]["kind"] != wanted:
                got = terminals[-1]["kind"] if terminals else "none"
                return fail(f"last terminal={got}, wanted {wanted}")
            return ok()
        if not any(e["kind"] == wanted for e in events):
            return fail(f"no {wanted} event seen")
        return ok()

    if kind == "pose":
        oid = expect["object"]
        tol = float(expect.get("tol", 1e-6))
        inst = session.world.objects.get(oid)
        if inst is None:
            return fail(f"object {oid} not in world")
        pose = inst.pose
        for axis in ("x", "y", "z"):
            if axis in expect:
                got = getattr(pose, axis)
                if abs(got - float(expect[axis])) > tol:
                    return fail(f"{axis}={got:.6f}, wanted "
                                f"{float(expect[axis]):.6f} (tol {tol})")
        return ok()

    if kind == "supported_by":
        oid = expect["object"]
        inst = session.world.objects.get(oid)
        if inst is None:
            return fail(f"object {oid} not in world")
        if inst.supported_by != expect["support"]:
            return fail(f"supported_by={inst.supported_by}, "
                        f"wanted {expect['support']}")
        return ok()

    if kind == "hit":
        msg = _latest(collected, "hit")
        if msg is None:
            return fail("no hit response seen")
        got = msg["payload"].get("object_id")
        if got != expect.get("object"):
            return fail(f"hit={got}, wanted {expect.get('object')}")
        return ok()

    if kind == "preview":
        msg = _latest(collected, "preview_timeline")
        if msg is None:
            return fail("no preview seen")
        frames = msg["payload"]["frames"]
        if "min_frames" in expect and len(frames) < expect["min_frames"]:
            return fail(f"{len(frames)} frames < {expect['min_frames']}")
        if expect.get("monotone"):
            ts = [f["t"] for f in frames]
            if any(b < a for a, b in zip(ts, ts[1:])):
                return fail("timestamps not monotone")
        return ok()

    if kind == "fill":
        oid = expect["object"]
        inst = session.world.objects.get(oid)
        if inst is None:
            return fail(f"object {oid} not in world")
        tol = float(expect.get("tol", 1e-9))
        if abs(inst.fill_level - float(expect["level"])) > tol:
            return fail(f"fill_level={inst.fill_level}, wanted {expect['level']}")
        return ok()

    if kind == "color":
        oid = expect["object"]
        inst = session.world.objects.get(oid)
        if inst is None:
            return fail(f"object {oid} not in world")
        if inst.color_state != expect["state"]:
            return fail(f"color={inst.color_state}, wanted {expect['state']}")
        return ok()

    return fail(f"unknown assertion type {kind!r}")


def replay(scenario_path: str) -> ReplayReport:
    return ScenarioRunner(scenario_path).run()
