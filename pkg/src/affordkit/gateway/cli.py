"""Command line entry points: serve, validate, evaluate, replay, maps."""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import AffordkitError
from ..executor.events import FaultProfile
from ..feasibility.engine import FeasibilityEngine, param_from_dict


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="affordkit",
        description="Affordance feasibility engine for a simulated mobile "
                    "manipulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the interactive gateway")
    p_serve.add_argument("--scene", required=True)
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--fault", default=None,
                         help="fault profile JSON, e.g. "
                              '\'{"step_failure_prob": 0.2, "seed": 7}\'')
    p_serve.add_argument("--catalog", default=None,
                         help="explanation catalog JSON path")
    p_serve.add_argument("--shared", action="store_true",
                         help="all clients join one session")
    p_serve.add_argument("--speed", type=float, default=None,
                         help="simulation speed multiple of real time "
                              "(default: unbounded)")

    p_validate = sub.add_parser("validate", help="load and validate a scene")
    p_validate.add_argument("scene")

    p_eval = sub.add_parser("evaluate",
                            help="evaluate a command file against a scene")
    p_eval.add_argument("scene")
    p_eval.add_argument("commands")

    p_replay = sub.add_parser("replay", help="run a scripted scenario")
    p_replay.add_argument("scenario")

    p_maps = sub.add_parser("maps", help="export occupancy/reach graymaps")
    p_maps.add_argument("scene")
    p_maps.add_argument("--robot", default=None)
    p_maps.add_argument("--out", default="maps")
    p_maps.add_argument("--reach", action="store_true")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except AffordkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "serve":
        from .service import ServeConfig, serve

        profile = FaultProfile.from_dict(json.loads(args.fault)) \
            if args.fault else FaultProfile()
        serve(ServeConfig(
            scene_path=args.scene, port=args.port, host=args.host,
            fault_profile=profile, catalog_path=args.catalog,
            shared=args.shared, sim_speed=args.speed))
        return 0

    if args.command == "validate":
        from ..world.loader import load_scene_file

        world = load_scene_file(args.scene)
        print(f"ok: {len(world.objects)} objects, "
              f"{len(world.robot_specs)} robots, "
              f"{len(world.statics)} statics, {len(world.doors)} doors")
        return 0

    if args.command == "evaluate":
        from ..world.loader import load_scene_file

        world = load_scene_file(args.scene)
        with open(args.commands, "r", encoding="utf-8") as fh:
            commands = json.load(fh)
        engine = FeasibilityEngine()
        failures = 0
        for command in commands:
            verdict = engine.evaluate(
                world, command["object"], command["action"],
                param_from_dict(command.get("param")))
            record = verdict.to_dict()
            record["object"] = command["object"]
            record["action"] = command["action"]
            print(json.dumps(record, sort_keys=True))
            if not verdict.feasible:
                failures += 1
        return 0

    if args.command == "replay":
        from .replay import replay

        report = replay(args.scenario)
        for line in report.lines():
            print(line)
        return 0 if report.ok else 1

    if args.command == "maps":
        from ..spatial.reach import export_maps
        from ..world.loader import load_scene_file

        world = load_scene_file(args.scene)
        robot_ids = [args.robot] if args.robot else world.robot_ids()
        written = []
        for rid in robot_ids:
            written += export_maps(world, world.robot_specs[rid], args.out,
                                   with_reach=args.reach)
        for path in written:
            print(path)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
