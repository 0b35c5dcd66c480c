"""`explore`: run one exploration mission and write its artifacts."""
import argparse
from pathlib import Path

from loguru import logger

from explorer.core.config import dump_run_config, load_run_config, settings
from explorer.services.exports import write_mission_artifacts
from explorer.services.mission import MissionRunner
from explorer.services.sensor_world import load_world_file


def register(subparsers: "argparse._SubParsersAction") -> None:
    parser = subparsers.add_parser("explore", help="Explore a world and write run artifacts")
    parser.add_argument("--world", required=True, help="World file")
    parser.add_argument("--config", help="Flat run config (defaults when omitted)")
    parser.add_argument("--seed", type=int, default=None, help="Overrides mission.seed")
    parser.add_argument("--out", help="Run directory (default: <out dir>/explore)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    world = load_world_file(args.world)
    config = load_run_config(args.config)
    if args.seed is not None:
        mission = config.mission.model_copy(update={"seed": args.seed})
        config = config.model_copy(update={"mission": mission})

    out = Path(args.out) if args.out else Path(settings.DEFAULT_OUT_DIR) / "explore"
    runner = MissionRunner(world, config)
    metrics = runner.run()
    write_mission_artifacts(out, metrics, runner.octree, world)
    (out / "config.txt").write_text(dump_run_config(config), encoding="utf-8")

    outcome = metrics.summary.outcome
    if outcome is None or not outcome.is_success:
        logger.error(f"Mission ended with {outcome.value if outcome else 'no outcome'}")
        return 1
    return 0
