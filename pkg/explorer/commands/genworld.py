"""`genworld`: write a seeded maze world file."""
import argparse
from pathlib import Path

from loguru import logger

from explorer.core.config import settings
from explorer.services.sensor_world import dump_world
from explorer.services.worldgen import WorldKind, generate_world


def register(subparsers: "argparse._SubParsersAction") -> None:
    parser = subparsers.add_parser("genworld", help="Generate a maze world file")
    parser.add_argument(
        "--kind", choices=[k.value for k in WorldKind], default=WorldKind.DESK.value
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="World file (default: <out dir>/<kind>_<seed>.world)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    world = generate_world(args.kind, args.seed)
    default = Path(settings.DEFAULT_OUT_DIR) / f"{args.kind}_{args.seed}.world"
    out = Path(args.out) if args.out else default
    out.parent.mkdir(parents=True, exist_ok=True)
    text = dump_world(world, header=f"{args.kind} maze, seed {args.seed}")
    out.write_text(text, encoding="utf-8")
    logger.info(f"Wrote world to {out}")
    return 0
