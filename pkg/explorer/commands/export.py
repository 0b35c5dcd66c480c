"""`export`: convert a saved occupancy map to PLY or CSV."""
import argparse
from pathlib import Path

from loguru import logger

from explorer.services.exports import load_map_npz, write_ply, write_voxels_csv


def register(subparsers: "argparse._SubParsersAction") -> None:
    parser = subparsers.add_parser("export", help="Export occupied voxels of a map.npz")
    parser.add_argument("--map", required=True, help="map.npz written by `explore`")
    parser.add_argument("--format", choices=["ply", "csv"], default="ply")
    parser.add_argument("--out", help="Output file (default: next to the map)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    source = Path(args.map)
    voxels = load_map_npz(source)
    out = Path(args.out) if args.out else source.with_suffix(f".{args.format}")
    if args.format == "ply":
        write_ply(out, voxels)
    else:
        write_voxels_csv(out, voxels)
    logger.info(f"Exported {len(voxels)} occupied voxels to {out}")
    return 0
