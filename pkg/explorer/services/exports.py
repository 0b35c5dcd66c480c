"""Run artifacts: CSV logs, map files and rendered reports."""
import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader
from loguru import logger

from explorer.models.bundle import PeacockBundle
from explorer.models.mapping import OccupiedVoxel
from explorer.models.mission import MetricSample, MissionMetrics, PathPoint, PlannerLogEntry
from explorer.models.world import World
from explorer.schemas.mission import MissionSummary
from explorer.services.peacock import bundle_sample_rows
from explorer.services.voxmap import OccupancyOctree

PathLike = Union[str, Path]

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

METRICS_COLUMNS = [
    "t", "x", "y", "z", "vx", "vy", "vz", "yaw", "path_length_m",
    "free_m3", "occ_m3", "known_m3", "cycle", "score", "blocked_count", "plan_ms",
]  # fmt: skip
PATH_COLUMNS = ["t", "x", "y", "z", "phase"]
PLANNER_COLUMNS = ["cycle", "row", "col", "max_score", "blocked", "plan_ms"]
BUNDLE_COLUMNS = ["step", "row", "col", "branch", "t", "x", "y", "z"]
VOXEL_COLUMNS = ["x", "y", "z", "probability", "size"]

_environment = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=False,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _f(value: float) -> str:
    return f"{value:.6f}"


def _write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


# CSV logs


def write_metrics_csv(path: PathLike, series: Sequence[MetricSample]) -> Path:
    rows = (
        [
            _f(s.t), *map(_f, s.position), *map(_f, s.velocity), _f(s.yaw), _f(s.path_length),
            _f(s.free_volume), _f(s.occupied_volume), _f(s.known_volume),
            s.cycle, _f(s.score), s.blocked_count, _f(s.plan_ms),
        ]  # fmt: skip
        for s in series
    )
    return _write_rows(path, METRICS_COLUMNS, rows)


def write_path_csv(path: PathLike, points: Sequence[PathPoint]) -> Path:
    rows = ([_f(p.t), *map(_f, p.position), p.phase] for p in points)
    return _write_rows(path, PATH_COLUMNS, rows)


def write_planner_csv(path: PathLike, entries: Sequence[PlannerLogEntry]) -> Path:
    rows = (
        [
            e.cycle,
            "" if e.row is None else e.row,
            "" if e.col is None else e.col,
            _f(e.max_score),
            e.blocked_count,
            f"{e.wall_ms:.3f}",
        ]
        for e in entries
    )
    return _write_rows(path, PLANNER_COLUMNS, rows)


def write_bundle_csv(path: PathLike, bundle: PeacockBundle) -> Path:
    rows = (
        [step, row, col, branch, f"{t:.6f}", f"{x:.9f}", f"{y:.9f}", f"{z:.9f}"]
        for step, row, col, branch, t, x, y, z in bundle_sample_rows(bundle)
    )
    return _write_rows(path, BUNDLE_COLUMNS, rows)


# Map artifact


def save_map_npz(path: PathLike, octree: OccupancyOctree) -> Path:
    """Occupied voxels plus map metadata, the input of the `export` command."""
    voxels = octree.export_occupied()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    free, occupied = octree.mapped_volumes()
    np.savez(
        path,
        centers=np.array([v.center for v in voxels], dtype=float).reshape(-1, 3),
        probabilities=np.array([v.probability for v in voxels], dtype=float),
        sizes=np.array([v.size for v in voxels], dtype=float),
        resolution=np.array(octree.resolution),
        volumes=np.array([free, occupied]),
    )
    return path


def load_map_npz(path: PathLike) -> List[OccupiedVoxel]:
    with np.load(Path(path)) as data:
        centers = data["centers"].reshape(-1, 3)
        probabilities = data["probabilities"]
        sizes = data["sizes"]
    return [
        OccupiedVoxel((float(c[0]), float(c[1]), float(c[2])), float(p), float(s))
        for c, p, s in zip(centers, probabilities, sizes)
    ]


def render_ply(voxels: Sequence[OccupiedVoxel]) -> str:
    return _environment.get_template("map.ply.j2").render(voxels=voxels)


def write_ply(path: PathLike, voxels: Sequence[OccupiedVoxel]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_ply(voxels), encoding="utf-8")
    return path


def write_voxels_csv(path: PathLike, voxels: Sequence[OccupiedVoxel]) -> Path:
    rows = ([*map(_f, v.center), _f(v.probability), _f(v.size)] for v in voxels)
    return _write_rows(path, VOXEL_COLUMNS, rows)


# Reports


def render_summary(summary: MissionSummary) -> str:
    return _environment.get_template("summary.txt.j2").render(summary=summary)


def render_topdown_svg(
    world: World, voxels: Sequence[OccupiedVoxel], path: Sequence[PathPoint], width: int = 600
) -> str:
    """Occupied voxels projected onto XY with the flown path on top (y axis up)."""
    lo = world.bounds.minimum
    extent = world.bounds.size
    scale = width / max(float(extent[0]), float(extent[1]))
    height = int(round(float(extent[1]) * scale))

    def to_px(x: float, y: float):
        return (x - lo[0]) * scale, height - (y - lo[1]) * scale

    footprint = {}
    for voxel in voxels:
        key = (round(voxel.center[0], 6), round(voxel.center[1], 6), voxel.size)
        footprint[key] = voxel
    cells = []
    for (cx, cy, size) in sorted(footprint):
        x, y = to_px(cx - size / 2.0, cy + size / 2.0)
        cells.append({"x": x, "y": y, "size": size * scale})
    polyline = [to_px(p.position[0], p.position[1]) for p in path]
    return _environment.get_template("topdown.svg.j2").render(
        width=width, height=height, cells=cells, path=polyline
    )


def render_volume_svg(series: Sequence[MetricSample], width: int = 600, height: int = 360) -> str:
    margin = 40
    t_max = max((s.t for s in series), default=0.0)
    v_max = max((s.known_volume for s in series), default=0.0)
    span_x = width - 2 * margin
    span_y = height - 2 * margin
    points = [
        (
            margin + (s.t / t_max if t_max > 0 else 0.0) * span_x,
            height - margin - (s.known_volume / v_max if v_max > 0 else 0.0) * span_y,
        )
        for s in series
    ]
    return _environment.get_template("volume.svg.j2").render(
        width=width, height=height, margin=margin, points=points, t_max=t_max, v_max=v_max
    )


def write_mission_artifacts(
    out_dir: PathLike, metrics: MissionMetrics, octree: OccupancyOctree, world: World
) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    voxels = octree.export_occupied()
    written = {
        "metrics": write_metrics_csv(out / "metrics.csv", metrics.series),
        "path": write_path_csv(out / "path.csv", metrics.path),
        "planner": write_planner_csv(out / "planner.csv", metrics.planner_log),
        "map_npz": save_map_npz(out / "map.npz", octree),
        "map_ply": write_ply(out / "map.ply", voxels),
    }
    reports = {
        "summary": ("summary.txt", render_summary(metrics.summary)),
        "topdown": ("topdown.svg", render_topdown_svg(world, voxels, metrics.path)),
        "volume": ("volume.svg", render_volume_svg(metrics.series)),
    }
    for name, (filename, text) in reports.items():
        target = out / filename
        target.write_text(text, encoding="utf-8")
        written[name] = target
    logger.info(f"Wrote {len(written)} artifacts to {out}")
    return written
