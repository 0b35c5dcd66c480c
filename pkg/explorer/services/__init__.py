"""Services package initialization."""
from .mission import MissionRunner, compute_summary, run_mission
from .peacock import precompute_bundle, transform_bundle_samples
from .planner import plan_step, score_bundle, select_best
from .sensor_world import clearance, depth_to_points, load_world, raycast, render_depth
from .trajgen import evaluate, solve_min_snap_segment
from .vehicle import follow_exact, geometric_control, step_dynamics, track
from .voxmap import OccupancyOctree
from .worldgen import generate_world

__all__ = [
    "MissionRunner",
    "OccupancyOctree",
    "clearance",
    "compute_summary",
    "depth_to_points",
    "evaluate",
    "follow_exact",
    "generate_world",
    "geometric_control",
    "load_world",
    "plan_step",
    "precompute_bundle",
    "raycast",
    "render_depth",
    "run_mission",
    "score_bundle",
    "select_best",
    "solve_min_snap_segment",
    "step_dynamics",
    "track",
    "transform_bundle_samples",
]
