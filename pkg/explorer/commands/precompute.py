"""`precompute`: dump the bundle samples and time the precomputation."""
import argparse
import time
from pathlib import Path

import numpy as np
from loguru import logger

from explorer.core.config import load_run_config, settings
from explorer.services.exports import write_bundle_csv
from explorer.services.peacock import log_bundle, precompute_bundle


def register(subparsers: "argparse._SubParsersAction") -> None:
    parser = subparsers.add_parser("precompute", help="Precompute the peacock bundle and time it")
    parser.add_argument("--config", help="Flat run config (defaults when omitted)")
    parser.add_argument("--out", help="Bundle samples CSV (default: <out dir>/bundle.csv)")
    parser.add_argument("--runs", type=int, default=None, help="Timed repetitions")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    runs = max(1, args.runs or settings.PRECOMPUTE_TIMING_RUNS)

    timings = []
    bundle = None
    for _ in range(runs):
        started = time.perf_counter()
        bundle = precompute_bundle(config.bundle)
        timings.append((time.perf_counter() - started) * 1000.0)
    log_bundle(bundle)

    out = Path(args.out) if args.out else Path(settings.DEFAULT_OUT_DIR) / "bundle.csv"
    write_bundle_csv(out, bundle)
    logger.info(f"Wrote {bundle.first_step_count} first steps to {out}")

    samples = np.array(timings)
    print(
        f"precompute: first_steps={bundle.first_step_count} "
        f"second_steps={bundle.second_step_count} "
        f"runs={runs} median_ms={np.median(samples):.3f} p90_ms={np.percentile(samples, 90):.3f} "
        f"max_ms={samples.max():.3f}"
    )
    return 0
