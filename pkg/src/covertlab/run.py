"""
Batch entry point for the simulator sweep.

Behaviour:
- Runs the achievability experiment over a ladder of blocklengths
- Writes the table to: outputs/sweep_run/sweep_results.csv
- Generates the Markdown and HTML report next to it.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional

from . import noise_models as nm
from .noise_models import NoiseModel
from .reporting.html_builder import build_html
from .reporting.sweep_report_md import generate_sweep_report
from .settings import DEFAULT_RATE_FRACTION, DEFAULT_SEED, DEFAULT_TRIALS, SWEEP_CSV_NAME, SWEEP_OUTPUT_DIR
from .simulator import sweep

logger = logging.getLogger(__name__)

DEFAULT_N_VALUES = (256, 1024, 4096)


def run_sweep_batch(
    model: Optional[NoiseModel] = None,
    delta: float = 1.0,
    n_values: Iterable[int] = DEFAULT_N_VALUES,
    rate_fraction: float = DEFAULT_RATE_FRACTION,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    output_dir: Path = SWEEP_OUTPUT_DIR,
) -> Path:
    """Run the sweep and write its CSV; returns the CSV path."""
    model = model or nm.exponential(1.0)
    output_dir.mkdir(parents=True, exist_ok=True)

    frame = sweep(model, delta, list(n_values), rate_fraction, trials, seed)
    out_csv = output_dir / SWEEP_CSV_NAME
    frame.to_csv(out_csv, index=False, float_format="%.12g", lineterminator="\n")
    logger.info("Sweep of %s over n=%s written to %s", model, list(frame["n"]), out_csv)
    return out_csv


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    model = nm.exponential(1.0)
    delta = 1.0

    print(f"Running sweep for {model}, delta={delta:g}, n={list(DEFAULT_N_VALUES)}")
    sweep_csv = run_sweep_batch(model, delta)
    print(f"Wrote sweep results to: {sweep_csv}")

    report_md_path = generate_sweep_report(sweep_csv, SWEEP_OUTPUT_DIR, model=str(model), delta=delta)
    print(f"Wrote Markdown report to: {report_md_path}")

    html_path = build_html(report_md_path, SWEEP_OUTPUT_DIR)
    print(f"Wrote HTML report to: {html_path}")


if __name__ == "__main__":
    main()
