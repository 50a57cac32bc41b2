#!/usr/bin/env python3
"""Run every experiment with default parameters into results/<experiment>/."""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from dotenv import load_dotenv

from src.errors import HalfsphereError, exit_code_for
from src.runner.config import EXPERIMENTS, config_from_dict
from src.runner.dispatch import dispatch_run
from src.runner.reports import write_outputs

RESULTS_DIR = Path(__file__).resolve().parents[1] / "results"


def main():
    load_dotenv()
    worst = 0
    for name in EXPERIMENTS:
        out_dir = RESULTS_DIR / name
        print(f"Running {name}...")
        start = time.perf_counter()
        try:
            report = dispatch_run(config_from_dict({"experiment": name, "output_dir": str(out_dir)}))
            write_outputs(report, out_dir)
        except HalfsphereError as e:
            print(f"  FAILED: {e}")
            worst = max(worst, exit_code_for(e))
            continue

        elapsed = time.perf_counter() - start
        passed = sum(a.passed for a in report.assertions)
        print(f"  {passed}/{len(report.assertions)} assertions passed ({elapsed:.1f}s)")
        for a in report.assertions:
            if not a.passed:
                print(f"  [{a.name}] observed={a.observed} tolerance={a.tolerance} {a.detail}")
                worst = max(worst, 1)

    print(f"\nResults in {RESULTS_DIR}")
    sys.exit(worst)


if __name__ == "__main__":
    main()
