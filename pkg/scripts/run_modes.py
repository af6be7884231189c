"""Run the four shipped operating-mode scenarios and print a summary table.

Usage:
    python3 scripts/run_modes.py [--configs DIR] [--out DIR]

With --out, the full 60 s log of every mode is written to DIR/<mode>.csv.
"""

import argparse
import csv
import time
from pathlib import Path

from polyplant import load_plant, load_scenario, run

MODES = ("sep", "wep", "sec", "wec")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default="configs", help="config directory")
    ap.add_argument("--out", default=None, help="write per-mode CSV logs here")
    args = ap.parse_args()

    cfg = Path(args.configs)
    plant = load_plant(str(cfg / "plant.json"))

    print(f"{'mode':<6} {'minutes':>8} {'reason':<10} {'records':>8} "
          f"{'audit htes':>11} {'audit ctes':>11} {'wall s':>7}")
    for mode in MODES:
        scenario = load_scenario(str(cfg / f"scenario_{mode}.json"))
        t0 = time.perf_counter()
        log = run(plant, scenario)
        wall = time.perf_counter() - t0
        print(f"{mode.upper():<6} {log.termination_time / 60.0:>8.1f} "
              f"{log.termination_reason:<10} {log.records.shape[0]:>8d} "
              f"{log.audit['htes']['relative_residual']:>11.2e} "
              f"{log.audit['ctes']['relative_residual']:>11.2e} "
              f"{wall:>7.2f}")

        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / f"{mode}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(log.channels)
                w.writerows(log.records.tolist())


if __name__ == "__main__":
    main()
