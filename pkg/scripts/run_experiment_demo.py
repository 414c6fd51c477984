#!/usr/bin/env python3
"""Run the simulated-agent experiment end to end and print the recovered
treatment effects next to the effect sizes the simulator plants.

Usage: python3 scripts/run_experiment_demo.py [--n 876] [--seed 0]
"""

import argparse
import tempfile
from pathlib import Path

import pandas as pd

from sonder.cli import main as cli_main
from sonder.simulate import AgentBehavior


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=876)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None,
                        help="keep exports here instead of a temp dir")
    args = parser.parse_args()

    behavior = AgentBehavior()
    planted = {
        "o2_max_rank": behavior.rank_shift,
        "o2_mean_click_completeness": behavior.completeness_shift,
        "o1_fact_resistance": behavior.fact_resistance_shift,
    }

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(args.out) if args.out else Path(tmp) / "sim"
        code = cli_main(["simulate", "--n", str(args.n),
                         "--seed", str(args.seed), "--out", str(out)])
        if code != 0:
            raise SystemExit(code)
        effects = pd.read_csv(out / "effects.csv")
        print()
        print("planted vs estimated:")
        for _, row in effects.iterrows():
            target = planted.get(row["outcome"])
            if target is None:
                continue
            print(f"  {row['outcome']:<28} planted {target:+.3f}  "
                  f"estimated {row['beta_treatment']:+.3f} "
                  f"(se {row['se']:.3f})")


if __name__ == "__main__":
    main()
