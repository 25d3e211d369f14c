#!/usr/bin/env python3
"""Run the full desk-scale pipeline on the demo cohort and render figures.

Equivalent to chaining every CLI command; add --render to also produce
the figure set from the bundled artifacts (needs the cogviz package).

    python scripts/run_demo_pipeline.py --out runs/demo --seed 7 --render
"""

import argparse
import subprocess
import sys
from pathlib import Path

COMMANDS = ("synth", "preprocess", "connect", "select", "label", "train", "evaluate", "report")

PLOTS = (
    ("chord", ["edges_top.json"]),
    ("heatmap", ["overall_matrix.json"]),
    ("headmap", ["edges_top.json"]),
    ("psd", ["psd.json"]),
    ("curves", ["curves.json"]),
    ("boxplot", ["report.json"]),
)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="runs/demo")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--folds", type=int, default=2)
    parser.add_argument("--train-epochs", type=int, default=8)
    parser.add_argument("--render", action="store_true", help="render figures with cogviz")
    args = parser.parse_args()

    base = ["--out", args.out, "--seed", str(args.seed), "--folds", str(args.folds),
            "--split", "epoch", "--train-epochs", str(args.train_epochs)]
    for command in COMMANDS:
        print(f"== cogstate {command}")
        subprocess.run([sys.executable, "-m", "cogstate.cli", command, *base], check=True)

    if args.render:
        bundle = Path(args.out) / "report"
        figures = Path(args.out) / "figures"
        for kind, inputs in PLOTS:
            cmd = [sys.executable, "-m", "cogviz.cli", "plot", kind,
                   "--in", *[str(bundle / name) for name in inputs],
                   "--out", str(figures / f"{kind}.png")]
            if kind == "headmap":
                cmd += ["--montage", str(bundle / "montage.json")]
            print(f"== cogviz plot {kind}")
            subprocess.run(cmd, check=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
