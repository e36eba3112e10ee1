"""Run every CLI command on one input and collect the outputs under one directory.

    python scripts/run_pipeline.py --input WPP2015.csv --out results/
    python scripts/run_pipeline.py --fixtures-only --out results/
"""
import argparse
import sys

from epitome.cli import main as cli

DEFAULT_TRAJECTORY = "India,Algeria,Peru,Colombia,Argentina,New Zealand,Uruguay,Puerto Rico,Japan"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--fixtures-only", action="store_true")
    ap.add_argument("--out", default="results")
    ap.add_argument("--trajectory", default=DEFAULT_TRAJECTORY, help="comma list of entities")
    args = ap.parse_args()

    base = ["--fixtures-only", "--world-years", "2015"] if args.fixtures_only else ["--input", args.input]
    steps = [
        ["epitome", *base],
        ["map", *base],
        ["pyramid", *base, "--entity", "World"],
    ]
    if args.fixtures_only:
        steps.append(["cluster", *base, "--clusters", "3"])
        steps.append(["trajectory", *base, "--entities", "Colombia,Sri Lanka,Brazil,Thailand,Pakistan"])
    else:
        steps.append(["cluster", *base])
        steps.append(["trajectory", *base, "--entities", args.trajectory])
    for step in steps:
        code = cli(step + ["--out", f"{args.out}/{step[0]}"])
        if code:
            print(f"step {step[0]} failed with exit status {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
