#!/usr/bin/env python3
"""Build a small synthetic asset corpus + manifest for trying the CLI.

Usage:
    python scripts/make_demo_assets.py demo_assets/ [--seed 0]
    acsim generate --manifest demo_assets/assets.jsonl --out demo_set --count 10
"""

import argparse

from acsim.synth import build_demo_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", help="directory to write assets + manifest into")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--speakers", type=int, default=4)
    args = ap.parse_args()
    manifest = build_demo_corpus(args.out_dir, seed=args.seed,
                                 n_speakers=args.speakers)
    print(f"wrote {manifest}")


if __name__ == "__main__":
    main()
