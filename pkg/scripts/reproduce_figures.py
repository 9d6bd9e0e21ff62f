"""Write CSV/JSON data for figures 1, 2, 3 and 5 for both parameter sets."""

import argparse
import sys

from starkbragg.cli import main


def run(out: str) -> int:
    for fid in ("1", "2", "3", "5"):
        for extra in ([], ["--use-paper-overrides"]):
            code = main(["figure", fid, "--out", out, *extra])
            if code:
                return code
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/figures")
    sys.exit(run(ap.parse_args().out))
