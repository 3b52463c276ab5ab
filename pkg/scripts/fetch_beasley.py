#!/usr/bin/env python3
"""Fetch the OR-Library bqp benchmark files and split them per instance.

The published files are containers: the first line holds the instance
count, followed by one ``n nnz`` header plus triplet block per
instance.  This script downloads bqp100/bqp250/bqp500 and writes
single-instance files (bqp100-1.sparse, ...) in the format the binopt
parser expects.

Usage:  python scripts/fetch_beasley.py [dest_dir]

Requires internet access to people.brunel.ac.uk.  The acceptance test
for benchmark gaps looks for the files under data/beasley (or
$BINOPT_BEASLEY_DIR).
"""

import sys
import urllib.request
from pathlib import Path

BASE_URL = "http://people.brunel.ac.uk/~mastjjb/jeb/orlib/files"
SETS = {"bqp100": 100, "bqp250": 250, "bqp500": 500}


def split_container(text: str, family: str, expected_n: int, dest: Path) -> int:
    tokens = text.split()
    pos = 0
    count = int(tokens[pos]); pos += 1
    for idx in range(1, count + 1):
        n, nnz = int(tokens[pos]), int(tokens[pos + 1])
        pos += 2
        if n != expected_n:
            raise ValueError(f"{family} instance {idx}: expected n={expected_n}, got {n}")
        lines = [f"{n} {nnz}"]
        for _ in range(nnz):
            i, j, v = tokens[pos], tokens[pos + 1], tokens[pos + 2]
            pos += 3
            lines.append(f"{i} {j} {v}")
        out = dest / f"{family}-{idx}.sparse"
        out.write_text("\n".join(lines) + "\n")
    if pos != len(tokens):
        raise ValueError(f"{family}: trailing tokens after {count} instances")
    return count


def main() -> int:
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/beasley")
    dest.mkdir(parents=True, exist_ok=True)
    for family, n in SETS.items():
        url = f"{BASE_URL}/{family}.txt"
        print(f"fetching {url} ...")
        with urllib.request.urlopen(url, timeout=60) as resp:
            text = resp.read().decode("ascii")
        count = split_container(text, family, n, dest)
        print(f"  wrote {count} instances to {dest}/{family}-*.sparse")
    return 0


if __name__ == "__main__":
    sys.exit(main())
