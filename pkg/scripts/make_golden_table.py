"""Regenerate the golden verification table (every family at minimal rank, preset seed).

Run with ``python3 scripts/make_golden_table.py``; the output is checked in and
the tests compare a fresh run against it byte for byte.
"""

from pathlib import Path

from matbeta.cli import main

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "golden_table.json"


if __name__ == "__main__":
    code = main(["table", "--output", str(OUT)])
    print(f"wrote {OUT} (exit {code})")
