"""Regenerate the arbitrary-precision Gamma reference table used by the tests.

Run once with ``python3 scripts/make_gamma_table.py``; the output is checked in.
"""

import json
from pathlib import Path

import mpmath
import numpy as np

mpmath.mp.dps = 40
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "gamma_reference.json"


def main():
    rng = np.random.default_rng(20240601)
    points = [complex(x, y) for x, y in zip(rng.uniform(0.5, 50, 300), rng.uniform(-50, 50, 300))]
    # a few left half plane and boundary points for the reflection branch
    points += [complex(x, y) for x, y in zip(rng.uniform(-12, 0.5, 60), rng.uniform(-10, 10, 60))]
    points += [0.5, 1.0, 5.0, 1 + 1j, 0.5 + 50j, 50 - 50j]
    rows = []
    for z in points:
        g = mpmath.gamma(mpmath.mpc(z.real, z.imag))
        rows.append({
            "z": [repr(z.real), repr(z.imag)],
            "gamma": [mpmath.nstr(g.real, 30), mpmath.nstr(g.imag, 30)],
        })
    OUT.write_text(json.dumps({"dps": 30, "rows": rows}, indent=1) + "\n")
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
