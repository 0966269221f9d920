"""Freeze reduction-oracle values at common-sigma points (the classical product case).

The values come from the quadrature recursion, not from the gamma closed forms,
so the test that reads them is an independent regression oracle.
Run once with ``python3 scripts/make_closed_form_golden.py``; the output is checked in.
"""

import json
from pathlib import Path

from matbeta.closed_form import ParamSet
from matbeta.mc_verify import reduction_oracle

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "closed_form_golden.json"

# family -> (lam, common sigma at the centre of the neighbourhood)
CENTRES = {"F0_1": ((3.0, 2.0), 7.0), "F0_2": ((4.0, 3.0), 9.0), "F0_3": ((7.0, 5.0), 16.0)}
OFFSETS = (-0.25, -0.1, 0.0, 0.1, 0.25)


def main():
    rows = []
    for fid, (lam, sig0) in CENTRES.items():
        for d in OFFSETS:
            sig = sig0 + d
            ps = ParamSet(lam, (sig, sig))
            val = reduction_oracle(fid, ps, tol=1e-12)
            rows.append({"family": fid, "lambda": list(lam), "sigma": [sig, sig],
                         "value": repr(val.real)})
    OUT.write_text(json.dumps({"source": "reduction_oracle", "rows": rows}, indent=1) + "\n")
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
