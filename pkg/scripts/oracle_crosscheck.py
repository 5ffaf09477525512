"""Cross-check the Gaussian engine against the truncated Fock-space oracle.

Prints every comparison with its deviation and bound; exits non-zero on failure.

    python scripts/oracle_crosscheck.py --max-gamma 0.4 --cutoff 14
"""

from __future__ import annotations

import argparse
import sys

from polbell import experiment


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-gamma", type=float, default=0.4)
    ap.add_argument("--cutoff", type=int, default=14)
    args = ap.parse_args(argv)

    rep = experiment.run_validate(args.max_gamma, args.cutoff)
    for c in rep["checks"]:
        flag = "ok  " if c["passed"] else "FAIL"
        print(f"{flag} {c['name']:40s} dev {c['deviation']:.2e}  bound {c['bound']:.2e}")
    print("PASS" if rep["passed"] else f"FAIL: {', '.join(rep['failed'])}")
    return 0 if rep["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
