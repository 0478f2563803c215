#!/usr/bin/env python3
"""Emit the uncertainty-loss curve families as CSV series.

Writes four files: Gaussian NLL over s for several squared residuals,
the same for several regularization weights, and the von-Mises NLL over
s for several cosine residuals and regularization weights.

    python scripts/make_loss_curves.py --out-dir curves/
"""

import argparse
import sys
from pathlib import Path

from uatrack.cli import main as uatrack_main


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="curves")
    args = parser.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [
        (["plot-data", "gaussian", "--d2", "1.0", "--lambda-g", "1.0",
          "--out", str(out / "gaussian_residuals_d1.csv")]),
        (["plot-data", "gaussian", "--d2", "1.0", "--lambda-g", "0.25,0.5,1.0,2.0,4.0",
          "--out", str(out / "gaussian_lambda_family.csv")]),
        (["plot-data", "von-mises", "--cos", "0.5", "--lambda-v", "0.0",
          "--out", str(out / "von_mises_unregularized.csv")]),
        (["plot-data", "von-mises", "--cos", "0.5", "--lambda-v", "0.5,1.0,2.0", "--s0", "1.0",
          "--out", str(out / "von_mises_lambda_family.csv")]),
    ]
    for job in jobs:
        rc = uatrack_main(job)
        if rc != 0:
            return rc
        print("wrote", job[-1])
    return 0


if __name__ == "__main__":
    sys.exit(main())
