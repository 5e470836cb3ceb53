"""Single-chain geodesic HMC on the Bingham-von Mises-Fisher target.

Writes one x-trace per c1 value and prints how often x5 changes sign.
"""

from pathlib import Path

import numpy as np
from _common import parser, run

from geomc.datasets import read_trace


def main(name="figure4"):
    args = parser(name, __doc__).parse_args()
    cfg, summary = run(args)
    print(f"{'c1':>6} {'accept':>7} {'x5 flips':>9} {'mean x5':>8}")
    for r in summary["runs"]:
        x5 = read_trace(Path(cfg.output) / r["trace"]).samples[:, -1]
        s = np.sign(x5[x5 != 0])
        print(f"{r['c1']:6g} {r['acceptance_rate']:7.3f} {int(np.sum(s[1:] != s[:-1])):9d} {x5.mean():8.3f}")
        if "swap_rate" in r:
            print("       swap rates " + " ".join(f"{v:.2f}" for v in r["swap_rate"]))
    print(f"traces in {cfg.output}")


if __name__ == "__main__":
    main()
