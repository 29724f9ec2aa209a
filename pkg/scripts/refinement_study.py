"""How the analytic prism-stack estimate of nu approaches 1 as the patch shrinks.

The deviation from 1 comes from treating the small patch as a point on the
sphere; it falls off with the patch area, not with the number of shells.
"""

import math

from mpsberry import experiments as ex
from mpsberry.config import RunConfig


def main():
    print("n_shells  patch_scale  nu")
    for n in (25, 50, 100, 200):
        for scale in (1.0, 0.5, 0.25):
            cfg = RunConfig(n_shells=n, analytic=True, dtheta=scale * math.pi / 100,
                            dphi=scale * 2 * math.pi / 100)
            print(f"{n:8d}  {scale:11.2f}  {ex.run_fixed_couplings(cfg).nu:.10f}")


if __name__ == "__main__":
    main()
