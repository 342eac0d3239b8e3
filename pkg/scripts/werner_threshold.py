"""Bisect the Werner separability threshold with the ellipsoid criterion and compare with PPT."""

import argparse

import numpy as np

from qsteer.ellipsoid import ellipsoid_A, ellipsoid_data
from qsteer.qstate import to_theta, werner
from qsteer.separability import geometric_criterion, is_entangled_ppt


def entangled(p):
    c, Q = ellipsoid_data(to_theta(werner(p)))
    return geometric_criterion(c, Q) < 0


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--tol", type=float, default=1e-12)
    args = p.parse_args()

    lo, hi = 0.0, 1.0
    while hi - lo > args.tol:
        mid = (lo + hi) / 2
        lo, hi = (lo, mid) if entangled(mid) else (mid, hi)
    print(f"threshold        {hi:.15f}  (1/3 = {1 / 3:.15f})")
    for p_ in (1 / 3 - 1e-6, 1 / 3 + 1e-6):
        print(f"p = 1/3 {p_ - 1 / 3:+.0e}  ellipsoid {entangled(p_)!s:5}  PPT {is_entangled_ppt(werner(p_))}")
    v = ellipsoid_A(to_theta(werner(1 / 3))).volume
    print(f"volume at 1/3    {v:.15f}  (4 pi / 81 = {4 * np.pi / 81:.15f})")


if __name__ == "__main__":
    main()
