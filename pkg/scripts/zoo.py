"""Classify a handful of standard states and print one summary line each."""

import numpy as np

from qsteer.cli import classify
from qsteer.discord import classical_quantum, theta_family
from qsteer.qstate import bell_phi_plus, mixture, product_state, pure_state, werner

ZOO = {
    "bell": bell_phi_plus(),
    "werner 0.2": werner(0.2),
    "werner 0.5": werner(0.5),
    "product": product_state([0, 0, 0.5], [0.3, 0, 0]),
    "needle example": mixture([(0.5, [0, 0, 1], [0, 0, 1]), (0.5, [0, 0, -1], [1, 0, 0])]),
    "classical-quantum": classical_quantum(0.4, [0, 0, 1], [1, 0, 0], [0, 0.6, 0.6]),
    "partly entangled": pure_state([0.8, 0, 0, 0.6]),
    "skewed family 0": theta_family(0.0),
    "skewed family pi/2": theta_family(np.pi / 2),
}


def main():
    print(f"{'state':20} {'ent':>5} {'shape':>7} {'dim':>3} {'complete':>8} {'D_A=0':>6} {'D_B=0':>6} {'n':>3} {'V_A':>8}")
    for name, rho in ZOO.items():
        r = classify(rho)
        n = "-" if r.product_count is None else r.product_count
        print(f"{name:20} {r.entangled!s:>5} {r.shape:>7} {r.dimension:>3} {r.complete_steering!s:>8} "
              f"{r.zero_discord_A!s:>6} {r.zero_discord_B!s:>6} {n!s:>3} {r.volume_A:8.4f}")


if __name__ == "__main__":
    main()
