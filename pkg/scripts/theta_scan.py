"""Concurrence, discord and volume along the skewed family; optional plot."""

import argparse
import csv
import sys

from qsteer.discord import scan_theta


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--steps", type=int, default=32)
    p.add_argument("--party", choices=("A", "B"), default="B")
    p.add_argument("--plot", help="save a PNG here (needs matplotlib)")
    args = p.parse_args()

    rows = scan_theta(args.steps, args.party)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["theta", "concurrence", "discord", "volume"])
    for row in rows:
        w.writerow([f"{x:.10f}" for x in row])

    c = [r[1] for r in rows]
    d = [r[2] for r in rows]
    print(f"# concurrence {c[0]:.4f} -> {c[-1]:.4f}, discord {d[0]:.4f} -> {d[-1]:.4f}", file=sys.stderr)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        th = [r[0] for r in rows]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(th, c, label="concurrence")
        ax.plot(th, d, label=f"discord ({args.party} measured)")
        ax.set_xlabel("rotation angle")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)


if __name__ == "__main__":
    main()
