#!/usr/bin/env python3
"""Map the ground-state phase diagram in the (phi, g) plane.

Writes the Z2 invariant map, the closed-form critical line, and the
Schmidt-gap map to CSV; add --plot for a PNG overlay (needs matplotlib).
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from chiralchain import bloch, quadstate, topology
from chiralchain.params import ModelParams, parse_angle


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=64, help="points per axis")
    ap.add_argument("--g-max", type=float, default=3.0)
    ap.add_argument("--schmidt-N", type=int, default=64,
                    help="chain length for the Schmidt-gap map (0 skips it)")
    ap.add_argument("--out", type=Path, default=Path("results/phase_diagram"))
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    p = ModelParams()
    gs = np.linspace(0.0, args.g_max, args.grid)
    phis = np.linspace(0.0, math.pi / 2, args.grid)

    qmap = topology.invariant_map(p, gs, phis)
    with open(args.out / "invariant.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi", "g", "Q"])
        for i, phi in enumerate(phis):
            for j, g in enumerate(gs):
                w.writerow([repr(float(phi)), repr(float(g)), int(qmap[i, j])])
    print(f"invariant map {args.grid}x{args.grid}: "
          f"{int(np.sum(qmap < 0))} topological cells")

    with open(args.out / "critical_line.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi", "g_c", "branch"])
        for phi in np.linspace(0.0, math.pi / 2, 257):
            gc = bloch.critical_coupling(p.omega0, p.Omega0, p.J, float(phi))
            w.writerow([repr(float(phi)),
                        repr(float("nan") if gc is None else gc),
                        bloch.critical_branch(float(phi))])

    smap = None
    if args.schmidt_N:
        pN = ModelParams(N=args.schmidt_N)
        smap = quadstate.schmidt_gap_map(pN, gs, phis)
        with open(args.out / "schmidt_gap.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["phi", "g", "schmidt_gap"])
            for i, phi in enumerate(phis):
                for j, g in enumerate(gs):
                    w.writerow([repr(float(phi)), repr(float(g)),
                                repr(float(smap[i, j]))])
        print(f"schmidt-gap map at N={args.schmidt_N} done")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2 if smap is not None else 1,
                                 figsize=(10, 4), squeeze=False)
        line_phi = np.linspace(0.0, math.pi / 2, 257)
        line_gc = [bloch.critical_coupling(p.omega0, p.Omega0, p.J, float(f))
                   for f in line_phi]
        line_gc = [math.nan if v is None else v for v in line_gc]
        panels = [("Z2 invariant", qmap, "coolwarm")]
        if smap is not None:
            panels.append(("Schmidt gap", smap, "viridis"))
        for ax, (title, data, cmap) in zip(axes[0], panels):
            im = ax.pcolormesh(gs, phis, data, shading="nearest", cmap=cmap)
            ax.plot(line_gc, line_phi, "k--", lw=1.2)
            ax.set_xlabel("g / J")
            ax.set_ylabel("phi")
            ax.set_xlim(gs[0], gs[-1])
            ax.set_title(title)
            fig.colorbar(im, ax=ax)
        fig.tight_layout()
        fig.savefig(args.out / "phase_diagram.png", dpi=160)
        print(f"figure in {args.out / 'phase_diagram.png'}")

    return 0


if __name__ == "__main__":
    raise SystemExit(main())
