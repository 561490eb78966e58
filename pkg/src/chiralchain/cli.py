"""Command line front end.

Every subcommand reads model parameters from an optional flat config file
(key = value lines) and individual flags override the file.  Grids are
given either as a bare step count over the natural domain or as an
explicit lo:hi:steps range; phi bounds accept 'pi' expressions such as
pi/4 or 0.3*pi.  Tables are written as plain CSV with a single header
row, machine-precision floats, and no comment lines, so they concatenate
and re-parse cleanly.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import bloch
from . import ed
from . import fitting
from . import lswt
from . import quadstate
from . import sweep as sweep_mod
from . import topology
from .params import ModelParams, momentum_grid, parse_angle, read_config


def _r(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _parse_grid(text: str, lo: float, hi: float, angle: bool = False) -> np.ndarray:
    """A bare count means `steps` points on [lo, hi]; lo:hi:steps overrides."""
    conv = parse_angle if angle else float
    if ":" in text:
        a, b, c = text.split(":")
        lo, hi, steps = conv(a), conv(b), int(c)
    else:
        steps = int(text)
    if steps < 1:
        raise ValueError(f"need at least one grid point, got {steps}")
    if hi < lo:
        raise ValueError(f"grid needs lo <= hi, got {lo} > {hi}")
    return np.array([lo]) if steps == 1 else np.linspace(lo, hi, steps)


def _parse_range3(text: str, angle: bool = False) -> np.ndarray:
    if text.count(":") != 2:
        raise ValueError(f"expected lo:hi:steps, got {text!r}")
    return _parse_grid(text, 0.0, 0.0, angle=angle)


# ---------------------------------------------------------------------------
# Shared model-parameter flags

def _add_model_args(sub: argparse.ArgumentParser) -> None:
    grp = sub.add_argument_group("model parameters")
    grp.add_argument("--config", metavar="FILE",
                     help="flat key = value parameter file; flags override it")
    grp.add_argument("--omega0", type=float, help="chain A splitting")
    grp.add_argument("--Omega0", type=float, help="chain B splitting")
    grp.add_argument("--J", type=float, help="chain B hopping")
    grp.add_argument("--g", type=float, help="interchain coupling")
    grp.add_argument("--phi", help="chirality angle (accepts pi expressions)")
    grp.add_argument("--N", type=int, help="number of rungs")
    grp.add_argument("--boundary", choices=("open", "periodic"))


def _build_params(args) -> ModelParams:
    p = read_config(args.config) if args.config else ModelParams()
    overrides = {}
    for key in ("omega0", "Omega0", "J", "g", "N", "boundary"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "phi", None) is not None:
        overrides["phi"] = parse_angle(args.phi)
    return dataclasses.replace(p, **overrides) if overrides else p


def _even_covariance(p: ModelParams, parity: str) -> quadstate.CovarianceData:
    return quadstate.ground_covariance(topology.build_realspace(p), parity=parity)


# ---------------------------------------------------------------------------
# Subcommands

def cmd_bands(args) -> int:
    p = _build_params(args)
    bs = bloch.band_structure(p, momentum_grid(args.kpoints, "periodic"))
    rows = [[_r(k)] + [_r(e) for e in row]
            for k, row in zip(bs.grid.points, bs.bands)]
    out = _write_csv(args.out, ["k", "E1", "E2", "E3", "E4"], rows)
    print(f"wrote {len(rows)} momenta to {out}")
    return 0


def cmd_critline(args) -> int:
    p = _build_params(args)
    phis = _parse_grid(args.phi_grid, 0.0, math.pi / 2, angle=True)
    rows = []
    for phi in phis:
        gc = bloch.critical_coupling(p.omega0, p.Omega0, p.J, float(phi))
        rows.append([_r(phi), _r(math.nan if gc is None else gc),
                     bloch.critical_branch(float(phi))])
    out = _write_csv(args.out, ["phi", "g_c", "branch"], rows)
    print(f"wrote {len(rows)} points to {out}")
    return 0


def cmd_invariant(args) -> int:
    p = _build_params(args)
    gs = _parse_grid(args.g_grid, 0.0, 3.0 * p.J)
    phis = _parse_grid(args.phi_grid, 0.0, math.pi / 2, angle=True)
    qmap = topology.invariant_map(p, gs, phis)
    rows = [[_r(phi), _r(g), str(int(qmap[i, j]))]
            for i, phi in enumerate(phis) for j, g in enumerate(gs)]
    out = _write_csv(args.out, ["phi", "g", "Q"], rows)
    print(f"wrote {qmap.shape[0]}x{qmap.shape[1]} invariant map to {out}")
    return 0


def cmd_ldos(args) -> int:
    p = _build_params(args)
    omegas = _parse_range3(args.omega_range)
    curve = topology.ldos_curve(p, omegas, [args.site], broadening=args.broadening)
    rows = [[_r(w), _r(v)] for w, v in zip(omegas, curve[:, 0])]
    out = _write_csv(args.out, ["omega", "ldos"], rows)
    print(f"wrote site-{args.site} spectral weight to {out}")
    return 0


def cmd_entanglement(args) -> int:
    p = _build_params(args)
    cut = args.cut if args.cut is not None else p.N // 2
    ent = quadstate.entanglement_ff(_even_covariance(p, args.parity), cut)
    rows = [[str(i + 1), _r(lam)] for i, lam in enumerate(ent.rdm_spectrum)]
    out = _write_csv(args.out, ["rank", "lambda"], rows)
    print(f"cut {cut}: entropy {ent.entropy:.6f}, schmidt gap "
          f"{ent.schmidt_gap:.6f}; spectrum in {out}")
    return 0


def cmd_correlate(args) -> int:
    p = _build_params(args)
    cov = _even_covariance(p, args.parity)
    n0 = args.site if args.site is not None else max(1, (p.N - args.r_max) // 2)
    if n0 + args.r_max >= p.N:
        raise ValueError(f"window [{n0}, {n0 + args.r_max}] leaves the chain (N = {p.N})")
    rows = [[str(r), _r(quadstate.spin_correlator_xx(cov, n0, n0 + r, args.axis))]
            for r in range(1, args.r_max + 1)]
    out = _write_csv(args.out, ["r", "value"], rows)
    print(f"wrote {args.axis} correlator from site {n0} to {out}")
    return 0


def cmd_chirality(args) -> int:
    p = _build_params(args)
    cov = _even_covariance(p, args.parity)
    rows = [[_r(p.phi), _r(p.g), chain, _r(quadstate.chirality_ff(cov, chain=chain))]
            for chain in ("A", "B")]
    out = _write_csv(args.out, ["phi", "g", "chain", "kappa_z"], rows)
    print(f"wrote bulk chirality for both chains to {out}")
    return 0


def cmd_ed(args) -> int:
    p = _build_params(args)
    n = args.n if args.n is not None else p.N
    even, odd = ed.sector_spectra(p, N=n, n_states=args.states)
    doc = {
        "params": dataclasses.asdict(dataclasses.replace(p, N=n)),
        "energies": {"even": even.energies.tolist(), "odd": odd.energies.tolist()},
        "gaps": {
            "delta0": float(odd.energies[0] - even.energies[0]),
            "delta1": float(odd.energies[1] - even.energies[0]) if odd.n_kept > 1 else None,
        },
        "gs_sector": "even" if even.energies[0] <= odd.energies[0] else "odd",
    }
    if args.observables != "none":
        gs = even if doc["gs_sector"] == "even" else odd
        obs = ed.observables(gs.states[:, 0], n)
        doc["observables"] = {
            "magnetization": {k: v.tolist() for k, v in obs.magnetization.items()},
            "correlators": {k: v.tolist() for k, v in obs.correlators.items()},
            "chirality_bonds": {k: v.tolist() for k, v in obs.chirality_bonds.items()},
            "chirality": obs.chirality,
            "order_parameter": obs.order_parameter,
        }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(f"N = {n}: E0(even) = {even.energies[0]:.10f}, "
          f"E0(odd) = {odd.energies[0]:.10f}; report in {args.out}")
    return 0


def cmd_lswt(args) -> int:
    p = _build_params(args)
    if args.phi is not None:
        p = dataclasses.replace(p, phi=parse_angle(args.phi))
    gs = _parse_range3(args.g_range)
    thr = lswt.instability_threshold(p)
    stable = gs < thr.g_c
    # branch energies at the soft momentum: the lower one closes at g_c
    e1 = np.full(gs.size, math.nan)
    e2 = np.full(gs.size, math.nan)
    for j in np.flatnonzero(stable):
        pg = dataclasses.replace(p, g=float(gs[j]))
        modes = lswt.para_diagonalize(lswt.build_hopfield(pg, thr.k_c))
        if modes.energies is not None:
            e2[j], e1[j] = modes.energies
    mag = np.full(gs.size, math.nan)
    energy = np.full(gs.size, math.nan)
    if np.any(stable):
        curves = lswt.lswt_observables(p, gs[stable], n_k=args.kpoints)
        mag[stable] = curves["magnetization"]
        energy[stable] = curves["gs_energy"]
    rows = [[_r(g), _r(a), _r(b), _r(m), _r(e)]
            for g, a, b, m, e in zip(gs, e1, e2, mag, energy)]
    out = _write_csv(args.out, ["g", "E_soft", "E_hard", "magnetization", "gs_energy"], rows)
    print(f"phi = {p.phi:.6f}: instability at g_c = {thr.g_c:.6f} "
          f"(k_c = {thr.k_c:.6f}); curves in {out}")
    return 0


def cmd_fit(args) -> int:
    table = fitting.SeriesTable.from_csv(args.infile)
    if args.kind == "xi":
        res = fitting.fit_correlation_length(table)
    elif args.kind == "eta":
        res = fitting.fit_power_law(table)
    elif args.kind == "collapse":
        if args.init is not None:
            parts = [float(t) for t in args.init.split(",")]
            if len(parts) != 3:
                raise ValueError("collapse init must be x_c,beta,nu")
            init = dict(zip(("g_c", "beta", "nu"), parts))
        else:
            init = {"g_c": float(np.median(table.x)), "beta": 0.2, "nu": 1.0}
        res = fitting.data_collapse(table, init, n_boot=args.bootstrap)
    elif args.kind == "gap":
        res = fitting.fit_gap_scaling(table, x_c=args.xc)
    elif args.kind == "cc":
        res = fitting.fit_central_charge(table, prefactor=args.prefactor)
    else:
        res = fitting.second_derivative_fit(table)
    doc = {
        "kind": args.kind,
        "model_id": res.model_id,
        "params": list(res.params),
        "uncertainties": list(res.uncertainties),
        "window": list(res.window),
        "residual_norm": res.residual_norm,
        "converged": res.converged,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    pretty = ", ".join(f"{v:.6g} +- {u:.2g}"
                       for v, u in zip(res.params, res.uncertainties))
    print(f"{res.model_id}: {pretty}; report in {args.out}")
    return 0


def cmd_sweep(args) -> int:
    spec = sweep_mod.load_sweep_spec(args.spec)
    out_dir = args.out if args.out is not None else spec.output_path
    grid = sweep_mod.run_sweep(spec)
    paths = sweep_mod.emit(grid, spec.output_format, out_dir)
    counts = {s: grid.status.count(s) for s in ("ok", "failed", "skipped")}
    print(f"{len(grid.cells)} cells "
          f"(ok {counts['ok']}, failed {counts['failed']}, skipped {counts['skipped']}); "
          + "; ".join(str(q) for q in paths))
    return 0 if counts["failed"] == 0 else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chiralchain",
        description="Phase diagram toolkit for two chirally coupled spin-1/2 chains.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = ap.add_subparsers(dest="command", required=True, metavar="command")

    def sub(name, fn, help_text):
        s = subs.add_parser(name, help=help_text)
        _add_model_args(s)
        s.set_defaults(fn=fn)
        return s

    s = sub("bands", cmd_bands, "quasiparticle bands on a momentum grid")
    s.add_argument("--kpoints", type=int, default=256, metavar="M")
    s.add_argument("--out", default="bands.csv")

    s = sub("critline", cmd_critline, "closed-form critical coupling vs phi")
    s.add_argument("--phi-grid", default="65", metavar="M|lo:hi:steps")
    s.add_argument("--out", default="critline.csv")

    s = sub("invariant", cmd_invariant, "Z2 invariant on a (phi, g) grid")
    s.add_argument("--g-grid", default="64", metavar="A|lo:hi:steps")
    s.add_argument("--phi-grid", default="64", metavar="B|lo:hi:steps")
    s.add_argument("--out", default="q.csv")

    s = sub("ldos", cmd_ldos, "local density of states at one site")
    s.add_argument("--omega-range", required=True, metavar="lo:hi:steps")
    s.add_argument("--site", type=int, default=0)
    s.add_argument("--broadening", type=float, default=None,
                   help="Lorentzian half width (default 0.02 J)")
    s.add_argument("--out", default="ldos.csv")

    s = sub("entanglement", cmd_entanglement, "half-chain entanglement spectrum")
    s.add_argument("--cut", type=int, default=None, help="rungs left of the cut (default N/2)")
    s.add_argument("--parity", choices=("even", "odd"), default="even")
    s.add_argument("--out", default="es.csv")

    s = sub("correlate", cmd_correlate, "two-point spin correlator vs distance")
    s.add_argument("--axis", default="xB",
                   choices=("xA", "yA", "zA", "xB", "yB", "zB"))
    s.add_argument("--r-max", type=int, default=32, metavar="R")
    s.add_argument("--site", type=int, default=None, help="reference site (default centered)")
    s.add_argument("--parity", choices=("even", "odd"), default="even")
    s.add_argument("--out", default="corr.csv")

    s = sub("chirality", cmd_chirality, "bulk z chirality of both chains")
    s.add_argument("--parity", choices=("even", "odd"), default="even")
    s.add_argument("--out", default="chi.csv")

    s = sub("ed", cmd_ed, "exact diagonalization report (JSON)")
    s.add_argument("--n", type=int, default=None, help="rungs (2n spins, max 8)")
    s.add_argument("--states", type=int, default=4, help="levels per parity sector")
    s.add_argument("--observables", choices=("all", "none"), default="all")
    s.add_argument("--out", default="ed.json")

    s = sub("lswt", cmd_lswt, "spin-wave branches and observables vs g")
    s.add_argument("--g-range", required=True, metavar="lo:hi:steps")
    s.add_argument("--kpoints", type=int, default=256)
    s.add_argument("--out", default="lswt.csv")

    s = subs.add_parser("fit", help="finite-size scaling fits on a CSV table")
    s.set_defaults(fn=cmd_fit)
    s.add_argument("--kind", required=True,
                   choices=("xi", "eta", "collapse", "gap", "cc", "chi"))
    s.add_argument("--in", dest="infile", required=True, metavar="table.csv")
    s.add_argument("--out", default="fit.json")
    s.add_argument("--init", default=None, metavar="x_c,beta,nu",
                   help="collapse start point")
    s.add_argument("--bootstrap", type=int, default=200)
    s.add_argument("--xc", type=float, default=None, help="fixed critical point (gap)")
    s.add_argument("--prefactor", choices=("obc", "pbc"), default="obc")

    s = subs.add_parser("sweep", help="run a TOML-described parameter sweep")
    s.set_defaults(fn=cmd_sweep)
    s.add_argument("--spec", required=True, metavar="spec.toml")
    s.add_argument("--out", default=None, metavar="dir/",
                   help="output directory (default: the spec's)")

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
