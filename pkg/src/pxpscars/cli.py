"""Command-line driver: lattices -> operators -> analysis, with CSV/JSON
artifacts and rendered figures per run.

Exit codes: 0 pass, 1 check failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, plotting
from .hilbert import (basis_dimension_table, block_basis, enumerate_rydberg,
                      lucas)
from .lattice import (alternate_cover, build_chain, build_honeycomb,
                      default_cover, lattice_from_json)
from .operators import (SQRT2, build_dh_lambda, build_dh_su2, build_pxp,
                        default_su2_coefficients)
from .trial import export_tower, match_lesanovsky, neel_state, tower
from .verify import run_invariant_suite

HERMITIAN_MODELS = ("pxp", "pxp+dhlambda", "pxp+dhsu2")
ALL_MODELS = HERMITIAN_MODELS + ("pxp+dhnh", "pxp+dhnh_inv")


class ConfigError(Exception):
    pass


def _add_common(p):
    p.add_argument("--lattice", default="chain",
                   help="chain, honeycomb, or file:PATH (JSON description)")
    p.add_argument("--blocks", type=int, default=6,
                   help="chain block count N_b (2 N_b sites)")
    p.add_argument("--n1", type=int, default=3)
    p.add_argument("--n2", type=int, default=3)
    p.add_argument("--bc", choices=("pbc", "obc"), default="pbc")
    p.add_argument("--cover", choices=("default", "alternate"),
                   default="default")
    p.add_argument("--model", choices=ALL_MODELS, default="pxp")
    p.add_argument("--lambda", dest="lam", type=float, default=0.93,
                   help="coupling of the dhlambda model")
    p.add_argument("--su2-h0", type=float, default=0.05)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-plot", action="store_true",
                   help="skip figure rendering")


def _build_lattice(args):
    if args.lattice == "chain":
        return build_chain(args.blocks,
                           "periodic" if args.bc == "pbc" else "open")
    if args.lattice == "honeycomb":
        return build_honeycomb(args.n1, args.n2)
    if args.lattice.startswith("file:"):
        lat, cover, _ = lattice_from_json(args.lattice[5:])
        if args.cover == "default" and cover is not None:
            return lat, cover
        return lat
    raise ConfigError(f"unknown lattice {args.lattice!r}")


def _setup(args):
    built = _build_lattice(args)
    if isinstance(built, tuple):
        lat, cover = built
    else:
        lat = built
        cover = alternate_cover(lat) if args.cover == "alternate" \
            else default_cover(lat)
    ryd = enumerate_rydberg(lat)
    bb = block_basis(lat, cover)
    return lat, cover, ryd, bb


def _build_model(args, lat, cover, ryd, bb):
    H = build_pxp(lat, ryd)
    if args.model == "pxp":
        return H
    if args.model == "pxp+dhlambda":
        return H + build_dh_lambda(lat, ryd, args.lam)
    if args.model == "pxp+dhsu2":
        return H + build_dh_su2(lat, ryd,
                                default_su2_coefficients(lat.n_blocks,
                                                         args.su2_h0))
    if args.model in ("pxp+dhnh", "pxp+dhnh_inv"):
        dh = analysis.nh_counterterm_rydberg(
            lat, cover, bb, ryd, symmetrized=args.model.endswith("inv"))
        return H + dh
    raise ConfigError(f"unknown model {args.model!r}")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(out: Path, name: str, payload: dict) -> None:
    with open(out / name, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True, default=float)
        f.write("\n")


def cmd_basis(args) -> int:
    lat, cover, ryd, _ = _setup(args)
    info = {"lattice": lat.name, "dims": list(lat.dims),
            "n_sites": lat.n_sites, "n_edges": len(lat.edges),
            "dimension": ryd.dim, "seed": args.seed}
    if lat.name == "chain" and lat.periodic:
        info["lucas_expected"] = lucas(lat.n_sites)
        info["lucas_match"] = bool(info["lucas_expected"] == ryd.dim)
        info["dimension_table"] = basis_dimension_table(
            range(2, lat.n_blocks + 1))
    out = _outdir(args)
    _dump(out, "basis.json", info)
    print(f"dim={ryd.dim}")
    if info.get("lucas_match") is False:
        return 1
    return 0


def cmd_scars(args) -> int:
    lat, cover, ryd, bb = _setup(args)
    if args.model not in HERMITIAN_MODELS:
        raise ConfigError("scar identification diagonalizes; pick a "
                          "Hermitian model (the counterterm models are "
                          "apply-only)")
    H = _build_model(args, lat, cover, ryd, bb)
    spec = analysis.diagonalize(H)
    t_block = tower(lat, cover, bb, ryd, "block-ladder")
    t_mps = tower(lat, cover, bb, ryd, "mps") \
        if lat.name == "chain" and lat.periodic else None
    neel = neel_state(ryd, cover)
    table = analysis.identify_scars(spec, t_block, neel, t_mps)
    out = _outdir(args)
    table.to_csv(out / "scars.csv")
    rows = analysis.spectrum_overlap_table(spec, neel)
    with open(out / "spectrum.csv", "w") as f:
        f.write("index,E,overlap2_neel\n")
        for i, e, ov in rows:
            f.write(f"{int(i)},{e:.12g},{ov:.12g}\n")
    export_tower(t_block, out / "tower_block.csv")
    if t_mps is not None:
        export_tower(t_mps, out / "tower_mps.csv")
    energies = table.energies()
    nb = lat.n_blocks
    summary = {
        "model": args.model, "lambda": args.lam, "seed": args.seed,
        "dimension": ryd.dim,
        "E_top": energies[nb], "E_next": energies[nb - 1],
        "tail_spacing": energies[nb] - energies[nb - 1],
        "min_overlap2_trial": min(r.overlap2_trial for r in table.rows),
        "analytic_E_top": analysis.analytic_energy(nb, nb)
        if lat.name == "chain" else None,
    }
    if t_mps is not None:
        summary["route_overlap_block_vs_mps"] = {
            str(n): abs(t_block.states[n].overlap(t_mps.states[n]))
            for n in t_block.n_values}
    if lat.name == "chain" and lat.periodic:
        summary["lesanovsky_match"] = match_lesanovsky(bb, ryd)
    _dump(out, "summary.json", summary)
    if not args.no_plot:
        plotting.save(plotting.scar_overlap_figure(
            table, title=f"{lat.name} {args.model}"), out / "scars.png")
        plotting.save(plotting.spectrum_figure(
            rows, list(energies.values())), out / "spectrum.png")
    print(f"E_top={energies[nb]:.6g} tail_spacing="
          f"{energies[nb] - energies[nb - 1]:.6g}")
    return 0


def cmd_verify(args) -> int:
    lat, _, _, _ = _setup(args)
    results = run_invariant_suite(lat, tol=args.tol, seed=args.seed,
                                  inject_error=args.inject_error)
    out = _outdir(args)
    _dump(out, "summary.json", {
        "seed": args.seed, "inject_error": args.inject_error,
        "checks": {name: {"passed": ok, "detail": detail}
                   for name, ok, detail in results}})
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} ({detail})")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_lambda(args) -> int:
    lat, cover, ryd, bb = _setup(args)
    if lat.name != "chain" or not lat.periodic:
        raise ConfigError("the coupling optimization is chain-specific")
    grid = np.linspace(args.lambda_min, args.lambda_max, args.lambda_steps)
    proj = analysis.residual_objective(lat, cover, bb, ryd, grid,
                                       projected=True)
    unproj = analysis.residual_objective(lat, cover, bb, ryd, grid,
                                         projected=False)
    tab = analysis.alpha_beta_integrals("tabulated")
    exact = analysis.alpha_beta_integrals("exact")
    out = _outdir(args)
    with open(out / "lambda.csv", "w") as f:
        f.write("lambda,objective_projected,objective_unprojected\n")
        for lam, a, b in zip(grid, proj["values"], unproj["values"]):
            f.write(f"{lam:.12g},{a:.12g},{b:.12g}\n")
    summary = {
        "seed": args.seed,
        "lambda_star_projected": proj["minimizer"],
        "lambda_star_unprojected": unproj["minimizer"],
        "alpha_tabulated": tab["alpha"], "beta_tabulated": tab["beta"],
        "lambda_appendix_tabulated": tab["lambda_appendix"],
        "alpha_exact": exact["alpha"], "beta_exact": exact["beta"],
        "lambda_appendix_exact": exact["lambda_appendix"],
    }
    _dump(out, "summary.json", summary)
    if not args.no_plot:
        plotting.save(plotting.objective_figure(
            grid, proj["values"], proj["minimizer"]), out / "lambda.png")
    print(f"lambda*={proj['minimizer']:.4f} "
          f"(unprojected {unproj['minimizer']:.4f})")
    return 0


def cmd_fidelity(args) -> int:
    lat, cover, ryd, bb = _setup(args)
    if args.model not in HERMITIAN_MODELS:
        raise ConfigError("fidelity evolves under a Hermitian model")
    H = _build_model(args, lat, cover, ryd, bb)
    spec = analysis.diagonalize(H)
    psi0 = neel_state(ryd, cover)
    times = np.linspace(0.0, args.tmax, args.nt)
    fid = analysis.quench_fidelity(spec, psi0, times)
    out = _outdir(args)
    with open(out / "fidelity.csv", "w") as f:
        f.write("t,fidelity\n")
        for t, x in zip(times, fid):
            f.write(f"{t:.12g},{x:.12g}\n")
    peaks = [i for i in range(1, len(fid) - 1)
             if fid[i] > fid[i - 1] and fid[i] > fid[i + 1]]
    summary = {"seed": args.seed, "model": args.model,
               "first_revival_t": times[peaks[0]] if peaks else None,
               "first_revival_fidelity": fid[peaks[0]] if peaks else None,
               "reference_period": 2 * np.pi / SQRT2}
    _dump(out, "summary.json", summary)
    if not args.no_plot:
        plotting.save(plotting.fidelity_figure(times, fid),
                      out / "fidelity.png")
    if peaks:
        print(f"first revival t={times[peaks[0]]:.4f} "
              f"fidelity={fid[peaks[0]]:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pxpscars",
        description="Constrained-chain scar models: bases, spectra, "
                    "trial towers, coupling optimization, dynamics")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("basis", cmd_basis), ("scars", cmd_scars),
                     ("verify", cmd_verify), ("lambda", cmd_lambda),
                     ("fidelity", cmd_fidelity)):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=fn)
        if name == "verify":
            p.add_argument("--inject-error", action="store_true",
                           help="negate the counterterm (negative control)")
        if name == "lambda":
            p.add_argument("--lambda-min", type=float, default=0.0)
            p.add_argument("--lambda-max", type=float, default=1.6)
            p.add_argument("--lambda-steps", type=int, default=33)
        if name == "fidelity":
            p.add_argument("--tmax", type=float, default=20.0)
            p.add_argument("--nt", type=int, default=801)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
