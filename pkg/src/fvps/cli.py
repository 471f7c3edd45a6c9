"""Batch command-line front end: experiment drivers, CSV/JSON emission.

Subcommands wrap the library modules into reproducible runs: identical
configuration produces bit-identical output (no timestamps, no seeded
randomness).  Every run writes a JSON provenance sidecar holding the
resolved configuration, package version, and the tolerances it applied.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
tolerance failure in --check modes.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import GridError, ResolutionError, TruncationError
from .grids import MomentumGrid, PhaseSpaceGrid
from .moyal import evolve_even
from .pairs import penalty_curve
from .rotator import RotatorModel, modulation_spectrum, orbit_series
from .spectrum import chi_factor, energy, eps_factor, purity_rhs
from .states import ChargeBranchState, gaussian_state, rotator_coherent_state
from .wigner import EPS_RELATIVISTIC, Moments, moments, wigner_even

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3


# ---------------------------------------------------------------------------
# Drivers (importable; the CLI is a thin shell around these)
# ---------------------------------------------------------------------------


def run_factors(p1: float, p2: float) -> dict:
    return {
        "p1": p1,
        "p2": p2,
        "eps": float(eps_factor(p1, p2)),
        "chi": float(chi_factor(p1, p2)),
        "purity_rhs": float(purity_rhs(p1, p2)),
    }


def packet_grid(lam: float, p_bar: float = 0.0, n_points: int = 512) -> MomentumGrid:
    """Momentum window wide enough for spectral round trips of a lam-packet."""
    sigma = 1.0 / lam
    p_max = 9.0 / sigma + abs(p_bar) + 0.5
    return MomentumGrid(n_points, p_max)


def run_wigner(lam: float, n_points: int = 512, eps_mode: str = EPS_RELATIVISTIC):
    """Build the packet's phase-space field and its moments."""
    grid = packet_grid(lam, n_points=n_points)
    ps = PhaseSpaceGrid.conjugate(grid)
    state = gaussian_state(grid, lam=lam)
    w = wigner_even(state, +1, ps, eps_mode)
    return w, ps, moments(w, ps)


def run_evolve_check(lam: float, t: float, n_points: int = 512) -> float:
    """Max-norm gap between the spectral propagator and the amplitude pipeline."""
    grid = packet_grid(lam, n_points=n_points)
    ps = PhaseSpaceGrid.conjugate(grid)
    state = gaussian_state(grid, lam=lam)
    w0 = wigner_even(state, +1, ps)
    w_prop = evolve_even(w0, lambda p: energy(p), t, ps)
    phi_t = state.phi_plus * np.exp(-1j * energy(grid.nodes) * t)
    w_wave = wigner_even(ChargeBranchState(grid, phi_plus=phi_t), +1, ps)
    return float(np.abs(w_prop - w_wave).max())


def effective_mass_ratio(lam: float, p_bar: float = 0.02, t: float = 2.0,
                         n_points: int = 512) -> float:
    """m_eff/m from the drift velocity of a coherent packet.

    The packet is given a small (non-relativistic) mean momentum and
    evolved with the full dispersion; the drift slope of the position
    mean defines the effective inertia.  Strong localization feeds
    relativistic momenta into the velocity average no matter how small
    p_bar is, so the ratio grows with lam even at crawling speeds.
    """
    grid = packet_grid(lam, p_bar, n_points)
    ps = PhaseSpaceGrid.conjugate(grid)
    state = gaussian_state(grid, lam=lam, p_bar=p_bar)
    w0 = wigner_even(state, +1, ps)
    w1 = evolve_even(w0, lambda p: energy(p), t, ps)
    drift = (moments(w1, ps).mean_q - moments(w0, ps).mean_q) / t
    return p_bar / drift


def run_coherent(lams, p_bar: float = 0.02, t: float = 2.0, jobs: int = 1):
    lams = list(lams)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            ratios = list(pool.map(effective_mass_ratio, lams, [p_bar] * len(lams), [t] * len(lams)))
    else:
        ratios = [effective_mass_ratio(lam, p_bar, t) for lam in lams]
    return list(zip(lams, ratios))


def run_rotator(b: float, alpha: float, t_max: float, dt: float, n_max: int = 64):
    model = RotatorModel(b=b, n_max=n_max)
    state = rotator_coherent_state(alpha, model.energy_model, n_max=n_max)
    series = orbit_series(state, model, t_max=t_max, dt=dt)
    peaks = modulation_spectrum(series)
    return series, peaks, model


def run_entangle(sigmas, models=("nonrel", "rel"), jobs: int = 1):
    if jobs > 1:
        # penalty columns are independent per sigma; fan out row-wise
        def one(s):
            return tuple(penalty_curve([s], models).columns[m][0] for m in models)

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, sigmas))
        table = {m: tuple(r[i] for r in rows) for i, m in enumerate(models)}
        from .pairs import PenaltyTable

        return PenaltyTable(sigmas=tuple(float(s) for s in sigmas), models=tuple(models), columns=table)
    return penalty_curve(sigmas, models)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _write_provenance(path, command: str, config: dict, tolerances: dict | None = None):
    blob = {
        "version": __version__,
        "command": command,
        "config": config,
        "tolerances": tolerances or {},
    }
    with open(path, "w") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sidecar(path) -> str:
    return str(path) + ".json"


def _write_field_csv(path, w, ps, metadata: dict, matrix: bool = False):
    with open(path, "w", newline="") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        if matrix:
            # contour-ready: first row q nodes, then one row per p node
            writer.writerow(["p\\q"] + [repr(float(q)) for q in ps.q_nodes])
            for i, p in enumerate(ps.p_nodes):
                writer.writerow([repr(float(p))] + [repr(float(x)) for x in w[i]])
        else:
            writer.writerow(["q", "p", "W"])
            for i, p in enumerate(ps.p_nodes):
                for j, q in enumerate(ps.q_nodes):
                    writer.writerow([repr(float(q)), repr(float(p)), repr(float(w[i, j]))])


def _moments_dict(m: Moments) -> dict:
    return {
        "mean_q": m.mean_q,
        "mean_p": m.mean_p,
        "var_q": m.var_q,
        "var_p": m.var_p,
        "var_q_negative": bool(m.var_q < 0),
        "var_p_negative": bool(m.var_p < 0),
    }


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_factors(args) -> int:
    out = run_factors(args.p1, args.p2)
    print(f"eps        = {out['eps']:.10g}")
    print(f"chi        = {out['chi']:.10g}")
    print(f"purity_rhs = {out['purity_rhs']:.10g}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
            fh.write("\n")
        cfg = {k: v for k, v in vars(args).items() if k != "func"}
        _write_provenance(_sidecar(args.out), "factors", cfg)
    return EXIT_OK


def _lam_from_args(args) -> float:
    if args.preset == "fig1":
        return 8.0
    if args.lam is None:
        raise ValueError("give --lambda or --preset fig1")
    return args.lam


def _cmd_wigner(args) -> int:
    lam = _lam_from_args(args)
    w, ps, m = run_wigner(lam, n_points=args.n_points, eps_mode=args.eps_mode)
    meta = {
        "lambda": f"{lam:g}",
        "n_points": args.n_points,
        "p_max": f"{ps.momentum.p_max:g}",
        "eps_mode": args.eps_mode,
    }
    _write_field_csv(args.out, w, ps, meta, matrix=args.matrix)
    mdict = _moments_dict(m)
    with open(args.moments_out or (str(args.out) + ".moments.json"), "w") as fh:
        json.dump(mdict, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["lambda_resolved"] = lam
    _write_provenance(_sidecar(args.out), "wigner", cfg)
    print(f"var_q = {m.var_q:.6g} (negative: {mdict['var_q_negative']})")
    return EXIT_OK


def _cmd_evolve(args) -> int:
    dev = run_evolve_check(args.lam, args.t, n_points=args.n_points)
    print(f"max |spectral - wavefunction| = {dev:.3e}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"lambda": args.lam, "t": args.t, "deviation": dev}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        cfg = {k: v for k, v in vars(args).items() if k != "func"}
        _write_provenance(_sidecar(args.out), "evolve", cfg, {"check": args.tol})
    if args.check and dev > args.tol:
        print(f"FAIL: deviation exceeds {args.tol:g}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _cmd_coherent(args) -> int:
    lams = [float(x) for x in args.lambdas.split(",")]
    rows = run_coherent(lams, p_bar=args.p_bar, t=args.t, jobs=args.jobs)
    with open(args.out, "w", newline="") as fh:
        fh.write(f"# p_bar={args.p_bar:g}\n# t={args.t:g}\n")
        writer = csv.writer(fh)
        writer.writerow(["lambda", "m_eff_over_m"])
        for lam, ratio in rows:
            writer.writerow([repr(float(lam)), repr(float(ratio))])
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    _write_provenance(_sidecar(args.out), "coherent", cfg)
    for lam, ratio in rows:
        print(f"lambda={lam:g}: m_eff/m = {ratio:.6g}")
    return EXIT_OK


def _cmd_rotator(args) -> int:
    series, peaks, model = run_rotator(args.b, args.alpha, args.t_max, args.dt, n_max=args.n_max)
    with open(args.out, "w", newline="") as fh:
        fh.write(f"# b={args.b:g}\n# alpha={args.alpha:g}\n# omega={model.omega:g}\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "r", "x", "y"])
        for row in series.to_rows():
            writer.writerow([repr(float(v)) for v in row])
    peaks_path = args.peaks_out or (str(args.out) + ".peaks.json")
    with open(peaks_path, "w") as fh:
        json.dump(
            {
                "omega": model.omega,
                "peaks": [{"frequency": p.frequency, "amplitude": p.amplitude} for p in peaks],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    _write_provenance(_sidecar(args.out), "rotator", cfg)
    if peaks:
        print(f"dominant peak: {peaks[0].frequency:.6g} ({peaks[0].frequency / model.omega:.4g} omega)")
    else:
        print("no modulation peaks detected")
    return EXIT_OK


def _cmd_entangle(args) -> int:
    sigmas = [float(x) for x in args.sigmas.split(",")]
    models = tuple(args.models.split(","))
    table = run_entangle(sigmas, models, jobs=args.jobs)
    with open(args.out, "w", newline="") as fh:
        fh.write(f"# models={','.join(models)}\n")
        writer = csv.writer(fh)
        writer.writerow(["sigma"] + [f"penalty_{m}" for m in models])
        for row in table.rows():
            writer.writerow([repr(float(v)) for v in row])
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    _write_provenance(_sidecar(args.out), "entangle", cfg)
    for row in table.rows():
        print("  ".join(f"{v:.6g}" for v in row))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("FVPS_JOBS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fvps",
        description="Phase-space experiments for relativistic scalar charged particles",
    )
    parser.add_argument("--config", help="key=value file; command-line flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factors", help="print eps, chi, purity RHS at a momentum pair")
    f.add_argument("--p1", type=float, required=True)
    f.add_argument("--p2", type=float, required=True)
    f.add_argument("--out", help="optional JSON output path")
    f.set_defaults(func=_cmd_factors)

    w = sub.add_parser("wigner", help="phase-space field and moments of a Gaussian packet")
    w.add_argument("--lambda", dest="lam", type=float, help="localization parameter")
    w.add_argument("--preset", choices=["fig1"], help="fig1 = lambda 8")
    w.add_argument("--n-points", type=int, default=512)
    w.add_argument("--eps-mode", choices=["relativistic", "unity"], default="relativistic")
    w.add_argument("--matrix", action="store_true", help="contour-ready matrix CSV layout")
    w.add_argument("--out", required=True)
    w.add_argument("--moments-out")
    w.set_defaults(func=_cmd_wigner)

    e = sub.add_parser("evolve", help="propagator vs amplitude-evolution cross-check")
    e.add_argument("--lambda", dest="lam", type=float, required=True)
    e.add_argument("--t", type=float, required=True)
    e.add_argument("--n-points", type=int, default=512)
    e.add_argument("--check", action="store_true", help="exit 3 when deviation exceeds --tol")
    e.add_argument("--tol", type=float, default=1e-8)
    e.add_argument("--out", help="optional JSON output path")
    e.set_defaults(func=_cmd_evolve)

    c = sub.add_parser("coherent", help="effective-mass ratio across localization values")
    c.add_argument("--lambdas", default="0.05,0.5,1,2,4")
    c.add_argument("--p-bar", type=float, default=0.02)
    c.add_argument("--t", type=float, default=2.0)
    c.add_argument("--jobs", type=int, default=_default_jobs())
    c.add_argument("--out", required=True)
    c.set_defaults(func=_cmd_coherent)

    r = sub.add_parser("rotator", help="orbit-radius series and modulation peaks")
    r.add_argument("--b", type=float, required=True)
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--t-max", type=float, required=True)
    r.add_argument("--dt", type=float, required=True)
    r.add_argument("--n-max", type=int, default=64)
    r.add_argument("--out", required=True)
    r.add_argument("--peaks-out")
    r.set_defaults(func=_cmd_rotator)

    n = sub.add_parser("entangle", help="Fermi overlap-penalty table")
    n.add_argument("--sigmas", "--sigma", dest="sigmas", default="1.0")
    n.add_argument("--models", default="nonrel,rel")
    n.add_argument("--jobs", type=int, default=_default_jobs())
    n.add_argument("--out", required=True)
    n.set_defaults(func=_cmd_entangle)

    return parser


def _load_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # config file supplies any flag not given explicitly; explicit flags win
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            cfg_path = argv[idx + 1]
            file_values = _load_config_file(cfg_path)
        except (IndexError, OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        for key, value in file_values.items():
            flag = "--" + key.replace("_", "-")
            if flag not in argv:
                argv.extend([flag, value])
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (GridError, ResolutionError, TruncationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
