"""Command-line front end: one subcommand per library operation.

Exit codes: 0 success, 1 invalid input or usage, 2 a solver did not converge.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import continuum, crease, ground_state, model, scaling
from .errors import InvalidArgument
from .ground_state import Init, MinimizeOptions
from .tables import SweepRow, emit_table, render_object

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(p: argparse.ArgumentParser, *, table: bool = True) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="json" if not table else "csv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--gnuplot", action="store_true", help="also write a whitespace-separated .dat")
    p.add_argument("--timing", action="store_true", help="record wall-clock seconds (breaks byte-identity)")
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-10, help="projected-gradient tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chiralchain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("energy", help="energy of a constant or random chain")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--constant", choices=("theta-alpha", "minus-theta-alpha", "zero"), default=None)
    g.add_argument("--thetas", type=_floats, default=None, help="comma-separated angles")
    g.add_argument("--random", action="store_true", help="uniform angles drawn with --seed")
    _common(p)

    p = sub.add_parser("minimize", help="minimize the chain energy, optionally with k walls")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jumps", type=int, default=0)
    p.add_argument("--init", choices=("constant-plus", "constant-minus", "random", "tanh-wall"), default=None)
    _common(p)

    p = sub.add_parser("crease", help="chirality-wall energy C_alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rel-tol", type=float, default=crease.DEFAULT_REL_TOL)
    _common(p, table=False)

    p = sub.add_parser("crease-sweep", help="C_alpha over a grid of alpha")
    p.add_argument("--alphas", type=_floats, default=None)
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=3.9)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--rel-tol", type=float, default=crease.DEFAULT_REL_TOL)
    _common(p)

    p = sub.add_parser("fit-asymptotics", help="log-log fit of C_alpha against 4 - alpha")
    p.add_argument("--alpha-min", type=float, default=3.9)
    p.add_argument("--alpha-max", type=float, default=3.999)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--rel-tol", type=float, default=crease.DEFAULT_REL_TOL)
    _common(p, table=False)

    p = sub.add_parser("regimes", help="scaled k-wall minimum and its regime label")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jumps", type=int, default=2)
    p.add_argument("--grid", type=int, default=1024)
    _common(p)

    p = sub.add_parser("mm-compare", help="discrete minimum against the G functional and prediction")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--jumps", type=int, default=2)
    p.add_argument("--grid", type=int, default=None, help="default: resolve the interface width")
    _common(p)

    p = sub.add_parser("phase-diagram", help="regime labels over an (n, alpha) grid")
    p.add_argument("--n-grid", type=_ints, required=True)
    p.add_argument("--alpha-grid", type=_floats, required=True)
    p.add_argument("--jumps", type=int, default=2)
    p.add_argument("--grid", type=int, default=1024)
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# validation


def _check_common(args) -> MinimizeOptions:
    if args.threads < 1:
        raise InvalidArgument("--threads must be >= 1")
    if args.seed < 0 or args.seed >= 1 << 64:
        raise InvalidArgument("--seed must be an unsigned 64-bit integer")
    for name in ("alpha",):
        if hasattr(args, name):
            model.check_alpha(getattr(args, name))
    if hasattr(args, "n"):
        model.check_sites(args.n)
    if getattr(args, "jumps", 0) % 2 or getattr(args, "jumps", 0) < 0:
        raise InvalidArgument(f"--jumps must be even and >= 0 on a periodic chain, got {args.jumps}")
    if hasattr(args, "rel_tol") and not args.rel_tol > 0:
        raise InvalidArgument("--rel-tol must be positive")
    return MinimizeOptions(max_iterations=args.max_iter, gradient_tolerance=args.tol)


def _below_singular(alpha: float) -> None:
    if alpha >= 4.0:
        raise InvalidArgument(
            f"alpha={alpha}: scaled and crease quantities need alpha < 4; alpha = 4 is the singular point"
        )


def _metadata(args, extra: dict | None = None) -> dict:
    meta = {
        "command": args.command,
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k not in ("command", "out", "format", "gnuplot", "timing", "threads")},
        "defaults": {
            "max_iterations": MinimizeOptions().max_iterations,
            "gradient_tolerance": MinimizeOptions().gradient_tolerance,
            "crease_rel_tol": crease.DEFAULT_REL_TOL,
            "crease_initial_half_width": "max(8, ceil(4 / sqrt(4 - alpha)))",
            "continuum_grid": continuum.DEFAULT_GRID,
            "ferro_threshold": f"{scaling.FERRO_FACTOR} x (8/3) k",
        },
    }
    meta.update(extra or {})
    return meta


# ---------------------------------------------------------------------------
# commands


def _cmd_energy(args, opts):
    alpha, n = args.alpha, args.n
    th = model.theta_alpha(alpha)
    if args.thetas is not None:
        chain = model.AngleChain(args.thetas)
    elif args.random:
        rng = np.random.default_rng(args.seed)
        chain = model.AngleChain(rng.uniform(-model.HALF_PI, model.HALF_PI, n))
    else:
        value = {"theta-alpha": th, "minus-theta-alpha": -th, "zero": 0.0}[args.constant or "theta-alpha"]
        chain = model.AngleChain.constant(value, n)
    outputs = {
        "energy": model.energy_angles(chain, alpha),
        "lower_bound": model.potential_lower_bound(chain, alpha),
        "scaled_energy": model.scaled_energy(chain, alpha) if alpha < 4 else math.inf,
    }
    return [SweepRow({"alpha": alpha, "n": chain.n}, outputs, {"converged": True})], True


def _cmd_minimize(args, opts):
    init = {
        None: None,
        "constant-plus": Init.constant_plus(),
        "constant-minus": Init.constant_minus(),
        "random": Init.random(args.seed),
        "tanh-wall": None,
    }[args.init]
    opts = MinimizeOptions(opts.max_iterations, opts.gradient_tolerance, init)
    if args.jumps:
        res = ground_state.minimize_constrained(
            args.n, args.alpha, ground_state.alternating_pins(args.n, args.alpha, args.jumps), opts)
    else:
        res = ground_state.minimize_periodic(args.n, args.alpha, opts)
    prof = ground_state.chirality_profile(res.chain)
    outputs = {"energy": res.energy, "jump_count": prof.jump_count,
               "theta_max": float(np.max(res.chain.thetas)), "theta_min": float(np.min(res.chain.thetas))}
    row = SweepRow({"alpha": args.alpha, "jumps": args.jumps, "n": args.n, "seed": args.seed},
                   outputs, {"converged": res.converged, "iterations": res.iterations})
    return [row], res.converged


def _cmd_crease(args, opts):
    _below_singular(args.alpha)
    res = crease.crease_energy(args.alpha, args.rel_tol, opts)
    obj = {
        "alpha": args.alpha,
        "C": res.energy,
        "N_final": res.half_width,
        "converged": res.converged,
        "history": [{"N": N, "energy": e} for N, e in res.window_history],
    }
    return obj, res.converged


def _alpha_list(args) -> list[float]:
    if args.alphas is not None:
        return args.alphas
    if args.points < 1:
        raise InvalidArgument("--points must be >= 1")
    if args.points == 1:
        return [args.alpha_min]
    return np.linspace(args.alpha_min, args.alpha_max, args.points).tolist()


def _cmd_crease_sweep(args, opts):
    alphas = _alpha_list(args)
    for a in alphas:
        model.check_alpha(a)
        _below_singular(a)
    results = crease.crease_sweep(alphas, args.rel_tol, opts, workers=args.threads)
    rows = [
        SweepRow({"alpha": a},
                 {"C": r.energy, "N_final": r.half_width, "upper_bound": crease.crease_upper_bound(a)},
                 {"converged": r.converged, "iterations": r.iterations})
        for a, r in zip(alphas, results)
    ]
    return rows, all(r.converged for r in results)


def fit_alphas(alpha_min: float, alpha_max: float, points: int) -> np.ndarray:
    """alpha values with 4 - alpha log-spaced between the two ends."""
    if points < 5:
        raise InvalidArgument("a fit needs at least 5 points")
    if not 0 <= alpha_min < alpha_max < 4:
        raise InvalidArgument("need 0 <= alpha-min < alpha-max < 4 (alpha = 4 is the singular point)")
    eps = np.geomspace(4.0 - alpha_min, 4.0 - alpha_max, points)
    return 4.0 - eps


def _cmd_fit(args, opts):
    alphas = fit_alphas(args.alpha_min, args.alpha_max, args.points)
    results = crease.crease_sweep(alphas, args.rel_tol, opts, workers=args.threads)
    energies = [r.energy for r in results]
    fit = crease.fit_asymptotics(alphas, energies)
    obj = {
        "exponent": fit.exponent,
        "prefactor": fit.prefactor,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
        "reference_exponent": 1.5,
        "reference_prefactor": math.sqrt(2.0) / 3.0,
        "converged": all(r.converged for r in results),
        "points": [{"alpha": float(a), "C": c} for a, c in zip(alphas, energies)],
    }
    return obj, obj["converged"]


def _cmd_regimes(args, opts):
    _below_singular(args.alpha)
    if args.jumps < 2:
        raise InvalidArgument("--jumps must be >= 2 to classify a regime")
    res = scaling.scaled_minimum(args.n, args.alpha, args.jumps, opts)
    L = scaling.functional_l(args.n, args.alpha)
    outputs = {
        "diffuse_prediction": scaling.regime_limit_energy(L, args.jumps, args.grid),
        "functional_l": L,
        "l_value": scaling.l_value(args.n, args.alpha),
        "measured": res.energy,
        "regime_label": scaling.classify_regime(res.energy, L, args.jumps, args.grid),
        "sharp_prediction": scaling.SHARP_INTERFACE_COST * args.jumps,
    }
    row = SweepRow({"alpha": args.alpha, "grid": args.grid, "jumps": args.jumps, "n": args.n},
                   outputs, {"converged": res.converged, "iterations": res.iterations})
    return [row], res.converged


def _cmd_mm_compare(args, opts):
    _below_singular(args.alpha)
    rep = continuum.equivalence_report(args.n, args.alpha, args.jumps, opts, grid=args.grid)
    gaps = rep.gaps()
    outputs = {
        "C": rep.crease_energy,
        "continuum_G": rep.continuum_G,
        "discrete": rep.discrete,
        "gap_G_prediction": gaps["G-prediction"],
        "gap_discrete_G": gaps["discrete-G"],
        "gap_discrete_prediction": gaps["discrete-prediction"],
        "grid": rep.grid,
        "prediction": rep.prediction,
    }
    row = SweepRow({"alpha": args.alpha, "jumps": args.jumps, "n": args.n}, outputs,
                   {"converged": rep.converged})
    return [row], rep.converged


def _cmd_phase_diagram(args, opts):
    for a in args.alpha_grid:
        model.check_alpha(a)
        _below_singular(a)
    for n in args.n_grid:
        model.check_sites(n)
    points = scaling.phase_diagram(args.n_grid, args.alpha_grid, args.jumps, opts,
                                   grid=args.grid, workers=args.threads)
    rows = [
        SweepRow({"alpha": p.alpha, "n": p.n},
                 {"epsilon": p.epsilon, "l_value": p.l_value, "measured": p.measured,
                  "regime_label": p.regime_label},
                 {"converged": p.converged, "error": p.error})
        for p in points
    ]
    return rows, all(p.converged for p in points)


COMMANDS = {
    "energy": _cmd_energy,
    "minimize": _cmd_minimize,
    "crease": _cmd_crease,
    "crease-sweep": _cmd_crease_sweep,
    "fit-asymptotics": _cmd_fit,
    "regimes": _cmd_regimes,
    "mm-compare": _cmd_mm_compare,
    "phase-diagram": _cmd_phase_diagram,
}


def _write_object(obj: dict, args, meta: dict) -> None:
    if args.format == "csv":
        flat = {k: v for k, v in obj.items() if not isinstance(v, (list, dict))}
        flags = {"converged": flat.pop("converged")}
        emit_table([SweepRow({}, flat, flags)], "csv", args.out, metadata=meta)
        return
    text = render_object(obj)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        with open(f"{args.out}.meta.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_object(meta))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = _check_common(args)
        start = time.perf_counter()
        result, converged = COMMANDS[args.command](args, opts)
        extra = {"wall_clock_seconds": time.perf_counter() - start} if args.timing else None
        meta = _metadata(args, extra)
        if isinstance(result, dict):
            _write_object(result, args, meta)
        else:
            emit_table(result, args.format, args.out, metadata=meta, gnuplot=args.gnuplot)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (InvalidArgument, OSError) as exc:
        print(f"chiralchain: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not converged:
        print("chiralchain: warning: solver did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def main() -> None:
    sys.exit(run())
