"""Command-line entry point: ``ensemble-su2 <command> ...``.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    default_omega_grid,
    empirical_order,
    lemma4_scaling_test,
    lemma5_frame_check,
    theorem1_sweep,
    write_sweep_csv,
)
from .fourier import FourierKernel, odd_integral, truncation_error, verify_decay
from .profile import BumpParams, ProfileError, TargetProfile, eval_f
from .schedule import (
    ScheduleError,
    build_theorem1,
    deserialize,
    euler_compose,
    serialize,
)
from .simulator import (
    SimConfig,
    ensemble_propagate,
    propagate_sequence,
    write_result_csv,
)
from .su2 import (
    PauliVector,
    frobenius_distance,
    multiply,
    pauli_exp,
    trace_fidelity,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
UNITARITY_LIMIT = 1e-8


class UsageError(Exception):
    pass


# -- argument helpers --------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _grid(text: str) -> list[float]:
    """``lo:hi:n`` -> n evenly spaced points including both ends."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r}")
    if n < 1 or (n > 1 and not hi > lo):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return np.linspace(lo, hi, n).tolist()


def _load_profile(path: str) -> TargetProfile:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"--profile: no such file {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"--profile: invalid JSON ({exc.msg} at line {exc.lineno})")
    try:
        return TargetProfile.from_dict(data.get("profile", data) if isinstance(data, dict) else data)
    except ProfileError as exc:
        raise UsageError(f"--profile: {exc}")


def _omegas(args, profile: TargetProfile | None = None) -> list[float]:
    if getattr(args, "omega", None):
        grid = args.omega
    elif getattr(args, "omega_grid", None):
        grid = args.omega_grid
    elif profile is not None:
        grid = list(default_omega_grid(profile))
    else:
        raise UsageError("--omega: give --omega or --omega-grid")
    if any(not (w > 0) for w in grid):
        raise UsageError("--omega: frequencies must be positive")
    return grid


def _write_manifest(path: Path, command: str, argv, params: dict, inputs, outputs, started: float) -> None:
    manifest = {
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "started_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_clock_s": round(time.perf_counter() - started, 6),
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


# -- commands ----------------------------------------------------------------


def cmd_synthesize(args, argv) -> int:
    started = time.perf_counter()
    profile = _load_profile(args.profile)
    if not args.eps1 > 0 or not math.isfinite(args.eps1):
        raise UsageError("--eps1: must be a positive number")
    if args.N < 1:
        raise UsageError("--N: must be >= 1")
    sched = build_theorem1(profile, args.eps1, args.N, args.axis)
    out = Path(args.out)
    out.write_bytes(serialize(sched))
    _write_manifest(
        _manifest_path(out), "synthesize", argv,
        {"eps1": args.eps1, "N": args.N, "axis": args.axis, "profile": profile.to_dict()},
        [args.profile], [out], started,
    )
    print(f"wrote {out}: {len(sched.segments)} segments, duration {sched.total_duration:g}")
    return EXIT_OK


def _read_schedule(path: str):
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise UsageError(f"--schedule: no such file {path}")
    try:
        return deserialize(data)
    except ScheduleError as exc:
        raise UsageError(f"--schedule: {exc}")


def cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    sched = _read_schedule(args.schedule)
    omegas = _omegas(args, sched.profile)
    if args.dt is not None and not args.dt > 0:
        raise UsageError("--dt: must be positive")
    if args.record_stride < 1:
        raise UsageError("--record-stride: must be >= 1")
    cfg = SimConfig(tuple(omegas), args.dt, args.record_stride)
    result = ensemble_propagate(sched, cfg, args.workers)
    drift = result.max_unitarity_error
    if drift > UNITARITY_LIMIT:
        print(f"integrator failure: unitarity drift {drift:.3e}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.out)
    write_result_csv(result, out)
    outputs = [out]
    if args.plot:
        from .plotting import plot_convergence, plot_final_errors, plot_populations

        stem = out.with_suffix("")
        figs = {
            "populations": plot_populations,
            "convergence": plot_convergence,
            "final_errors": plot_final_errors,
        }
        for name, fn in figs.items():
            path = Path(f"{stem}_{name}.svg")
            fn(result, path)
            outputs.append(path)
    _write_manifest(
        _manifest_path(out), "simulate", argv,
        {"omega": omegas, "dt": args.dt, "record_stride": args.record_stride},
        [args.schedule], outputs, started,
    )
    for w, e, i in zip(result.omegas, result.frob_errors, result.infidelities):
        print(f"omega={w:.6g}  frob_err={e:.6e}  infidelity={i:.6e}")
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    started = time.perf_counter()
    profile = _load_profile(args.profile)
    if any(not e > 0 for e in args.eps1):
        raise UsageError("--eps1: values must be positive")
    if any(n < 1 for n in args.N):
        raise UsageError("--N: values must be >= 1")
    omegas = _omegas(args, profile)
    report = theorem1_sweep(profile, args.eps1, args.N, omegas, args.axis, args.dt, args.workers)
    out = Path(args.out)
    write_sweep_csv(report, out)
    outputs = [out]
    if args.plot:
        from .plotting import plot_sweep

        fig = out.with_suffix(".svg")
        plot_sweep(report, fig)
        outputs.append(fig)
    _write_manifest(
        _manifest_path(out), "sweep", argv,
        {"eps1": args.eps1, "N": args.N, "axis": args.axis, "omega": omegas, "dt": args.dt},
        [args.profile], outputs, started,
    )
    for r in report.rows:
        print(f"eps1={r.eps1:g} N={r.N}  max_frob_err={r.max_frob_err:.6e}  max_infidelity={r.max_infidelity:.6e}")
    return EXIT_OK


def verify_lemmas(
    profile: TargetProfile,
    lemmas=(1, 2, 3, 4, 5),
    eps2_list=(0.1, 0.05, 0.025),
    lemma4_eps1: float = 0.01,
    coarse_panels: int | None = None,
    lemma5_mapping: str = "consistent",
    dt: float = 0.01,
    seed: int = 0,
) -> dict:
    """Run the numerical lemma certificates; returns a JSON-ready report."""
    kernel = FourierKernel(profile)
    lo, hi = kernel.band
    v0, v1 = profile.support
    rng = np.random.default_rng(seed)
    report: dict = {}
    if 1 in lemmas:
        dec = verify_decay(kernel, 3, np.geomspace(10.0, 400.0, 60))
        report["lemma1"] = {"check": "|ghat(t)| t^n bounded on [10, 400]", **dec.as_dict()}
    if 2 in lemmas:
        w = 1.4 if lo <= 1.4 <= hi else 0.5 * (lo + hi)
        eps = [0.1, 0.05, 0.025, 0.0125]
        errs = [truncation_error(kernel, e, w) for e in eps]
        if max(errs) <= 1e-14:
            slope, ok = math.inf, True
        else:
            slope = empirical_order(eps, [max(e, 1e-300) for e in errs])
            ok = slope > 2.0
        report["lemma2"] = {
            "check": "log-log slope of truncation error in eps1 > 2",
            "omega": w, "eps1": eps, "errors": errs, "slope": slope, "passed": ok,
        }
    if 3 in lemmas:
        vals = []
        for _ in range(20):
            e1 = float(rng.uniform(0.01, 0.2))
            w = float(rng.uniform(lo, hi))
            vals.append(abs(odd_integral(kernel, e1, w, coarse_panels)))
        report["lemma3"] = {
            "check": "|odd integral| <= 1e-12 for 20 random (eps1, omega)",
            "max_abs": max(vals), "coarse_panels": coarse_panels, "passed": max(vals) <= 1e-12,
        }
    if 4 in lemmas:
        grid = [w for w in (0.5, 0.7, 0.9) if v0 <= w <= v1] or list(np.linspace(v0, v1, 5)[1:4])
        if profile.is_zero:
            report["lemma4"] = {"check": "trivial profile", "passed": True}
        else:
            rep = lemma4_scaling_test(profile, lemma4_eps1, eps2_list, grid, dt)
            report["lemma4"] = {"check": "eps2 order >= 1.9", **rep.as_dict()}
    if 5 in lemmas:
        rows = []
        for _ in range(20):
            nu = int(rng.choice([-1, 1]))
            w = float(rng.uniform(v0, v1))
            e2 = float(rng.uniform(0.01, 0.1))
            dist = lemma5_frame_check(profile, 0.05, e2, nu, w, dt, lemma5_mapping, kernel)
            rows.append({"nu": nu, "omega": w, "eps2": e2, "distance": dist})
        worst = max(r["distance"] for r in rows)
        report["lemma5"] = {
            "check": "frame identity within 5 dt^2",
            "mapping": lemma5_mapping, "dt": dt, "bound": 5 * dt * dt,
            "max_distance": worst, "rows": rows, "passed": worst <= 5 * dt * dt,
        }
    report["passed"] = all(v["passed"] for k, v in report.items() if k.startswith("lemma"))
    return report


def cmd_verify_lemmas(args, argv) -> int:
    started = time.perf_counter()
    profile = _load_profile(args.profile)
    lemmas = tuple(args.lemma) if args.lemma else (1, 2, 3, 4, 5)
    if sorted(args.eps2, reverse=True) != args.eps2 or len(set(args.eps2)) != len(args.eps2):
        raise UsageError("--eps2: values must be strictly decreasing")
    report = verify_lemmas(
        profile, lemmas, args.eps2, args.lemma4_eps1, args.coarse_panels, args.lemma5_mapping, args.dt, args.seed
    )
    for key in sorted(k for k in report if k.startswith("lemma")):
        item = report[key]
        detail = {
            "lemma1": lambda r: f"C_n={['%.3g' % c for c in r['C_n']]}",
            "lemma2": lambda r: f"slope={r['slope']:.3f}",
            "lemma3": lambda r: f"max|I|={r['max_abs']:.2e}",
            "lemma4": lambda r: f"min order={r.get('min_order', float('nan')):.3f}",
            "lemma5": lambda r: f"max dist={r['max_distance']:.2e} (bound {r['bound']:.1e}, {r['mapping']})",
        }[key](item)
        print(f"{key}: {'PASS' if item['passed'] else 'FAIL'}  {detail}")
    outputs = []
    if args.out:
        out = Path(args.out)
        out.write_text(json.dumps(report, indent=2) + "\n")
        outputs.append(out)
        _write_manifest(
            _manifest_path(out), "verify-lemmas", argv,
            {"lemmas": list(lemmas), "eps2": args.eps2, "coarse_panels": args.coarse_panels,
             "lemma5_mapping": args.lemma5_mapping, "dt": args.dt, "seed": args.seed},
            [args.profile], outputs, started,
        )
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_euler(args, argv) -> int:
    started = time.perf_counter()
    if args.profile:
        bump = _load_profile(args.profile).bump
    else:
        try:
            bump = BumpParams(*args.bump)
        except ProfileError as exc:
            raise UsageError(f"--bump: {exc}")
    try:
        profs = {name: TargetProfile(bump, getattr(args, name)) for name in ("alpha", "beta", "gamma")}
    except ProfileError as exc:
        raise UsageError(f"--alpha/--beta/--gamma: {exc}")
    if args.N < 1 or not args.eps1 > 0:
        raise UsageError("--N/--eps1: need N >= 1 and eps1 > 0")
    omegas = _omegas(args, profs["beta"])
    scheds = euler_compose(profs["alpha"], profs["beta"], profs["gamma"], args.eps1, args.N)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = ["schedule_gamma_x.json", "schedule_beta_y.json", "schedule_alpha_x.json"]
    outputs = []
    for name, sched in zip(names, scheds):
        (out_dir / name).write_bytes(serialize(sched))
        outputs.append(out_dir / name)
    csv_path = out_dir / "composite.csv"
    cols = ["omega", "re00", "im00", "re01", "im01", "re10", "im10", "re11", "im11", "frob_err", "infidelity"]
    worst = 0.0
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for w in omegas:
            traj = propagate_sequence(scheds, w, args.dt, record_stride=1 << 30)
            worst = max(worst, float(traj.unitarity_errors().max()))
            final = traj.final
            target = multiply(
                multiply(
                    pauli_exp(PauliVector(eval_f(profs["alpha"], w), 0, 0)),
                    pauli_exp(PauliVector(0, eval_f(profs["beta"], w), 0)),
                ),
                pauli_exp(PauliVector(eval_f(profs["gamma"], w), 0, 0)),
            )
            row = [w]
            for z in (final.u00, final.u01, final.u10, final.u11):
                row += [z.real, z.imag]
            row += [frobenius_distance(final, target), 1.0 - trace_fidelity(final, target)]
            writer.writerow([f"{x:.17g}" for x in row])
            print(f"omega={w:.6g}  frob_err={row[-2]:.6e}  infidelity={row[-1]:.6e}")
    if worst > UNITARITY_LIMIT:
        print(f"integrator failure: unitarity drift {worst:.3e}", file=sys.stderr)
        return EXIT_NUMERIC
    outputs.append(csv_path)
    _write_manifest(
        out_dir / "manifest.json", "euler", argv,
        {"bump": bump.to_dict(), "alpha": args.alpha, "beta": args.beta, "gamma": args.gamma,
         "eps1": args.eps1, "N": args.N, "omega": omegas, "dt": args.dt},
        [args.profile] if args.profile else [], outputs, started,
    )
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        recorded = manifest["argv"]
    except (FileNotFoundError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"--manifest: cannot read manifest ({exc})")
    return main(recorded)


# -- parser ------------------------------------------------------------------


def _add_omega_args(p) -> None:
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--omega", type=_float_list, help="comma-separated frequencies")
    grp.add_argument("--omega-grid", type=_grid, help="lo:hi:count evenly spaced frequencies")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ensemble-su2", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="build a control schedule")
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--axis", choices=["x", "y"], default="y")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="propagate an omega ensemble under a schedule")
    p.add_argument("--schedule", required=True)
    _add_omega_args(p)
    p.add_argument("--dt", type=float, default=None, help="maximum step (default from schedule)")
    p.add_argument("--record-stride", type=int, default=10)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--plot", action="store_true", help="also write SVG figures next to --out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="(eps1, N) convergence sweep")
    p.add_argument("--profile", required=True)
    p.add_argument("--eps1", type=_float_list, required=True)
    p.add_argument("--N", type=_int_list, required=True)
    p.add_argument("--axis", choices=["x", "y"], default="y")
    _add_omega_args(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--plot", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-lemmas", help="numerical lemma certificates")
    p.add_argument("--profile", required=True)
    p.add_argument("--lemma", type=int, action="append", choices=[1, 2, 3, 4, 5])
    p.add_argument("--eps2", type=_float_list, default=[0.1, 0.05, 0.025])
    p.add_argument("--lemma4-eps1", type=float, default=0.01)
    p.add_argument("--coarse-panels", type=int, default=None,
                   help="force this many panels per half interval in the Lemma 3 rule")
    p.add_argument("--lemma5-mapping", choices=["literal", "consistent"], default="consistent")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("euler", help="compose x-y-x schedules for an Euler-angle target")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile", help="profile JSON whose bump is shared")
    src.add_argument("--bump", type=_float_list, help="a,b,c,d")
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", default="0")
    p.add_argument("--gamma", default="0")
    p.add_argument("--eps1", type=float, default=0.05)
    p.add_argument("--N", type=int, default=10)
    _add_omega_args(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "bump", None) is not None and len(args.bump) != 4:
        parser.print_usage(sys.stderr)
        print("error: argument --bump: expected four values a,b,c,d", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: argument {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProfileError, ScheduleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
