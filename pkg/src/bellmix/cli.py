"""Command-line front end.

Every subcommand accepts ``--seed``, ``--out`` and ``--format``. Reports go to
stdout unless ``--out`` names a file (or, for ``survey``, a directory).
Failures exit with the ``exit_code`` of the raised error class.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import chsh, mabk, mermin, spinchain
from .errors import BellmixError, DimensionMismatch, NotBellDiagonal, OutOfRange, ParseError, SchemaMismatch
from .operators import CHSH, MABK4, MERMIN, maximize_violation
from .qstate import DensityMatrix, bell_basis, concurrence, ghz_basis, load_density, mixedness, participation_ratio

DEFAULT_SEED = 0xB311
BELL_DIAGONAL_TOL = 1e-8
EXIT_USAGE = 2
EXIT_IO = 3


def fmt(x) -> str:
    """Nine significant digits, locale independent."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format(float(obj), ".9g"))
    return obj


def render_rows(rows: list[dict], fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(_json_ready(rows), indent=1) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow(fmt(v) for v in row.values())
    return buf.getvalue()


def render_report(report: dict, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(_json_ready(report), indent=1) + "\n"
    flat = {k: (json.dumps(_json_ready(v)) if isinstance(v, (dict, list, tuple)) else v) for k, v in report.items()}
    return render_rows([flat], "csv")


def read_table(path) -> list[dict]:
    """Parse any CSV this tool writes back into dicts of floats, booleans and strings."""
    def convert(v: str):
        if v in ("true", "false"):
            return v == "true"
        try:
            return float(v)
        except ValueError:
            return v

    with Path(path).open(newline="") as fh:
        return [{k: convert(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def parse_spectrum(text: str, sizes=(4, 8, 16)) -> np.ndarray:
    try:
        values = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise ParseError(f"cannot parse spectrum {text!r}: {exc}") from exc
    if values.size not in sizes:
        raise ParseError(f"spectrum needs {' or '.join(map(str, sizes))} values, got {values.size}")
    return values


# ---------------------------------------------------------------- commands


def _state_summary(rho: DensityMatrix) -> dict:
    m = mixedness(rho)
    return {"R": m.participation_ratio, "lambda_max": m.max_eigenvalue}


def bell_diagonal_spectrum(rho: DensityMatrix) -> np.ndarray:
    """Bell-basis weights of ``rho``; raises if any Bell-frame coherence exceeds the tolerance."""
    u = bell_basis().unitary()
    m = u @ np.asarray(rho.mat) @ u.conj().T
    off = float(np.linalg.norm(m - np.diag(np.diag(m))))
    if off >= BELL_DIAGONAL_TOL:
        raise NotBellDiagonal(f"state has Bell-frame off-diagonal norm {off:.3e}; use --method optimize")
    return np.diag(m).real


def _load_input(args, size: int) -> tuple[DensityMatrix, np.ndarray | None]:
    if args.spectrum is not None:
        lam = parse_spectrum(args.spectrum, (size,))
        builders = {4: chsh.bell_diagonal_state, 8: mermin.mermin_diagonal_state, 16: mabk.bell4_diagonal_state}
        return builders[size](lam), lam
    if args.state is None:
        raise ParseError("give either --state FILE or --spectrum")
    rho = load_density(args.state)
    if rho.dim != size:
        raise DimensionMismatch(f"{args.state}: expected a {size}x{size} state, got dim {rho.dim}")
    return rho, None


def cmd_chsh(args) -> dict:
    rho, lam = _load_input(args, 4)
    report = {"method": args.method}
    if args.method == "closed":
        lam = lam if lam is not None else bell_diagonal_spectrum(rho)
        report["value"] = chsh.chsh_max_bell_diagonal(np.clip(lam, 0, None) / np.clip(lam, 0, None).sum())
    else:
        res = maximize_violation(rho, CHSH, starts=args.starts, seed=args.seed)
        report["value"] = res.value
        report["settings"] = res.settings.to_dict()
        report["converged_fraction"] = res.converged_fraction
    report.update(_state_summary(rho))
    report["concurrence"] = concurrence(rho)
    return report


def _ghz_spectrum_of(rho: DensityMatrix, basis_size: int) -> np.ndarray:
    u = ghz_basis(basis_size).unitary()
    m = u @ np.asarray(rho.mat) @ u.conj().T
    off = float(np.linalg.norm(m - np.diag(np.diag(m))))
    if off >= BELL_DIAGONAL_TOL:
        raise NotBellDiagonal(f"state has GHZ-frame off-diagonal norm {off:.3e}; use --method optimize")
    lam = np.clip(np.diag(m).real, 0, None)
    return lam / lam.sum()


def cmd_mermin(args) -> dict:
    rho, lam = _load_input(args, 8)
    report = {"method": args.method}
    if args.method == "optimize":
        res = maximize_violation(rho, MERMIN, starts=args.starts, seed=args.seed)
        report["value"] = res.value
        report["settings"] = res.settings.to_dict()
        report["converged_fraction"] = res.converged_fraction
    else:
        lam = lam if lam is not None else _ghz_spectrum_of(rho, 3)
        if args.method == "angles":
            sol = mermin.solve_mermin_angles(lam)
            report.update(value=sol.value, phi=sol.phi, psi=sol.psi)
        else:
            report["value"] = mermin.mermin_bound_diagonal(lam)
        rep = mermin.classify(lam)
        report.update(bound=rep.mermin_value, ppt_flags=list(rep.ppt_flags), category=rep.category)
    report.update(_state_summary(rho))
    return report


def cmd_mabk(args) -> dict:
    rho, lam = _load_input(args, 16)
    report = {"method": args.method}
    if args.method == "optimize":
        res = maximize_violation(rho, MABK4, starts=args.starts, seed=args.seed)
        report["value"] = res.value
        report["settings"] = res.settings.to_dict()
        report["converged_fraction"] = res.converged_fraction
    else:
        lam = lam if lam is not None else _ghz_spectrum_of(rho, 4)
        report["value"] = mabk.mabk_bound_diagonal(lam)
    report["lvm_bound"] = MABK4.lvm_bound
    report.update(_state_summary(rho))
    return report


def frontier_rows(family: str, lo: float, hi: float, steps: int) -> list[dict]:
    if steps < 1:
        raise OutOfRange(f"steps must be positive, got {steps}")
    rows = []
    for x in np.linspace(lo, hi, steps + 1):
        x = float(x)
        if family == "chsh-R":
            p = chsh.chsh_frontier_R(x)
            rows.append({"measure": "R", "x": x, "b_max": p.b_max, "family_state": p.family_state})
        elif family == "chsh-lambda":
            b = chsh.chsh_frontier_lambda(x)
            rows.append({"measure": "lambda_max", "x": x, "b_max": b, "family_state": chsh.lambda_frontier_state_tag(x)})
        else:
            rows.append({"measure": "R", "x": x, "b_max": mermin.mermin_frontier_R(x), "family_state": "werner3"})
    return rows


_FRONTIER_DEFAULTS = {"chsh-R": (1.0, 4.0), "chsh-lambda": (0.25, 1.0), "mermin-R": (1.0, 8.0)}


def cmd_frontier(args) -> list[dict]:
    lo, hi = _FRONTIER_DEFAULTS[args.family]
    lo = lo if args.x_from is None else args.x_from
    hi = hi if args.x_to is None else args.x_to
    return frontier_rows(args.family, lo, hi, args.steps)


def cmd_mems(args) -> list[dict]:
    xs = [args.x] if args.x is not None else np.linspace(args.x_from, args.x_to, args.steps + 1)
    rows = []
    for x in xs:
        rho = chsh.mems_state(float(x))
        rows.append({"x": float(x), "g": chsh.mems_g(float(x)), "b_max": chsh.chsh_max_mems(float(x)),
                     **_state_summary(rho), "concurrence": concurrence(rho)})
    return rows


def cmd_mnms(args) -> list[dict]:
    hi = 0.5 if args.region.upper() == "I" else 0.25
    xs = [args.x] if args.x is not None else np.linspace(0.0, hi, args.steps + 1)
    rows = []
    for x in xs:
        lam = chsh.mnms_spectrum(float(x), args.region)
        rho = chsh.mnms_state(float(x), args.region)
        rows.append({"x": float(x), "region": args.region.upper(), "b_max": chsh.chsh_max_bell_diagonal(lam),
                     **_state_summary(rho), "concurrence": concurrence(rho)})
    return rows


def cmd_werner3(args) -> list[dict]:
    xs = [args.x] if args.x is not None else np.linspace(0.0, 1.0, args.steps + 1)
    rows = []
    for x in xs:
        lam = mermin.werner3_spectrum(float(x))
        rep = mermin.classify(lam)
        rows.append({"x": float(x), "R": participation_ratio(lam), "mermin_bound": rep.mermin_value,
                     "ppt_T1": rep.ppt_flags[0], "ppt_T2": rep.ppt_flags[1], "ppt_T3": rep.ppt_flags[2],
                     "category": rep.category})
    return rows


def write_survey(stats: mermin.SurveyStats, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    cats = [{"category": c, "count": n, "probability": p}
            for c, n, p in zip(mermin.CATEGORIES, stats.category_counts, stats.category_probs)]
    (out_dir / "categories.csv").write_text(render_rows(cats, "csv"))
    edges, dens = stats.bin_edges, stats.histogram
    hist = [{"bin_lo": edges[i], "bin_hi": edges[i + 1], "density": dens[i]} for i in range(len(dens))]
    (out_dir / "histogram.csv").write_text(render_rows(hist, "csv"))
    summary = {"n_samples": stats.n_samples, "seed": stats.seed, "bins": len(dens),
               "probabilities": dict(zip(mermin.CATEGORIES, stats.category_probs))}
    (out_dir / "summary.json").write_text(json.dumps(_json_ready(summary), indent=1) + "\n")
    return summary


def cmd_survey(args) -> dict:
    stats = mermin.survey(args.samples, args.seed, args.bins, workers=args.workers, verify_ppt=args.verify_ppt)
    return write_survey(stats, Path(args.out or "."))


def cmd_ghz(args) -> list[dict]:
    return [vars(r) for r in mabk.ghz_sweep(args.n, args.p_from, args.p_to, args.steps)]


def cmd_chain(args) -> list[dict]:
    sites, rows = spinchain.read_correlators(args.file)
    if args.sites is not None and args.sites != sites:
        raise SchemaMismatch(f"{args.file}: header is a {sites}-site schema but --sites {args.sites} was given")
    out = []
    for config, t in rows:
        base = {"site_config": config, **{k: v for k, v in vars(t).items() if k != "full"}}
        if sites == 2:
            b = spinchain.chsh_max_from_correlators(t)
            out.append({**base, "b_max": b, "violates": b > 2})
        else:
            b = spinchain.mermin_bound_from_correlators(t)
            out.append({**base, "mermin_bound": b, "violates": b > 2})
    return out


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED,
                        help="RNG seed (default 0xB311)")
    common.add_argument("--out", help="output file (directory for survey); stdout if omitted")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="output format")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--state", help="density-matrix JSON file")
    state.add_argument("--spectrum", help="comma-separated diagonal spectrum (4, 8 or 16 values)")
    state.add_argument("--starts", type=int, default=None, help="optimizer restarts")

    p = argparse.ArgumentParser(prog="bellmix", description="Maximal Bell violations versus mixedness.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("chsh", parents=[common, state], help="two-qubit CHSH maximum")
    s.add_argument("--method", choices=("closed", "optimize"), default="optimize")
    s.set_defaults(func=cmd_chsh, default_format="json")

    s = sub.add_parser("mermin", parents=[common, state], help="three-qubit Mermin maximum")
    s.add_argument("--method", choices=("bound", "angles", "optimize"), default="bound")
    s.set_defaults(func=cmd_mermin, default_format="json")

    s = sub.add_parser("mabk", parents=[common, state], help="four-qubit MABK maximum")
    s.add_argument("--method", choices=("bound", "optimize"), default="bound")
    s.set_defaults(func=cmd_mabk, default_format="json")

    s = sub.add_parser("frontier", parents=[common], help="maximal-violation frontier sweep")
    s.add_argument("family", choices=tuple(_FRONTIER_DEFAULTS))
    s.add_argument("--from", dest="x_from", type=float)
    s.add_argument("--to", dest="x_to", type=float)
    s.add_argument("--steps", type=int, default=300)
    s.set_defaults(func=cmd_frontier, default_format="csv")

    s = sub.add_parser("mems", parents=[common], help="maximally entangled mixed states")
    s.add_argument("--x", type=float)
    s.add_argument("--from", dest="x_from", type=float, default=0.0)
    s.add_argument("--to", dest="x_to", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=100)
    s.set_defaults(func=cmd_mems, default_format="csv")

    s = sub.add_parser("mnms", parents=[common], help="maximally nonlocal mixed states")
    s.add_argument("--x", type=float)
    s.add_argument("--region", choices=("I", "II"), default="I")
    s.add_argument("--steps", type=int, default=100)
    s.set_defaults(func=cmd_mnms, default_format="csv")

    s = sub.add_parser("werner3", parents=[common], help="three-qubit Werner family")
    s.add_argument("--x", type=float)
    s.add_argument("--steps", type=int, default=100)
    s.set_defaults(func=cmd_werner3, default_format="csv")

    s = sub.add_parser("survey", parents=[common], help="Monte Carlo survey of GHZ-diagonal states")
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--bins", type=int, default=100)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--verify-ppt", action="store_true", help="cross-check flags against explicit partial transposes")
    s.set_defaults(func=cmd_survey, default_format="json")

    s = sub.add_parser("ghz", parents=[common], help="generalized GHZ threshold sweep")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p-from", type=float, default=0.0)
    s.add_argument("--p-to", type=float, default=0.5)
    s.add_argument("--steps", type=int, default=100)
    s.set_defaults(func=cmd_ghz, default_format="csv")

    s = sub.add_parser("chain", parents=[common], help="spin-chain bounds from a correlator CSV")
    s.add_argument("file")
    s.add_argument("--sites", type=int, choices=(2, 3))
    s.set_defaults(func=cmd_chain, default_format="csv")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt_name = args.format or args.default_format
    try:
        result = args.func(args)
        if args.command == "survey":
            sys.stdout.write(render_report(result, fmt_name))
            return 0
        text = render_rows(result, fmt_name) if isinstance(result, list) else render_report(result, fmt_name)
        _emit(text, args.out)
    except BellmixError as exc:
        print(f"bellmix: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"bellmix: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"bellmix: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
