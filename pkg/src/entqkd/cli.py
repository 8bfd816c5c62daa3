"""Command-line interface.

Subcommands
-----------
reconstruct  MLE state and QKD metrics from a dataset file, JSON report.
model        Rate-versus-gain curve as CSV (closed form, or via full
             tomography + MLE when a single-pair state file is given).
optimize     Optimal and critical gain for given transmittances, JSON.
bases        Optimal measurement bases and waveplate dials for a state.
compare      CSV series contrasting the CW source bound with ideal and
             noisy single-pair sources.
table-check  Internal-consistency check of the bundled reference table.

Exit codes: 0 success, 2 invalid input, 3 reconstruction did not
converge (a partial report is still written).  All outputs are
deterministic given the flags and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, bases, dataio, metrics, optimize, refdata, spdc, tomography
from .states import bell_state, werner_mix

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3

_DEFAULT_GRID = "0.001:0.2:120"
_DEFAULT_S_TARGET = 2.815


def _parse_grid(spec: str, log: bool) -> np.ndarray:
    try:
        start_s, stop_s, steps_s = spec.split(":")
        start, stop, steps = float(start_s), float(stop_s), int(steps_s)
    except ValueError as exc:
        raise ValueError(f"grid must look like start:stop:steps, got {spec!r}") from exc
    if steps < 1:
        raise ValueError(f"grid needs at least 1 step, got {steps}")
    if not stop > start:
        raise ValueError(f"grid needs start < stop, got {spec!r}")
    if log:
        if start <= 0:
            raise ValueError("log grid needs a positive start")
        return np.geomspace(start, stop, steps)
    return np.linspace(start, stop, steps)


def _resolve_etas(args) -> tuple[float, float]:
    if args.eta is not None:
        if args.eta_a is not None or args.eta_b is not None:
            raise ValueError("--eta conflicts with --eta-a/--eta-b")
        eta_a = eta_b = args.eta
    else:
        eta_a = args.eta_a if args.eta_a is not None else 1.0
        eta_b = args.eta_b if args.eta_b is not None else 1.0
    for name, eta in (("eta_a", eta_a), ("eta_b", eta_b)):
        if not 0.0 < eta <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1], got {eta}")
    return eta_a, eta_b


def _load_rho0(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return dataio.density_matrix_from_json(json.load(fh))


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _basis_table(state, ordering: str) -> dict | None:
    try:
        basis_set = bases.optimal_bases(state, ordering)
    except bases.NoSignalError:
        return None
    s_achieved, q_achieved = bases.verify_bases(state, basis_set)
    rows = []
    for label, vec in basis_set.labeled():
        dials = bases.waveplate_angles(vec)
        rows.append({
            "label": label,
            "bloch": [float(v) for v in vec],
            "theta_h_deg": round(math.degrees(dials.theta_h), 4),
            "theta_q_deg": round(math.degrees(dials.theta_q), 4),
        })
    return {"ordering": ordering, "achieved_S": s_achieved,
            "achieved_Q": q_achieved, "settings": rows}


def cmd_reconstruct(args) -> int:
    ds = dataio.load_dataset(args.dataset)
    result = tomography.mle_reconstruct(ds.counts.astype(float), ds.settings)
    r_c = tomography.coincidence_rate_from_counts(ds)
    qkd = metrics.QkdMetrics.from_state(result.rho, r_c)

    uncertainty = None
    if args.mc:
        mc_report = tomography.monte_carlo_uncertainty(ds, args.mc, args.seed)
        uncertainty = mc_report.to_json_dict()

    report = {
        "dataset": {
            "path": str(args.dataset),
            "tau_s": ds.tau_s,
            "duration_s": ds.duration_s,
            "n_windows": ds.n_windows,
            "total_counts": int(ds.counts.sum()),
        },
        "reconstruction": {
            "converged": result.converged,
            "iterations": result.iterations,
            "log_likelihood": result.log_likelihood,
            "rho": dataio.density_matrix_to_json(result.rho),
        },
        "metrics": qkd.to_json_dict(),
        "uncertainty": uncertainty,
        "bases": _basis_table(result.rho, args.ordering),
        "provenance": {
            "tool": "entqkd",
            "version": __version__,
            "mc_samples": args.mc,
            "seed": args.seed if args.mc else None,
        },
    }
    _write_text(dataio.canonical_json(report), args.out)
    if not result.converged:
        print("warning: reconstruction did not converge within the iteration cap",
              file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _mle_curve(rho0: np.ndarray, eta_a: float, eta_b: float,
               grid) -> list[spdc.ModelPoint]:
    """Gain curve via the full pipeline: synthesize, reconstruct, evaluate.

    The kappa column reports the effective white-noise weight inferred
    from the achieved S, 1 - S / (2 sqrt(2)); for mixture-family states
    this coincides with the mixing weight.
    """
    settings = tomography.TomographySettings.canonical()
    points = []
    for n_bar in grid:
        params = spdc.SourceParams(n_bar=float(n_bar), eta_a=eta_a, eta_b=eta_b)
        freqs = tomography.synthesize_frequencies(rho0, params, settings)
        rho = tomography.mle_reconstruct(freqs, settings).rho
        s = metrics.chsh_max(rho)
        q = metrics.qber_min(rho)
        r_dw = metrics.devetak_winter(s, q)
        r_c = spdc.coincidence_rate_exact(n_bar, eta_a, eta_b)
        points.append(spdc.ModelPoint(n_bar=float(n_bar),
                                      kappa=1.0 - s / metrics.TSIRELSON,
                                      s=s, q=q, r_dw=r_dw, r_c=r_c,
                                      r_key=metrics.key_rate(r_dw, r_c)))
    return points


def cmd_model(args) -> int:
    eta_a, eta_b = _resolve_etas(args)
    grid = _parse_grid(args.nbar_grid, args.log)
    if args.rho0_file is not None:
        points = _mle_curve(_load_rho0(args.rho0_file), eta_a, eta_b, grid)
    else:
        points = spdc.model_curve(eta_a, eta_b, grid)
    _write_text(dataio.model_points_to_csv(points), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    eta_a, eta_b = _resolve_etas(args)
    optimum = optimize.optimize_gain(eta_a, eta_b)
    payload = {
        "eta_a": eta_a,
        "eta_b": eta_b,
        "n_bar_opt": optimum.n_bar_opt,
        "r_key_opt": optimum.r_key_opt,
        "n_bar_critical": optimize.critical_gain(eta_a, eta_b),
    }
    _write_text(dataio.canonical_json(payload), args.out)
    return EXIT_OK


def cmd_bases(args) -> int:
    if args.rho0_file is not None:
        state = _load_rho0(args.rho0_file)
    else:
        state = bell_state(args.bell)
    table = _basis_table(state, args.ordering)
    if table is None:
        print("error: state has no correlations, no optimal basis exists", file=sys.stderr)
        return EXIT_INPUT
    lines = [f"ordering: {table['ordering']}",
             f"{'basis':<6} {'x1':>10} {'x2':>10} {'x3':>10} {'theta_H [deg]':>14} {'theta_Q [deg]':>14}"]
    for row in table["settings"]:
        x1, x2, x3 = row["bloch"]
        lines.append(f"{row['label']:<6} {x1:>10.6f} {x2:>10.6f} {x3:>10.6f} "
                     f"{row['theta_h_deg']:>14.4f} {row['theta_q_deg']:>14.4f}")
    lines.append(f"achieved: S = {table['achieved_S']:.6f}, Q = {table['achieved_Q']:.6f}")
    _write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    eta_a, eta_b = _resolve_etas(args)
    os.makedirs(args.out_dir, exist_ok=True)
    grid = _parse_grid(args.nbar_grid, True)

    ideal = spdc.model_curve(1.0, 1.0, grid)
    _write_text(dataio.model_points_to_csv(ideal),
                os.path.join(args.out_dir, "spdc_ideal.csv"))

    if args.rho0_file is not None:
        rho0 = _load_rho0(args.rho0_file)
    else:
        rho0 = werner_mix(bell_state("phi+"), 1.0 - args.s_target / metrics.TSIRELSON)
    lossy = _mle_curve(rho0, eta_a, eta_b, grid)
    _write_text(dataio.model_points_to_csv(lossy),
                os.path.join(args.out_dir, "spdc_model.csv"))

    dephasing = optimize.qd_threshold(0.95, "dephasing")
    white = optimize.qd_threshold(0.95, "white")
    peak = optimize.optimize_gain(1.0, 1.0)
    marker_lines = ["label,r_c,R_key"]
    marker_lines.append(f"spdc_bound,{spdc.coincidence_rate_exact(peak.n_bar_opt, 1.0, 1.0)!r},"
                        f"{optimize.R_KEY_MAX_SPDC!r}")
    for name, thr in (("dephasing_c95", dephasing), ("white_c95", white)):
        marker_lines.append(f"threshold_{name},{thr.r_c_threshold!r},{optimize.R_KEY_MAX_SPDC!r}")
    _write_text("\n".join(marker_lines) + "\n",
                os.path.join(args.out_dir, "thresholds.csv"))

    rc_grid = np.geomspace(1e-6, 0.2, 60)
    line_rows = ["source,r_c,R_key"]
    for name, r_dw in (("ideal_single_pair", 1.0),
                       ("dephasing_c95", dephasing.r_dw),
                       ("white_c95", white.r_dw)):
        for r_c, r_key in optimize.qd_key_line(r_dw, rc_grid):
            line_rows.append(f"{name},{r_c!r},{r_key!r}")
    _write_text("\n".join(line_rows) + "\n",
                os.path.join(args.out_dir, "single_pair_lines.csv"))

    ref_rows = ["tau_ns,r_c,S,Q,r_dw,R_key"]
    for row in refdata.load_reference_table():
        ref_rows.append(f"{row.tau_ns!r},{row.r_c.value!r},{row.s.value!r},"
                        f"{row.q.value!r},{row.r_dw.value!r},{row.r_key.value!r}")
    _write_text("\n".join(ref_rows) + "\n",
                os.path.join(args.out_dir, "reference_points.csv"))

    print(f"wrote comparison series to {args.out_dir}")
    return EXIT_OK


def cmd_table_check(args) -> int:
    rows = refdata.load_reference_table(args.table_file)
    checks = refdata.check_reference_table(rows)
    failures = 0
    for chk in checks:
        status = "PASS" if chk.ok else "FAIL"
        print(f"{status} tau={chk.tau_ns:7.1f} ns  "
              f"r_dw {chk.r_dw_computed:.4f} vs {chk.r_dw_printed:.2f} "
              f"(tol {chk.r_dw_tolerance:.4f})  "
              f"R_key {chk.r_key_computed:.3e} vs {chk.r_key_printed:.3e} "
              f"(tol {chk.r_key_tolerance:.3e})")
        if not chk.ok:
            failures += 1
    print(f"{len(checks) - failures}/{len(checks)} rows consistent")
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entqkd",
        description="QKD figures of merit for photonic entanglement sources")
    parser.add_argument("--version", action="version", version=f"entqkd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_eta_flags(p):
        p.add_argument("--eta", type=float, default=None,
                       help="symmetric transmittance for both arms")
        p.add_argument("--eta-a", type=float, default=None, help="Alice-arm transmittance")
        p.add_argument("--eta-b", type=float, default=None, help="Bob-arm transmittance")

    p = sub.add_parser("reconstruct", help="MLE reconstruction and QKD report")
    p.add_argument("dataset", help="dataset JSON file")
    p.add_argument("--mc", type=int, default=0, metavar="N",
                   help="Monte-Carlo samples for uncertainties (0 = skip)")
    p.add_argument("--seed", type=int, default=0, help="master seed for Monte-Carlo")
    p.add_argument("--ordering", choices=bases.ORDERINGS, default="alice_first")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("model", help="rate-versus-gain curve as CSV")
    add_eta_flags(p)
    p.add_argument("--nbar-grid", default=_DEFAULT_GRID, metavar="START:STOP:STEPS")
    p.add_argument("--log", action="store_true", help="logarithmic gain grid")
    p.add_argument("--rho0-file", default=None,
                   help="single-pair state JSON; runs the full tomography+MLE pipeline")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("optimize", help="optimal and critical gain")
    add_eta_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("bases", help="optimal bases and waveplate dials")
    p.add_argument("--rho0-file", default=None, help="state JSON file")
    p.add_argument("--bell", choices=("phi+", "phi-", "psi+", "psi-"), default="phi+",
                   help="use a Bell state (default phi+) when no file is given")
    p.add_argument("--ordering", choices=bases.ORDERINGS, default="alice_first")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bases)

    p = sub.add_parser("compare", help="CW bound vs single-pair sources, CSV series")
    add_eta_flags(p)
    p.add_argument("--nbar-grid", default="1e-4:0.2:80", metavar="START:STOP:STEPS")
    p.add_argument("--s-target", type=float, default=_DEFAULT_S_TARGET,
                   help="CHSH value the default surrogate single-pair state matches")
    p.add_argument("--rho0-file", default=None, help="explicit single-pair state JSON")
    p.add_argument("--out-dir", default="compare_out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("table-check", help="reference-table consistency check")
    p.add_argument("table_file", nargs="?", default=None,
                   help="table JSON (default: bundled copy)")
    p.set_defaults(func=cmd_table_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and args.eta is None and args.eta_a is None \
            and args.eta_b is None:
        args.eta = 0.16
    try:
        return args.func(args)
    except (dataio.DatasetFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
