"""Command-line front end: parameter sweeps and figure data.

Exit codes: 0 success, 2 usage/config error, 3 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import correlations as corr
from .config import ConfigError, SweepConfig, load_config
from .digitalize import DigitalizeConfig, digitalize_channel, digitalized_target
from .hybrid import InputPureState, QubitParams, build_resource_state, overlap_diagnostic
from .linalg import NumericalToleranceError, negativity_of_matrix
from .oscillator import (
    OscillatorState,
    eigen_cutoff_for_tail,
    purity,
    recommended_dim,
    thermal_state,
    thermal_tail_length,
    truncation_report,
    vacuum,
)
from .protocols import (
    TELEPORT_CLASSICAL_THRESHOLD,
    RspMode,
    default_n_kept,
    rsp_payoff_bounds,
    rsp_simulate,
    teleport_average_fidelity,
    teleport_simulate,
    payoff,
)

log = logging.getLogger("hybridcorr")

INPUT_COLUMNS = ["p", "r_abs", "r_arg", "beta_re", "beta_im", "nbar", "dim"]
TRUNC_COLUMNS = ["trace_deficit", "tail_eps", "containment_margin", "containment_ok"]

COLUMNS: dict[str, list[str]] = {
    "correlations": INPUT_COLUMNS + [
        "purity_B0", "negativity", "negativity_asymptote", "witness_bound",
        "geometric_discord", "geometric_discord_asymptote", "dz_digitalized", "dz_numeric",
        "chi_2beta",
    ] + TRUNC_COLUMNS,
    "teleport": INPUT_COLUMNS + [
        "n_kept", "average_fidelity", "fidelity_asymptote", "classical_threshold", "payoff",
        "payoff_asymptote", "negativity", "success_prob",
    ] + TRUNC_COLUMNS,
    "rsp": INPUT_COLUMNS + [
        "mode", "n_kept", "purity_B0", "average_fidelity", "fidelity_asymptote", "classical_threshold",
        "payoff", "payoff_asymptote", "geometric_discord", "sqrt_dg", "payoff_lower_bound",
        "negativity", "success_prob",
    ] + TRUNC_COLUMNS,
    "digitalize": INPUT_COLUMNS + [
        "kraus_cutoff", "success_prob", "fidelity_target", "completeness_defect", "negativity_input",
        "negativity_output", "negativity_target", "dz_output", "dz_digitalized",
    ] + TRUNC_COLUMNS,
    "converge": INPUT_COLUMNS + [
        "recommended_dim", "negativity", "negativity_gap", "witness_bound", "geometric_discord",
        "geometric_discord_gap", "chi_2beta",
    ] + TRUNC_COLUMNS,
}

FIGURE2_COLUMNS = [
    "r_abs", "negativity_asymptote", "dz_digitalized", "dg_asymptote_mu05", "dg_asymptote_mu01",
    "negativity_numeric", "dz_digitalized_numeric", "dg_numeric_mu05", "dg_numeric_mu01",
]
FIGURE3_COLUMNS = {
    "a": ["r_abs", "nbar", "negativity", "payoff_tel", "payoff_tel_asymptote"],
    "b": ["r_abs", "nbar", "purity_B0", "geometric_discord", "sqrt_dg", "payoff_lower_bound",
          "payoff_rsp_unitary", "payoff_rsp_unitary_asymptote"],
    "b_bounds": ["geometric_discord", "sqrt_dg", "lower_bound", "upper_bound"],
    "c": ["r_abs", "nbar", "negativity", "payoff_rsp_digitalizing", "payoff_rsp_digitalizing_asymptote"],
}


# ------------------------------------------------------------------------------ points


def _auto_dim(beta: complex, nbar: float) -> int:
    return recommended_dim(2 * abs(beta), thermal_tail_length(nbar, 1e-10))


def _oscillator(nbar: float, dim: int, trace_tol: float) -> OscillatorState:
    return vacuum(dim) if nbar == 0 else thermal_state(nbar, dim, trace_tol)


def _setup(pt: dict[str, Any], cfg: SweepConfig, trace_tol: float | None = None):
    beta = complex(pt["beta_re"], pt["beta_im"])
    rec = _auto_dim(beta, pt["nbar"])
    dim = rec if pt["dim"] is None else int(pt["dim"])
    ok = dim >= rec
    if not ok:
        log.warning("dim=%d is below the containment rule of thumb (%d) for beta=%s, nbar=%s",
                    dim, rec, beta, pt["nbar"])
    tol = cfg.trace_tol if trace_tol is None else trace_tol
    qubit = QubitParams.polar(pt["p"], pt["r_abs"], pt["r_arg"])
    osc = _oscillator(pt["nbar"], dim, tol)
    rho = build_resource_state(qubit, osc, beta, trace_tol=tol)
    return qubit, osc, rho, beta, dim, ok, rec


def _trunc(osc: OscillatorState, beta: complex, cutoff: int, ok: bool) -> dict[str, Any]:
    rep = truncation_report(osc, [2 * beta, -2 * beta], cutoff)
    return {"trace_deficit": rep.trace_deficit, "tail_eps": rep.tail_eps,
            "containment_margin": rep.containment_margin, "containment_ok": ok}


def _valid_qubit(pt: dict[str, Any]) -> bool:
    return pt["r_abs"] ** 2 <= pt["p"] * (1 - pt["p"]) + 1e-12


def _point_correlations(pt, cfg):
    qubit, osc, rho, beta, dim, ok, _ = _setup(pt, cfg)
    opt = corr.DiscordOptimizerConfig(n_theta=cfg.dz_grid[0], n_phi=cfg.dz_grid[1])
    rep = corr.correlation_report(rho, dz_numeric=True, optimizer=opt)
    cutoff = eigen_cutoff_for_tail(osc, cfg.tail_eps)
    return {
        **pt, "dim": dim, "purity_B0": rep.purity_B0,
        "negativity": rep.negativity, "negativity_asymptote": rep.negativity_asymptote,
        "witness_bound": corr.negativity_witness_bound(rho),
        "geometric_discord": rep.geometric_discord,
        "geometric_discord_asymptote": rep.geometric_discord_asymptote,
        "dz_digitalized": rep.dz_digitalized, "dz_numeric": rep.dz_numeric,
        "chi_2beta": overlap_diagnostic(rho), **_trunc(osc, beta, cutoff, ok),
    }


def _point_teleport(pt, cfg):
    qubit, osc, rho, beta, dim, ok, _ = _setup(pt, cfg)
    cutoff = default_n_kept(osc, cfg.tail_eps, beta) - 1
    res = teleport_simulate(rho, InputPureState(1.0, 0.0), n_kept=cutoff + 1,
                            quadrature_order=cfg.teleport_quadrature)
    avg, prob = res.average_fidelity, res.success_prob
    return {
        **pt, "dim": dim, "n_kept": cutoff + 1, "average_fidelity": avg,
        "fidelity_asymptote": 2 / 3 * (1 + abs(qubit.r)),
        "classical_threshold": TELEPORT_CLASSICAL_THRESHOLD,
        "payoff": payoff(avg, TELEPORT_CLASSICAL_THRESHOLD), "payoff_asymptote": 2 * abs(qubit.r),
        "negativity": corr.negativity(rho), "success_prob": prob, **_trunc(osc, beta, cutoff, ok),
    }


def _point_rsp(pt, cfg):
    qubit, osc, rho, beta, dim, ok, _ = _setup(pt, cfg)
    cutoff = default_n_kept(osc, cfg.tail_eps, beta) - 1
    mode = RspMode(pt["mode"])
    res = rsp_simulate(rho, 0.0, mode=mode, n_kept=cutoff + 1, quadrature_order=cfg.rsp_quadrature)
    mu = purity(osc)
    r = abs(qubit.r)
    if mode is RspMode.UNITARY:
        f_inf = mu / (1 + mu) * (1 + 2 * r)
        p_inf = max(0.0, (mu * (1 + 4 * r) - 1) / (1 + mu))
    else:
        f_inf, p_inf = 0.5 + r, 2 * r
    dg = corr.geometric_discord(rho)
    lower, upper = rsp_payoff_bounds(dg)
    return {
        **pt, "dim": dim, "mode": mode.value, "n_kept": cutoff + 1, "purity_B0": mu,
        "average_fidelity": res.average_fidelity, "fidelity_asymptote": f_inf,
        "classical_threshold": res.classical_threshold, "payoff": res.payoff, "payoff_asymptote": p_inf,
        "geometric_discord": dg, "sqrt_dg": upper, "payoff_lower_bound": lower,
        "negativity": corr.negativity(rho), "success_prob": res.success_prob,
        **_trunc(osc, beta, cutoff, ok),
    }


def _point_digitalize(pt, cfg):
    qubit, osc, rho, beta, dim, ok, _ = _setup(pt, cfg)
    cutoff = pt["kraus_cutoff"]
    if cutoff is None:
        cutoff = max(1, default_n_kept(osc, cfg.tail_eps, beta) - 1)
    res = digitalize_channel(rho, DigitalizeConfig(int(cutoff), beta))
    target = digitalized_target(qubit)
    opt = corr.DiscordOptimizerConfig(n_theta=cfg.dz_grid[0], n_phi=cfg.dz_grid[1])
    return {
        **pt, "dim": dim, "kraus_cutoff": int(cutoff), "success_prob": res.success_prob,
        "fidelity_target": res.fidelity(target), "completeness_defect": res.completeness_defect,
        "negativity_input": corr.negativity(rho),
        "negativity_output": negativity_of_matrix(res.output, 2),
        "negativity_target": negativity_of_matrix(target.mat, 2),
        "dz_output": corr.entropic_discord_numeric(res.state.mat, opt).value,
        "dz_digitalized": corr.entropic_discord_digitalized(qubit),
        **_trunc(osc, beta, int(cutoff), ok),
    }


def _point_converge(pt, cfg):
    # permissive trace tolerance: leakage is reported, not fatal
    qubit, osc, rho, beta, dim, ok, rec = _setup(pt, cfg, trace_tol=1.0)
    neg = corr.negativity(rho)
    dg = corr.geometric_discord(rho)
    mu = purity(osc)
    cutoff = eigen_cutoff_for_tail(osc, cfg.tail_eps)
    return {
        **pt, "dim": dim, "recommended_dim": rec, "negativity": neg,
        "negativity_gap": abs(neg - corr.negativity_asymptote(qubit)),
        "witness_bound": corr.negativity_witness_bound(rho),
        "geometric_discord": dg, "geometric_discord_gap": abs(dg - corr.geometric_discord_asymptote(qubit, mu)),
        "chi_2beta": overlap_diagnostic(rho), **_trunc(osc, beta, cutoff, ok),
    }


POINT_FUNCS: dict[str, Callable[[dict, SweepConfig], dict]] = {
    "correlations": _point_correlations,
    "teleport": _point_teleport,
    "rsp": _point_rsp,
    "digitalize": _point_digitalize,
    "converge": _point_converge,
}


def _timed(args):
    cmd, pt, cfg = args
    t0 = time.perf_counter()
    row = POINT_FUNCS[cmd](pt, cfg)
    row = {k: row[k] for k in COLUMNS[cmd]}
    if cfg.timing:
        row["wall_time_s"] = time.perf_counter() - t0
    return row


def run_sweep(cmd: str, cfg: SweepConfig) -> list[dict[str, Any]]:
    """Evaluate every grid point; rows come back in grid order regardless of ``jobs``."""
    points = [pt for pt in cfg.grid() if _valid_qubit(pt)]
    skipped = len(cfg.grid()) - len(points)
    if skipped:
        log.warning("skipped %d grid points with |r|^2 > p(1-p)", skipped)
    if not points:
        raise ConfigError("no valid grid points")
    # grid keys a command ignores are dropped, then duplicate points removed
    unused = {"mode"} if cmd != "rsp" else set()
    if cmd != "digitalize":
        unused.add("kraus_cutoff")
    seen, uniq = set(), []
    for pt in points:
        pt = {k: v for k, v in pt.items() if k not in unused}
        key = tuple(pt.items())
        if key not in seen:
            seen.add(key)
            uniq.append(pt)
    points = uniq
    tasks = [(cmd, pt, cfg) for pt in points]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_timed, tasks))
    return [_timed(t) for t in tasks]


# ----------------------------------------------------------------------------- figures


def _r_grid(cfg: SweepConfig) -> list[float]:
    return [0.5 * k / (cfg.figure_r_points - 1) for k in range(cfg.figure_r_points)]


def figure2_rows(cfg: SweepConfig) -> list[dict[str, Any]]:
    """Large-displacement curves vs ``|r|`` at ``p = 1/2``, with finite-beta numerics."""
    beta = complex(cfg.figure_beta)
    rows = []
    opt = corr.DiscordOptimizerConfig(n_theta=cfg.dz_grid[0], n_phi=cfg.dz_grid[1])
    oscs = {nb: _oscillator(nb, _auto_dim(beta, nb), cfg.trace_tol) for nb in (0.0, 0.5, 4.5)}
    for r in _r_grid(cfg):
        q = QubitParams(0.5, r)
        states = {nb: build_resource_state(q, osc, beta) for nb, osc in oscs.items()}
        dig = digitalize_channel(states[0.0], DigitalizeConfig(1, beta))
        rows.append({
            "r_abs": r,
            "negativity_asymptote": corr.negativity_asymptote(q),
            "dz_digitalized": corr.entropic_discord_digitalized(q),
            "dg_asymptote_mu05": corr.geometric_discord_asymptote(q, 0.5),
            "dg_asymptote_mu01": corr.geometric_discord_asymptote(q, 0.1),
            "negativity_numeric": corr.negativity(states[0.0]),
            "dz_digitalized_numeric": corr.entropic_discord_numeric(dig.state.mat, opt).value,
            "dg_numeric_mu05": corr.geometric_discord(states[0.5]),
            "dg_numeric_mu01": corr.geometric_discord(states[4.5]),
        })
    return rows


def figure3_rows(cfg: SweepConfig) -> dict[str, list[dict[str, Any]]]:
    """Payoff panels: (a) teleportation, (b) unitary RSP vs sqrt(D_G), (c) digitalizing RSP."""
    beta = complex(cfg.figure_beta)
    panels: dict[str, list[dict[str, Any]]] = {"a": [], "b": [], "c": []}
    for nb in cfg.figure_nbar_grid:
        osc = _oscillator(nb, _auto_dim(beta, nb), cfg.trace_tol)
        n_kept = default_n_kept(osc, cfg.tail_eps, beta)
        mu = purity(osc)
        for r in _r_grid(cfg):
            q = QubitParams(0.5, r)
            rho = build_resource_state(q, osc, beta)
            neg = corr.negativity(rho)
            tel = teleport_average_fidelity(rho, quadrature_order=cfg.teleport_quadrature, n_kept=n_kept)
            panels["a"].append({"r_abs": r, "nbar": nb, "negativity": neg,
                                "payoff_tel": payoff(tel, TELEPORT_CLASSICAL_THRESHOLD),
                                "payoff_tel_asymptote": 2 * r})
            uni = rsp_simulate(rho, 0.0, mode=RspMode.UNITARY, n_kept=n_kept, quadrature_order=cfg.rsp_quadrature)
            dg = corr.geometric_discord(rho)
            lower, upper = rsp_payoff_bounds(dg)
            panels["b"].append({"r_abs": r, "nbar": nb, "purity_B0": mu, "geometric_discord": dg,
                                "sqrt_dg": upper, "payoff_lower_bound": lower, "payoff_rsp_unitary": uni.payoff,
                                "payoff_rsp_unitary_asymptote": max(0.0, (mu * (1 + 4 * r) - 1) / (1 + mu))})
            dig = rsp_simulate(rho, 0.0, mode=RspMode.DIGITALIZING, n_kept=n_kept,
                               quadrature_order=cfg.rsp_quadrature)
            panels["c"].append({"r_abs": r, "nbar": nb, "negativity": neg,
                                "payoff_rsp_digitalizing": dig.payoff,
                                "payoff_rsp_digitalizing_asymptote": 2 * r})
    bounds = []
    for k in range(51):
        dg = k / 50
        lower, upper = rsp_payoff_bounds(dg)
        bounds.append({"geometric_discord": dg, "sqrt_dg": upper, "lower_bound": lower, "upper_bound": upper})
    panels["b_bounds"] = bounds
    return panels


# ------------------------------------------------------------------------------ output


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def render(rows: list[dict[str, Any]], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: _jsonable(r[c]) for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(_jsonable(r[c])) for c in columns])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, newline="")


def _check_finite(rows: list[dict[str, Any]]) -> None:
    for row in rows:
        for key, val in row.items():
            if isinstance(val, float) and not math.isfinite(val):
                raise NumericalToleranceError(f"non-finite value in column {key!r}")


# -------------------------------------------------------------------------------- main


def _epilog() -> str:
    lines = ["output columns per command:"]
    for cmd, cols in COLUMNS.items():
        lines.append(f"  {cmd}: {', '.join(cols)} [, wall_time_s with --timing]")
    lines.append(f"  figure2 (figure2.<fmt>): {', '.join(FIGURE2_COLUMNS)}")
    for panel, cols in FIGURE3_COLUMNS.items():
        lines.append(f"  figure3 (figure3_{panel}.<fmt>): {', '.join(cols)}")
    lines.append("exit codes: 0 success, 2 usage/config error, 3 numerical-tolerance failure")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridcorr",
        description="Qubit-oscillator correlations and hybrid communication protocols.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=[*POINT_FUNCS, "figure2", "figure3"])
    parser.add_argument("--config", help="JSON file with sweep grids and options")
    parser.add_argument("--out", help="output file (sweeps) or directory (figure2/figure3); default stdout / .")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--jobs", type=int, help="worker processes for grid points")
    parser.add_argument("--seed", type=int, help="seed for any Monte Carlo fallback")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (JSON value); repeatable")
    parser.add_argument("--timing", action="store_true", default=None, help="add a wall_time_s column")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.overrides, out=args.out, format=args.format, jobs=args.jobs,
                          seed=args.seed, timing=args.timing)
        if args.command in POINT_FUNCS:
            rows = run_sweep(args.command, cfg)
            _check_finite(rows)
            cols = COLUMNS[args.command] + (["wall_time_s"] if cfg.timing else [])
            _emit(render(rows, cols, cfg.format), cfg.out)
        elif args.command == "figure2":
            rows = figure2_rows(cfg)
            _check_finite(rows)
            _emit(render(rows, FIGURE2_COLUMNS, cfg.format), str(Path(cfg.out or ".") / f"figure2.{cfg.format}"))
        else:
            for panel, rows in figure3_rows(cfg).items():
                _check_finite(rows)
                _emit(render(rows, FIGURE3_COLUMNS[panel], cfg.format),
                      str(Path(cfg.out or ".") / f"figure3_{panel}.{cfg.format}"))
    except ConfigError as exc:
        print(f"hybridcorr: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        if isinstance(exc, NumericalToleranceError):
            print(f"hybridcorr: numerical failure: {exc}", file=sys.stderr)
            return 3
        print(f"hybridcorr: invalid parameters: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
