"""Command-line entry point: deterministic experiment runs from one config.

Usage: bardina <subcommand> --config <path> [--out <dir>]

Exit codes: 0 success, 2 config error, 3 numerical blow-up,
4 stationary non-convergence, 5 assertion/report failure.
"""

import argparse
import json
import os
import sys
import time as _time
from pathlib import Path

import numpy as np

from . import __version__
from .attractor import (
    dimension_bound,
    eta,
    lyapunov_sum,
    lyapunov_sum_bound,
    orthonormalize,
    transport_frame,
    steady_convergence,
    trajectory_gap,
    zero_force_decay,
)
from .checkpoint import STEADY_STATE_TIME, write_checkpoint
from .config import ConfigError, load_config
from .dynamics import (
    BlowUpError,
    SimState,
    absorbing_ball_entry,
    decay_envelope_check,
    energy_budget_residual,
    evolve,
)
from .fields import FieldRecipe, generate
from .spectral import VectorField, norms
from .stationary import NonConvergenceError, solve_stationary

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NONCONV = 4
EXIT_CHECK = 5


def _thread_count():
    return int(os.environ.get("BARDINA_THREADS", "1"))


def _fmt(x):
    if isinstance(x, float) and np.isinf(x):
        return "inf"
    return repr(float(x))


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_csv(path, columns, rows):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


class Runner:
    def __init__(self, cfg, out_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts = []

    def path(self, name):
        self.artifacts.append(name)
        return self.out / name

    def force_field(self):
        cfg = self.cfg
        if cfg.force is None:
            return VectorField(
                cfg.grid,
                np.zeros((3,) + (cfg.grid.n,) * 3, dtype=np.complex128),
                div_free=True,
            )
        return generate(cfg.force, cfg.grid, cfg.params.alpha)

    def initial_field(self):
        return generate(self.cfg.initial, self.cfg.grid, self.cfg.params.alpha)

    def finalize(self, subcommand):
        cfg_path = self.path("effective_config.ini")
        with open(cfg_path, "w") as fh:
            fh.write(self.cfg.serialize())
        meta = {
            "subcommand": subcommand,
            "config_sha256": self.cfg.digest(),
            "thread_count": _thread_count(),
            "version": __version__,
            "artifacts": sorted(set(self.artifacts)),
            "timestamp": _time.strftime("%Y-%m-%dT%H:%M:%SZ", _time.gmtime()),
        }
        with open(self.out / "run_meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _trajectory_rows(traj, residuals):
    cols = [
        "t", "l2_sq", "h1dot_sq", "h2dot_sq", "h1alpha_sq",
        "dissipation", "damping", "force_pairing", "energy_residual",
    ]
    rows = []
    for i, s in enumerate(traj.samples):
        rows.append(
            [s.t, s.l2_sq, s.h1dot_sq, s.h2dot_sq, s.h1alpha_sq,
             s.dissipation, s.damping, s.force_pairing, residuals[i]]
        )
    return cols, rows


def cmd_simulate(runner):
    cfg = runner.cfg
    force = runner.force_field()
    state = SimState(runner.initial_field(), 0.0, cfg.params, force)
    state, traj = evolve(state, cfg.t_end, cfg.dt, cfg.sample_every)
    residuals = energy_budget_residual(traj)
    cols, rows = _trajectory_rows(traj, residuals)
    _write_csv(runner.path("trajectory.csv"), cols, rows)

    report = decay_envelope_check(traj, force, cfg.params)
    entry, radius_sq, analytic = absorbing_ball_entry(traj, force, cfg.params)
    _write_json(
        runner.path("simulate_report.json"),
        {
            "check_name": "decay_envelopes",
            "params": _params_dict(cfg.params),
            "pass": report.passed,
            "max_slack": max(report.pointwise_slack, report.windowed_slack),
            "pointwise_slack": report.pointwise_slack,
            "windowed_slack": report.windowed_slack,
            "max_energy_residual": float(np.abs(residuals).max()),
            "absorbing_ball": {
                "entry_time": entry,
                "radius_sq": radius_sq,
                "analytic_bound": analytic,
            },
            "series_file": "trajectory.csv",
        },
    )
    write_checkpoint(runner.path("final_state.bard"), state.u, cfg.params, state.t)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_stationary(runner):
    cfg = runner.cfg
    force = runner.force_field()
    try:
        result = solve_stationary(
            force, cfg.params, cfg.relaxation, cfg.tol, cfg.max_iter
        )
    except NonConvergenceError as exc:
        _write_json(
            runner.path("stationary_report.json"),
            {
                "check_name": "stationary_solve",
                "params": _params_dict(cfg.params),
                "pass": False,
                "converged": False,
                "residual_history": [float(r) for r in exc.residual_history],
            },
        )
        return EXIT_NONCONV
    write_checkpoint(
        runner.path("stationary.bard"), result.U, cfg.params, STEADY_STATE_TIME
    )
    ok = result.energy_slack >= -1e-10 * norms(force, cfg.params.alpha).h1alpha_sq
    _write_json(
        runner.path("stationary_report.json"),
        {
            "check_name": "stationary_solve",
            "params": _params_dict(cfg.params),
            "pass": bool(ok),
            "converged": True,
            "residual": result.residual,
            "iterations": result.iterations,
            "energy_slack": result.energy_slack,
        },
    )
    return EXIT_OK if ok else EXIT_CHECK


def cmd_bound(runner):
    cfg = runner.cfg
    if cfg.f_norm is not None:
        f_norm = cfg.f_norm
    else:
        f_norm = float(np.sqrt(norms(runner.force_field(), cfg.params.alpha).h1alpha_sq))
    eta_rep = eta(cfg.params, f_norm)
    dim = dimension_bound(cfg.params, f_norm)
    _write_json(
        runner.path("bound_report.json"),
        {
            "check_name": "dimension_bound",
            "params": _params_dict(cfg.params),
            "pass": True,
            "f_norm": f_norm,
            "eta": eta_rep.eta_value,
            "eta_regime": eta_rep.regime,
            "lieb_thirring_constant": dim.c_lt,
            "c_alpha_beta_nu": dim.c_abn,
            "dimension_bound": dim.bound,
        },
    )
    return EXIT_OK


def cmd_lyapunov(runner):
    cfg = runner.cfg
    force = runner.force_field()
    state = SimState(runner.initial_field(), 0.0, cfg.params, force)
    rng = np.random.default_rng(cfg.frame_seed)
    rows = []
    all_ok = True
    n_windows = max(int(round(cfg.t_end / (cfg.dt * cfg.sample_every))), 1)
    for m in cfg.m_list:
        frame = _random_frame(cfg, rng, m)
        st = SimState(state.u.copy(), 0.0, cfg.params, force)
        for _ in range(n_windows + 1):
            total = lyapunov_sum(frame, st.u, cfg.params)
            bound = lyapunov_sum_bound(m, st.u, cfg.params)
            ok = total <= bound + 1e-10 * cfg.params.beta * m
            all_ok = all_ok and ok
            rows.append([m, st.t, total, bound, bound - total])
            frame = transport_frame(frame, st.u, cfg.params, cfg.dt, cfg.sample_every)
            st, _traj = evolve(
                st, st.t + cfg.dt * cfg.sample_every, cfg.dt, cfg.sample_every
            )
    _write_csv(
        runner.path("lyapunov.csv"),
        ["m", "t", "lyapunov_sum", "bound", "slack"],
        rows,
    )
    _write_json(
        runner.path("lyapunov_report.json"),
        {
            "check_name": "lyapunov_sum_bound",
            "params": _params_dict(cfg.params),
            "pass": bool(all_ok),
            "max_slack": float(min(r[4] for r in rows)),
            "series_file": "lyapunov.csv",
        },
    )
    return EXIT_OK if all_ok else EXIT_CHECK


def _random_frame(cfg, rng, m):
    fields = [
        generate(
            FieldRecipe(
                "random_band",
                amplitude=1.0,
                seed=int(rng.integers(0, 2**63)),
                k_min=1,
                k_max=min(3, cfg.grid.dealias_cutoff),
            ),
            cfg.grid,
            cfg.params.alpha,
        )
        for _ in range(m)
    ]
    return orthonormalize(fields, cfg.params.alpha)


def cmd_gap(runner):
    cfg = runner.cfg
    force = runner.force_field()
    u0_a = runner.initial_field()
    perturb = generate(
        FieldRecipe(
            "random_band",
            amplitude=cfg.perturb_amplitude,
            seed=cfg.perturb_seed,
            k_min=1,
            k_max=min(2, cfg.grid.dealias_cutoff),
        ),
        cfg.grid,
        cfg.params.alpha,
    )
    u0_b = VectorField(cfg.grid, u0_a.coeffs + perturb.coeffs, div_free=True)
    report = trajectory_gap(
        u0_a, u0_b, force, force, cfg.params, cfg.t_end, cfg.dt, cfg.sample_every
    )
    _write_csv(
        runner.path("gap.csv"),
        ["t", "gap_sq"],
        list(zip(report.times, report.gap_sq)),
    )
    ok = report.orbital_stable if report.eta_value is not None and report.eta_value <= 0 else True
    _write_json(
        runner.path("gap_report.json"),
        {
            "check_name": "trajectory_gap",
            "params": _params_dict(cfg.params),
            "pass": bool(ok),
            "eta": report.eta_value,
            "orbital_stable": report.orbital_stable,
            "decay_rate": report.decay_rate,
            "series_file": "gap.csv",
        },
    )
    return EXIT_OK if ok else EXIT_CHECK


def cmd_decay(runner):
    cfg = runner.cfg
    u0 = runner.initial_field()
    if cfg.decay_mode == "zero_force":
        report = zero_force_decay(
            u0, cfg.params, cfg.t_end, cfg.dt, cfg.p_list, cfg.sample_every
        )
        keys = ["p%g" % p if not np.isinf(p) else "pinf" for p in cfg.p_list]
        rows = [
            [report.times[i]] + [report.lp_norms[p][i] for p in cfg.p_list]
            for i in range(len(report.times))
        ]
        _write_csv(runner.path("decay.csv"), ["t"] + keys, rows)
        ok = all(report.envelopes_ok.values())
        _write_json(
            runner.path("decay_report.json"),
            {
                "check_name": "zero_force_decay",
                "params": _params_dict(cfg.params),
                "pass": bool(ok),
                "fitted_rates": {
                    k: report.fitted_rates[p] for k, p in zip(keys, cfg.p_list)
                },
                "envelopes_ok": {
                    k: report.envelopes_ok[p] for k, p in zip(keys, cfg.p_list)
                },
                "series_file": "decay.csv",
            },
        )
        return EXIT_OK if ok else EXIT_CHECK

    force = runner.force_field()
    try:
        stat = solve_stationary(force, cfg.params, cfg.relaxation, cfg.tol, cfg.max_iter)
    except NonConvergenceError:
        return EXIT_NONCONV
    report = steady_convergence(
        u0, force, cfg.params, stat.U, cfg.t_end, cfg.dt, cfg.sample_every
    )
    _write_csv(
        runner.path("decay.csv"),
        ["t", "r", "r_inf"],
        list(zip(report.times, report.r, report.r_inf)),
    )
    ok = report.monotone and report.profile_envelope_ok
    _write_json(
        runner.path("decay_report.json"),
        {
            "check_name": "steady_convergence",
            "params": _params_dict(cfg.params),
            "pass": bool(ok),
            "monotone": report.monotone,
            "profile_envelope_ok": report.profile_envelope_ok,
            "series_file": "decay.csv",
        },
    )
    return EXIT_OK if ok else EXIT_CHECK


def _params_dict(p):
    return {"alpha": p.alpha, "beta": p.beta, "nu": p.nu, "eta_c": p.eta_c}


COMMANDS = {
    "simulate": cmd_simulate,
    "stationary": cmd_stationary,
    "bound": cmd_bound,
    "lyapunov": cmd_lyapunov,
    "gap": cmd_gap,
    "decay": cmd_decay,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="bardina", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=".")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    runner = Runner(cfg, args.out)
    try:
        code = COMMANDS[args.subcommand](runner)
    except BlowUpError as exc:
        _write_json(
            runner.out / "blowup_report.json",
            {"check_name": "blow_up", "pass": False, "time": exc.t, "detail": str(exc)},
        )
        runner.finalize(args.subcommand)
        return EXIT_BLOWUP
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    runner.finalize(args.subcommand)
    return code


if __name__ == "__main__":
    sys.exit(main())
