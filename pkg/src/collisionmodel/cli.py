"""Command-line entry point: ``collisionmodel {simulate,blp,sweep,exact}``.

Exit codes: 0 success, 2 config error, 3 size/cap error, 4 I/O error.
"""

import argparse
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ._version import __version__
from .analysis import (
    blp_measure, entropy_ledger, exact_decomposition, summarize,
    trace_distance_to_fixed_point,
)
from .config import ALL_KEYS, ConfigError, config_to_dict, parse_config, parse_value
from .engine import run_trajectory
from .model import HALF_PI, Strategy, bloch_state
from .qmath import SizeError, trace_distance
from .report import write_report

logger = logging.getLogger("collisionmodel")

EXIT_CONFIG = 2
EXIT_SIZE = 3
EXIT_IO = 4

SIMULATE_COLUMNS = [
    "step", "trace_dist_to_fixed_point", "sigma_cumulative", "sigma_rate",
    "heat_cumulative", "system_excited_pop", "system_coherence_abs",
]
BLP_COLUMNS = ["step", "D_markovian", "D_strategy1", "D_strategy2"]
SWEEP_COLUMNS = ["epsilon_frac", "T_E", "strategy", "blp_measure", "min_sigma_rate",
                 "sigma_final"]
EXACT_COLUMNS = ["step", "mutual_info", "env_relent", "rw_sum", "sigma_telescoping",
                 "sigma_heat", "discrepancy"]

SWEEP_STRATEGIES = (Strategy.STRATEGY1, Strategy.STRATEGY2)


def _provenance(cfg, **extra):
    return {"version": __version__, "config": config_to_dict(cfg), **extra}


def simulate_rows(params, rho0):
    traj = run_trajectory(params, rho0)
    ledger = entropy_ledger(traj)
    dist = trace_distance_to_fixed_point(traj)
    heat = np.concatenate([[0.0], np.cumsum(ledger.heat_two_qubit)]) / params.beta_E
    rate = np.concatenate([[0.0], ledger.per_step_sigma])
    rows = []
    for i, rho in enumerate(traj.systems):
        rows.append([i, dist[i], ledger.cumulative_sigma[i], rate[i], heat[i],
                     float(rho[0, 0].real), float(abs(rho[0, 1]))])
    return rows, summarize(traj, ledger)


def cmd_simulate(cfg):
    """One trajectory under the configured strategy; one row per collision."""
    params = cfg.model
    rows, summary = simulate_rows(params, cfg.initial_state())
    write_report(cfg.output_path, cfg.output_format, SIMULATE_COLUMNS, rows,
                 _provenance(cfg, params=params.as_dict()), summary)
    return rows, summary


def _blp_for(params, pair):
    ta = run_trajectory(params, pair[0])
    tb = run_trajectory(params, pair[1])
    return blp_measure(ta, tb)


def cmd_blp(cfg):
    """Trace distance of the BLP state pair under every strategy, plus the measure."""
    pair = (bloch_state(cfg.blp_a), bloch_state(cfg.blp_b))
    degenerate = trace_distance(*pair) == 0.0
    if degenerate:
        logger.warning("BLP pair is degenerate (identical states); the measure is 0")
    base = cfg.model
    results = {}
    for strategy in (Strategy.MARKOVIAN, Strategy.STRATEGY1, Strategy.STRATEGY2):
        results[strategy.value] = _blp_for(base.with_(strategy=strategy), pair)
    rows = [[i] + [float(results[s].pair_distances[i]) for s in
                   ("markovian", "strategy1", "strategy2")]
            for i in range(base.n_collisions + 1)]
    summary = {f"N_{name}": res.measure for name, res in results.items()}
    summary["degenerate_pair"] = degenerate
    write_report(cfg.output_path, cfg.output_format, BLP_COLUMNS, rows,
                 _provenance(cfg), summary)
    return rows, summary


def _sweep_point(task):
    eps_frac, t_e, strategy, base, initial_kind, initial_r, pair_r = task
    params = base.with_(epsilon=eps_frac * HALF_PI, T_E=t_e, strategy=strategy)
    pair = (bloch_state(pair_r[0]), bloch_state(pair_r[1]))
    blp = _blp_for(params, pair)
    rho0 = bloch_state(initial_r) if initial_kind == "bloch" else params.system_thermal_state()
    _, summary = simulate_rows(params, rho0)
    return [eps_frac, t_e, strategy.value, blp.measure, summary["min_sigma_rate"],
            summary["sigma_final"]]


def cmd_sweep(cfg):
    """Grid over epsilon and/or T_E; one row per point and strategy."""
    if not cfg.has_sweep:
        raise ConfigError("sweep: no grid given (set sweep.epsilon_frac and/or sweep.T_E)")
    eps_grid = sorted(cfg.sweep_epsilon_frac or (cfg.epsilon_frac,))
    te_grid = sorted(cfg.sweep_T_E or (cfg.T_E,))
    tasks = [(e, t, s, cfg.model, cfg.initial_kind, cfg.initial_r, (cfg.blp_a, cfg.blp_b))
             for e, t, s in itertools.product(eps_grid, te_grid, SWEEP_STRATEGIES)]
    if cfg.sweep_workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sweep_workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    write_report(cfg.output_path, cfg.output_format, SWEEP_COLUMNS, rows, _provenance(cfg))
    return rows


def cmd_exact(cfg):
    """Full-chain run with the three entropy-production estimators side by side."""
    if cfg.exact_n_env is None:
        raise ConfigError("exact.n_env: required for the exact subcommand")
    n_env = cfg.exact_n_env
    n_coll = cfg.exact_n_collisions or n_env
    if n_coll > n_env:
        raise SizeError(f"exact.n_collisions={n_coll} exceeds exact.n_env={n_env}; "
                        f"use n_collisions <= {n_env}")
    params = cfg.model.with_(strategy=Strategy.EXACT, n_collisions=n_coll)
    dec = exact_decomposition(params, cfg.initial_state(), n_env)
    rows = [[i + 1, dec.mutual_info[i], dec.env_relent[i], dec.sigma_rw[i],
             dec.sigma_telescoping[i], dec.sigma_heat[i], dec.discrepancy[i]]
            for i in range(n_coll)]
    summary = {"max_discrepancy": float(dec.discrepancy.max())}
    write_report(cfg.output_path, cfg.output_format, EXACT_COLUMNS, rows,
                 _provenance(cfg, params=params.as_dict(), n_env=n_env), summary)
    return rows, summary


COMMANDS = {
    "simulate": cmd_simulate,
    "blp": cmd_blp,
    "sweep": cmd_sweep,
    "exact": cmd_exact,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="collisionmodel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).splitlines()[0])
        p.add_argument("-c", "--config", help="TOML config file")
        p.add_argument("-v", "--verbose", action="store_true")
        for key in ALL_KEYS:
            p.add_argument(f"--{key}", dest=f"set:{key}", metavar="VALUE",
                           help=f"override config key {key}")
    return parser


def load_config(args):
    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror}") from exc
    overrides = {k[4:]: parse_value(v) for k, v in vars(args).items()
                 if k.startswith("set:") and v is not None}
    return parse_config(text, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args)
        COMMANDS[args.command](cfg)
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
