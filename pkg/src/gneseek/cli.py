"""Command-line front end.

Subcommands
-----------
simulate       integrate the distributed dynamics, write trajectory CSV +
               summary JSON (exit 0 on convergence, 2 when the horizon ran
               out first, 1 on errors)
solve          run the centralized solver, write the equilibrium as JSON
compare        run both and report the gap between them
bounds         print the sufficient gain levels and check configured gains
tracking-demo  standalone average-tracking harness with sinusoid signals
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .dynamics import AlgorithmParams, average_tracking_sim, simulate
from .errors import ConfigError, SimulationDiverged
from .games import compute_bounds
from .network import Graph, NetworkSchedule, max_consensus
from .oracle import solve_extragradient

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 2


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    p = cfg.params
    updates = {}
    if args.horizon is not None:
        updates["horizon_T"] = args.horizon
    if args.step is not None:
        updates["step_h"] = args.step
    if updates:
        cfg.params = AlgorithmParams(
            alpha=p.alpha, beta=p.beta, gamma=p.gamma,
            step_h=updates.get("step_h", p.step_h),
            horizon_T=updates.get("horizon_T", p.horizon_T),
            deadband=p.deadband, stop_tol=p.stop_tol,
            record_every=p.record_every,
        )
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output.dir = args.out
    return cfg


def _out_paths(cfg: RunConfig):
    out_dir = Path(cfg.output.dir)
    return out_dir, out_dir / f"{cfg.output.prefix}"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    log = simulate(cfg.game, cfg.schedule, cfg.params, seed=cfg.seed)
    out_dir, stem = _out_paths(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    log.to_csv(f"{stem}_trajectory.csv")
    _write_json(Path(f"{stem}_summary.json"), log.summary())
    Path(f"{stem}_graphs.txt").write_text(cfg.schedule.export_text(),
                                          encoding="utf-8")
    s = log.summary()
    print(f"{cfg.name}: t_end={s['t_end']:g} converged={s['converged']} "
          f"kkt={s['kkt_residual']:.3e} constraint={s['constraint_norm']:.3e}")
    print(f"final_x = {np.array2string(log.final_x, precision=4)}")
    print(f"wrote {stem}_trajectory.csv, {stem}_summary.json")
    return EXIT_OK if log.converged else EXIT_NO_CONVERGENCE


def cmd_solve(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    point = solve_extragradient(cfg.game, cfg.params.gamma)
    out_dir, stem = _out_paths(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "game": cfg.game.name,
        "x_star": [float(v) for v in point.x_star],
        "lambda_star": [float(v) for v in point.lambda_star],
        "residual": point.residual,
        "iterations": point.iterations,
        "converged": point.converged,
    }
    _write_json(Path(f"{stem}_solution.json"), payload)
    print(f"{cfg.name}: residual={point.residual:.3e} after "
          f"{point.iterations} iterations")
    print(f"x_star = {np.array2string(point.x_star, precision=4)}")
    return EXIT_OK if point.converged else EXIT_NO_CONVERGENCE


def cmd_compare(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    point = solve_extragradient(cfg.game, cfg.params.gamma)
    log = simulate(cfg.game, cfg.schedule, cfg.params, seed=cfg.seed,
                   oracle_point=point.theta)
    gap = float(np.max(np.abs(log.final_x - point.x_star)))
    out_dir, stem = _out_paths(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "game": cfg.game.name,
        "sup_gap": gap,
        "sim_kkt_residual": float(log.kkt_residual[-1]),
        "oracle_residual": point.residual,
        "sim_constraint_norm": float(log.constraint_norm[-1]),
        "sim_converged": bool(log.converged),
        "x_sim": [float(v) for v in log.final_x],
        "x_oracle": [float(v) for v in point.x_star],
    }
    _write_json(Path(f"{stem}_compare.json"), payload)
    oracle_cons = (float(np.linalg.norm(cfg.game.a_full @ point.x_star
                                        - cfg.game.b_total))
                   if cfg.game.constraint_rows else 0.0)
    print(f"{'':<22}{'simulation':>16}{'oracle':>16}")
    print(f"{'residual':<22}{log.kkt_residual[-1]:>16.3e}{point.residual:>16.3e}")
    print(f"{'constraint norm':<22}{log.constraint_norm[-1]:>16.3e}"
          f"{oracle_cons:>16.3e}")
    print(f"sup-norm gap |x_sim - x_oracle| = {gap:.3e}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    bounds = compute_bounds(cfg.game)
    p = cfg.params
    n = cfg.game.n_players
    beta_min = bounds.beta_min(p.gamma)
    print(f"game: {cfg.game.name} (N={n})")
    print(f"f1_bar = {bounds.f1_bar:.6g}")
    print(f"f2_bar = {bounds.f2_bar:.6g}")
    print(f"alpha_min = (N-1)*f1_bar = {bounds.alpha_min:.6g}")
    print(f"beta_min(gamma={p.gamma:g}) = {beta_min:.6g}")
    ok = True
    if p.alpha > bounds.alpha_min:
        print(f"alpha = {p.alpha:g} > {bounds.alpha_min:.6g}: sufficient "
              f"condition satisfied")
    else:
        ok = False
        print(f"WARNING: alpha = {p.alpha:g} <= {bounds.alpha_min:.6g}; the "
              f"configured tracking gain is below the sufficient level "
              f"(runs may still converge)")
    if cfg.game.constraint_rows:
        if p.beta > beta_min:
            print(f"beta = {p.beta:g} > {beta_min:.6g}: sufficient condition "
                  f"satisfied")
        else:
            ok = False
            print(f"WARNING: beta = {p.beta:g} <= {beta_min:.6g}; the "
                  f"configured dual gain is below the sufficient level "
                  f"(runs may still converge)")
    if not ok:
        print("note: these levels are sufficient, not necessary.")

    # The same sups are reachable distributedly: every node floods its local
    # value through the network for N-1 max rounds.
    graph = cfg.schedule.graph_at(0.0)
    dist_f1 = max_consensus(bounds.per_player_f1, graph)
    dist_f2 = max_consensus(bounds.per_player_f2, graph)
    agree = (np.allclose(dist_f1, bounds.f1_bar)
             and np.allclose(dist_f2, bounds.f2_bar))
    print(f"distributed max-consensus reproduces both bounds: {agree}")
    return EXIT_OK


def cmd_tracking_demo(args) -> int:
    n = args.nodes
    alpha = args.alpha
    schedule = NetworkSchedule.static(Graph.ring(n))
    signals = [lambda t, i=i: math.sin(t + 2.0 * math.pi * (i + 1) / n)
               for i in range(n)]
    log = average_tracking_sim(signals, alpha, schedule, horizon=args.horizon,
                               step_h=args.step)
    sup = log.sup_error
    times = log.times
    tail = sup[times >= min(5.0, 0.5 * args.horizon)]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "tracking_error.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(f"error[{i}]" for i in range(n)) + ",sup_error\n")
        for r in range(times.size):
            vals = [repr(float(v)) for v in log.error[r, :, 0]]
            fh.write(f"{repr(float(times[r]))}," + ",".join(vals)
                     + f",{repr(float(sup[r]))}\n")
    print(f"nodes={n} alpha={alpha:g} horizon={args.horizon:g}")
    print(f"sup tracking error over the tail: {float(tail.max()):.3e}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gneseek",
        description="Distributed equilibrium seeking for aggregative games "
                    "with shared linear constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="YAML run config")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--horizon", type=float, default=None)
        sp.add_argument("--step", type=float, default=None)

    for name, fn in (("simulate", cmd_simulate), ("solve", cmd_solve),
                     ("compare", cmd_compare), ("bounds", cmd_bounds)):
        sp = sub.add_parser(name)
        add_common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("tracking-demo")
    sp.add_argument("--nodes", type=int, default=5)
    sp.add_argument("--alpha", type=float, default=10.0)
    sp.add_argument("--horizon", type=float, default=8.0)
    sp.add_argument("--step", type=float, default=1e-4)
    sp.add_argument("--out", default="out")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_tracking_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SimulationDiverged as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
