"""Distributed equilibrium-seeking dynamics and their fixed-step integrator.

Each agent carries its own decision x_i, a dual estimate lambda_i for the
shared constraint, and a tracking offset zeta_i whose sum with phi_i(x_i)
estimates the global aggregate.  Agents exchange only lambda and eta values
with current neighbors:

    dx_i     = P_box(x_i - G_i(x_i, eta_i) - (gamma/N) A_i^T lambda_i) - x_i
    dlambda_i = beta * sum_j sgn(lambda_j - lambda_i) + gamma (A_i x_i - b_i)
    dzeta_i  = alpha * sum_j sgn(eta_j - eta_i)
    eta_i    = zeta_i + phi_i(x_i)

The integrator is forward Euler with step h <= 1: the x-update is then a
convex combination of two box points, so box feasibility is preserved
exactly at every step.  The right-hand side is discontinuous (signs), which
higher-order schemes would not integrate any more accurately.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import PlayerEvaluationError, SimulationDiverged
from .games import (
    GameSpec,
    aggregate,
    compute_bounds,
    constraint_residual,
    local_gradient,
    phi_stack,
    residual_rows,
)
from .geometry import AugmentedPoint, lyapunov_value
from .network import Graph, NetworkSchedule, consensus_drive
from .oracle import kkt_residual

Array = np.ndarray


@dataclass
class AlgorithmParams:
    """Gains, step size and stopping policy for one simulation run.

    ``alpha`` drives aggregate tracking, ``beta`` drives dual consensus,
    ``gamma`` scales the constraint feedback.  ``step_h`` must lie in (0, 1]
    so the projected x-update stays a convex combination (exact feasibility).
    """

    alpha: float
    beta: float
    gamma: float
    step_h: float = 1e-3
    horizon_T: float = 50.0
    deadband: float = 1e-9
    stop_tol: float = 1e-6
    record_every: int = 10

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0 or self.gamma <= 0:
            raise ValueError("alpha, beta, gamma must be positive")
        if not 0.0 < self.step_h <= 1.0:
            raise ValueError("step_h must lie in (0, 1]")
        if self.horizon_T <= 0:
            raise ValueError("horizon_T must be positive")
        if self.deadband < 0:
            raise ValueError("deadband must be >= 0")
        if self.stop_tol <= 0:
            raise ValueError("stop_tol must be positive")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be a positive integer")
        self.record_every = int(self.record_every)


@dataclass
class AgentState:
    """One agent's view: decision, dual estimate, tracking offset."""

    x_i: Array
    lambda_i: Array
    zeta_i: Array


@dataclass
class SwarmState:
    """Stacked state of all agents: profile (n,), duals (N, l), offsets (N, m)."""

    x: Array
    lam: Array
    zeta: Array

    def agent(self, game: GameSpec, i: int) -> AgentState:
        return AgentState(self.x[game.slices[i]].copy(), self.lam[i].copy(),
                          self.zeta[i].copy())

    def copy(self) -> "SwarmState":
        return SwarmState(self.x.copy(), self.lam.copy(), self.zeta.copy())


@dataclass
class SwarmDerivative:
    dx: Array
    dlam: Array
    dzeta: Array


def init_state(game: GameSpec, x0: Optional[Sequence] = None, seed: int = 0
               ) -> SwarmState:
    """Initial swarm: feasible x, duals at the local residuals, offsets zero.

    ``x0`` may give per-player vectors or a stacked profile; anything outside
    its box is an error (no silent projection).  Without ``x0`` the profile
    is drawn uniformly inside the boxes.
    """
    if x0 is None:
        rng = np.random.default_rng(seed)
        x = rng.uniform(game.box_lo, game.box_hi)
    else:
        arr = np.asarray(x0, dtype=object)
        if arr.dtype == object and arr.ndim == 1 and arr.size == game.n_players \
                and game.dim_total != game.n_players:
            x = np.concatenate([np.atleast_1d(np.asarray(v, float)) for v in x0])
        else:
            x = np.asarray(x0, dtype=float).ravel()
        x = game.check_profile(x)
        if np.any(x < game.box_lo) or np.any(x > game.box_hi):
            bad = np.where((x < game.box_lo) | (x > game.box_hi))[0]
            raise ValueError(f"x0 leaves the strategy box at coordinates {bad.tolist()}")
        x = x.copy()
    lam = residual_rows(game, x)
    zeta = np.zeros((game.n_players, game.agg_dim))
    return SwarmState(x=x, lam=lam, zeta=zeta)


def eta_of(game: GameSpec, swarm: SwarmState) -> Array:
    """Aggregate estimates eta_i = zeta_i + phi_i(x_i), shape (N, m)."""
    return swarm.zeta + phi_stack(game, swarm.x)


def _derivative_parts(game: GameSpec, swarm: SwarmState, g: Graph,
                      params: AlgorithmParams):
    """Derivative plus the intermediates (eta, residual rows) reused by the
    integrator's bookkeeping."""
    eta = eta_of(game, swarm)
    res = residual_rows(game, swarm.x)
    m = game.agg_dim
    # One pairwise-difference pass covers both consensus drives.
    if game.constraint_rows:
        drives = consensus_drive(np.hstack([eta, swarm.lam]), g, params.deadband)
        drive_eta, drive_lam = drives[:, :m], drives[:, m:]
        dlam = params.beta * drive_lam + params.gamma * res
    else:
        drive_eta = consensus_drive(eta, g, params.deadband)
        dlam = np.zeros_like(swarm.lam)
    scale = params.gamma / game.n_players
    if game.vector_ops is not None and game.all_scalar:
        grad = np.asarray(game.vector_ops.grad_rows(swarm.x, eta), float)
        pull = swarm.x - grad
        if game.constraint_rows:
            pull = pull - scale * (game.a_rows * swarm.lam).sum(axis=1)
        target = np.minimum(np.maximum(pull, game.box_lo), game.box_hi)
    else:
        target = np.empty_like(swarm.x)
        for i, (p, s) in enumerate(zip(game.players, game.slices)):
            try:
                grad = local_gradient(p, swarm.x[s], eta[i], game.n_players)
            except Exception as exc:  # noqa: BLE001
                if isinstance(exc, PlayerEvaluationError):
                    raise
                raise PlayerEvaluationError(
                    i, f"gradient callback failed: {exc}") from exc
            pull = swarm.x[s] - grad
            if game.constraint_rows:
                pull = pull - scale * (p.a_block.T @ swarm.lam[i])
            target[s] = np.clip(pull, p.box_lo, p.box_hi)
    d = SwarmDerivative(dx=target - swarm.x, dlam=dlam,
                        dzeta=params.alpha * drive_eta)
    return d, eta, res


def derivative(game: GameSpec, swarm: SwarmState, g: Graph,
               params: AlgorithmParams) -> SwarmDerivative:
    """Right-hand side of the multi-agent dynamics at the given state."""
    d, _, _ = _derivative_parts(game, swarm, g, params)
    return d


def step(game: GameSpec, swarm: SwarmState, g: Graph,
         params: AlgorithmParams) -> SwarmState:
    """One forward-Euler step; x stays inside its box for any h in (0, 1]."""
    d = derivative(game, swarm, g, params)
    h = params.step_h
    # Final clip only guards against float rounding at the box faces; the
    # convex combination is already inside in exact arithmetic.
    x_next = np.clip(swarm.x + h * d.dx, game.box_lo, game.box_hi)
    return SwarmState(x=x_next, lam=swarm.lam + h * d.dlam,
                      zeta=swarm.zeta + h * d.dzeta)


@dataclass
class TrajectoryLog:
    """Recorded time series of a run plus endpoint metadata.

    ``consensus_disagreement`` is the max of the aggregate-tracking and dual
    disagreements at each record time.  ``lyapunov`` is only populated when
    an oracle equilibrium was supplied.
    """

    times: Array
    x: Array                    # (K, n)
    lam: Array                  # (K, N, l)
    eta: Array                  # (K, N, m)
    lambda_bar: Array           # (K, l)
    kkt_residual: Array         # (K,)
    eta_disagreement: Array     # (K,)
    lam_disagreement: Array     # (K,)
    constraint_norm: Array      # (K,)
    lyapunov: Optional[Array]   # (K,) or None
    converged: bool
    steps_taken: int
    wall_time: float
    game_name: str
    params: AlgorithmParams
    player_dims: List[int] = field(default_factory=list)
    warnings_issued: List[str] = field(default_factory=list)

    @property
    def consensus_disagreement(self) -> Array:
        return np.maximum(self.eta_disagreement, self.lam_disagreement)

    @property
    def final_x(self) -> Array:
        return self.x[-1]

    @property
    def final_lambda_bar(self) -> Array:
        return self.lambda_bar[-1]

    def to_csv(self, path) -> None:
        """Write the schema: t, x[i][k], lambda[i][k], eta[i][k], lambdabar[k],
        kkt_residual, consensus_disagreement, constraint_norm, lyapunov.

        Numbers use the shortest round-trip decimal form so identical runs
        produce byte-identical files.
        """
        k_rows, n = self.x.shape
        n_agents, l = self.lam.shape[1], self.lam.shape[2]
        m = self.eta.shape[2]
        per_player_dims = self.player_dims or [n]
        header = ["t"]
        for i, d in enumerate(per_player_dims):
            header += [f"x[{i}][{k}]" for k in range(d)]
        header += [f"lambda[{i}][{k}]" for i in range(n_agents) for k in range(l)]
        header += [f"eta[{i}][{k}]" for i in range(n_agents) for k in range(m)]
        header += [f"lambdabar[{k}]" for k in range(l)]
        header += ["kkt_residual", "consensus_disagreement", "constraint_norm",
                   "lyapunov"]
        cons = self.consensus_disagreement
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for r in range(k_rows):
                row = [_fmt(self.times[r])]
                row += [_fmt(v) for v in self.x[r]]
                row += [_fmt(v) for v in self.lam[r].ravel()]
                row += [_fmt(v) for v in self.eta[r].ravel()]
                row += [_fmt(v) for v in self.lambda_bar[r]]
                row += [_fmt(self.kkt_residual[r]), _fmt(cons[r]),
                        _fmt(self.constraint_norm[r])]
                row.append(_fmt(self.lyapunov[r]) if self.lyapunov is not None else "")
                fh.write(",".join(row) + "\n")

    def summary(self) -> dict:
        p = self.params
        out = {
            "game": self.game_name,
            "converged": bool(self.converged),
            "t_end": float(self.times[-1]),
            "steps": int(self.steps_taken),
            "final_x": [float(v) for v in self.final_x],
            "final_lambda_bar": [float(v) for v in self.final_lambda_bar],
            "kkt_residual": float(self.kkt_residual[-1]),
            "consensus_disagreement": float(self.consensus_disagreement[-1]),
            "eta_disagreement": float(self.eta_disagreement[-1]),
            "lambda_disagreement": float(self.lam_disagreement[-1]),
            "constraint_norm": float(self.constraint_norm[-1]),
            "wall_time_s": float(self.wall_time),
            "params": {
                "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma,
                "step_h": p.step_h, "horizon_T": p.horizon_T,
                "deadband": p.deadband, "stop_tol": p.stop_tol,
                "record_every": p.record_every,
            },
            "warnings": list(self.warnings_issued),
        }
        if self.lyapunov is not None:
            out["lyapunov_final"] = float(self.lyapunov[-1])
        return out


def _fmt(v) -> str:
    return repr(float(v))


def simulate(
    game: GameSpec,
    schedule: NetworkSchedule,
    params: AlgorithmParams,
    x0: Optional[Sequence] = None,
    oracle_point: Optional[AugmentedPoint] = None,
    seed: int = 0,
) -> TrajectoryLog:
    """Integrate the distributed dynamics and log diagnostics.

    Runs until ``horizon_T`` or until, at a record step, both the centralized
    stationarity residual and the consensus disagreement fall below
    ``stop_tol``.  Gains below their sufficient levels only warn: the
    dynamics often converge well under the conservative bounds.

    A running reference dual is maintained alongside the agents:
    ``lambda_bar(0) = (A x(0) - b)/N`` (the exact mean of the agents' duals)
    advanced by ``(gamma/N)(A x - b)`` per unit time with the same quadrature
    as the agent updates, so N * mean_i lambda_i stays N * lambda_bar to
    rounding.
    """
    if schedule.node_count != game.n_players:
        raise ValueError("schedule node count must equal the player count")
    issued: List[str] = []
    bounds = compute_bounds(game)
    if params.alpha <= bounds.alpha_min:
        msg = (f"alpha {params.alpha} <= ({game.n_players}-1)*f1_bar = "
               f"{bounds.alpha_min:.6g}: tracking gain below the sufficient level")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        issued.append(msg)
    beta_min = bounds.beta_min(params.gamma)
    if game.constraint_rows and params.beta <= beta_min:
        msg = (f"beta {params.beta} <= gamma*({game.n_players}-1)*f2_bar = "
               f"{beta_min:.6g}: dual gain below the sufficient level")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        issued.append(msg)

    state = init_state(game, x0, seed)
    h = params.step_h
    n_steps = max(1, int(round(params.horizon_T / h)))
    scale = params.gamma / game.n_players
    lam_bar = constraint_residual(game, state.x) / game.n_players

    times, xs, lams, etas, lbars = [], [], [], [], []
    kkts, eta_dis, lam_dis, cons_norm, lyap = [], [], [], [], []

    def record(t: float, eta: Array, res_total: Array) -> bool:
        """Append diagnostics; True when the stop rule fires."""
        if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.lam))
                and np.all(np.isfinite(state.zeta))):
            raise SimulationDiverged(
                f"non-finite state at t={t:.6g}",
                snapshot={"t": t, "x": state.x.copy(), "lam": state.lam.copy(),
                          "zeta": state.zeta.copy()},
            )
        sigma = aggregate(game, state.x)
        e_dis = float(np.max(np.linalg.norm(eta - sigma, axis=1)))
        l_dis = float(np.max(np.linalg.norm(state.lam - lam_bar, axis=1))) \
            if game.constraint_rows else 0.0
        kkt = kkt_residual(game, params.gamma, state.x, lam_bar)
        times.append(t)
        xs.append(state.x.copy())
        lams.append(state.lam.copy())
        etas.append(eta.copy())
        lbars.append(lam_bar.copy())
        kkts.append(kkt)
        eta_dis.append(e_dis)
        lam_dis.append(l_dis)
        cons_norm.append(float(np.linalg.norm(res_total)))
        if oracle_point is not None:
            lyap.append(lyapunov_value(game, params.gamma,
                                       AugmentedPoint(state.x, lam_bar),
                                       oracle_point))
        return kkt <= params.stop_tol and max(e_dis, l_dis) <= params.stop_tol

    t_start = time.perf_counter()
    converged = False
    steps_done = 0
    d, eta, res = _derivative_parts(game, state, schedule.graph_at(0.0), params)
    if record(0.0, eta, res.sum(axis=0)):
        converged = True
    if not converged:
        for k in range(n_steps):
            state.x = np.minimum(np.maximum(state.x + h * d.dx, game.box_lo),
                                 game.box_hi)
            state.lam = state.lam + h * d.dlam
            state.zeta = state.zeta + h * d.dzeta
            lam_bar = lam_bar + (h * scale) * res.sum(axis=0)
            steps_done = k + 1
            t = steps_done * h
            last = steps_done == n_steps
            d, eta, res = _derivative_parts(game, state,
                                            schedule.graph_at(t), params)
            if steps_done % params.record_every == 0 or last:
                if record(t, eta, res.sum(axis=0)):
                    converged = True
                    break
    wall = time.perf_counter() - t_start

    return TrajectoryLog(
        times=np.asarray(times),
        x=np.asarray(xs),
        lam=np.asarray(lams),
        eta=np.asarray(etas),
        lambda_bar=np.asarray(lbars),
        kkt_residual=np.asarray(kkts),
        eta_disagreement=np.asarray(eta_dis),
        lam_disagreement=np.asarray(lam_dis),
        constraint_norm=np.asarray(cons_norm),
        lyapunov=np.asarray(lyap) if oracle_point is not None else None,
        converged=converged,
        steps_taken=steps_done,
        wall_time=wall,
        game_name=game.name,
        params=params,
        player_dims=list(game.dims),
        warnings_issued=issued,
    )


@dataclass
class TrackingLog:
    """Average-tracking subsystem output: per-node errors against the exact
    running average of the reference signals."""

    times: Array           # (K,)
    nu: Array              # (K, N, d)
    error: Array           # (K, N, d)

    @property
    def sup_error(self) -> Array:
        return np.max(np.abs(self.error), axis=(1, 2))


def average_tracking_sim(
    signals: Sequence[Callable[[float], float]],
    alpha: float,
    schedule: NetworkSchedule,
    horizon: float,
    step_h: float = 1e-4,
    deadband: float = 1e-9,
    record_every: int = 10,
) -> TrackingLog:
    """Standalone sign-consensus average tracker.

    Integrates ``dmu_i = alpha * sum_j sgn(nu_j - nu_i)`` with
    ``nu_i = mu_i + r_i(t)`` from ``mu_i(0) = 0`` and reports
    ``nu_i(t) - mean_k r_k(t)``.  Tracking is exact in the limit whenever
    ``alpha`` exceeds (N-1) times the fastest signal slope.
    """
    n = len(signals)
    if schedule.node_count != n:
        raise ValueError("schedule node count must equal the signal count")
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def eval_signals(t: float) -> Array:
        return np.array([np.atleast_1d(np.asarray(s(t), float)) for s in signals])

    r = eval_signals(0.0)
    mu = np.zeros_like(r)
    n_steps = max(1, int(round(horizon / step_h)))
    times, nus, errs = [], [], []
    for k in range(n_steps + 1):
        t = k * step_h
        if k > 0:
            r = eval_signals(t)
        nu = mu + r
        if k % record_every == 0 or k == n_steps:
            avg = r.mean(axis=0)
            times.append(t)
            nus.append(nu.copy())
            errs.append(nu - avg)
        if k < n_steps:
            drive = consensus_drive(nu, schedule.graph_at(t), deadband)
            mu = mu + (step_h * alpha) * drive
    return TrackingLog(times=np.asarray(times), nu=np.asarray(nus),
                       error=np.asarray(errs))
