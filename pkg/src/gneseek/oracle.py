"""Centralized equilibrium solvers and verification checks.

These routines never touch the distributed machinery: they work directly on
the stacked gradient map and the shared constraint, providing independent
ground truth for the simulator.  The main solver is an extragradient
iteration on the augmented primal-dual operator, which converges for
monotone maps even though the dual block makes the operator merely skewed,
not strictly monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GameDefinitionError
from .games import (
    GameSpec,
    aggregate,
    constraint_residual,
    player_cost,
    pseudo_gradient,
)
from .geometry import (
    AugmentedPoint,
    augmented_jacobian,
    augmented_map,
    project_augmented,
)

Array = np.ndarray


def kkt_residual(game: GameSpec, gamma: float, x, lam_bar) -> float:
    """Distance from the stationarity-plus-feasibility fixed point.

    ``|P_box(x - F(x) - (gamma/N) A^T lam) - x| + |(gamma/N)(A x - b)|``;
    zero exactly at constrained equilibria.
    """
    x = game.check_profile(x)
    lam_bar = np.atleast_1d(np.asarray(lam_bar, dtype=float)) \
        if np.size(lam_bar) else np.zeros(0)
    f = pseudo_gradient(game, x)
    scale = gamma / game.n_players
    pull = x - f
    if game.constraint_rows:
        pull = pull - scale * (game.a_full.T @ lam_bar)
    stat = np.linalg.norm(np.clip(pull, game.box_lo, game.box_hi) - x)
    feas = np.linalg.norm(scale * constraint_residual(game, x)) \
        if game.constraint_rows else 0.0
    return float(stat + feas)


@dataclass
class KktPoint:
    """Solver output: equilibrium candidate, multiplier, residual, effort."""

    x_star: Array
    lambda_star: Array
    residual: float
    iterations: int
    converged: bool = True

    @property
    def theta(self) -> AugmentedPoint:
        return AugmentedPoint(self.x_star, self.lambda_star)


def _lipschitz_estimate(game: GameSpec, gamma: float, rng, samples: int = 100
                        ) -> float:
    l = game.constraint_rows
    est = 0.0
    for _ in range(samples):
        xa = rng.uniform(game.box_lo, game.box_hi)
        xb = rng.uniform(game.box_lo, game.box_hi)
        la = rng.uniform(-1.0, 1.0, l)
        lb = rng.uniform(-1.0, 1.0, l)
        ta = np.concatenate([xa, la])
        tb = np.concatenate([xb, lb])
        gap = np.linalg.norm(ta - tb)
        if gap < 1e-12:
            continue
        fa = augmented_map(game, gamma, AugmentedPoint(xa, la))
        fb = augmented_map(game, gamma, AugmentedPoint(xb, lb))
        est = max(est, float(np.linalg.norm(fa - fb) / gap))
    return est


def solve_extragradient(
    game: GameSpec,
    gamma: float,
    tol: float = 1e-8,
    max_iters: int = 200_000,
    step: Optional[float] = None,
    x0: Optional[Array] = None,
    seed: Optional[int] = None,
    patience: int = 500,
) -> KktPoint:
    """Extragradient iteration on the augmented operator over Omega x R^l.

    Each iteration takes a trial projected step and then the corrector step
    evaluated at the trial point.  The step length starts at
    ``0.5 / (1 + L)`` with L a sampled Lipschitz estimate, and is halved
    whenever the residual has not improved for ``patience`` iterations.
    Returns the best iterate found, flagged ``converged=False`` when the
    tolerance was never reached.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(0 if seed is None else seed)
    if x0 is not None:
        x = game.check_profile(x0).copy()
    elif seed is not None:
        x = rng.uniform(game.box_lo, game.box_hi)
    else:
        x = 0.5 * (game.box_lo + game.box_hi)
    theta = np.concatenate([x, np.zeros(game.constraint_rows)])
    n = game.dim_total

    tau = step if step is not None else 0.5 / (1.0 + _lipschitz_estimate(game, gamma, rng))

    def f_of(vec: Array) -> Array:
        return augmented_map(game, gamma, AugmentedPoint.from_stacked(game, vec))

    def residual_of(vec: Array, fvec: Array) -> float:
        stat = np.linalg.norm(project_augmented(game, vec - fvec)[:n] - vec[:n])
        feas = np.linalg.norm(fvec[n:])
        return float(stat + feas)

    best = theta.copy()
    f_theta = f_of(theta)
    best_res = residual_of(theta, f_theta)
    since_improve = 0
    it = 0
    while it < max_iters and best_res > tol:
        trial = project_augmented(game, theta - tau * f_theta)
        theta = project_augmented(game, theta - tau * f_of(trial))
        f_theta = f_of(theta)
        res = residual_of(theta, f_theta)
        it += 1
        if res < best_res:
            best_res = res
            best = theta.copy()
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= patience:
                tau *= 0.5
                since_improve = 0
                if tau < 1e-14:
                    break
    return KktPoint(
        x_star=best[:n],
        lambda_star=best[n:],
        residual=best_res,
        iterations=it,
        converged=best_res <= tol,
    )


def solve_kkt_linear(game: GameSpec, gamma: float) -> KktPoint:
    """Direct linear solve for games with an affine gradient map.

    Assembles F(x) = M x + c from two evaluations (Jacobian at the box
    center, offset at zero) and solves the stationarity/feasibility system
    ignoring the boxes; valid for interior instances only.  Intended as an
    independent cross-check of the iterative solver on synthetic quadratic
    games.
    """
    n, l = game.dim_total, game.constraint_rows
    center = 0.5 * (game.box_lo + game.box_hi)
    jac = augmented_jacobian(game, gamma, center)[:n, :n]
    c0 = pseudo_gradient(game, np.zeros(n))
    # Affinity check at a second point.
    probe = pseudo_gradient(game, center) - (jac @ center + c0)
    if np.linalg.norm(probe) > 1e-6 * (1.0 + np.linalg.norm(c0)):
        raise GameDefinitionError("gradient map is not affine; linear solve invalid")
    if l == 0:
        x = np.linalg.solve(jac, -c0)
        lam = np.zeros(0)
    else:
        scale = gamma / game.n_players
        kkt = np.zeros((n + l, n + l))
        kkt[:n, :n] = jac
        kkt[:n, n:] = scale * game.a_full.T
        kkt[n:, :n] = game.a_full
        rhs = np.concatenate([-c0, game.b_total])
        sol = np.linalg.solve(kkt, rhs)
        x, lam = sol[:n], sol[n:]
    res = kkt_residual(game, gamma, np.clip(x, game.box_lo, game.box_hi), lam)
    return KktPoint(x_star=x, lambda_star=lam, residual=res, iterations=1,
                    converged=True)


@dataclass
class GneCheck:
    """Result of sampled best-response verification.

    ``status`` is "pass", "fail" or "inconclusive"; ``worst_violation`` is
    the largest cost improvement any player found by a feasible unilateral
    deviation (0 means no player can improve).
    """

    status: str
    worst_violation: float
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def verify_gne(game: GameSpec, x_star, samples: int = 200, seed: int = 0,
               tol: float = 1e-6) -> GneCheck:
    """Check that no player improves by a feasible unilateral deviation.

    Deviations keep all other players fixed and must stay inside both the
    deviator's box and the shared constraint.  With one constraint row a
    scalar-decision player is pinned to its current value (margin zero);
    multi-dimensional players are sampled along in-slice directions.  More
    than one constraint row returns "inconclusive".
    """
    x_star = game.check_profile(x_star).copy()
    if np.any(x_star < game.box_lo - 1e-9) or np.any(x_star > game.box_hi + 1e-9):
        raise ValueError("x_star leaves the strategy boxes")
    res = constraint_residual(game, x_star)
    if res.size and np.linalg.norm(res) > 1e-6:
        raise ValueError(f"x_star violates the shared constraint by {np.linalg.norm(res):.3e}")
    for i, p in enumerate(game.players):
        if p.cost is None:
            raise GameDefinitionError(f"player {i}: cost callback required")
    if game.constraint_rows > 1:
        return GneCheck("inconclusive", float("nan"),
                        ["deviation sampling implemented for at most one "
                         "constraint row"])

    rng = np.random.default_rng(seed)
    notes = []
    worst = 0.0
    any_sampled = False
    for i, (p, s) in enumerate(zip(game.players, game.slices)):
        base_cost = player_cost(game, i, x_star)
        xi = x_star[s]
        pinned = False
        if game.constraint_rows == 1 and np.any(p.a_block != 0.0):
            if p.dim == 1:
                pinned = True   # the slice A_i y = A_i x_i* is the single point x_i*
            else:
                deviations = _slice_deviations(p, xi, rng, samples)
        else:
            deviations = [rng.uniform(p.box_lo, p.box_hi) for _ in range(samples)]
        if pinned:
            notes.append(f"player {i}: pinned by the shared constraint")
            continue
        any_sampled = True
        for y in deviations:
            trial = x_star.copy()
            trial[s] = y
            improvement = base_cost - player_cost(game, i, trial)
            worst = max(worst, float(improvement))
    if not any_sampled and not notes:
        return GneCheck("inconclusive", float("nan"), ["no feasible deviations found"])
    status = "pass" if worst <= tol else "fail"
    return GneCheck(status, worst, notes)


def _slice_deviations(p, xi: Array, rng, samples: int):
    """Random feasible deviations for one player on its constraint slice.

    Directions are drawn in the nullspace of the player's constraint row and
    scaled by the interval of steps that keeps every coordinate in the box.
    """
    a = p.a_block[0]
    out = []
    for _ in range(samples):
        d = rng.normal(size=p.dim)
        d -= a * (a @ d) / (a @ a)
        if np.linalg.norm(d) < 1e-12:
            continue
        t_lo, t_hi = -np.inf, np.inf
        for k in range(p.dim):
            if abs(d[k]) < 1e-15:
                continue
            lo_k = (p.box_lo[k] - xi[k]) / d[k]
            hi_k = (p.box_hi[k] - xi[k]) / d[k]
            lo_k, hi_k = min(lo_k, hi_k), max(lo_k, hi_k)
            t_lo, t_hi = max(t_lo, lo_k), min(t_hi, hi_k)
        if not np.isfinite(t_lo) or not np.isfinite(t_hi) or t_hi <= t_lo:
            continue
        out.append(xi + rng.uniform(t_lo, t_hi) * d)
    return out
