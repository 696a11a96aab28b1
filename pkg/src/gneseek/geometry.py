"""Projections and merit functions on the augmented primal-dual space.

The augmented space pairs a strategy profile with the shared-constraint
multiplier, ``theta = (x, lambda_bar)`` living in ``Theta = Omega x R^l``.
The augmented operator

    Fhat(theta) = [ F(x) + (gamma/N) A^T lambda_bar ;  -(gamma/N)(A x - b) ]

has the constrained equilibria as its projection fixed points
``theta = P_Theta(theta - Fhat(theta))``, which the regularized gap function
below measures smoothly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .games import (
    GameSpec,
    central_jacobian,
    constraint_residual,
    pseudo_gradient,
)

Array = np.ndarray


def project_box(v, lo, hi):
    """Componentwise clamp onto [lo, hi]; the Euclidean box projection."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ValueError("project_box: lo exceeds hi")
    return np.clip(v, lo, hi)


@dataclass
class AugmentedPoint:
    """A profile together with a shared-constraint multiplier."""

    x: Array
    lambda_bar: Array

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.lambda_bar = np.atleast_1d(np.asarray(self.lambda_bar, dtype=float)) \
            if np.size(self.lambda_bar) else np.zeros(0)

    @property
    def stacked(self) -> Array:
        return np.concatenate([self.x, self.lambda_bar])

    @classmethod
    def from_stacked(cls, game: GameSpec, vec) -> "AugmentedPoint":
        vec = np.asarray(vec, dtype=float).ravel()
        n, l = game.dim_total, game.constraint_rows
        if vec.size != n + l:
            raise ShapeError(f"augmented point: expected length {n + l}, got {vec.size}")
        return cls(vec[:n], vec[n:])

    def check(self, game: GameSpec) -> "AugmentedPoint":
        if self.x.size != game.dim_total or self.lambda_bar.size != game.constraint_rows:
            raise ShapeError(
                f"augmented point shapes {(self.x.size, self.lambda_bar.size)} do not "
                f"match game {(game.dim_total, game.constraint_rows)}"
            )
        return self


def project_augmented(game: GameSpec, vec: Array) -> Array:
    """Projection onto Theta = Omega x R^l: clamp the profile, keep the dual."""
    out = np.array(vec, dtype=float)
    n = game.dim_total
    out[:n] = np.clip(out[:n], game.box_lo, game.box_hi)
    return out


def augmented_map(game: GameSpec, gamma: float, theta: AugmentedPoint) -> Array:
    """Stacked augmented operator Fhat(theta); reduces to F(x) when l = 0."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    theta.check(game)
    f_x = pseudo_gradient(game, theta.x)
    if game.constraint_rows == 0:
        return f_x
    scale = gamma / game.n_players
    res = constraint_residual(game, theta.x)
    return np.concatenate([f_x + scale * (game.a_full.T @ theta.lambda_bar),
                           -scale * res])


def augmented_jacobian(game: GameSpec, gamma: float, x: Array) -> Array:
    """Jacobian of the augmented operator at profile x.

    Uses the game's analytic gradient-map Jacobian when present, otherwise
    central finite differences with step 1e-6*(1+|x|).  The dual blocks are
    exact: the operator is affine in lambda_bar.
    """
    x = game.check_profile(x)
    if game.jac_pseudo is not None:
        jf = np.asarray(game.jac_pseudo(x), dtype=float)
    else:
        jf = central_jacobian(lambda v: pseudo_gradient(game, v), x)
    n, l = game.dim_total, game.constraint_rows
    if l == 0:
        return jf
    scale = gamma / game.n_players
    jac = np.zeros((n + l, n + l))
    jac[:n, :n] = jf
    jac[:n, n:] = scale * game.a_full.T
    jac[n:, :n] = -scale * game.a_full
    return jac


def _gap_pieces(game: GameSpec, gamma: float, theta: AugmentedPoint):
    t = theta.stacked
    f = augmented_map(game, gamma, theta)
    h = project_augmented(game, t - f)
    return t, f, t - h


def gap_value(game: GameSpec, gamma: float, theta: AugmentedPoint) -> float:
    """Regularized gap of the augmented operator; >= 0 on Theta, 0 exactly at
    the projection fixed points."""
    _, f, d = _gap_pieces(game, gamma, theta)
    return float(d @ f - 0.5 * d @ d)


def gap_gradient(game: GameSpec, gamma: float, theta: AugmentedPoint) -> Array:
    """Gradient of the regularized gap.

    By the envelope theorem applied to the gap's max form, the gradient is
    ``Fhat + (JFhat^T - I)(theta - H(theta))``; the transpose matters because
    the augmented Jacobian is asymmetric.
    """
    _, f, d = _gap_pieces(game, gamma, theta)
    jac = augmented_jacobian(game, gamma, theta.x)
    return f + jac.T @ d - d


def lyapunov_value(game: GameSpec, gamma: float, theta: AugmentedPoint,
                   theta_star: AugmentedPoint) -> float:
    """Gap plus squared distance to a reference equilibrium point.

    Nonnegative everywhere on Theta and zero only at the reference point;
    along converged trajectories it decays to the integration noise floor.
    """
    theta_star.check(game)
    dist = theta.stacked - theta_star.stacked
    return gap_value(game, gamma, theta) + 0.5 * float(dist @ dist)
