"""Aggregative games with box strategy sets and a shared linear equality constraint.

An aggregative game couples N players only through the average
``sigma(x) = (1/N) * sum_i phi_i(x_i)`` of per-player contribution maps.
Player i picks ``x_i`` inside an axis-aligned box and pays
``J_i(x) = theta_i(x_i, sigma(x))``.  A single linear equality
``sum_i A_i x_i = sum_i b_i`` may couple all decisions; the equilibrium
notion used throughout is the variational one, i.e. the solution of the
variational inequality on the feasible set with the stacked partial-gradient
map ``F``.

Everything here is a pure function of its inputs; callbacks must be
re-entrant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import GameDefinitionError, PlayerEvaluationError, ShapeError

Array = np.ndarray

# Central finite differences used as a fallback when analytic callbacks are
# not supplied; step scales with the coordinate magnitude.
FD_STEP = 1e-6


def _fd_step(value: float) -> float:
    return FD_STEP * (1.0 + abs(float(value)))


def central_diff(f: Callable[[Array], float], x: Array) -> Array:
    """Central finite differences of a scalar function, one column at a time."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(x.size):
        h = _fd_step(x[k])
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        out[k] = (f(xp) - f(xm)) / (2.0 * h)
    return out


def central_jacobian(f: Callable[[Array], Array], x: Array) -> Array:
    """Central finite-difference Jacobian of a vector map."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    jac = np.zeros((f0.size, x.size))
    for k in range(x.size):
        h = _fd_step(x[k])
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        jac[:, k] = (np.asarray(f(xp), float) - np.asarray(f(xm), float)) / (2.0 * h)
    return jac


def _as_vector(value, size: int, what: str) -> Array:
    arr = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
    if arr.size != size:
        raise ShapeError(f"{what}: expected length {size}, got {arr.size}")
    return arr


def _as_matrix(value, rows: int, cols: int, what: str) -> Array:
    arr = np.asarray(value, dtype=float)
    arr = arr.reshape(rows, cols) if arr.size == rows * cols else arr
    if arr.shape != (rows, cols):
        raise ShapeError(f"{what}: expected shape {(rows, cols)}, got {arr.shape}")
    return arr


@dataclass
class PlayerSpec:
    """One player: strategy box, cost gradients, aggregation contribution.

    Parameters
    ----------
    dim : int
        Decision dimension n_i.
    box_lo, box_hi : arrays of length dim
        Bounds of the (compact) strategy box.
    grad_local : callable (x_i, sigma) -> array n_i
        Partial gradient of theta_i with respect to x_i, sigma held fixed.
    grad_agg : callable (x_i, sigma) -> array m
        Partial gradient of theta_i with respect to sigma.
    phi : callable x_i -> array m
        Local contribution to the aggregation.
    phi_jac : callable x_i -> array (m, n_i)
        Jacobian of phi.
    cost : callable (x_i, sigma) -> float, optional
        theta_i itself; only needed for best-response verification and for
        the finite-difference gradient fallback.
    a_block : array (l, n_i)
        This player's column block of the coupled constraint.
    b_block : array l
        This player's share of the constraint right-hand side.
    phi_family : str
        "affine", "quadratic" or "general"; affine/quadratic phi get exact
        vertex-enumeration bounds, general phi falls back to grid sampling.

    Missing gradient callbacks are synthesized by central finite differences
    of ``cost`` (and ``phi_jac`` from ``phi``).
    """

    dim: int
    box_lo: Array
    box_hi: Array
    grad_local: Optional[Callable] = None
    grad_agg: Optional[Callable] = None
    phi: Optional[Callable] = None
    phi_jac: Optional[Callable] = None
    cost: Optional[Callable] = None
    a_block: Optional[Array] = None
    b_block: Optional[Array] = None
    phi_family: str = "general"

    def __post_init__(self):
        if self.dim < 1:
            raise GameDefinitionError(f"player dim must be >= 1, got {self.dim}")
        self.box_lo = _as_vector(self.box_lo, self.dim, "box_lo")
        self.box_hi = _as_vector(self.box_hi, self.dim, "box_hi")
        if np.any(self.box_lo > self.box_hi):
            raise GameDefinitionError("box_lo exceeds box_hi")
        if self.phi_family not in ("affine", "quadratic", "general"):
            raise GameDefinitionError(f"unknown phi_family {self.phi_family!r}")
        if self.grad_local is None or self.grad_agg is None:
            if self.cost is None:
                raise GameDefinitionError(
                    "grad_local/grad_agg missing and no cost callback to "
                    "differentiate"
                )
            self._install_fd_gradients()
        if self.phi is not None and self.phi_jac is None:
            phi = self.phi
            self.phi_jac = lambda xi: central_jacobian(phi, np.atleast_1d(xi))

    def _install_fd_gradients(self):
        cost = self.cost
        if self.grad_local is None:
            self.grad_local = lambda xi, sig: central_diff(
                lambda v: cost(v, np.asarray(sig, float)), np.atleast_1d(xi)
            )
        if self.grad_agg is None:
            self.grad_agg = lambda xi, sig: central_diff(
                lambda s: cost(np.asarray(xi, float), s), np.atleast_1d(sig)
            )


@dataclass
class VectorOps:
    """Optional whole-profile evaluators for uniformly scalar games.

    ``phi_rows(x) -> (N, m)`` stacks every player's contribution and
    ``grad_rows(x, eta) -> (n,)`` stacks every player's own gradient with its
    private aggregate estimate ``eta[i]``.  Semantically identical to the
    per-player callbacks, just batched; the integrator uses them when present.
    """

    phi_rows: Callable
    grad_rows: Callable


class GameSpec:
    """An N-player aggregative game with one shared linear equality block.

    Holds the ordered player list plus the assembled constraint data
    ``A = [A_1, ..., A_N]`` and ``b = sum_i b_i``.  ``constraint_rows = 0``
    means an unconstrained game.  An optional ``jac_pseudo`` callback gives
    the analytic Jacobian of the stacked gradient map; without it a
    finite-difference fallback is used where a Jacobian is needed.
    """

    def __init__(
        self,
        players: Sequence[PlayerSpec],
        agg_dim: int,
        constraint_rows: int = 0,
        name: str = "game",
        jac_pseudo: Optional[Callable] = None,
        vector_ops: Optional[VectorOps] = None,
    ):
        if len(players) < 1:
            raise GameDefinitionError("a game needs at least one player")
        if agg_dim < 1:
            raise GameDefinitionError("agg_dim must be >= 1")
        if constraint_rows < 0:
            raise GameDefinitionError("constraint_rows must be >= 0")
        self.players = list(players)
        self.agg_dim = int(agg_dim)
        self.constraint_rows = int(constraint_rows)
        self.name = name
        self.jac_pseudo = jac_pseudo
        self.vector_ops = vector_ops

        self.n_players = len(self.players)
        self.dims = [p.dim for p in self.players]
        self.dim_total = sum(self.dims)
        offsets = np.cumsum([0] + self.dims)
        self.slices = [slice(offsets[i], offsets[i + 1]) for i in range(self.n_players)]
        self.box_lo = np.concatenate([p.box_lo for p in self.players])
        self.box_hi = np.concatenate([p.box_hi for p in self.players])

        l = self.constraint_rows
        for i, p in enumerate(self.players):
            if p.phi is None:
                raise GameDefinitionError(f"player {i}: phi callback missing")
            if l > 0:
                if p.a_block is None or p.b_block is None:
                    raise GameDefinitionError(
                        f"player {i}: constraint blocks missing with l={l}"
                    )
                p.a_block = _as_matrix(p.a_block, l, p.dim, f"player {i} a_block")
                p.b_block = _as_vector(p.b_block, l, f"player {i} b_block")
            else:
                p.a_block = np.zeros((0, p.dim))
                p.b_block = np.zeros(0)
        if l > 0:
            self.a_full = np.hstack([p.a_block for p in self.players])
            self.b_total = np.sum([p.b_block for p in self.players], axis=0)
        else:
            self.a_full = np.zeros((0, self.dim_total))
            self.b_total = np.zeros(0)

        # Batched constraint data for uniformly scalar-decision games; lets
        # the integrator avoid per-player loops on the built-in families.
        self.all_scalar = all(d == 1 for d in self.dims)
        if self.all_scalar:
            self.a_rows = np.vstack([p.a_block[:, 0] for p in self.players]) \
                if l > 0 else np.zeros((self.n_players, 0))
            self.b_rows = np.vstack([p.b_block for p in self.players]) \
                if l > 0 else np.zeros((self.n_players, 0))
        else:
            self.a_rows = None
            self.b_rows = None

    def split(self, x: Array):
        """Per-player views of a stacked profile vector."""
        x = _as_vector(x, self.dim_total, "profile")
        return [x[s] for s in self.slices]

    def check_profile(self, x) -> Array:
        return _as_vector(x, self.dim_total, "profile")

    def __repr__(self):
        return (
            f"GameSpec({self.name!r}, N={self.n_players}, n={self.dim_total}, "
            f"m={self.agg_dim}, l={self.constraint_rows})"
        )


@dataclass
class ParamBounds:
    """Sufficient gain levels for the consensus terms of the dynamics.

    ``f1_bar`` bounds the speed of any player's aggregation contribution
    (sup of the contribution Jacobian norm times the strategy-set diameter);
    ``f2_bar`` bounds any player's local constraint residual over its box.
    The tracking gain must exceed ``alpha_min = (N-1)*f1_bar`` and the dual
    gain must exceed ``beta_min(gamma) = gamma*(N-1)*f2_bar``.
    """

    f1_bar: float
    f2_bar: float
    n_players: int
    per_player_f1: Array = field(repr=False, default=None)
    per_player_f2: Array = field(repr=False, default=None)

    @property
    def alpha_min(self) -> float:
        return (self.n_players - 1) * self.f1_bar

    def beta_min(self, gamma: float) -> float:
        return gamma * (self.n_players - 1) * self.f2_bar


# ---------------------------------------------------------------------------
# Core evaluations
# ---------------------------------------------------------------------------

def aggregate(game: GameSpec, x) -> Array:
    """Average of per-player contributions, sigma(x) = (1/N) sum phi_i(x_i)."""
    if game.vector_ops is not None:
        x = game.check_profile(x)
        return np.asarray(game.vector_ops.phi_rows(x), float).mean(axis=0)
    parts = game.split(x)
    total = np.zeros(game.agg_dim)
    for i, (p, xi) in enumerate(zip(game.players, parts)):
        try:
            total += _as_vector(p.phi(xi), game.agg_dim, f"phi_{i}")
        except ShapeError:
            raise
        except Exception as exc:  # noqa: BLE001 - annotate with player index
            raise PlayerEvaluationError(i, f"phi failed: {exc}") from exc
    return total / game.n_players


def local_gradient(player: PlayerSpec, x_i, y_i, n_players: int) -> Array:
    """Player's own-cost gradient with the aggregate replaced by estimate y_i.

    Returns ``grad_local(x_i, y_i) + (1/N) * phi_jac(x_i)^T grad_agg(x_i, y_i)``,
    the chain-rule gradient of theta_i(x_i, sigma(x)) in x_i when every
    occurrence of sigma(x) is frozen at y_i.
    """
    xi = np.atleast_1d(np.asarray(x_i, dtype=float))
    yi = np.atleast_1d(np.asarray(y_i, dtype=float))
    g_loc = _as_vector(player.grad_local(xi, yi), player.dim, "grad_local")
    g_agg = np.atleast_1d(np.asarray(player.grad_agg(xi, yi), dtype=float)).ravel()
    jac = np.asarray(player.phi_jac(xi), dtype=float).reshape(g_agg.size, player.dim)
    return g_loc + jac.T @ g_agg / n_players


def pseudo_gradient(game: GameSpec, x) -> Array:
    """Stacked own-gradient map F(x), evaluated with the exact aggregate."""
    x = game.check_profile(x)
    sigma = aggregate(game, x)
    if game.vector_ops is not None:
        eta = np.broadcast_to(sigma, (game.n_players, game.agg_dim))
        return np.asarray(game.vector_ops.grad_rows(x, eta), float)
    out = np.empty(game.dim_total)
    for i, (p, s) in enumerate(zip(game.players, game.slices)):
        try:
            out[s] = local_gradient(p, x[s], sigma, game.n_players)
        except ShapeError:
            raise
        except PlayerEvaluationError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise PlayerEvaluationError(i, f"gradient callback failed: {exc}") from exc
    return out


def constraint_residual(game: GameSpec, x) -> Array:
    """A x - b; empty vector for an unconstrained game."""
    x = game.check_profile(x)
    if game.constraint_rows == 0:
        return np.zeros(0)
    return game.a_full @ x - game.b_total


def residual_rows(game: GameSpec, x) -> Array:
    """Per-player residual blocks A_i x_i - b_i, shape (N, l)."""
    x = game.check_profile(x)
    if game.constraint_rows == 0:
        return np.zeros((game.n_players, 0))
    if game.all_scalar:
        return game.a_rows * x[:, None] - game.b_rows
    out = np.zeros((game.n_players, game.constraint_rows))
    for i, (p, s) in enumerate(zip(game.players, game.slices)):
        out[i] = p.a_block @ x[s] - p.b_block
    return out


def phi_stack(game: GameSpec, x) -> Array:
    """All contributions phi_i(x_i) stacked into shape (N, m)."""
    if game.vector_ops is not None:
        x = game.check_profile(x)
        return np.asarray(game.vector_ops.phi_rows(x), float)
    parts = game.split(x)
    out = np.empty((game.n_players, game.agg_dim))
    for i, (p, xi) in enumerate(zip(game.players, parts)):
        out[i] = _as_vector(p.phi(xi), game.agg_dim, f"phi_{i}")
    return out


def player_cost(game: GameSpec, i: int, x) -> float:
    """Cost of player i at the full profile x (requires the cost callback)."""
    p = game.players[i]
    if p.cost is None:
        raise GameDefinitionError(f"player {i}: no cost callback")
    x = game.check_profile(x)
    sigma = aggregate(game, x)
    return float(p.cost(x[game.slices[i]], sigma))


# ---------------------------------------------------------------------------
# Parameter bounds
# ---------------------------------------------------------------------------

_GRID_POINTS = 64          # per coordinate, general (non-polynomial) phi
_GRID_INFLATION = 1.1      # safety factor on sampled sups
_MAX_GRID = 1 << 18


def _box_vertices(lo: Array, hi: Array):
    if lo.size > 20:
        raise GameDefinitionError("vertex enumeration infeasible beyond 20 dims")
    return (np.array(v) for v in itertools.product(*zip(lo, hi)))


def _box_grid(lo: Array, hi: Array):
    total = _GRID_POINTS ** lo.size
    if total > _MAX_GRID:
        raise GameDefinitionError(
            f"bound grid of {total} points is too large; supply an affine or "
            "quadratic phi_family or reduce the dimension"
        )
    axes = [np.linspace(a, b, _GRID_POINTS) for a, b in zip(lo, hi)]
    return (np.array(v) for v in itertools.product(*axes))


def compute_bounds(game: GameSpec) -> ParamBounds:
    """Bounds f1_bar, f2_bar used to size the consensus gains.

    The strategy-set diameter and the affine constraint residual are exact
    (norm of box widths, vertex enumeration).  For affine/quadratic phi the
    contribution-Jacobian sup is exact as well, because the Jacobian is then
    affine in x_i and a convex norm attains its box maximum at a vertex.
    General phi is grid-sampled and inflated by 10%.
    """
    if not (np.all(np.isfinite(game.box_lo)) and np.all(np.isfinite(game.box_hi))):
        raise GameDefinitionError("parameter bounds need bounded strategy boxes")
    diam = float(np.linalg.norm(game.box_hi - game.box_lo))

    per_f1 = np.zeros(game.n_players)
    per_f2 = np.zeros(game.n_players)
    for i, p in enumerate(game.players):
        if p.phi_family in ("affine", "quadratic"):
            points = _box_vertices(p.box_lo, p.box_hi)
            inflate = 1.0
        else:
            points = _box_grid(p.box_lo, p.box_hi)
            inflate = _GRID_INFLATION
        sup_jac = 0.0
        for v in points:
            jac = np.asarray(p.phi_jac(v), dtype=float).reshape(game.agg_dim, p.dim)
            sup_jac = max(sup_jac, float(np.linalg.norm(jac, 2)))
        per_f1[i] = sup_jac * inflate * diam

        if game.constraint_rows > 0:
            sup_res = 0.0
            for v in _box_vertices(p.box_lo, p.box_hi):
                sup_res = max(sup_res, float(np.linalg.norm(p.a_block @ v - p.b_block)))
            per_f2[i] = sup_res

    return ParamBounds(
        f1_bar=float(per_f1.max()),
        f2_bar=float(per_f2.max()) if game.n_players else 0.0,
        n_players=game.n_players,
        per_player_f1=per_f1,
        per_player_f2=per_f2,
    )


def monotonicity_probe(game: GameSpec, sample_count: int = 64, seed: int = 0) -> float:
    """Smallest eigenvalue of the symmetrized Jacobian of F over box samples.

    A negative return flags that the stacked gradient map is likely not
    monotone on the box (diagnostic only, never raises).  The Jacobian is
    always taken by finite differences so the probe stays independent of any
    analytic Jacobian the game may carry.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(sample_count):
        x = rng.uniform(game.box_lo, game.box_hi)
        jac = central_jacobian(lambda v: pseudo_gradient(game, v), x)
        eigmin = float(np.linalg.eigvalsh(0.5 * (jac + jac.T))[0])
        worst = min(worst, eigmin)
    return worst


def check_gradients(game: GameSpec, seed: int = 0, samples: int = 10,
                    rel_tol: float = 1e-5) -> float:
    """Compare callbacks against central differences of the full player costs.

    Returns the worst relative error found; raises GameDefinitionError when a
    player has no cost callback to differentiate.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(game.box_lo, game.box_hi)
        f_analytic = pseudo_gradient(game, x)
        for i, s in enumerate(game.slices):
            if game.players[i].cost is None:
                raise GameDefinitionError(f"player {i}: no cost callback")

            def cost_of_own(v, i=i, s=s):
                xv = x.copy()
                xv[s] = v
                return player_cost(game, i, xv)

            fd = central_diff(cost_of_own, x[s])
            err = np.linalg.norm(f_analytic[s] - fd) / max(1.0, np.linalg.norm(fd))
            worst = max(worst, float(err))
    if worst > rel_tol:
        raise GameDefinitionError(
            f"analytic gradients disagree with finite differences: {worst:.3e}"
        )
    return worst


# ---------------------------------------------------------------------------
# Built-in game families
# ---------------------------------------------------------------------------

def build_cournot(
    constrained: bool = True,
    n_players: int = 20,
    cap: float = 20.0,
    cost_base: float = 10.0,
    cost_step: float = 20.0,
    demand_intercept: float = 1200.0,
    n_shared: int = 10,
    shared_supply: float = 20.0,
) -> GameSpec:
    """Production competition with a quadratic aggregate and a shared quota.

    Firm i produces x_i in [0, cap] at unit cost ``cost_base + cost_step*i``
    and sells at price ``demand_intercept - N*sigma(x)`` where
    ``sigma(x) = (1/N) sum_j x_j^2``.  The first ``n_shared`` firms share a
    scarce input: sum of their outputs equals ``shared_supply`` (dropped when
    ``constrained`` is false).  The right-hand side is split evenly across
    the sharing firms.
    """
    if n_players < 1:
        raise GameDefinitionError("n_players must be >= 1")
    if cap <= 0:
        raise GameDefinitionError("cap must be positive")
    if constrained and not (1 <= n_shared <= n_players):
        raise GameDefinitionError("n_shared must be in 1..n_players")
    n = n_players
    costs = [cost_base + cost_step * i for i in range(n)]

    players = []
    for i in range(n):
        c_i = costs[i]

        def g_loc(xi, sig, c=c_i):
            return np.array([c - demand_intercept + n * sig[0]])

        def g_agg(xi, sig):
            return np.array([n * xi[0]])

        def phi(xi):
            return np.array([xi[0] ** 2])

        def phi_jac(xi):
            return np.array([[2.0 * xi[0]]])

        def cost(xi, sig, c=c_i):
            return (c - (demand_intercept - n * sig[0])) * xi[0]

        if constrained and i < n_shared:
            a_block = np.array([[1.0]])
            b_block = np.array([shared_supply / n_shared])
        else:
            a_block = np.zeros((1, 1))
            b_block = np.zeros(1)
        players.append(
            PlayerSpec(
                dim=1,
                box_lo=[0.0],
                box_hi=[cap],
                grad_local=g_loc,
                grad_agg=g_agg,
                phi=phi,
                phi_jac=phi_jac,
                cost=cost,
                a_block=a_block if constrained else None,
                b_block=b_block if constrained else None,
                phi_family="quadratic",
            )
        )

    def jac_pseudo(x):
        x = np.asarray(x, dtype=float)
        jac = 2.0 * np.tile(x, (n, 1))
        jac[np.diag_indices(n)] += 4.0 * x
        return jac

    cost_arr = np.asarray(costs)

    def phi_rows(x):
        return (x * x)[:, None]

    def grad_rows(x, eta):
        return cost_arr - demand_intercept + n * eta[:, 0] + 2.0 * x * x

    return GameSpec(
        players,
        agg_dim=1,
        constraint_rows=1 if constrained else 0,
        name="cournot" + ("" if constrained else "-unconstrained"),
        jac_pseudo=jac_pseudo,
        vector_ops=VectorOps(phi_rows, grad_rows),
    )


_DR_CHI = (50.0, 55.0, 60.0, 65.0, 70.0)
_DR_BOXES = ((45.0, 55.0), (44.0, 66.0), (46.0, 72.0), (52.0, 78.0), (56.0, 84.0))


def build_demand_response(
    constrained: bool = True,
    chi: Optional[Sequence[float]] = None,
    boxes: Optional[Sequence[Sequence[float]]] = None,
    k: Optional[Sequence[float]] = None,
    price_slope: float = 0.04,
    price_base: float = 5.0,
    cut: float = 25.0,
) -> GameSpec:
    """Energy-consumption game with linear aggregation and a total budget.

    User i consumes x_i in its comfort box around a nominal chi_i and pays
    ``k_i (x_i - chi_i)^2 + (a*N*sigma(x) + p0) * x_i`` with
    ``sigma(x) = mean(x)``.  When ``constrained``, total consumption is held
    at ``sum(chi) - cut``; the right-hand side is split as
    ``b_i = chi_i - cut/N`` so initial dual variables stay small.
    """
    chi = list(_DR_CHI) if chi is None else [float(c) for c in chi]
    boxes = list(_DR_BOXES) if boxes is None else [tuple(map(float, b)) for b in boxes]
    n = len(chi)
    if n < 1 or len(boxes) != n:
        raise GameDefinitionError("chi and boxes must list one entry per player")
    k = [1.0] * n if k is None else [float(v) for v in k]
    if len(k) != n:
        raise GameDefinitionError("k must list one entry per player")
    a = float(price_slope)
    p0 = float(price_base)

    players = []
    for i in range(n):
        lo, hi = boxes[i]
        if lo > hi:
            raise GameDefinitionError(f"player {i}: box_lo > box_hi")
        k_i, chi_i = k[i], chi[i]

        def g_loc(xi, sig, k_i=k_i, chi_i=chi_i):
            return np.array([2.0 * k_i * (xi[0] - chi_i) + a * n * sig[0] + p0])

        def g_agg(xi, sig):
            return np.array([a * n * xi[0]])

        def phi(xi):
            return np.array([xi[0]])

        def phi_jac(xi):
            return np.array([[1.0]])

        def cost(xi, sig, k_i=k_i, chi_i=chi_i):
            return k_i * (xi[0] - chi_i) ** 2 + (a * n * sig[0] + p0) * xi[0]

        players.append(
            PlayerSpec(
                dim=1,
                box_lo=[lo],
                box_hi=[hi],
                grad_local=g_loc,
                grad_agg=g_agg,
                phi=phi,
                phi_jac=phi_jac,
                cost=cost,
                a_block=np.array([[1.0]]) if constrained else None,
                b_block=np.array([chi[i] - cut / n]) if constrained else None,
                phi_family="affine",
            )
        )

    k_arr = np.asarray(k)
    chi_arr = np.asarray(chi)

    def jac_pseudo(x):
        jac = np.full((n, n), a)
        jac[np.diag_indices(n)] = 2.0 * k_arr + 2.0 * a
        return jac

    def phi_rows(x):
        return x[:, None]

    def grad_rows(x, eta):
        return 2.0 * k_arr * (x - chi_arr) + a * n * eta[:, 0] + p0 + a * x

    return GameSpec(
        players,
        agg_dim=1,
        constraint_rows=1 if constrained else 0,
        name="demand-response" + ("" if constrained else "-unconstrained"),
        jac_pseudo=jac_pseudo,
        vector_ops=VectorOps(phi_rows, grad_rows),
    )


def build_quadratic(
    curvature: Sequence[float],
    target: Sequence[float],
    couple: Sequence[float],
    phi_scale: Sequence[float],
    boxes: Sequence[Sequence[float]],
    a_row: Optional[Sequence[float]] = None,
    b_rows: Optional[Sequence[float]] = None,
    name: str = "quadratic",
) -> GameSpec:
    """Scalar-decision quadratic family used for synthetic test games.

    Player i pays ``0.5*q_i*(x_i - r_i)^2 + w_i * x_i * sigma(x)`` with
    ``phi_i(x_i) = p_i * x_i``.  Optional single-row constraint
    ``sum_i a_i x_i = sum_i b_i``.
    """
    q = [float(v) for v in curvature]
    r = [float(v) for v in target]
    w = [float(v) for v in couple]
    p = [float(v) for v in phi_scale]
    n = len(q)
    if not (len(r) == len(w) == len(p) == len(boxes) == n) or n < 1:
        raise GameDefinitionError("quadratic family lists must have equal length")
    constrained = a_row is not None
    if constrained:
        a_row = [float(v) for v in a_row]
        if len(a_row) != n:
            raise GameDefinitionError("a_row must list one entry per player")
        if b_rows is None:
            raise GameDefinitionError("b_rows required when a_row is given")
        b_rows = [float(v) for v in b_rows]
        if len(b_rows) != n:
            raise GameDefinitionError("b_rows must list one entry per player")

    players = []
    for i in range(n):
        lo, hi = float(boxes[i][0]), float(boxes[i][1])
        q_i, r_i, w_i, p_i = q[i], r[i], w[i], p[i]

        def g_loc(xi, sig, q_i=q_i, r_i=r_i, w_i=w_i):
            return np.array([q_i * (xi[0] - r_i) + w_i * sig[0]])

        def g_agg(xi, sig, w_i=w_i):
            return np.array([w_i * xi[0]])

        def phi(xi, p_i=p_i):
            return np.array([p_i * xi[0]])

        def phi_jac(xi, p_i=p_i):
            return np.array([[p_i]])

        def cost(xi, sig, q_i=q_i, r_i=r_i, w_i=w_i):
            return 0.5 * q_i * (xi[0] - r_i) ** 2 + w_i * xi[0] * sig[0]

        players.append(
            PlayerSpec(
                dim=1,
                box_lo=[lo],
                box_hi=[hi],
                grad_local=g_loc,
                grad_agg=g_agg,
                phi=phi,
                phi_jac=phi_jac,
                cost=cost,
                a_block=np.array([[a_row[i]]]) if constrained else None,
                b_block=np.array([b_rows[i]]) if constrained else None,
                phi_family="affine",
            )
        )

    q_arr, w_arr, p_arr, r_arr = map(np.asarray, (q, w, p, r))

    def jac_pseudo(x):
        jac = np.outer(w_arr, p_arr) / n
        jac[np.diag_indices(n)] += q_arr + w_arr * p_arr / n
        return jac

    def phi_rows(x):
        return (p_arr * x)[:, None]

    def grad_rows(x, eta):
        return q_arr * (x - r_arr) + w_arr * eta[:, 0] + w_arr * p_arr * x / n

    return GameSpec(
        players,
        agg_dim=1,
        constraint_rows=1 if constrained else 0,
        name=name,
        jac_pseudo=jac_pseudo,
        vector_ops=VectorOps(phi_rows, grad_rows),
    )


def random_monotone_quadratic(seed: int, max_players: int = 5, gamma: float = 1.0):
    """Random strongly monotone quadratic game with an interior equilibrium.

    Draws scalar-decision quadratic games (N <= max_players, one constraint
    row), redrawing until the affine gradient map is strongly monotone, then
    places the strategy boxes strictly around the constrained stationary
    point so no box face is active.  Returns the game; the equilibrium is
    recoverable from the game's own linear structure.
    """
    rng = np.random.default_rng(seed)
    for _ in range(100):
        n = int(rng.integers(2, max_players + 1))
        q = rng.uniform(2.0, 4.0, n)
        w = rng.uniform(-0.5, 0.5, n)
        p = rng.uniform(0.5, 1.5, n)
        r = rng.uniform(-2.0, 2.0, n)
        a_row = rng.uniform(0.5, 1.5, n)
        m_mat = np.outer(w, p) / n + np.diag(q + w * p / n)
        if np.linalg.eigvalsh(0.5 * (m_mat + m_mat.T))[0] < 0.5:
            continue
        b_val = rng.uniform(-2.0, 2.0)
        # Interior stationary point of the constrained game: M x + c0 + s*a = 0,
        # a.x = b, with c0 the gradient at zero and s the scaled multiplier.
        c0 = -q * r
        kkt = np.zeros((n + 1, n + 1))
        kkt[:n, :n] = m_mat
        kkt[:n, n] = gamma / n * a_row
        kkt[n, :n] = a_row
        rhs = np.concatenate([-c0, [b_val]])
        sol = np.linalg.solve(kkt, rhs)
        x_star = sol[:n]
        margin_lo = rng.uniform(0.5, 2.0, n)
        margin_hi = rng.uniform(0.5, 2.0, n)
        boxes = [(x_star[i] - margin_lo[i], x_star[i] + margin_hi[i]) for i in range(n)]
        b_rows = a_row * x_star  # sums to b_val, keeps lambda(0) small
        return build_quadratic(
            q, r, w, p, boxes, a_row=a_row, b_rows=b_rows,
            name=f"random-quadratic-{seed}",
        )
    raise GameDefinitionError("failed to draw a strongly monotone instance")
