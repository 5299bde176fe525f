"""Semidefinite network games.

Each edge ``{i, j}`` carries two Hermitian matrices on ``A_i (x) A_j`` (in the
stored order of the edge): ``R_ij`` for player ``i`` and ``R_ji`` for player
``j``, so that ``p_ij = <R_ij, X_i (x) X_j>`` and ``p_ji = <R_ji, X_i (x) X_j>``.

The payoff operator of a directed edge ``(a, b)`` is the map
``Y -> tr_b(R (I (x) Y))`` from ``L(A_b)`` to ``L(A_a)``, where ``R`` is player
``a``'s payoff matrix moved to ``A_a (x) A_b``.  It is the Choi-represented map
of ``R`` composed with a transpose, which makes ``p_ab = <X_a, Phi_ab(X_b)>``
hold without any transposes downstream.
"""

from __future__ import annotations

import functools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import DimensionError, SuperOperator


@dataclass(frozen=True, eq=False)
class Edge:
    i: int
    j: int
    R_ij: np.ndarray = field(repr=False)
    R_ji: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class NetworkGame:
    """Immutable validated game: player dimensions plus edge payoff matrices."""

    dims: tuple[int, ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a game needs at least one player")
        if any(d < 1 for d in dims):
            raise DimensionError(f"player dimensions must be positive, got {dims}")
        n = len(dims)
        seen = set()
        edges = []
        for k, e in enumerate(self.edges):
            i, j = int(e.i), int(e.j)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge {k}: endpoint out of range ({i}, {j})")
            if i == j:
                raise ValueError(f"edge {k}: self-loop at player {i}")
            key = frozenset((i, j))
            if key in seen:
                raise ValueError(f"edge {k}: duplicate edge ({i}, {j})")
            seen.add(key)
            size = dims[i] * dims[j]
            mats = []
            for name, r in (("R_ij", e.R_ij), ("R_ji", e.R_ji)):
                r = linalg.check_hermitian(r, what=f"edge {k} {name}")
                if r.shape[0] != size:
                    raise DimensionError(
                        f"edge {k} {name}: size {r.shape[0]}, expected {size}"
                    )
                r = r.copy()
                r.setflags(write=False)
                mats.append(r)
            edges.append(Edge(i, j, *mats))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def n_players(self) -> int:
        return len(self.dims)

    @functools.cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nb = [[] for _ in self.dims]
        for e in self.edges:
            nb[e.i].append(e.j)
            nb[e.j].append(e.i)
        return tuple(tuple(sorted(x)) for x in nb)

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    @functools.cached_property
    def _edge_index(self) -> dict:
        return {frozenset((e.i, e.j)): e for e in self.edges}

    def edge(self, i: int, j: int) -> Edge:
        try:
            return self._edge_index[frozenset((i, j))]
        except KeyError:
            raise KeyError(f"({i}, {j}) is not an edge of the game") from None

    @functools.cached_property
    def _oriented(self) -> dict:
        out = {}
        for e in self.edges:
            di, dj = self.dims[e.i], self.dims[e.j]
            out[(e.i, e.j)] = e.R_ij
            out[(e.j, e.i)] = linalg.swap_factors(e.R_ji, di, dj)
        for r in out.values():
            r.setflags(write=False)
        return out

    @functools.cached_property
    def _tensors(self) -> dict:
        return {
            (a, b): r.reshape(self.dims[a], self.dims[b], self.dims[a], self.dims[b])
            for (a, b), r in self._oriented.items()
        }


def payoff_matrix(game: NetworkGame, a: int, b: int) -> np.ndarray:
    """Player ``a``'s payoff matrix on the edge to ``b``, on ``A_a (x) A_b``."""
    game.edge(a, b)
    return game._oriented[(a, b)]


def edge_payoff(game: NetworkGame, edge: tuple[int, int], x_i, x_j) -> tuple[float, float]:
    """Bilinear payoffs ``(p_ij, p_ji)`` of the two endpoints of ``edge``."""
    i, j = edge
    x_i, x_j = linalg.as_matrix(x_i), linalg.as_matrix(x_j)
    if x_i.shape[0] != game.dims[i] or x_j.shape[0] != game.dims[j]:
        raise DimensionError("strategy dimensions do not match the edge")
    prod = linalg.kron(x_i, x_j)
    p_ij = linalg.inner(payoff_matrix(game, i, j), prod)
    p_ji = linalg.inner(
        payoff_matrix(game, j, i), linalg.swap_factors(prod, game.dims[i], game.dims[j])
    )
    return p_ij, p_ji


def payoff_operator(game: NetworkGame, a: int, b: int) -> SuperOperator:
    """Payoff operator ``L(A_b) -> L(A_a)`` with the transpose folded in."""
    r = payoff_matrix(game, a, b)
    da, db = game.dims[a], game.dims[b]
    return SuperOperator(db, da, linalg.partial_transpose_second(r, da, db))


def choi_operator(game: NetworkGame, a: int, b: int) -> SuperOperator:
    """The map whose Choi matrix is player ``a``'s payoff matrix itself (no transpose)."""
    return SuperOperator(game.dims[b], game.dims[a], payoff_matrix(game, a, b))


def apply_payoff_operator(game: NetworkGame, a: int, b: int, y) -> np.ndarray:
    """``Phi_ab(y)`` without building a :class:`SuperOperator`."""
    return np.einsum("prqs,sr->pq", game._tensors[(a, b)], y)


def apply_payoff_adjoint(game: NetworkGame, a: int, b: int, x) -> np.ndarray:
    # adjoint of Y -> tr_b(R (I (x) Y)), maps L(A_a) -> L(A_b)
    return np.einsum("prqs,qp->rs", game._tensors[(a, b)], x)


def check_profile(game: NetworkGame, profile, density: bool = True) -> list[np.ndarray]:
    if len(profile) != game.n_players:
        raise DimensionError(
            f"profile has {len(profile)} strategies, game has {game.n_players} players"
        )
    out = []
    for i, (x, d) in enumerate(zip(profile, game.dims)):
        x = linalg.as_matrix(x)
        if x.shape[0] != d:
            raise DimensionError(f"player {i}: strategy of size {x.shape[0]}, expected {d}")
        if density:
            linalg.check_density(x, what=f"player {i} strategy")
        out.append(x)
    return out


def phi_i(game: NetworkGame, i: int, strategies) -> np.ndarray:
    """``sum_{j in N(i)} Phi_ij(X_j)``.

    ``strategies`` is a full profile or a mapping from neighbor index to strategy.
    """
    out = np.zeros((game.dims[i], game.dims[i]), dtype=complex)
    for j in game.neighbors[i]:
        try:
            x = strategies[j]
        except (KeyError, IndexError):
            raise ValueError(f"missing strategy of neighbor {j} of player {i}") from None
        x = linalg.as_matrix(x)
        if x.shape[0] != game.dims[j]:
            raise DimensionError(f"neighbor {j}: strategy of size {x.shape[0]}")
        out += apply_payoff_operator(game, i, j, x)
    return out


def total_payoff(game: NetworkGame, i: int, profile) -> float:
    """``p_i(X) = <X_i, Phi_i(X_N(i))>``."""
    x = linalg.as_matrix(profile[i])
    if x.shape[0] != game.dims[i]:
        raise DimensionError(f"player {i}: strategy of size {x.shape[0]}")
    return linalg.inner(x, phi_i(game, i, profile))


def total_payoff_bilinear(game: NetworkGame, i: int, profile) -> float:
    """``p_i`` as the sum of bilinear edge payoffs; reference path for :func:`total_payoff`."""
    return sum(
        edge_payoff(game, (i, j), profile[i], profile[j])[0] for j in game.neighbors[i]
    )


def game_operator_apply(game: NetworkGame, profile) -> list[np.ndarray]:
    check_profile(game, profile, density=False)
    return [phi_i(game, i, profile) for i in range(game.n_players)]


def psi_apply(game: NetworkGame, y) -> list[np.ndarray]:
    """Adjoint of the game operator: ``Psi_i(Y) = sum_{j in N(i)} Phi_ji^dagger(Y_j)``."""
    y = check_profile(game, y, density=False)
    out = []
    for i in range(game.n_players):
        acc = np.zeros((game.dims[i], game.dims[i]), dtype=complex)
        for j in game.neighbors[i]:
            acc += apply_payoff_adjoint(game, j, i, y[j])
        out.append(acc)
    return out


def total_sum(game: NetworkGame, profile) -> float:
    """``W(X) = sum_i p_i(X)``."""
    return sum(total_payoff(game, i, profile) for i in range(game.n_players))


def map_payoffs(game: NetworkGame, func) -> NetworkGame:
    """New game with ``R -> func(R, owner, other)`` applied to every payoff matrix."""
    edges = [
        Edge(e.i, e.j, func(e.R_ij, e.i, e.j), func(e.R_ji, e.j, e.i)) for e in game.edges
    ]
    return NetworkGame(game.dims, tuple(edges))


def cp_shift(game: NetworkGame) -> tuple[NetworkGame, float]:
    """Add ``c I`` to every payoff matrix so that all of them are >= I.

    Each edge payoff moves by exactly ``c``, so Nash equilibria are unchanged.
    """
    lmin = min(
        (linalg.lambda_min(r) for e in game.edges for r in (e.R_ij, e.R_ji)), default=0.0
    )
    c = max(0.0, -lmin) + 1.0
    shifted = map_payoffs(game, lambda r, *_: r + c * np.eye(r.shape[0]))
    return shifted, c


def constant_to_zero_sum(game: NetworkGame, constant: float) -> NetworkGame:
    """Subtract ``C / (N deg i)`` from every edge payoff of player ``i``.

    ``N`` counts players with at least one edge, so isolated players do not
    absorb any share of the constant.
    """
    if not game.edges:
        raise ValueError("constant_to_zero_sum needs a game with at least one edge")
    if constant == 0:
        return game
    n_active = sum(1 for i in range(game.n_players) if game.degree(i) > 0)

    def shift(r, owner, _other):
        return r - constant / (n_active * game.degree(owner)) * np.eye(r.shape[0])

    return map_payoffs(game, shift)


def pairwise_zero_sum_random(
    n_players: int,
    dims: int | Sequence[int],
    edge_probability: float,
    seed: int,
) -> NetworkGame:
    """Random game whose every edge game is zero-sum (``R_ji = -R_ij``).

    Payoff matrices are Gaussian Hermitian scaled by ``1/sqrt(d_i d_j)`` so their
    spectral norms stay O(1) across dimensions.
    """
    if not 0 <= edge_probability <= 1:
        raise ValueError("edge_probability must lie in [0, 1]")
    if isinstance(dims, (int, np.integer)):
        dims = [int(dims)] * n_players
    dims = tuple(int(d) for d in dims)
    if len(dims) != n_players:
        raise ValueError("need one dimension per player")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n_players):
        for j in range(i + 1, n_players):
            if rng.random() < edge_probability:
                size = dims[i] * dims[j]
                r = linalg.random_hermitian(size, rng, scale=1.0 / np.sqrt(size))
                edges.append(Edge(i, j, r, -r))
    return NetworkGame(dims, tuple(edges))


def embed_polymatrix(actions: Sequence[int], edges) -> NetworkGame:
    """Diagonal embedding of a classical polymatrix game.

    ``edges`` holds ``(i, j, A_ij, A_ji)`` with ``A_ij`` of shape
    ``(actions[i], actions[j])`` (player ``i``'s payoffs, rows are ``i``'s
    actions) and ``A_ji`` of shape ``(actions[j], actions[i])``.
    """
    actions = tuple(int(a) for a in actions)
    out = []
    for k, (i, j, a_ij, a_ji) in enumerate(edges):
        a_ij = np.asarray(a_ij, dtype=float)
        a_ji = np.asarray(a_ji, dtype=float)
        if a_ij.shape != (actions[i], actions[j]) or a_ji.shape != (actions[j], actions[i]):
            raise DimensionError(
                f"edge {k}: payoff shapes {a_ij.shape}, {a_ji.shape} inconsistent "
                f"with action counts {actions[i]}, {actions[j]}"
            )
        out.append(Edge(i, j, np.diag(a_ij.ravel()), np.diag(a_ji.T.ravel())))
    return NetworkGame(actions, tuple(out))


def security_game(
    n_evaders: int, n_inspectors: int, n_exits: int, normalize: bool = True
) -> NetworkGame:
    """Evaders (players ``0..n_evaders-1``) against inspectors on a complete bipartite graph.

    On each edge the evader earns 1 if the inspector picks a different exit and
    the inspector earns 1 on a match, so every edge sums to 1.  With
    ``normalize`` the constant ``n_evaders * n_inspectors`` is removed.
    """
    if min(n_evaders, n_inspectors, n_exits) < 1:
        raise ValueError("all security game parameters must be >= 1")
    match = np.eye(n_exits)
    edges = []
    for e in range(n_evaders):
        for k in range(n_inspectors):
            edges.append((e, n_evaders + k, 1.0 - match, match))
    game = embed_polymatrix([n_exits] * (n_evaders + n_inspectors), edges)
    if normalize:
        game = constant_to_zero_sum(game, float(n_evaders * n_inspectors))
    return game


def uniform_profile(game: NetworkGame) -> list[np.ndarray]:
    return [np.eye(d, dtype=complex) / d for d in game.dims]


def random_profile(game: NetworkGame, rng: np.random.Generator, rank=None) -> list[np.ndarray]:
    return [linalg.random_density(d, rng, rank) for d in game.dims]
