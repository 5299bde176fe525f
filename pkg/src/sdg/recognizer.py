"""Constant-sum and zero-sum recognition.

Two routes are offered.  :func:`assemble_recognition_sdp` builds, per player
``i``, the program

    min  sum_{l in N(i)} w_l
    s.t. M_l(X_i - Y_i) <= w_l I,   X_i, Y_i densities,

with ``M_l = Phi_il^dagger + Phi_li``.  Its value is 0 for every constant-sum
game, but ``X_i = Y_i`` makes 0 reachable for many games that are not
constant-sum, so it is reported rather than trusted.
:func:`constant_sum_linear_oracle` decides the question exactly: the game is
constant-sum iff, for every player and every traceless direction ``D``, each
``M_l(D)`` is a multiple ``c_l I`` of the identity and ``sum_l c_l = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .game import (
    NetworkGame,
    apply_payoff_adjoint,
    apply_payoff_operator,
    total_sum,
    uniform_profile,
)
from .sdp import (
    ConicProgram,
    LinearEquality,
    MatrixInequality,
    linear_map_coeffs,
    solve,
    trace_row,
)

ORACLE_TOL = 1e-8
SDP_TOL = 1e-6


def recognition_map(game: NetworkGame, i: int, l: int, d) -> np.ndarray:
    """``(Phi_il^dagger + Phi_li)(D)``: how a change ``D`` of X_i moves W through neighbor l."""
    return apply_payoff_adjoint(game, i, l, d) + apply_payoff_operator(game, l, i, d)


def traceless_directions(dim: int) -> list[np.ndarray]:
    """:func:`~sdg.linalg.herm_basis` with the trace part removed and zero elements dropped."""
    out = []
    for b in linalg.herm_basis(dim):
        t = b - np.trace(b).real / dim * np.eye(dim)
        if np.linalg.norm(t) > 1e-12:
            out.append(t)
    return out


def assemble_recognition_sdp(game: NetworkGame, i: int) -> ConicProgram | None:
    """Recognition program of player ``i``; ``None`` for an isolated player (value 0)."""
    nb = game.neighbors[i]
    if not nb:
        return None
    d = game.dims[i]
    prog = ConicProgram((d, d), len(nb), np.zeros(2 * d * d + len(nb)))
    cons = []
    for f, l in enumerate(nb):
        prog.objective[prog.free_index(f)] = 1.0
        dl = game.dims[l]
        terms = [
            ("block", 0, lambda e, l=l: recognition_map(game, i, l, e)),
            ("block", 1, lambda e, l=l: -recognition_map(game, i, l, e)),
            ("free", f, -np.eye(dl)),
        ]
        cons.append(
            MatrixInequality(linear_map_coeffs(prog, dl, terms), np.zeros((dl, dl)), f"neighbor_{l}")
        )
    cons.append(LinearEquality(trace_row(prog, 0), 1.0, "trace_X"))
    cons.append(LinearEquality(trace_row(prog, 1), 1.0, "trace_Y"))
    prog.constraints = cons
    prog.labels = {"blocks": [f"X_{i}", f"Y_{i}"], "free": [f"w_{l}" for l in nb]}
    prog.__post_init__()
    return prog


def recognize_constant_sum_sdp(game: NetworkGame, tol: float = 1e-9) -> list[float]:
    """Optimal value of every player's recognition program (NaN on solver failure)."""
    values = []
    for i in range(game.n_players):
        prog = assemble_recognition_sdp(game, i)
        if prog is None:
            values.append(0.0)
            continue
        sol = solve(prog, tol)
        values.append(sol.primal_objective if sol.optimal else float("nan"))
    return values


@dataclass
class Witness:
    """A direction ``D`` of player ``i`` along which W changes, with two profiles showing it."""

    player: int
    neighbor: int
    direction: np.ndarray
    kind: str  # "not_scalar" or "nonzero_sum"
    profile_1: list = field(repr=False, default_factory=list)
    profile_2: list = field(repr=False, default_factory=list)
    difference: float = 0.0

    def to_dict(self) -> dict:
        from .io import encode_cmat

        return {
            "player": self.player,
            "neighbor": self.neighbor,
            "kind": self.kind,
            "direction": encode_cmat(self.direction),
            "profile_1": [encode_cmat(x) for x in self.profile_1],
            "profile_2": [encode_cmat(x) for x in self.profile_2],
            "difference": self.difference,
        }


@dataclass
class RecognitionResult:
    constant_sum: bool
    constant: float | None
    zero_sum: bool
    witness: Witness | None = None
    sdp_values: list[float] | None = None

    @property
    def oracle(self) -> str:
        return "constant_sum" if self.constant_sum else "not_constant_sum"

    def to_dict(self) -> dict:
        return {
            "sdp_values": None
            if self.sdp_values is None
            else [None if np.isnan(v) else v for v in self.sdp_values],
            "oracle": self.oracle,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "C": self.constant,
            "zero_sum": self.zero_sum,
        }


def _witness(game: NetworkGame, i: int, l: int, d: np.ndarray, kind: str) -> Witness:
    vals, vecs = np.linalg.eigh(d)
    pos = np.clip(vals, 0, None)
    t = pos.sum()
    x_i = (vecs * (pos / t)) @ vecs.conj().T
    y_i = (vecs * (np.clip(-vals, 0, None) / t)) @ vecs.conj().T
    base = uniform_profile(game)
    if kind == "not_scalar":
        # put neighbor l on an extreme eigenvector of M_l(D) so the non-scalar part shows
        m = recognition_map(game, i, l, d)
        mv, mvec = np.linalg.eigh(m)
        rest = sum(
            np.trace(recognition_map(game, i, k, d)).real / game.dims[k]
            for k in game.neighbors[i]
            if k != l
        )
        k = -1 if abs(mv[-1] + rest) >= abs(mv[0] + rest) else 0
        base[l] = linalg.pure_state(mvec[:, k])
    p1 = list(base)
    p2 = list(base)
    p1[i], p2[i] = x_i, y_i
    diff = total_sum(game, p1) - total_sum(game, p2)
    return Witness(i, l, d, kind, p1, p2, diff)


def constant_sum_linear_oracle(game: NetworkGame, tol: float = ORACLE_TOL) -> RecognitionResult:
    """Exact constant-sum test by linear algebra on a basis of traceless directions."""
    for i in range(game.n_players):
        nb = game.neighbors[i]
        for d in traceless_directions(game.dims[i]):
            total = 0.0
            for l in nb:
                m = recognition_map(game, i, l, d)
                c = np.trace(m).real / game.dims[l]
                if np.max(np.abs(m - c * np.eye(game.dims[l]))) > tol:
                    return RecognitionResult(False, None, False, _witness(game, i, l, d, "not_scalar"))
                total += c
            if abs(total) > tol:
                return RecognitionResult(False, None, False, _witness(game, i, nb[0], d, "nonzero_sum"))
    c = total_sum(game, uniform_profile(game))
    return RecognitionResult(True, c, abs(c) <= tol)


def is_zero_sum(game: NetworkGame, tol: float = ORACLE_TOL) -> bool:
    return constant_sum_linear_oracle(game, tol).zero_sum


def recognize(game: NetworkGame, with_sdp: bool = True) -> RecognitionResult:
    """Linear-oracle verdict, with the per-player recognition SDP values attached."""
    res = constant_sum_linear_oracle(game)
    if with_sdp:
        res.sdp_values = recognize_constant_sum_sdp(game)
    return res
