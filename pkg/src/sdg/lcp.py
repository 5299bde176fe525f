"""Semidefinite linear complementarity instances built from games.

An instance asks for block-diagonal ``X >= 0`` with ``L(X) + Q >= 0`` and
``<X, L(X) + Q> = 0``.  Two constructions are provided.

``form="scaled"``
    One block per non-isolated player, ``L(X)_i = -Phi_i(X)`` and
    ``Q_i = I``, paired with the maps ``X_i -> X_i / lambda_i`` (from KKT
    data) and ``X_i -> X_i / tr X_i`` (back).  The two maps are exact inverses
    of each other, but the forward image of a Nash equilibrium solves the
    complementarity system only when all multipliers ``lambda_i`` of a
    connected component coincide, because block ``i`` sees each neighbor
    scaled by the neighbor's own multiplier.

``form="lifted"``
    Each player ``i`` gets its block ``X_i`` plus a 1x1 block ``s_i`` with
    ``L(X, s)_i = (s_i I - Phi_i(X)) (+) tr X_i`` and ``Q_i = 0 (+) -1``.
    On a game whose payoff matrices are all >= I, every solution has
    ``s_i > 0`` and ``tr X_i = 1``, and solutions are exactly the pairs
    ``(profile, lambda)`` satisfying the best-response KKT conditions.

Both constructions shift the game first (:func:`~sdg.game.cp_shift`) unless
told otherwise; Nash equilibria are unchanged by the shift.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .game import NetworkGame, cp_shift, phi_i, uniform_profile

LCP_TOL = 1e-6


class LcpError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SdpLcpInstance:
    game: NetworkGame  # the (shifted) game the instance encodes
    players: tuple[int, ...]  # non-isolated players, in block order
    block_dims: tuple[int, ...]
    L: np.ndarray  # real matrix of L on concatenated herm_basis coordinates
    Q: tuple[np.ndarray, ...]
    form: str = "scaled"
    shift: float = 0.0

    @property
    def offsets(self) -> list[int]:
        return list(np.concatenate([[0], np.cumsum([d * d for d in self.block_dims])]).astype(int))

    def pack(self, blocks) -> np.ndarray:
        if len(blocks) != len(self.block_dims):
            raise LcpError(f"expected {len(self.block_dims)} blocks, got {len(blocks)}")
        parts = []
        for k, (b, d) in enumerate(zip(blocks, self.block_dims)):
            b = linalg.as_matrix(b)
            if b.shape[0] != d:
                raise LcpError(f"block {k} has size {b.shape[0]}, expected {d}")
            parts.append(linalg.herm_coords(b))
        return np.concatenate(parts)

    def unpack(self, v) -> list[np.ndarray]:
        o = self.offsets
        return [
            linalg.from_herm_coords(v[o[k]: o[k + 1]], d) for k, d in enumerate(self.block_dims)
        ]

    def apply_L(self, blocks) -> list[np.ndarray]:
        return self.unpack(self.L @ self.pack(blocks))

    def summary(self) -> dict:
        from .io import digest

        return {
            "form": self.form,
            "players": list(self.players),
            "block_dims": list(self.block_dims),
            "shift": self.shift,
            "L_shape": list(self.L.shape),
            "L_digest": digest(np.ascontiguousarray(np.round(self.L, 12)).tobytes()),
        }


@dataclass(frozen=True)
class LcpResiduals:
    lambda_min_x: tuple[float, ...]
    lambda_min_w: tuple[float, ...]
    complementarity: tuple[float, ...]
    tol: float = LCP_TOL
    trivial: bool = False

    @property
    def max_violation(self) -> float:
        return max(
            [0.0]
            + [-v for v in self.lambda_min_x]
            + [-v for v in self.lambda_min_w]
            + [abs(v) for v in self.complementarity]
        )

    @property
    def accepted(self) -> bool:
        return self.max_violation <= self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(max_violation=self.max_violation, accepted=self.accepted)
        return d


def _active_players(game: NetworkGame) -> tuple[int, ...]:
    players = tuple(i for i in range(game.n_players) if game.degree(i) > 0)
    if not players:
        raise LcpError("every player is isolated; there is nothing to encode")
    return players


def _phi_on_blocks(game: NetworkGame, players, xs) -> list[np.ndarray]:
    full = {p: x for p, x in zip(players, xs)}
    return [phi_i(game, p, full) for p in players]


def build_lcp(game: NetworkGame, form: str = "scaled", shift: bool = True) -> SdpLcpInstance:
    """Complementarity instance of ``game`` (shifted to payoff matrices >= I by default)."""
    if form not in ("scaled", "lifted"):
        raise ValueError(f"unknown LCP form {form!r}")
    c = 0.0
    if shift:
        game, c = cp_shift(game)
    players = _active_players(game)
    pdims = tuple(game.dims[p] for p in players)
    if form == "scaled":
        dims = pdims
    else:
        dims = tuple(x for d in pdims for x in (d, 1))

    def raw_L(blocks):
        if form == "scaled":
            return [-m for m in _phi_on_blocks(game, players, blocks)]
        xs, ss = blocks[0::2], blocks[1::2]
        phis = _phi_on_blocks(game, players, xs)
        out = []
        for x, s, m in zip(xs, ss, phis):
            out.append(s[0, 0] * np.eye(x.shape[0]) - m)
            out.append(np.array([[np.trace(x)]]))
        return out

    cols = []
    for k, d in enumerate(dims):
        for e in linalg.herm_basis(d):
            blocks = [np.zeros((dd, dd), dtype=complex) for dd in dims]
            blocks[k] = e
            out = raw_L(blocks)
            parts = []
            for j, o in enumerate(out):
                linalg.check_hermitian(o, tol=1e-10, what=f"L(basis) block {j}")
                parts.append(linalg.herm_coords(o))
            cols.append(np.concatenate(parts))
    L = np.array(cols).T
    if form == "scaled":
        Q = tuple(np.eye(d, dtype=complex) for d in dims)
    else:
        Q = tuple(
            np.zeros((d, d), dtype=complex) if d_k % 2 == 0 else -np.ones((1, 1), dtype=complex)
            for d_k, d in enumerate(dims)
        )
    return SdpLcpInstance(game, players, dims, L, Q, form, c)


def verify_lcp(instance: SdpLcpInstance, blocks, tol: float = LCP_TOL) -> LcpResiduals:
    """Residuals of ``X >= 0``, ``L(X) + Q >= 0`` and ``<X_k, (L(X) + Q)_k> = 0`` per block."""
    blocks = [linalg.as_matrix(b) for b in blocks]
    lx = instance.apply_L(blocks)
    w = [a + q for a, q in zip(lx, instance.Q)]
    trivial = all(np.max(np.abs(b)) == 0 for b in blocks)
    return LcpResiduals(
        tuple(linalg.lambda_min(b) for b in blocks),
        tuple(linalg.lambda_min(m) for m in w),
        tuple(linalg.inner(b, m) for b, m in zip(blocks, w)),
        tol,
        trivial,
    )


def kkt_residuals(game: NetworkGame, profile, lam) -> dict:
    """Violations of the best-response KKT system for ``(profile, lambda)``."""
    psd, dual, trace, comp = [], [], [], []
    for i, (x, l) in enumerate(zip(profile, lam)):
        z = l * np.eye(game.dims[i]) - phi_i(game, i, profile)
        psd.append(max(0.0, -linalg.lambda_min(x)))
        dual.append(max(0.0, -linalg.lambda_min(z)))
        trace.append(abs(np.trace(x).real - 1.0))
        comp.append(abs(linalg.inner(x, z)))
    out = {"psd": psd, "dual": dual, "trace": trace, "complementarity": comp}
    out["max"] = max(max(v) for v in out.values())
    return out


def _check_kkt(game, profile, lam, tol):
    res = kkt_residuals(game, profile, lam)
    if res["max"] > tol:
        raise LcpError(f"(profile, lambda) violates the KKT system by {res['max']:.3g}")


def kkt_to_lcp(game: NetworkGame, profile, lam, tol: float = LCP_TOL, form: str = "scaled"):
    """Map a KKT pair of ``game`` to LCP blocks.

    ``game`` must be the game the instance encodes (``instance.game``).  The
    scaled form returns ``X_i / lambda_i`` for each non-isolated player; the
    lifted form returns ``X_i`` interleaved with ``[[lambda_i]]``.
    """
    _check_kkt(game, profile, lam, tol)
    players = _active_players(game)
    out = []
    for p in players:
        if form == "lifted":
            out.extend([linalg.as_matrix(profile[p]), np.array([[lam[p]]], dtype=complex)])
            continue
        if lam[p] <= 1e-12:
            raise LcpError(
                f"multiplier of player {p} is {lam[p]:.3g}; the payoff operators are not "
                "strictly positive (apply cp_shift first)"
            )
        out.append(linalg.as_matrix(profile[p]) / lam[p])
    return out


def lcp_to_kkt(instance: SdpLcpInstance, blocks, tol: float = LCP_TOL):
    """Map an accepted LCP solution back to ``(profile, lambda)`` of ``instance.game``.

    Isolated players receive the uniform strategy and multiplier 0.
    """
    res = verify_lcp(instance, blocks, tol)
    if not res.accepted:
        raise LcpError(f"blocks are not an LCP solution (violation {res.max_violation:.3g})")
    game = instance.game
    profile = uniform_profile(game)
    lam = [0.0] * game.n_players
    if instance.form == "lifted":
        for p, x, s in zip(instance.players, blocks[0::2], blocks[1::2]):
            profile[p] = linalg.project_density(x)
            lam[p] = float(np.real(s[0, 0]))
        return profile, lam
    for p, x in zip(instance.players, blocks):
        x = linalg.as_matrix(x)
        tr = np.trace(x).real
        if tr <= 1e-9:
            raise LcpError(
                f"block of player {p} has trace {tr:.3g}; zero-trace solutions "
                "(such as the trivial X = 0) have no equilibrium meaning"
            )
        profile[p] = linalg.project_density(x / tr)
        lam[p] = 1.0 / tr
    return profile, lam
