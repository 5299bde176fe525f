"""Matrix multiplicative weights self-play.

Every player keeps the running sum of the payoff matrices ``Phi_i(X^(s))`` it
has faced and plays the Gibbs state ``exp(eta * sum) / tr(...)``.  The time
average of the iterates approaches a Nash equilibrium in zero-sum games,
which makes this an optimization-free cross-check of the conic route.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .game import NetworkGame

# step 1/sqrt(t); used by the CLI and by the cross-check against the conic route
CROSS_CHECK = {"eta": 1.0, "schedule": "sqrt"}


def game_operator_matrix(game: NetworkGame) -> tuple[np.ndarray, list[slice]]:
    """Complex matrix of the game operator on row-major vectorized strategies."""
    sizes = [d * d for d in game.dims]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    sl = [slice(offs[k], offs[k + 1]) for k in range(game.n_players)]
    m = np.zeros((offs[-1], offs[-1]), dtype=complex)
    for (a, b), t in game._tensors.items():
        da, db = game.dims[a], game.dims[b]
        # Phi_ab(Y)[p, q] = sum_{r,s} R[p, r, q, s] Y[s, r]
        m[sl[a], sl[b]] += t.transpose(0, 2, 3, 1).reshape(da * da, db * db)
    return m, sl


def _gibbs_batch(h: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    w = np.exp(vals - vals[:, -1:])
    w /= w.sum(axis=1, keepdims=True)
    return np.einsum("kab,kb,kcb->kac", vecs, w, vecs.conj())


def mmw_selfplay(
    game: NetworkGame,
    eta: float = 0.1,
    n_iters: int = 1000,
    schedule: str = "constant",
    optimistic: bool = False,
) -> list[np.ndarray]:
    """Uniform time average of ``n_iters`` simultaneous MMW iterates.

    Args:
        game: the game; a constant shift of the payoffs does not change the
            iterates, so shifted and unshifted games behave identically.
        eta: step size, or its scale for ``schedule="sqrt"`` (``eta / sqrt(t)``).
        n_iters: number of iterates averaged, starting from the uniform profile.
        schedule: ``"constant"`` or ``"sqrt"``.
        optimistic: count the latest payoff matrix twice (optimistic MMW).
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    if schedule not in ("constant", "sqrt"):
        raise ValueError(f"unknown schedule {schedule!r}")

    op, sl = game_operator_matrix(game)
    groups = {}
    for i, d in enumerate(game.dims):
        groups.setdefault(d, []).append(i)

    x = np.concatenate([(np.eye(d, dtype=complex) / d).ravel() for d in game.dims])
    cum = np.zeros_like(x)
    avg = np.zeros_like(x)
    for t in range(1, n_iters + 1):
        avg += x
        if t == n_iters:
            break
        grad = op @ x
        cum += grad
        step = eta if schedule == "constant" else eta / np.sqrt(t)
        s = step * (cum + grad if optimistic else cum)
        for d, players in groups.items():
            h = np.array([s[sl[i]].reshape(d, d) for i in players])
            h = (h + h.conj().transpose(0, 2, 1)) / 2
            for i, g in zip(players, _gibbs_batch(h)):
                x[sl[i]] = g.ravel()
    avg /= n_iters
    return [
        linalg.project_density(avg[sl[i]].reshape(d, d)) for i, d in enumerate(game.dims)
    ]
