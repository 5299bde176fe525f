"""Best responses, exploitability and Nash certification."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .game import NetworkGame, check_profile, phi_i

NASH_TOL = 1e-6


@dataclass(frozen=True)
class ExploitabilityReport:
    best_response_values: tuple[float, ...]
    exploitability: tuple[float, ...]
    payoffs: tuple[float, ...]
    tol: float
    zero_sum: bool = False

    @property
    def total_best_response(self) -> float:
        return float(sum(self.best_response_values))

    @property
    def total_exploitability(self) -> float:
        return float(sum(self.exploitability))

    @property
    def is_nash(self) -> bool:
        return self.total_exploitability <= self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(
            total_best_response=self.total_best_response,
            total_exploitability=self.total_exploitability,
            is_nash=self.is_nash,
        )
        return d


def best_response_value(game: NetworkGame, i: int, profile) -> float:
    """``w_i = lambda_max(Phi_i(X_N(i)))``, the best payoff player ``i`` can reach."""
    return linalg.lambda_max(phi_i(game, i, profile))


def best_response(game: NetworkGame, i: int, profile) -> np.ndarray:
    """Pure state on a top eigenvector of ``Phi_i(X_N(i))``."""
    _, vecs = linalg.eig_herm(phi_i(game, i, profile), tol=1e-8)
    return linalg.pure_state(vecs[:, 0])


def exploitability(
    game: NetworkGame, profile, tol: float = NASH_TOL, zero_sum: bool = False
) -> ExploitabilityReport:
    profile = check_profile(game, profile, density=False)
    w, e, p = [], [], []
    for i in range(game.n_players):
        m = phi_i(game, i, profile)
        wi = linalg.lambda_max(m)
        pi = linalg.inner(profile[i], m)
        w.append(wi)
        p.append(pi)
        e.append(wi - pi)
    return ExploitabilityReport(tuple(w), tuple(e), tuple(p), tol, zero_sum)


def certify_nash(
    game: NetworkGame, profile, tol: float = NASH_TOL, zero_sum: bool = False
) -> tuple[bool, ExploitabilityReport]:
    """Certify ``profile`` as a Nash equilibrium via ``sum_i e_i <= tol``.

    For zero-sum games the identity ``sum e_i = sum w_i`` is also required.
    """
    check_profile(game, profile)
    rep = exploitability(game, profile, tol, zero_sum)
    ok = rep.is_nash
    if zero_sum:
        ok = ok and abs(rep.total_best_response - rep.total_exploitability) <= 1e-9
    return ok, rep
