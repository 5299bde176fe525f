"""Semidefinite network games: density-matrix strategies on a graph of pairwise games."""

from .equilibrium import certify_nash, exploitability
from .game import NetworkGame, cp_shift, pairwise_zero_sum_random
from .lcp import build_lcp, kkt_to_lcp, lcp_to_kkt, verify_lcp
from .mmw import mmw_selfplay
from .recognizer import recognize
from .sdp import solve_equilibrium

__all__ = [
    "NetworkGame",
    "build_lcp",
    "certify_nash",
    "cp_shift",
    "exploitability",
    "kkt_to_lcp",
    "lcp_to_kkt",
    "mmw_selfplay",
    "pairwise_zero_sum_random",
    "recognize",
    "solve_equilibrium",
    "verify_lcp",
]
