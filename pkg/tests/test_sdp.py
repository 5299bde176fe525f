import json
import time

import numpy as np
import pytest

from sdg import linalg
from sdg.equilibrium import certify_nash
from sdg.game import (
    NetworkGame,
    pairwise_zero_sum_random,
    phi_i,
    psi_apply,
    random_profile,
    security_game,
)
from sdg.sdp import (
    ConicProgram,
    ExtractionError,
    LinearEquality,
    MatrixInequality,
    assemble_equilibrium_dual,
    assemble_equilibrium_primal,
    extract_equilibrium,
    solve,
    solve_equilibrium,
    trace_row,
)

ZERO_SUM = [
    pytest.param(lambda: pairwise_zero_sum_random(5, [2, 3, 2, 3, 2], 0.6, seed=s), id=f"pairwise-{s}")
    for s in range(3)
] + [pytest.param(lambda: security_game(2, 2, 3), id="security")]


def _lambda_max_program(c):
    d = c.shape[0]
    prog = ConicProgram((d,), 0, linalg.herm_coords(c), sense="max")
    prog.constraints = [LinearEquality(trace_row(prog, 0), 1.0, "trace")]
    prog.__post_init__()
    return prog


def _eigen_bound_program(h):
    d = h.shape[0]
    # min t  s.t.  h - t I <= 0
    return ConicProgram(
        (), 1, np.array([1.0]),
        [MatrixInequality(-np.eye(d)[None].astype(complex), -h.astype(complex), "bound")],
    )


def test_lambda_max_program():
    sol = solve(_lambda_max_program(np.diag([1.0, 0.0])))
    assert sol.optimal
    assert sol.primal_objective == pytest.approx(1, abs=1e-7)
    assert np.allclose(sol.blocks[0], np.diag([1, 0]), atol=1e-6)


def test_eigenvalue_bound_program():
    sol = solve(_eigen_bound_program(np.diag([3.0, 1.0, -2.0])))
    assert sol.optimal
    assert sol.free[0] == pytest.approx(3, abs=1e-7)
    assert sol.dual_objective == pytest.approx(3, abs=1e-7)


def test_random_programs_close_the_gap(rng):
    for _ in range(5):
        c = linalg.random_hermitian(3, rng)
        sol = solve(_lambda_max_program(c))
        assert sol.optimal
        assert abs(sol.gap) <= 1e-6
        assert sol.primal_objective == pytest.approx(linalg.lambda_max(c), abs=1e-6)


def test_infeasible_and_unbounded_statuses():
    prog = ConicProgram((2,), 0, np.zeros(4))
    prog.constraints = [LinearEquality(trace_row(prog, 0), -1.0)]
    prog.__post_init__()
    assert solve(prog).status == "infeasible"
    # contradictory equalities make the system rank deficient; reported, not raised
    prog.constraints = [LinearEquality(trace_row(prog, 0), 1.0), LinearEquality(trace_row(prog, 0), 2.0)]
    sol = solve(prog)
    assert sol.status == "numerical_failure"
    assert np.isnan(sol.primal_objective)
    # min t with only an upper bound on t
    unb = ConicProgram((), 1, np.array([1.0]), [MatrixInequality(np.eye(2)[None].astype(complex), np.eye(2, dtype=complex))])
    assert solve(unb).status == "unbounded"


def test_max_iter_status():
    game = pairwise_zero_sum_random(4, 3, 1.0, seed=0)
    sol = solve(assemble_equilibrium_primal(game), max_iter=2)
    assert sol.status == "max_iter"
    assert not sol.optimal


def test_program_validation():
    with pytest.raises(ValueError):
        ConicProgram((2,), 0, np.zeros(3))
    with pytest.raises(ValueError):
        ConicProgram((2,), 0, np.zeros(4), sense="sideways")
    with pytest.raises(linalg.NotHermitianError):
        ConicProgram((), 1, np.ones(1), [MatrixInequality(np.triu(np.ones((2, 2)))[None], np.eye(2))])


def test_edgeless_game_has_value_zero():
    game = NetworkGame((2, 3))
    p = solve(assemble_equilibrium_primal(game))
    d = solve(assemble_equilibrium_dual(game))
    assert p.optimal and d.optimal
    assert p.primal_objective == pytest.approx(0, abs=1e-7)
    assert d.primal_objective == pytest.approx(0, abs=1e-7)


@pytest.mark.parametrize("make", ZERO_SUM)
def test_zero_sum_value_and_duality(make):
    game = make()
    res = solve_equilibrium(game)
    assert res.primal.optimal and res.dual.optimal
    assert abs(res.primal.primal_objective) <= 1e-6
    assert abs(res.primal.primal_objective - res.dual.primal_objective) <= 1e-6
    # weak duality of each solve (min form of the primal, max form of the dual)
    assert res.primal.primal_objective >= res.primal.dual_objective - 1e-8
    assert res.dual.primal_objective <= res.dual.dual_objective + 1e-8
    assert res.primal.primal_objective >= res.dual.primal_objective - 1e-8
    ok, rep = certify_nash(game, res.profile, tol=1e-5, zero_sum=True)
    assert ok, rep.to_dict()


@pytest.mark.parametrize("make", ZERO_SUM)
def test_dual_feasible_points_are_nonpositive(make, rng):
    game = make()
    sol = solve(assemble_equilibrium_dual(game))
    candidates = [[linalg.project_density(b) for b in sol.blocks]]
    candidates += [random_profile(game, rng) for _ in range(50)]
    for lam_blocks in candidates:
        # the largest feasible lambda_i for these Lambda blocks
        lam = [linalg.lambda_min(p) for p in psi_apply(game, lam_blocks)]
        assert sum(lam) <= 1e-9


@pytest.mark.parametrize("make", ZERO_SUM)
def test_primal_feasible_points_are_nonnegative(make, rng):
    game = make()
    for _ in range(50):
        x = random_profile(game, rng)
        assert sum(linalg.lambda_max(phi_i(game, i, x)) for i in range(game.n_players)) >= -1e-9


@pytest.mark.parametrize("assemble", [assemble_equilibrium_primal, assemble_equilibrium_dual])
def test_warm_starts_are_strictly_feasible(assemble):
    game = pairwise_zero_sum_random(4, [2, 3, 2, 3], 0.9, seed=4)
    prog = assemble(game)
    m = prog.feasibility_margins(prog.warm_start)
    assert min(m["blocks"]) > 0
    assert min(m["lmis"]) > 0
    assert m["equalities"] <= 1e-12


def test_solve_is_deterministic():
    game = pairwise_zero_sum_random(4, [2, 3, 2, 3], 0.9, seed=9)
    a = solve(assemble_equilibrium_primal(game))
    b = solve(assemble_equilibrium_primal(game))
    assert np.array_equal(a.z, b.z)
    assert a.primal_objective == b.primal_objective


def test_pennies_solves_to_uniform(pennies):
    start = time.perf_counter()
    res = solve_equilibrium(pennies)
    assert time.perf_counter() - start < 5
    for x in res.profile:
        assert np.allclose(x, np.eye(2) / 2, atol=1e-4)


def test_security_1_1_2_solves_to_uniform():
    res = solve_equilibrium(security_game(1, 1, 2))
    for x in res.profile:
        assert np.allclose(x, np.eye(2) / 2, atol=1e-4)


def test_extraction_rejects_non_zero_sum():
    game = security_game(2, 2, 3, normalize=False)
    sol = solve(assemble_equilibrium_primal(game))
    assert sol.optimal
    assert sol.primal_objective == pytest.approx(4, abs=1e-6)
    with pytest.raises(ExtractionError, match="not zero"):
        extract_equilibrium(game, sol)
    assert solve_equilibrium(game, with_dual=False).profile is None


def test_extraction_rejects_failed_solve():
    game = pairwise_zero_sum_random(4, 3, 1.0, seed=0)
    sol = solve(assemble_equilibrium_primal(game), max_iter=2)
    with pytest.raises(ExtractionError, match="status"):
        extract_equilibrium(game, sol)


def test_extracted_blocks_are_exact_densities():
    game = pairwise_zero_sum_random(5, 3, 0.7, seed=12)
    res = solve_equilibrium(game)
    raw = res.primal.blocks[: game.n_players]
    for x, r in zip(res.profile, raw):
        assert linalg.is_density(x, linalg.Tolerances(1e-12, 1e-12, 1e-12))
        assert np.linalg.norm(x - r) <= 1e-6


def test_program_dump_is_json():
    prog = assemble_equilibrium_primal(pairwise_zero_sum_random(3, 2, 1.0, seed=0))
    dump = json.loads(json.dumps(prog.to_dict()))
    assert dump["psd_blocks"] == [2, 2, 2]
    assert len(dump["constraints"]) == 6
    assert prog.labels["free"] == ["w_0", "w_1", "w_2"]
