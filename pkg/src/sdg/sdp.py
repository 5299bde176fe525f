"""Standard-form conic programs over Hermitian PSD blocks and free scalars.

A :class:`ConicProgram` works on one real variable vector ``z``: the
:func:`~sdg.linalg.herm_basis` coordinates of each PSD block (``d^2`` reals per
block, in block order) followed by the free scalars.  Constraints are linear
equalities ``a . z = b`` and linear matrix inequalities
``sum_k z_k G_k <= H`` with Hermitian ``G_k``, ``H``.

Solving goes through cvxopt's dense primal-dual interior-point method on the
real symmetric embedding of each Hermitian block.  The status returned is
decided by re-checking feasibility and the duality gap here, never taken on
trust from the backend.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import cvxopt
import cvxopt.solvers
import numpy as np

from . import linalg
from .game import (
    NetworkGame,
    apply_payoff_adjoint,
    apply_payoff_operator,
    phi_i,
    psi_apply,
    uniform_profile,
)

log = logging.getLogger(__name__)

FEAS_TOL = 1e-7
GAP_TOL = 1e-6
MAX_ITER = 200

STATUSES = ("optimal", "infeasible", "unbounded", "max_iter", "numerical_failure")


@dataclass
class LinearEquality:
    coeffs: np.ndarray
    rhs: float
    name: str = ""


@dataclass
class MatrixInequality:
    """``sum_k z_k coeffs[k] <= rhs`` in the Loewner order."""

    coeffs: np.ndarray
    rhs: np.ndarray
    name: str = ""

    @property
    def size(self) -> int:
        return self.rhs.shape[0]

    def lhs(self, z) -> np.ndarray:
        return np.einsum("k,kab->ab", z, self.coeffs)

    def slack(self, z) -> np.ndarray:
        return self.rhs - self.lhs(z)


@dataclass
class ConicProgram:
    psd_blocks: tuple[int, ...]
    n_free: int
    objective: np.ndarray
    constraints: list = field(default_factory=list)
    sense: str = "min"
    warm_start: np.ndarray | None = None
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.psd_blocks = tuple(int(d) for d in self.psd_blocks)
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        n = self.n_vars
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (n,):
            raise ValueError(f"objective has shape {self.objective.shape}, expected ({n},)")
        for c in self.constraints:
            if isinstance(c, LinearEquality):
                if np.shape(c.coeffs) != (n,):
                    raise ValueError(f"equality {c.name!r} has wrong length")
            elif isinstance(c, MatrixInequality):
                m = c.size
                if c.coeffs.shape != (n, m, m):
                    raise ValueError(f"LMI {c.name!r} has coefficient shape {c.coeffs.shape}")
                linalg.check_hermitian(c.rhs, what=f"LMI {c.name!r} rhs")
                for k in range(n):
                    linalg.check_hermitian(c.coeffs[k], what=f"LMI {c.name!r} coefficient {k}")
            else:
                raise TypeError(f"unknown constraint type {type(c).__name__}")

    @property
    def offsets(self) -> list[int]:
        out, k = [], 0
        for d in self.psd_blocks:
            out.append(k)
            k += d * d
        return out

    @property
    def n_vars(self) -> int:
        return sum(d * d for d in self.psd_blocks) + self.n_free

    def free_index(self, f: int) -> int:
        return sum(d * d for d in self.psd_blocks) + f

    def block_slice(self, k: int) -> slice:
        o = self.offsets[k]
        return slice(o, o + self.psd_blocks[k] ** 2)

    def unpack(self, z) -> tuple[list[np.ndarray], np.ndarray]:
        z = np.asarray(z, dtype=float)
        blocks = [
            linalg.from_herm_coords(z[self.block_slice(k)], d)
            for k, d in enumerate(self.psd_blocks)
        ]
        return blocks, z[self.free_index(0):].copy()

    def pack(self, blocks, free) -> np.ndarray:
        parts = [linalg.herm_coords(b) for b in blocks]
        parts.append(np.asarray(free, dtype=float))
        return np.concatenate(parts)

    def value(self, z) -> float:
        return float(self.objective @ np.asarray(z, dtype=float))

    def feasibility_margins(self, z) -> dict:
        """Smallest eigenvalue of every cone slack and largest equality residual."""
        blocks, _ = self.unpack(z)
        return {
            "blocks": [linalg.lambda_min(b) for b in blocks],
            "lmis": [
                linalg.lambda_min(c.slack(z))
                for c in self.constraints
                if isinstance(c, MatrixInequality)
            ],
            "equalities": max(
                (
                    abs(float(c.coeffs @ z) - c.rhs)
                    for c in self.constraints
                    if isinstance(c, LinearEquality)
                ),
                default=0.0,
            ),
        }

    def to_dict(self) -> dict:
        """JSON-ready dump for diffing against other solvers."""
        from .io import encode_cmat

        cons = []
        for c in self.constraints:
            if isinstance(c, LinearEquality):
                cons.append(
                    {"type": "eq", "name": c.name, "coeffs": c.coeffs.tolist(), "rhs": c.rhs}
                )
            else:
                cons.append(
                    {
                        "type": "lmi",
                        "name": c.name,
                        "coeffs": [encode_cmat(g) for g in c.coeffs],
                        "rhs": encode_cmat(c.rhs),
                    }
                )
        return {
            "sense": self.sense,
            "psd_blocks": list(self.psd_blocks),
            "n_free": self.n_free,
            "variable_basis": "herm_basis coordinates per block, then free scalars",
            "objective": self.objective.tolist(),
            "constraints": cons,
        }


@dataclass
class ConicSolution:
    status: str
    z: np.ndarray
    blocks: list[np.ndarray]
    free: np.ndarray
    dual_values: list
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    iterations: int = 0
    backend_status: str = ""

    @property
    def gap(self) -> float:
        return self.primal_objective - self.dual_objective

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def linear_map_coeffs(program: ConicProgram, size: int, terms) -> np.ndarray:
    """LMI coefficients from ``terms``.

    Each term is ``("block", k, func)`` with ``func`` a linear map from block
    ``k`` to ``size x size`` Hermitian matrices (expanded on the block's basis),
    or ``("free", f, matrix)``.
    """
    g = np.zeros((program.n_vars, size, size), dtype=complex)
    for kind, k, what in terms:
        if kind == "block":
            o = program.offsets[k]
            for b, e in enumerate(linalg.herm_basis(program.psd_blocks[k])):
                g[o + b] += what(e)
        elif kind == "free":
            g[program.free_index(k)] += what
        else:
            raise ValueError(f"unknown term kind {kind!r}")
    return g


def trace_row(program: ConicProgram, k: int) -> np.ndarray:
    a = np.zeros(program.n_vars)
    d = program.psd_blocks[k]
    a[program.offsets[k]: program.offsets[k] + d] = 1.0  # diagonal units come first
    return a


def _cvx(a) -> cvxopt.matrix:
    return cvxopt.matrix(np.ascontiguousarray(a, dtype=float))


def solve(program: ConicProgram, tol: float = 1e-9, max_iter: int = MAX_ITER) -> ConicSolution:
    """Solve ``program`` and certify the result.

    ``tol`` is the backend's stopping tolerance; ``status == "optimal"`` is
    granted only if primal and dual residuals are at most 1e-7 and the gap at
    most ``1e-6 (1 + |primal objective|)``.
    """
    n = program.n_vars
    sign = 1.0 if program.sense == "min" else -1.0
    c = sign * program.objective

    lmis = [x for x in program.constraints if isinstance(x, MatrixInequality)]
    eqs = [x for x in program.constraints if isinstance(x, LinearEquality)]

    gs, hs = [], []
    for k, d in enumerate(program.psd_blocks):
        g = np.zeros((4 * d * d, n))
        o = program.offsets[k]
        for b, e in enumerate(linalg.herm_basis(d)):
            g[:, o + b] = -linalg.real_embed(e).ravel(order="F")
        gs.append(_cvx(g))
        hs.append(_cvx(np.zeros((2 * d, 2 * d))))
    for lmi in lmis:
        m = lmi.size
        g = np.zeros((4 * m * m, n))
        for k in range(n):
            if np.any(lmi.coeffs[k]):
                g[:, k] = linalg.real_embed(lmi.coeffs[k]).ravel(order="F")
        gs.append(_cvx(g))
        hs.append(_cvx(linalg.real_embed(lmi.rhs)))
    kwargs = {}
    if eqs:
        kwargs["A"] = _cvx(np.array([e.coeffs for e in eqs]))
        kwargs["b"] = _cvx(np.array([e.rhs for e in eqs]))

    options = {
        "show_progress": False,
        "maxiters": int(max_iter),
        "abstol": tol,
        "reltol": tol,
        "feastol": tol,
    }
    try:
        res = cvxopt.solvers.sdp(_cvx(c), Gs=gs, hs=hs, options=options, **kwargs)
    except (ArithmeticError, ValueError) as exc:
        log.warning("conic backend failed: %s", exc)
        return _failed(program, "numerical_failure", str(exc))
    backend = res["status"]
    if backend in ("primal infeasible", "dual infeasible"):
        status = "infeasible" if backend == "primal infeasible" else "unbounded"
        return _failed(program, status, backend)
    if res["x"] is None:
        return _failed(program, "numerical_failure", backend)

    z = np.array(res["x"]).ravel()
    y = np.array(res["y"]).ravel() if eqs else np.zeros(0)
    nb = len(program.psd_blocks)
    zs = [np.array(m) for m in res["zs"]]
    block_duals = [linalg.real_unembed_dual(m) for m in zs[:nb]]
    lmi_duals = [linalg.real_unembed_dual(m) for m in zs[nb:]]

    # residuals in the internal min form: c + sum_l G_l^T Lam_l - sum_k S_k + A^T y = 0
    r = c.copy()
    for lmi, lam in zip(lmis, lmi_duals):
        r += np.einsum("kab,ab->k", lmi.coeffs.conj(), lam).real
    for k, s in enumerate(block_duals):
        r[program.block_slice(k)] -= linalg.herm_coords(s)
    for e, yy in zip(eqs, y):
        r += yy * e.coeffs
    dual_cone = max(
        [0.0] + [-linalg.lambda_min(m) for m in block_duals + lmi_duals]
    )
    dual_res = max(float(np.max(np.abs(r), initial=0.0)), dual_cone)

    m = program.feasibility_margins(z)
    primal_res = max(
        [m["equalities"], 0.0]
        + [-x for x in m["blocks"]]
        + [-x for x in m["lmis"]]
    )

    pobj = float(c @ z)
    dobj = -sum(linalg.inner(lmi.rhs, lam) for lmi, lam in zip(lmis, lmi_duals))
    dobj -= sum(e.rhs * yy for e, yy in zip(eqs, y))

    if (
        primal_res <= FEAS_TOL
        and dual_res <= FEAS_TOL
        and abs(pobj - dobj) <= GAP_TOL * (1 + abs(pobj))
    ):
        status = "optimal"
    elif res.get("iterations", 0) >= max_iter:
        status = "max_iter"
    else:
        status = "numerical_failure"

    duals: list = []
    it_l, it_y = iter(lmi_duals), iter(y)
    for con in program.constraints:
        duals.append(next(it_l) if isinstance(con, MatrixInequality) else float(next(it_y)))

    blocks, free = program.unpack(z)
    return ConicSolution(
        status=status,
        z=z,
        blocks=blocks,
        free=free,
        dual_values=duals,
        primal_objective=sign * pobj,
        dual_objective=sign * dobj,
        primal_residual=primal_res,
        dual_residual=dual_res,
        iterations=int(res.get("iterations", 0)),
        backend_status=backend,
    )


def _failed(program: ConicProgram, status: str, why: str) -> ConicSolution:
    z = np.full(program.n_vars, np.nan)
    blocks, free = program.unpack(z)
    return ConicSolution(
        status, z, blocks, free, [], np.nan, np.nan, np.inf, np.inf, backend_status=why
    )


def assemble_equilibrium_primal(game: NetworkGame) -> ConicProgram:
    """min sum w_i  s.t.  Phi_i(X_N(i)) <= w_i I,  tr X_i = 1,  X_i >= 0."""
    n = game.n_players
    prog = ConicProgram(game.dims, n, np.zeros(sum(d * d for d in game.dims) + n))
    for i in range(n):
        prog.objective[prog.free_index(i)] = 1.0
    cons = []
    for i, d in enumerate(game.dims):
        terms = [
            ("block", j, lambda e, i=i, j=j: apply_payoff_operator(game, i, j, e))
            for j in game.neighbors[i]
        ]
        terms.append(("free", i, -np.eye(d)))
        cons.append(
            MatrixInequality(linear_map_coeffs(prog, d, terms), np.zeros((d, d)), f"best_response_{i}")
        )
    for i in range(n):
        cons.append(LinearEquality(trace_row(prog, i), 1.0, f"trace_{i}"))
    prog.constraints = cons

    x0 = uniform_profile(game)
    w0 = [linalg.lambda_max(phi_i(game, i, x0)) + 1.0 for i in range(n)]
    prog.warm_start = prog.pack(x0, w0)
    prog.labels = {"blocks": [f"X_{i}" for i in range(n)], "free": [f"w_{i}" for i in range(n)]}
    prog.__post_init__()
    return prog


def assemble_equilibrium_dual(game: NetworkGame) -> ConicProgram:
    """max sum lambda_i  s.t.  lambda_i I <= Psi_i(Lambda),  tr Lambda_i = 1,  Lambda_i >= 0."""
    n = game.n_players
    prog = ConicProgram(
        game.dims, n, np.zeros(sum(d * d for d in game.dims) + n), sense="max"
    )
    for i in range(n):
        prog.objective[prog.free_index(i)] = 1.0
    cons = []
    for i, d in enumerate(game.dims):
        terms = [
            ("block", j, lambda e, i=i, j=j: -apply_payoff_adjoint(game, j, i, e))
            for j in game.neighbors[i]
        ]
        terms.append(("free", i, np.eye(d)))
        cons.append(
            MatrixInequality(linear_map_coeffs(prog, d, terms), np.zeros((d, d)), f"dual_lmi_{i}")
        )
    for i in range(n):
        cons.append(LinearEquality(trace_row(prog, i), 1.0, f"trace_{i}"))
    prog.constraints = cons

    lam0 = uniform_profile(game)
    psi = psi_apply(game, lam0)
    prog.warm_start = prog.pack(lam0, [linalg.lambda_min(p) - 1.0 for p in psi])
    prog.labels = {
        "blocks": [f"Lambda_{i}" for i in range(n)],
        "free": [f"lambda_{i}" for i in range(n)],
    }
    prog.__post_init__()
    return prog


class ExtractionError(ValueError):
    pass


def extract_equilibrium(game: NetworkGame, solution: ConicSolution, tol: float = 1e-6) -> list[np.ndarray]:
    """Strategy blocks of an optimal primal solution, repaired into exact densities."""
    if not solution.optimal:
        raise ExtractionError(f"solution status is {solution.status!r}, not optimal")
    if abs(solution.primal_objective) > tol:
        raise ExtractionError(
            f"optimal value {solution.primal_objective:.3g} is not zero; "
            "the game is not zero-sum or the solve is inaccurate"
        )
    blocks = solution.blocks[: game.n_players]
    return [linalg.project_density(b) for b in blocks]


@dataclass
class EquilibriumResult:
    profile: list[np.ndarray] | None
    primal: ConicSolution
    dual: ConicSolution | None = None


def solve_equilibrium(
    game: NetworkGame, tol: float = 1e-9, max_iter: int = MAX_ITER, with_dual: bool = True
) -> EquilibriumResult:
    """Assemble and solve the equilibrium program (and optionally its dual)."""
    primal = solve(assemble_equilibrium_primal(game), tol, max_iter)
    dual = solve(assemble_equilibrium_dual(game), tol, max_iter) if with_dual else None
    try:
        profile = extract_equilibrium(game, primal)
    except ExtractionError as exc:
        log.info("no equilibrium extracted: %s", exc)
        profile = None
    return EquilibriumResult(profile, primal, dual)
