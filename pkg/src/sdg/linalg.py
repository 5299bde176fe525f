"""Dense complex Hermitian matrix algebra.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Tensor products
use the lexicographic order of :func:`numpy.kron`: the first factor is the
outer (slow) index.  A superoperator ``Phi: L(A) -> L(B)`` is stored through
its Choi matrix ``J = sum_ij Phi(E_ij) (x) E_ij`` acting on ``B (x) A``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Validation thresholds shared by every module."""

    herm: float = 1e-9  # max |a_jk - conj(a_kj)|
    psd: float = 1e-9  # eigenvalues >= -psd
    trace: float = 1e-9  # |tr - 1| for densities


TOL = Tolerances()


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a, tol: float = TOL.herm) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(
        np.all(np.abs(a - a.conj().T) <= tol)
    )


def check_hermitian(a, tol: float = TOL.herm, what: str = "matrix") -> np.ndarray:
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        err = np.max(np.abs(a - a.conj().T))
        raise NotHermitianError(f"{what} is not Hermitian (asymmetry {err:.3g})")
    return a


def is_psd(a, tol: float = TOL.psd) -> bool:
    return bool(np.linalg.eigvalsh(as_matrix(a))[0] >= -tol)


def is_density(a, tol: Tolerances = TOL) -> bool:
    a = np.asarray(a)
    if not is_hermitian(a, tol.herm):
        return False
    return is_psd(a, tol.psd) and abs(np.trace(a).real - 1.0) <= tol.trace


def check_density(a, tol: Tolerances = TOL, what: str = "strategy") -> np.ndarray:
    a = check_hermitian(a, tol.herm, what)
    lmin = np.linalg.eigvalsh(a)[0]
    if lmin < -tol.psd:
        raise ValueError(f"{what} is not PSD (min eigenvalue {lmin:.3g})")
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol.trace:
        raise ValueError(f"{what} does not have unit trace (trace {tr:.12g})")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def inner(a, b) -> float:
    """Frobenius product ``tr(a^dagger b)``, real part only."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.vdot(a, b).real)


def eig_herm(a, tol: float = TOL.herm) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""
    a = check_hermitian(a, tol)
    vals, vecs = np.linalg.eigh(a)
    return vals[::-1], vecs[:, ::-1]


def lambda_max(a) -> float:
    return float(np.linalg.eigvalsh(as_matrix(a))[-1])


def lambda_min(a) -> float:
    return float(np.linalg.eigvalsh(as_matrix(a))[0])


def _split(m, dim_a: int, dim_b: int) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != dim_a * dim_b:
        raise DimensionError(
            f"matrix of size {m.shape[0]} is not on a {dim_a}x{dim_b} product space"
        )
    return m.reshape(dim_a, dim_b, dim_a, dim_b)


def partial_trace_first(m, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the first factor of ``A (x) B``."""
    return np.einsum("ajak->jk", _split(m, dim_a, dim_b))


def partial_trace_second(m, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the second factor of ``A (x) B``."""
    return np.einsum("ajbj->ab", _split(m, dim_a, dim_b))


def partial_trace_adjoint(b, dim_a: int) -> np.ndarray:
    """``I_A (x) b``."""
    return kron(np.eye(dim_a), as_matrix(b))


def partial_transpose_second(m, dim_a: int, dim_b: int) -> np.ndarray:
    t = _split(m, dim_a, dim_b).transpose(0, 3, 2, 1)
    return t.reshape(dim_a * dim_b, dim_a * dim_b)


def swap_factors(m, dim_a: int, dim_b: int) -> np.ndarray:
    """Move ``m`` on ``A (x) B`` to ``B (x) A``."""
    t = _split(m, dim_a, dim_b).transpose(1, 0, 3, 2)
    return t.reshape(dim_a * dim_b, dim_a * dim_b)


@functools.lru_cache(maxsize=None)
def _herm_basis(dim: int) -> tuple[np.ndarray, ...]:
    out = []
    for k in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[k, k] = 1.0
        out.append(e)
    s = 1.0 / np.sqrt(2.0)
    for j in range(dim):
        for k in range(j + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[j, k] = e[k, j] = s
            out.append(e)
            e = np.zeros((dim, dim), dtype=complex)
            e[j, k] = 1j * s
            e[k, j] = -1j * s
            out.append(e)
    for e in out:
        e.setflags(write=False)
    return tuple(out)


def herm_basis(dim: int) -> list[np.ndarray]:
    """Orthonormal basis of the real space of ``dim x dim`` Hermitian matrices.

    The first ``dim`` elements are the diagonal units ``E_kk``; the rest are the
    traceless symmetric and antisymmetric off-diagonal pairs scaled by 1/sqrt(2).
    """
    if dim < 1:
        raise DimensionError("dimension must be positive")
    return list(_herm_basis(dim))


@functools.lru_cache(maxsize=None)
def _basis_stack(dim: int) -> np.ndarray:
    st = np.array(_herm_basis(dim))
    st.setflags(write=False)
    return st


def herm_coords(a) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in :func:`herm_basis`."""
    a = as_matrix(a)
    st = _basis_stack(a.shape[0])
    return np.einsum("kab,ab->k", st.conj(), a).real


def from_herm_coords(x, dim: int) -> np.ndarray:
    return np.einsum("k,kab->ab", np.asarray(x, dtype=float), _basis_stack(dim))


def exp_herm(a) -> np.ndarray:
    vals, vecs = eig_herm(a)
    return (vecs * np.exp(vals)) @ vecs.conj().T


def gibbs_state(a) -> np.ndarray:
    """``exp(a) / tr exp(a)``, computed with the top eigenvalue shifted out."""
    vals, vecs = eig_herm(a)
    w = np.exp(vals - vals[0])
    w /= w.sum()
    return (vecs * w) @ vecs.conj().T


def real_embed(a) -> np.ndarray:
    """Real symmetric ``[[Re a, -Im a], [Im a, Re a]]``."""
    a = as_matrix(a)
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def real_unembed_dual(z) -> np.ndarray:
    """Hermitian ``L`` with ``<L, h> = <z, real_embed(h)>`` for every Hermitian ``h``."""
    z = np.asarray(z, dtype=float)
    m = z.shape[0] // 2
    p, q12, q21, r = z[:m, :m], z[:m, m:], z[m:, :m], z[m:, m:]
    return (p + r) + 1j * (q21 - q12)


def project_density(a) -> np.ndarray:
    """Nearest-style repair: clip negative eigenvalues to 0 and renormalize."""
    a = as_matrix(a)
    a = (a + a.conj().T) / 2
    vals, vecs = np.linalg.eigh(a)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        return np.eye(a.shape[0], dtype=complex) / a.shape[0]
    vals /= vals.sum()
    return (vecs * vals) @ vecs.conj().T


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g + g.conj().T) / 2


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix; ``rank=1`` gives a pure state."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def pure_state(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def choi_of(func, dim_in: int, dim_out: int) -> np.ndarray:
    """``J(Phi) = sum_ij Phi(E_ij) (x) E_ij`` for a callable ``Phi``."""
    j = np.zeros((dim_out * dim_in, dim_out * dim_in), dtype=complex)
    for a in range(dim_in):
        for b in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=complex)
            e[a, b] = 1.0
            j += kron(func(e), e)
    return j


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Hermitian-preserving linear map ``L(C^dim_in) -> L(C^dim_out)``."""

    dim_in: int
    dim_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise DimensionError("superoperator dimensions must be positive")
        choi = check_hermitian(self.choi, what="Choi matrix")
        if choi.shape[0] != self.dim_in * self.dim_out:
            raise DimensionError(
                f"Choi matrix of size {choi.shape[0]} does not match "
                f"dim_out*dim_in = {self.dim_out * self.dim_in}"
            )
        choi = choi.copy()
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)

    @functools.cached_property
    def _tensor(self) -> np.ndarray:
        return self.choi.reshape(self.dim_out, self.dim_in, self.dim_out, self.dim_in)

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        """Real ``dim_out^2 x dim_in^2`` matrix of the map in :func:`herm_basis` coordinates."""
        cols = [herm_coords(apply_superop(self, b)) for b in herm_basis(self.dim_in)]
        return np.array(cols).T

    def is_completely_positive(self, tol: float = TOL.psd) -> bool:
        return is_psd(self.choi, tol)

    def __call__(self, a) -> np.ndarray:
        return apply_superop(self, a)


def apply_superop(phi: SuperOperator, a) -> np.ndarray:
    """``tr_A(J (I_B (x) a^T))``."""
    a = as_matrix(a)
    if a.shape[0] != phi.dim_in:
        raise DimensionError(f"input of size {a.shape[0]}, map expects {phi.dim_in}")
    return np.einsum("prqs,rs->pq", phi._tensor, a)


def adjoint_apply(phi: SuperOperator, y) -> np.ndarray:
    """Adjoint of ``phi`` with respect to the real Frobenius product on Hermitian matrices."""
    y = check_hermitian(y, what="adjoint argument")
    if y.shape[0] != phi.dim_out:
        raise DimensionError(f"input of size {y.shape[0]}, adjoint expects {phi.dim_out}")
    return from_herm_coords(phi.matrix.T @ herm_coords(y), phi.dim_in)
