import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdg import linalg
from sdg.linalg import SuperOperator, adjoint_apply, apply_superop

from conftest import loop_apply_choi, loop_partial_trace_first


def _rand_choi(rng, din, dout, psd=False):
    if psd:
        g = rng.normal(size=(din * dout, din * dout)) + 1j * rng.normal(size=(din * dout, din * dout))
        return g @ g.conj().T / (din * dout)
    return linalg.random_hermitian(din * dout, rng)


def test_kron_examples(rng):
    assert np.allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(linalg.kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))
    for _ in range(10):
        a, b = linalg.random_hermitian(2, rng), linalg.random_hermitian(3, rng)
        assert np.trace(linalg.kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b))


def test_kron_index_order():
    a = np.arange(4).reshape(2, 2)
    b = np.arange(9).reshape(3, 3) + 10
    k = linalg.kron(a, b)
    for p, q, r, s in np.ndindex(2, 2, 3, 3):
        assert k[3 * p + r, 3 * q + s] == a[p, q] * b[r, s]


def test_inner_examples(rng):
    assert linalg.inner(np.eye(2), np.eye(2)) == 2
    assert linalg.inner(np.diag([1, -1]), np.eye(2)) == 0
    for _ in range(10):
        a, b = linalg.random_hermitian(3, rng), linalg.random_hermitian(3, rng)
        assert linalg.inner(a, b) == pytest.approx(linalg.inner(b, a), abs=1e-12)
        assert linalg.inner(a, b) == pytest.approx(np.trace(a.conj().T @ b).real, abs=1e-12)
    with pytest.raises(linalg.DimensionError):
        linalg.inner(np.eye(2), np.eye(3))


def test_inner_conjugates_first_argument():
    a = np.array([[0, 1j], [0, 0]])
    assert linalg.inner(a, a) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "a, expected",
    [(np.diag([3.0, 1.0, -2.0]), [3, 1, -2]), (np.array([[0, 1], [1, 0]]), [1, -1])],
)
def test_eig_herm_examples(a, expected):
    vals, _ = linalg.eig_herm(a)
    assert np.allclose(vals, expected)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_eig_herm_reconstruction(dim, seed):
    a = linalg.random_hermitian(dim, np.random.default_rng(seed))
    vals, vecs = linalg.eig_herm(a)
    assert np.all(np.diff(vals) <= 1e-12)
    assert np.linalg.norm(a - (vecs * vals) @ vecs.conj().T) <= 1e-9 * max(1, np.linalg.norm(a))
    assert np.allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-9)


def test_eig_herm_rejects_non_hermitian():
    with pytest.raises(linalg.NotHermitianError):
        linalg.eig_herm(np.array([[0, 1], [0, 0]]))


def test_lambda_max_rayleigh_sampling(rng):
    a = linalg.random_hermitian(3, rng)
    x = rng.normal(size=(10_000, 3)) + 1j * rng.normal(size=(10_000, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rayleigh = np.einsum("ki,ij,kj->k", x.conj(), a, x).real
    assert rayleigh.max() <= linalg.lambda_max(a) + 1e-12
    assert rayleigh.max() == pytest.approx(linalg.lambda_max(a), abs=1e-1)
    # the top eigenvector closes the remaining gap exactly
    _, vecs = linalg.eig_herm(a)
    v = vecs[:, 0]
    assert (v.conj() @ a @ v).real == pytest.approx(linalg.lambda_max(a), abs=1e-12)


def test_lambda_max_over_densities(rng):
    a = linalg.random_hermitian(3, rng)
    top = linalg.lambda_max(a)
    _, vecs = linalg.eig_herm(a)
    assert linalg.inner(a, linalg.pure_state(vecs[:, 0])) == pytest.approx(top, abs=1e-12)
    samples = [linalg.inner(a, linalg.random_density(3, rng)) for _ in range(1000)]
    assert max(samples) <= top + 1e-9


def test_partial_trace_examples(rng):
    x = np.array([[0, 1], [1, 0]])
    got = linalg.partial_trace_first(linalg.kron(np.diag([1, 2]), x), 2, 2)
    assert np.allclose(got, 3 * x)
    assert np.allclose(linalg.partial_trace_first(np.eye(4), 2, 2), 2 * np.eye(2))
    for _ in range(10):
        m = linalg.random_hermitian(6, rng)
        pt = linalg.partial_trace_first(m, 2, 3)
        assert np.trace(pt) == pytest.approx(np.trace(m), abs=1e-12)
        assert np.allclose(pt, loop_partial_trace_first(m, 2, 3))


def test_partial_trace_second_on_products(rng):
    a, b = linalg.random_hermitian(2, rng), linalg.random_hermitian(3, rng)
    assert np.allclose(linalg.partial_trace_second(linalg.kron(a, b), 2, 3), np.trace(b) * a)


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(linalg.DimensionError):
        linalg.partial_trace_first(np.eye(5), 2, 2)


def test_partial_trace_adjoint(rng):
    assert np.allclose(linalg.partial_trace_adjoint(np.eye(2), 2), np.eye(4))
    assert np.allclose(linalg.partial_trace_adjoint(np.diag([1, 0]), 2), np.diag([1, 0, 1, 0]))
    for _ in range(10):
        b, m = linalg.random_hermitian(3, rng), linalg.random_hermitian(6, rng)
        lhs = linalg.inner(linalg.partial_trace_adjoint(b, 2), m)
        rhs = linalg.inner(b, linalg.partial_trace_first(m, 2, 3))
        assert abs(lhs - rhs) <= 1e-10


def test_swap_and_partial_transpose(rng):
    a, b = linalg.random_hermitian(2, rng), linalg.random_hermitian(3, rng)
    assert np.allclose(linalg.swap_factors(linalg.kron(a, b), 2, 3), linalg.kron(b, a))
    assert np.allclose(linalg.partial_transpose_second(linalg.kron(a, b), 2, 3), linalg.kron(a, b.T))


def test_apply_superop_identity_channel(rng):
    choi = sum(
        linalg.kron(e, e)
        for e in (np.outer(np.eye(2)[i], np.eye(2)[j]) for i in range(2) for j in range(2))
    )
    phi = SuperOperator(2, 2, choi)
    for _ in range(5):
        a = linalg.random_hermitian(2, rng)
        assert np.allclose(apply_superop(phi, a), a)
        assert np.allclose(adjoint_apply(phi, a), a)


def test_apply_superop_zero():
    phi = SuperOperator(2, 3, np.zeros((6, 6)))
    assert np.allclose(apply_superop(phi, np.eye(2)), 0)


@pytest.mark.parametrize("din, dout", [(1, 1), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_apply_superop_matches_loop_oracle(rng, din, dout):
    choi = _rand_choi(rng, din, dout)
    phi = SuperOperator(din, dout, choi)
    for _ in range(5):
        a = linalg.random_hermitian(din, rng)
        assert np.allclose(apply_superop(phi, a), loop_apply_choi(choi, a, din, dout), atol=1e-12)


def test_apply_superop_dimension_mismatch():
    phi = SuperOperator(2, 2, np.eye(4))
    with pytest.raises(linalg.DimensionError):
        apply_superop(phi, np.eye(3))


def test_superoperator_requires_hermitian_choi():
    with pytest.raises(linalg.NotHermitianError):
        SuperOperator(2, 2, np.triu(np.ones((4, 4))))
    with pytest.raises(linalg.DimensionError):
        SuperOperator(2, 2, np.eye(6))


@pytest.mark.parametrize("din, dout", [(2, 2), (2, 3), (3, 2)])
def test_choi_round_trip(rng, din, dout):
    for _ in range(10):
        choi = _rand_choi(rng, din, dout)
        phi = SuperOperator(din, dout, choi)
        rebuilt = linalg.choi_of(lambda a: apply_superop(phi, a), din, dout)
        assert np.linalg.norm(rebuilt - choi) <= 1e-10


@pytest.mark.parametrize("din, dout", [(2, 2), (2, 3), (3, 2)])
def test_adjoint_identity(rng, din, dout):
    for _ in range(20):
        phi = SuperOperator(din, dout, _rand_choi(rng, din, dout))
        x, y = linalg.random_hermitian(din, rng), linalg.random_hermitian(dout, rng)
        assert abs(linalg.inner(adjoint_apply(phi, y), x) - linalg.inner(y, apply_superop(phi, x))) <= 1e-10


def _complexify(func, phi, a):
    # extend a Hermitian-input linear map complex-linearly: a = h1 + i h2
    h1 = (a + a.conj().T) / 2
    h2 = (a - a.conj().T) / 2j
    return func(phi, h1) + 1j * func(phi, h2)


def test_adjoint_of_adjoint(rng):
    for _ in range(5):
        phi = SuperOperator(2, 3, _rand_choi(rng, 2, 3))
        adj = SuperOperator(3, 2, linalg.choi_of(lambda y: _complexify(adjoint_apply, phi, y), 3, 2))
        for e in linalg.herm_basis(2):
            assert np.allclose(adjoint_apply(adj, e), apply_superop(phi, e), atol=1e-10)


def test_completely_positive_maps_psd_to_psd(rng):
    for _ in range(20):
        phi = SuperOperator(2, 3, _rand_choi(rng, 2, 3, psd=True))
        assert phi.is_completely_positive()
        for _ in range(20):
            assert linalg.lambda_min(apply_superop(phi, linalg.random_density(2, rng))) >= -1e-9


def test_transpose_map_is_not_completely_positive():
    choi = linalg.choi_of(lambda a: a.T, 2, 2)
    assert not SuperOperator(2, 2, choi).is_completely_positive()
    assert linalg.lambda_min(choi) == pytest.approx(-1)
    # positive on its own, the witness needs a second system: (id x T) of a Bell state
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    assert linalg.lambda_min(linalg.partial_transpose_second(linalg.pure_state(bell), 2, 2)) == pytest.approx(-0.5)


def test_non_cp_map_has_psd_input_witness(rng):
    choi = linalg.choi_of(lambda a: a.T, 2, 2) - 0.75 * np.eye(4)
    phi = SuperOperator(2, 2, choi)
    assert not phi.is_completely_positive()
    candidates = linalg.herm_basis(2)[:2] + [linalg.random_density(2, rng, rank=1) for _ in range(20)]
    witnesses = [x for x in candidates if linalg.lambda_min(apply_superop(phi, x)) < -1e-9]
    assert witnesses


def test_herm_basis_examples():
    assert len(linalg.herm_basis(1)) == 1
    assert np.allclose(linalg.herm_basis(1)[0], [[1]])
    basis = linalg.herm_basis(2)
    assert len(basis) == 4
    shifted = [b - np.trace(b) / 2 * np.eye(2) for b in basis]
    nonzero = [s for s in shifted if np.linalg.norm(s) > 1e-12]
    assert len(nonzero) == 4
    assert sum(abs(np.trace(b)) < 1e-12 for b in basis) == 2
    assert np.linalg.matrix_rank(np.array([s.ravel() for s in shifted])) == 3


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_herm_basis_orthonormal_and_ordered(dim):
    basis = linalg.herm_basis(dim)
    assert len(basis) == dim * dim
    for b in basis:
        assert linalg.is_hermitian(b)
    gram = np.array([[linalg.inner(a, b) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(dim * dim))
    for b in basis[:dim]:
        assert np.allclose(b, np.diag(np.diag(b)))
    for b in basis[dim:]:
        assert abs(np.trace(b)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_herm_coords_round_trip(dim, seed):
    a = linalg.random_hermitian(dim, np.random.default_rng(seed))
    assert np.allclose(linalg.from_herm_coords(linalg.herm_coords(a), dim), a)


def test_exp_herm_examples(rng):
    assert np.allclose(linalg.exp_herm(np.zeros((2, 2))), np.eye(2))
    assert np.allclose(linalg.exp_herm(np.diag(np.log([2.0, 3.0]))), np.diag([2, 3]))
    for _ in range(10):
        a = linalg.random_hermitian(3, rng)
        e = linalg.exp_herm(a)
        assert np.trace(e).real == pytest.approx(np.exp(np.linalg.eigvalsh(a)).sum(), abs=1e-9)
        assert linalg.is_psd(e)


def test_gibbs_state_is_stable_density():
    g = linalg.gibbs_state(np.diag([1000.0, 0.0]))
    assert linalg.is_density(g)
    assert np.allclose(g, np.diag([1, 0]))


def test_real_embed_examples(rng):
    a = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.allclose(linalg.real_embed(a), np.block([[a, np.zeros((2, 2))], [np.zeros((2, 2)), a]]))
    pauli_y = np.array([[0, -1j], [1j, 0]])
    emb = linalg.real_embed(pauli_y)
    assert np.allclose(emb, emb.T)
    assert np.allclose(np.sort(np.linalg.eigvalsh(emb)), [-1, -1, 1, 1])
    for _ in range(10):
        a, b = linalg.random_hermitian(3, rng), linalg.random_hermitian(3, rng)
        assert linalg.inner(a, b) == pytest.approx(0.5 * np.sum(linalg.real_embed(a) * linalg.real_embed(b)))
        ev = np.sort(np.linalg.eigvalsh(a))
        assert np.allclose(np.sort(np.linalg.eigvalsh(linalg.real_embed(a))), np.repeat(ev, 2))


def test_density_checks():
    assert linalg.is_density(np.eye(2) / 2)
    assert not linalg.is_density(np.eye(2))
    assert not linalg.is_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        linalg.check_density(np.diag([1.5, -0.5]))


def test_project_density_clips_and_renormalizes():
    x = linalg.project_density(np.diag([0.7, 0.4, -0.1]))
    assert linalg.is_density(x)
    assert np.allclose(x, np.diag([7, 4, 0]) / 11)
