import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairwave.csym import hs_norm, inv_sqrt_psd, op_norm, sqrt_psd, takagi
from pairwave.errors import DomainError, InvalidInput

from conftest import random_symmetric


def test_takagi_diagonal():
    K = np.diag([3.0, 1.0, 2.0]).astype(complex)
    t = takagi(K)
    assert np.allclose(t.z, [3, 2, 1])
    assert t.rank == 3
    assert np.abs(t.reconstruct() - K).max() < 1e-14


def test_takagi_zero():
    t = takagi(np.zeros((4, 4)))
    assert t.rank == 0
    assert np.all(t.z == 0)
    assert np.abs(t.vectors.conj().T @ t.vectors - np.eye(4)).max() < 1e-14


def test_takagi_rank_one():
    e = np.array([1, 1j, 0, 1]) / np.sqrt(3)
    K = 0.7 * np.outer(e, e)
    t = takagi(K)
    assert t.rank == 1
    assert t.z[0] == pytest.approx(0.7, abs=1e-14)
    assert abs(abs(np.vdot(t.vectors[:, 0], e)) - 1) < 1e-12


def test_takagi_matches_singular_values(rng):
    for M in (2, 5, 17):
        K = random_symmetric(rng, M)
        t = takagi(K)
        sv = np.linalg.svd(K, compute_uv=False)
        assert np.abs(np.abs(t.z) - sv).max() < 1e-12
        assert np.abs(t.reconstruct() - K).max() < 1e-12
        assert np.abs(t.vectors.conj().T @ t.vectors - np.eye(M)).max() < 1e-12


def test_takagi_degenerate_cluster(rng):
    # a random unitary congruence of diag(2, 2, 2, 1, 0)
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    K = Q @ np.diag([2.0, 2.0, 2.0, 1.0, 0.0]) @ Q.T
    t = takagi(K)
    assert t.rank == 4
    assert np.allclose(np.abs(t.z), [2, 2, 2, 1, 0], atol=1e-12)
    assert np.abs(t.reconstruct() - K).max() < 1e-12


def test_takagi_rejects_nonsymmetric():
    with pytest.raises(InvalidInput):
        takagi(np.array([[0, 1], [0, 0]], dtype=complex))


def test_sqrt_psd_squares_back(rng):
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    P = A @ A.conj().T
    S = sqrt_psd(P)
    assert np.abs(S @ S - P).max() < 1e-10
    assert np.abs(S - S.conj().T).max() < 1e-12
    R = inv_sqrt_psd(P)
    assert np.abs(R @ S - np.eye(6)).max() < 1e-9


def test_sqrt_errors():
    with pytest.raises(DomainError):
        sqrt_psd(np.diag([1.0, -1.0]))
    with pytest.raises(DomainError):
        sqrt_psd(np.array([[0, 1], [0, 0]], dtype=float))
    with pytest.raises(DomainError):
        inv_sqrt_psd(np.diag([1.0, 0.0]))


def test_sqrt_of_zero():
    assert np.all(sqrt_psd(np.zeros((3, 3))) == 0)


def test_norm_ordering_many_seeds():
    for seed in range(100):
        K = random_symmetric(np.random.default_rng(seed), 6)
        assert op_norm(K) <= hs_norm(K) * (1 + 1e-14)
        assert hs_norm(K) <= np.sqrt(6) * op_norm(K) * (1 + 1e-14)


@settings(max_examples=40, deadline=None)
@given(M=st.integers(1, 12), seed=st.integers(0, 2 ** 32 - 1))
def test_takagi_property(M, seed):
    K = random_symmetric(np.random.default_rng(seed), M)
    t = takagi(K)
    assert np.abs(t.reconstruct() - K).max() < 1e-11
    assert np.all(np.diff(np.abs(t.z)) <= 1e-12)
    assert np.abs(np.abs(t.z) - np.linalg.svd(K, compute_uv=False)).max() < 1e-11
