import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from pairwave.errors import InvalidConfiguration, InvalidInput
from pairwave.spectral import (Kernel, TrapModel, assemble_kinetic_trap, build_basis,
                               convolve_density, grid_to_operator, hermite_functions,
                               interaction_on_grid, position_squared)


def golub_welsch(q):
    """Gauss-Hermite rule from the Jacobi matrix (independent of hermgauss)."""
    off = np.sqrt(np.arange(1, q) / 2.0)
    x, V = eigh_tridiagonal(np.zeros(q), off)
    return x, np.sqrt(np.pi) * V[0] ** 2


def test_ground_mode_at_origin():
    b = build_basis(1, 2)
    assert b.evaluate([1.0], [0.0])[0] == pytest.approx(np.pi ** -0.25, abs=1e-12)
    assert b.evaluate([1.0], [0.0])[0] == pytest.approx(0.751126, abs=1e-6)


def test_gram_identity_small():
    b = build_basis(8, 16)
    assert np.abs(b.gram() - np.eye(8)).max() < 1e-12


@pytest.mark.parametrize("M", [1, 5, 16, 32, 64])
def test_gram_identity(M):
    b = build_basis(M)
    assert np.abs(b.gram() - np.eye(M)).max() < 1e-12


def test_nodes_against_golub_welsch():
    b = build_basis(32, 64)
    x, w = golub_welsch(64)
    assert np.all(np.diff(b.nodes) > 0)
    assert b.nodes.max() == pytest.approx(x.max(), abs=1e-10)
    assert np.all(b.weights > 0)
    # integrate exp(-x^2) with the unweighted rule
    assert np.sum(b.weights * np.exp(-b.nodes ** 2)) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert np.sum(w) == pytest.approx(np.sqrt(np.pi), rel=1e-12)


def test_quadrature_too_small():
    with pytest.raises(InvalidConfiguration):
        build_basis(8, 4)


def test_hermite_functions_recurrence_values():
    # psi_2(x) = (2x^2 - 1) pi^{-1/4} e^{-x^2/2} / sqrt(2)
    x = np.linspace(-3, 3, 7)
    want = (2 * x * x - 1) * np.pi ** -0.25 * np.exp(-x * x / 2) / np.sqrt(2)
    assert np.allclose(hermite_functions(3, x)[:, 2], want, atol=1e-14)


def test_kinetic_trap_unit_frequency():
    b = build_basis(4)
    eps = assemble_kinetic_trap(b, 1.0).entries
    assert np.allclose(np.diag(eps), [1, 3, 5, 7], atol=1e-10)
    off = eps - np.diag(np.diag(eps))
    assert np.abs(off).max() < 1e-10


def test_kinetic_trap_spectrum_exact():
    b = build_basis(32)
    w = np.linalg.eigvalsh(assemble_kinetic_trap(b, 1.0).entries)
    assert np.abs(w - (2 * np.arange(32) + 1)).max() < 1e-10


def test_kinetic_trap_scaled_frequency():
    # Oracle: the same operator written with ladder matrices,
    # -D^2 + w^2 X^2 with X = (a + a^+)/sqrt2 and D = (a - a^+)/sqrt2, built
    # on a larger basis so the truncation corner does not matter, then
    # compared with the omega-scaled oscillator levels.
    b = build_basis(16)
    w = np.linalg.eigvalsh(assemble_kinetic_trap(b, 2.0).entries)
    big = 200
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    X = (a + a.T) / np.sqrt(2)
    D = (a - a.T) / np.sqrt(2)
    full = -(D @ D) + 4.0 * (X @ X)
    ref = np.linalg.eigvalsh(full[:16, :16])
    assert np.abs(w - ref).max() < 1e-10
    # lowest levels approach the oscillator values 2(2n+1) as the basis grows
    assert w[0] == pytest.approx(2.0, abs=0.05)


def test_position_squared_matches_ladder_algebra():
    b = build_basis(12)
    n = np.arange(12)
    want = np.diag(n + 0.5)
    off = np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2
    want[n[:-2], n[:-2] + 2] = off
    want[n[:-2] + 2, n[:-2]] = off
    assert np.abs(position_squared(b) - want).max() < 1e-12


def test_grid_to_operator_trivial():
    b = build_basis(10)
    assert np.abs(grid_to_operator(b, np.ones(b.Q)).entries - np.eye(10)).max() < 1e-12
    assert np.abs(grid_to_operator(b, np.zeros(b.Q)).entries).max() == 0.0


def test_x2_operator_identity():
    # eps(omega=1) - x^2 is the second-derivative part -D^2
    b = build_basis(20)
    eps = assemble_kinetic_trap(b, 1.0).entries
    a = np.diag(np.sqrt(np.arange(1, 40)), 1)
    D = (a - a.T) / np.sqrt(2)
    minus_d2 = -(D @ D)[:20, :20]
    assert np.abs(eps - position_squared(b) - minus_d2).max() < 1e-12


def test_interaction_zero_and_symmetry():
    b = build_basis(16)
    assert np.all(interaction_on_grid(b, 0.0, 0.5) == 0)
    v = interaction_on_grid(b, 1.0, 0.5)
    assert np.array_equal(v, v.T)
    assert np.all(v >= 0)


def test_interaction_mass():
    b = build_basis(32)
    v = interaction_on_grid(b, 1.0, 0.5)
    i0 = int(np.argmin(np.abs(b.nodes)))
    assert np.sum(b.weights * v[i0]) == pytest.approx(1.0, abs=1e-6)


def test_interaction_flat_limit():
    b = build_basis(16)
    sigma = 1e3
    v = interaction_on_grid(b, 1.0, sigma)
    center = np.abs(b.nodes) < 2
    flat = 1.0 / (sigma * np.sqrt(2 * np.pi))
    assert np.allclose(v[np.ix_(center, center)], flat, rtol=1e-5)


def test_interaction_rejects_bad_params():
    b = build_basis(4)
    with pytest.raises(InvalidInput):
        interaction_on_grid(b, -1.0, 0.5)
    with pytest.raises(InvalidInput):
        interaction_on_grid(b, 1.0, 0.0)


def test_convolution_total_mass(basis):
    phi = np.zeros(32)
    phi[0] = 1.0
    conv = convolve_density(basis, interaction_on_grid(basis, 0.7, 0.5), phi)
    assert np.sum(basis.weights * conv) == pytest.approx(0.7, rel=1e-8)
    assert np.all(conv >= 0)
    assert np.all(convolve_density(basis, interaction_on_grid(basis, 0.0, 0.5), phi) == 0)


def test_convolution_delta_limit():
    # as sigma shrinks, v * |phi|^2 approaches g |phi|^2 at the nodes
    # (sigma must stay above the node spacing for the rule to resolve v)
    b = build_basis(32, 150)
    phi = np.zeros(32)
    phi[0] = 1.0
    dens = b.to_grid(phi) ** 2
    center = np.abs(b.nodes) < 2
    errs = []
    for sigma in (0.4, 0.2, 0.1):
        conv = convolve_density(b, interaction_on_grid(b, 1.0, sigma), phi)
        errs.append(np.abs(conv - dens)[center].max())
    # second-order approach: halving sigma cuts the error about fourfold
    assert 3.0 < errs[0] / errs[1] < 5.0
    assert 3.0 < errs[1] / errs[2] < 8.0
    assert errs[2] < 5e-3


def test_convolution_requires_normalized(basis):
    with pytest.raises(InvalidInput):
        convolve_density(basis, interaction_on_grid(basis, 1.0, 0.5), 2 * np.eye(32)[0])


def test_kernel_tags():
    k = Kernel(np.array([[1, 2j], [-2j, 3]]), "hermitian")
    assert k.symmetry_residual() == 0.0
    with pytest.raises(InvalidInput):
        Kernel(np.zeros((2, 3)))
    with pytest.raises(InvalidInput):
        Kernel(np.eye(2), "odd")


@pytest.mark.parametrize("kw", [dict(omega=0), dict(sigma=-1), dict(g=-0.1), dict(N=0), dict(N=2.5)])
def test_trap_model_validation(kw):
    with pytest.raises(InvalidConfiguration):
        TrapModel(**kw)


@settings(max_examples=25, deadline=None)
@given(M=st.integers(1, 48), extra=st.integers(0, 20))
def test_gram_identity_property(M, extra):
    b = build_basis(M, M + 1 + extra + M)
    assert np.abs(b.gram() - np.eye(M)).max() < 1e-12


@settings(max_examples=20, deadline=None)
@given(omega=st.floats(0.3, 3.0))
def test_kinetic_trap_hermitian(omega):
    k = assemble_kinetic_trap(build_basis(12), omega)
    assert k.symmetry == "hermitian"
    assert k.symmetry_residual() < 1e-12
