import numpy as np
import pytest

from pairwave.condensate import (chemical_potential, hartree_energy, hartree_operator,
                                 solve_hartree)
from pairwave.errors import ConvergenceFailure
from pairwave.spectral import TrapModel, build_basis


def test_noninteracting_ground_state(basis, free_trap):
    s = solve_hartree(free_trap, basis)
    assert s.mu == pytest.approx(1.0, abs=1e-10)
    assert s.E_H == pytest.approx(1.0, abs=1e-10)
    assert abs(abs(s.phi[0]) - 1) < 1e-10


def test_reference_values(sol, ref):
    assert sol.mu == pytest.approx(ref["mu"], abs=1e-10)
    assert sol.E_H == pytest.approx(ref["E_H"], abs=1e-10)
    assert sol.residual < 1e-12


def test_normalized_and_real(sol):
    assert np.linalg.norm(sol.phi) == pytest.approx(1.0, abs=1e-14)
    assert np.isrealobj(sol.phi)
    assert sol.phi[np.argmax(np.abs(sol.phi))] > 0


def test_eigen_equation(sol, trap, basis):
    H = hartree_operator(sol.phi, trap, basis)
    r = H @ sol.phi - sol.mu * sol.phi
    assert np.linalg.norm(r) < 1e-11
    # phi is the lowest eigenvector of its own Hartree operator
    w = np.linalg.eigvalsh(H)
    assert w[0] == pytest.approx(sol.mu, abs=1e-10)


def test_mu_minus_energy_is_half_interaction(sol, trap, basis):
    e = hartree_energy(sol.phi, trap, basis)
    mu = chemical_potential(sol.phi, trap, basis)
    kin = float(sol.phi @ (hartree_operator(sol.phi, TrapModel(1.0, 0.0, 0.5, 100), basis) @ sol.phi))
    assert e == pytest.approx(sol.E_H, abs=1e-13)
    assert mu == pytest.approx(sol.mu, abs=1e-12)
    assert mu - e == pytest.approx(e - kin, abs=1e-12)


@pytest.mark.parametrize("g", [1e-4, 2e-4])
def test_weak_coupling_first_order(basis, g):
    # first order in N g: mu = 1 + N g / sqrt(2 pi (1 + sigma^2))
    sigma, N = 0.5, 100
    s = solve_hartree(TrapModel(1.0, g, sigma, N), basis, tol=1e-12)
    lin = N * g / np.sqrt(2 * np.pi * (1 + sigma ** 2))
    assert abs(s.mu - 1 - lin) < 2 * lin ** 2


def test_depends_only_on_product(basis):
    a = solve_hartree(TrapModel(1.0, 0.01, 0.5, 100), basis, tol=1e-12)
    b = solve_hartree(TrapModel(1.0, 0.005, 0.5, 200), basis, tol=1e-12)
    assert a.mu == pytest.approx(b.mu, abs=1e-10)
    assert np.abs(a.phi - b.phi).max() < 1e-10


def test_energy_trace_monotone(basis):
    # mixing alone (no Newton finish) never raises the Hartree energy
    s = solve_hartree(TrapModel(1.0, 0.3, 0.5, 100), basis, tol=1e-6, newton_switch=0.0,
                      max_iter=5000)
    energies = [t[1] for t in s.trace]
    assert len(energies) > 3
    assert np.all(np.diff(energies) <= 1e-12 * max(1.0, abs(energies[0])))


def test_strong_coupling_converges(basis):
    s = solve_hartree(TrapModel(1.0, 1.0, 0.5, 100), basis, tol=1e-10)
    assert s.residual < 1e-10
    assert s.mu > s.E_H > 1.0


def test_iteration_cap():
    b = build_basis(16)
    with pytest.raises(ConvergenceFailure) as info:
        solve_hartree(TrapModel(1.0, 0.5, 0.5, 100), b, tol=1e-14, max_iter=1)
    assert np.isfinite(info.value.residual)


@pytest.mark.parametrize("kw", [dict(tol=0), dict(alpha=0), dict(alpha=1.5)])
def test_bad_arguments(basis, trap, kw):
    with pytest.raises(ValueError):
        solve_hartree(trap, basis, **kw)
