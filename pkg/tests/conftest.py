import numpy as np
import pytest

from pairwave.condensate import solve_hartree
from pairwave.excitations import excitation_spectrum
from pairwave.model import build_model
from pairwave.riccati import solve_riccati_bdg, solve_riccati_greedy, solve_riccati_variational
from pairwave.spectral import TrapModel, build_basis

# Reference values at M=32, Q=64, N=100, g=0.01, sigma=0.5, produced by
# tests/oracles/independent_oracle.py (separate basis, quadrature, Hartree
# minimizer and a CARE solve for the pair kernel).
REF = {
    "mu": 1.348811549146029,
    "E_H": 1.175730002190361,
    "op_norm": 0.0379528580886856,
    "E": [2.000000000000007, 3.895417345104514, 5.839321881440794,
          7.8045999394859065, 9.781262635211338, 11.764600986654024],
    "energy": -0.004437059730832745,
    "gap": 1.8636778763349482,
}


@pytest.fixture(scope="session")
def ref():
    return REF


@pytest.fixture(scope="session")
def basis():
    return build_basis(32)


@pytest.fixture(scope="session")
def trap():
    return TrapModel(omega=1.0, g=0.01, sigma=0.5, N=100)


@pytest.fixture(scope="session")
def sol(trap, basis):
    return solve_hartree(trap, basis, tol=1e-12)


@pytest.fixture(scope="session")
def qm(sol, trap, basis):
    return build_model(sol, trap, basis)


@pytest.fixture(scope="session")
def kv(qm):
    return solve_riccati_variational(qm, tol=1e-11)


@pytest.fixture(scope="session")
def kg(qm):
    return solve_riccati_greedy(qm, seed=0, tol=1e-10)


@pytest.fixture(scope="session")
def kb(qm):
    return solve_riccati_bdg(qm)


@pytest.fixture(scope="session")
def ex(qm, kv):
    return excitation_spectrum(qm, kv.k)


# noninteracting reference problem


@pytest.fixture(scope="session")
def free_trap():
    return TrapModel(omega=1.0, g=0.0, sigma=0.5, N=100)


@pytest.fixture(scope="session")
def free_qm(free_trap, basis):
    return build_model(solve_hartree(free_trap, basis), free_trap, basis)


@pytest.fixture(scope="session")
def free_k(free_qm):
    return solve_riccati_variational(free_qm, tol=1e-11)


@pytest.fixture(scope="session")
def free_ex(free_qm, free_k):
    return excitation_spectrum(free_qm, free_k.k)


def random_symmetric(rng, M, scale=1.0):
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return scale * 0.5 * (A + A.T)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {text}")
