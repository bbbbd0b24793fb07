import numpy as np
import pytest

from pairwave.errors import GapConditionViolated
from pairwave.model import (check_gap_condition, depletion_bound_report, gap_exact,
                            perp_basis, project_perp, projector)


def test_kernel_symmetries(qm):
    assert np.abs(qm.h - qm.h.conj().T).max() < 1e-13
    assert np.abs(qm.gamma - qm.gamma.conj().T).max() < 1e-15
    assert np.abs(qm.f - qm.f.T).max() < 1e-13


def test_pair_kernel_positive(qm):
    # positive Fourier transform of the interaction makes f positive semidefinite
    assert np.linalg.eigvalsh(qm.f.real).min() > -1e-12


def test_projector_properties(qm):
    P = qm.proj
    assert np.abs(P @ P - P).max() < 1e-14
    assert np.abs(P - P.conj().T).max() < 1e-15
    assert np.abs(P @ qm.phi).max() < 1e-14
    assert np.trace(P).real == pytest.approx(qm.M - 1, abs=1e-12)


def test_perp_basis(qm):
    Q = perp_basis(qm.phi)
    assert Q.shape == (qm.M, qm.M - 1)
    assert np.abs(Q.conj().T @ Q - np.eye(qm.M - 1)).max() < 1e-14
    assert np.abs(qm.phi.conj() @ Q).max() < 1e-14
    assert np.abs(Q @ Q.conj().T - projector(qm.phi)).max() < 1e-14


def test_project_perp_matches_property(qm):
    assert np.abs(project_perp(qm.h, qm.phi) - qm.h_perp).max() < 1e-15


def test_condensate_couples_through_f(qm):
    # h phi = f phi-bar follows from the Hartree equation
    assert np.abs(qm.h @ qm.phi - qm.f @ qm.phi.conj()).max() < 1e-10


def test_noninteracting_kernels(free_qm):
    assert np.abs(free_qm.h - np.diag(2.0 * np.arange(free_qm.M))).max() < 1e-10
    assert np.all(free_qm.f == 0)
    assert gap_exact(free_qm) == pytest.approx(2.0, abs=1e-10)


def test_gap_estimate(qm, ref):
    rep = check_gap_condition(qm, seed=0)
    assert rep.c_exact == pytest.approx(ref["gap"], abs=1e-8)
    assert rep.certificate <= rep.c_exact + 1e-12
    assert rep.c_estimate >= rep.c_exact - 1e-12
    # descent from random starts gets close to the true minimum
    assert rep.c_estimate == pytest.approx(rep.c_exact, rel=1e-2)


def test_gap_estimate_deterministic(qm):
    assert check_gap_condition(qm, seed=3) == check_gap_condition(qm, seed=3)


def test_gap_violation(qm):
    big = qm.scaled(100.0)
    with pytest.raises(GapConditionViolated) as info:
        check_gap_condition(big)
    assert info.value.c_estimate < 0
    rep = check_gap_condition(big, force=True)
    assert rep.c_exact < 0


def test_depletion_bound_scaling(qm):
    rep = depletion_bound_report(qm)
    assert rep["N"] == 100
    assert rep["f_hs_over_N"] == pytest.approx(np.linalg.norm(qm.f) / 100)
    assert 0 < rep["fperp_over_c"] < 1
