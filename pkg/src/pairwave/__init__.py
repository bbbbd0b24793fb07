"""Pair excitations of a trapped Bose gas.

Pipeline: Hermite spectral basis -> Hartree condensate -> quadratic model
(h, f) -> pair kernel k from the Riccati equation -> excitation spectrum
of h_ph = h + k f-bar -> Fock-space checks on a few modes.
"""
from .condensate import CondensateSolution, solve_hartree
from .csym import TakagiDecomposition, hs_norm, op_norm, takagi
from .errors import *  # noqa: F401,F403
from .excitations import (
    ExcitationSet,
    build_hph,
    build_symplectic,
    excitation_spectrum,
    solve_fetter,
    verify_uv_relations,
)
from .model import QuadraticModel, build_model, check_gap_condition, gap_exact
from .riccati import (
    PairKernel,
    energy_functional,
    energy_gradient,
    flip_branch,
    riccati_residual,
    solve_riccati_bdg,
    solve_riccati_greedy,
    solve_riccati_variational,
)
from .spectral import Kernel, SpectralBasis, TrapModel, assemble_kinetic_trap, build_basis

__version__ = "0.1.0"
