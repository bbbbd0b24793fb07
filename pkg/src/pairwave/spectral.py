"""Hermite-function discretization of the one-dimensional harmonic trap.

All one-particle operators are stored as dense ``M x M`` matrices in the
orthonormal basis of Hermite functions.  Integrals over the line are done
with Gauss-Hermite quadrature whose weights have the Gaussian factor taken
out, so that plain sums over nodes approximate unweighted integrals.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import InvalidConfiguration, InvalidInput

SYMMETRY_TAGS = ("hermitian", "complex-symmetric", "general")


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Values of the normalized Hermite functions psi_0..psi_{n_max-1} at x.

    Uses the three-term recurrence, which stays stable well beyond the
    range where the raw Hermite polynomials overflow.  Returns an array
    of shape ``(len(x), n_max)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((x.size, n_max))
    if n_max == 0:
        return out
    out[:, 0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max > 1:
        out[:, 1] = np.sqrt(2.0) * x * out[:, 0]
    for n in range(1, n_max - 1):
        out[:, n + 1] = (np.sqrt(2.0 / (n + 1)) * x * out[:, n]
                         - np.sqrt(n / (n + 1)) * out[:, n - 1])
    return out


@dataclass(frozen=True)
class Kernel:
    """Dense matrix of an integral kernel together with its symmetry class."""

    entries: np.ndarray
    symmetry: str = "general"

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInput("kernel must be a square matrix")
        if self.symmetry not in SYMMETRY_TAGS:
            raise InvalidInput(f"unknown symmetry tag {self.symmetry!r}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def symmetry_residual(self) -> float:
        a = self.entries
        if self.symmetry == "hermitian":
            return float(np.linalg.norm(a - a.conj().T))
        if self.symmetry == "complex-symmetric":
            return float(np.linalg.norm(a - a.T))
        return 0.0


@dataclass(frozen=True)
class TrapModel:
    """Physical parameters: trap frequency, interaction mass and width, N."""

    omega: float = 1.0
    g: float = 0.01
    sigma: float = 0.5
    N: int = 100

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidConfiguration("omega must be positive")
        if not self.sigma > 0:
            raise InvalidConfiguration("sigma must be positive")
        if not self.g >= 0:
            raise InvalidConfiguration("g must be nonnegative")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidConfiguration("N must be a positive integer")

    @property
    def coupling(self) -> float:
        """The combination N*g that controls the mean field."""
        return self.N * self.g


@dataclass(frozen=True)
class SpectralBasis:
    M: int
    Q: int
    nodes: np.ndarray
    weights: np.ndarray
    eval_table: np.ndarray = field(repr=False)

    def evaluate(self, coeffs, x) -> np.ndarray:
        """Evaluate the function with basis coefficients ``coeffs`` at x."""
        return hermite_functions(self.M, x) @ np.asarray(coeffs)

    def to_grid(self, coeffs) -> np.ndarray:
        """Function values at the quadrature nodes."""
        return (self.eval_table @ np.asarray(coeffs)) / np.sqrt(self.weights)

    def gram(self) -> np.ndarray:
        return self.eval_table.T @ self.eval_table


def build_basis(M: int, Q: int | None = None) -> SpectralBasis:
    """Hermite basis of size M with a Q-point Gauss-Hermite rule.

    ``eval_table[q, n]`` is ``sqrt(w_q) * psi_n(x_q)`` where ``w_q`` are the
    unweighted quadrature weights, so ``eval_table.T @ eval_table`` is the
    Gram matrix.
    """
    if Q is None:
        Q = 2 * M
    if M < 1 or Q < M:
        raise InvalidConfiguration(f"need 1 <= M <= Q, got M={M}, Q={Q}")
    nodes, _ = hermgauss(Q)
    # w_q exp(x_q^2) = 1 / (Q psi_{Q-1}(x_q)^2) avoids under/overflow at
    # the outer nodes.
    psi = hermite_functions(Q, nodes)
    weights = 1.0 / (Q * psi[:, Q - 1] ** 2)
    table = np.sqrt(weights)[:, None] * psi[:, :M]
    return SpectralBasis(M=M, Q=Q, nodes=nodes, weights=weights,
                         eval_table=table)


def position_squared(basis: SpectralBasis) -> np.ndarray:
    return grid_to_operator(basis, basis.nodes ** 2).entries


def assemble_kinetic_trap(basis: SpectralBasis, omega: float = 1.0) -> Kernel:
    """Matrix of -d^2/dx^2 + omega^2 x^2.

    The second-derivative part is obtained from the exact identity
    -D^2 = diag(2n+1) - X^2 in the full Hermite basis, with X^2 taken from
    quadrature (exact whenever Q > M).
    """
    x2 = position_squared(basis)
    n = np.arange(basis.M)
    kinetic = np.diag(2.0 * n + 1.0) - x2
    eps = kinetic + omega ** 2 * x2
    eps = 0.5 * (eps + eps.T)
    return Kernel(eps, "hermitian")


def gaussian_interaction(x, g: float, sigma: float):
    return g / (sigma * np.sqrt(2.0 * np.pi)) * np.exp(-0.5 * (np.asarray(x) / sigma) ** 2)


def interaction_on_grid(basis: SpectralBasis, g: float, sigma: float) -> np.ndarray:
    """Table of v(x_q - x_q') for the normalized Gaussian of mass g."""
    if g < 0 or sigma <= 0:
        raise InvalidInput("need g >= 0 and sigma > 0")
    d = basis.nodes[:, None] - basis.nodes[None, :]
    return gaussian_interaction(d, g, sigma)


def weighted_density(basis: SpectralBasis, phi) -> np.ndarray:
    """Quadrature-weighted density w_q |phi(x_q)|^2 on the nodes."""
    return np.abs(basis.eval_table @ np.asarray(phi)) ** 2


def convolve_density(basis: SpectralBasis, vtable: np.ndarray, phi) -> np.ndarray:
    """Grid values of (v * |phi|^2)(x_q)."""
    phi = np.asarray(phi)
    nrm = np.linalg.norm(phi)
    if abs(nrm - 1.0) > 1e-10:
        raise InvalidInput(f"phi must be normalized (norm {nrm:.3e})")
    return vtable @ weighted_density(basis, phi)


def grid_to_operator(basis: SpectralBasis, values) -> Kernel:
    """Galerkin matrix of multiplication by a real grid function."""
    values = np.asarray(values)
    B = basis.eval_table
    mat = B.T @ (values[:, None] * B)
    if np.iscomplexobj(mat):
        mat = 0.5 * (mat + mat.conj().T)
    else:
        mat = 0.5 * (mat + mat.T)
    return Kernel(mat, "hermitian")
