"""Model parameters and operators on the four-dimensional invariant subspace.

Particle 1 exchanges excitations with a single quantized field mode under the
rotating wave approximation, particle 2 sits in a classical in-plane magnetic
field with azimuth ``phi``, and the two spins are coupled by an Ising term.
The excitation-conserving block is spanned, in this fixed order, by

    {|e1 e2, n>, |e1 g2, n>, |g1 e2, n+1>, |g1 g2, n+1>}

and every 4x4 matrix in this package uses that order.  hbar = 1 throughout;
all parameters share one energy unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BASIS_LABELS = ("|e1 e2, n>", "|e1 g2, n>", "|g1 e2, n+1>", "|g1 g2, n+1>")


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the model plus photon numbers.

    omega1      transition frequency of particle 1
    nu          field-mode frequency (both modes in two-mode scenarios)
    lam         spin-field coupling strength
    coupling_j  Ising coupling between the two spins
    omega2      Zeeman energy of particle 2 (gyromagnetic ratio times field)
    n_photon    field excitation selecting the invariant subspace
    n_prime     photon number of the passive second mode
    """

    omega1: float
    nu: float
    lam: float
    coupling_j: float
    omega2: float
    n_photon: int = 0
    n_prime: int = 0

    def __post_init__(self):
        for name in ("omega1", "nu", "lam", "coupling_j", "omega2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        for name in ("n_photon", "n_prime"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")


@dataclass(frozen=True, eq=False)
class BlockHamiltonian:
    """The 4x4 Hermitian matrix on the invariant subspace at azimuth ``phi``.

    Hermiticity holds exactly by construction and the entry moduli do not
    depend on ``phi``; only the e^(+-i phi) phases of the Zeeman couplings do.
    """

    entries: np.ndarray
    phi: float

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=complex)
        if h.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {h.shape}")
        if not np.array_equal(h, h.conj().T):
            raise ValueError("matrix is not exactly Hermitian")
        object.__setattr__(self, "entries", h)


def lambda_n(params: ModelParams) -> float:
    """Effective spin-field coupling lambda * sqrt(n + 1) in the block."""
    return params.lam * math.sqrt(params.n_photon + 1)


def build_block_hamiltonian(params: ModelParams, phi: float) -> BlockHamiltonian:
    """Assemble the invariant-subspace Hamiltonian at magnetic azimuth ``phi``.

    Diagonal: (J + n nu + w1/2, -J + n nu + w1/2, -J + (n+1) nu - w1/2,
    J + (n+1) nu - w1/2).  The Zeeman term couples the (1,2) and (3,4) pairs
    with (w2/2) e^(-i phi) above the diagonal; the field coupling places
    lambda sqrt(n+1) on the (1,3) and (2,4) pairs.
    """
    return BlockHamiltonian(_hamiltonian_entries(params, np.asarray(phi, dtype=float)), float(phi))


def _hamiltonian_entries(params: ModelParams, phis: np.ndarray) -> np.ndarray:
    """Entries for one azimuth or a whole batch; shape ``phis.shape + (4, 4)``."""
    n, w1, nu, j = params.n_photon, params.omega1, params.nu, params.coupling_j
    ln = lambda_n(params)
    zeeman = 0.5 * params.omega2 * np.exp(-1j * phis)

    h = np.zeros(phis.shape + (4, 4), dtype=complex)
    h[..., 0, 0] = j + n * nu + w1 / 2
    h[..., 1, 1] = -j + n * nu + w1 / 2
    h[..., 2, 2] = -j + (n + 1) * nu - w1 / 2
    h[..., 3, 3] = j + (n + 1) * nu - w1 / 2
    h[..., 0, 1] = zeeman
    h[..., 2, 3] = zeeman
    h[..., 1, 0] = np.conj(zeeman)
    h[..., 3, 2] = np.conj(zeeman)
    h[..., 0, 2] = h[..., 2, 0] = ln
    h[..., 1, 3] = h[..., 3, 1] = ln
    return h


def number_diagonal(params: ModelParams) -> np.ndarray:
    """Diagonal of the photon-number operator restricted to the block."""
    n = params.n_photon
    return np.array([n, n, n + 1, n + 1], dtype=float)


def number_operator_block(params: ModelParams) -> np.ndarray:
    """Photon-number operator a^dag a on the invariant subspace: diag(n, n, n+1, n+1)."""
    return np.diag(number_diagonal(params))
