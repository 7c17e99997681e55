"""Truncated two-mode Fock space and the SU(2) rotation acting on it.

A passive second mode (operators b, b^dag) of the same frequency is attached
to the model; eigenstates of the extended Hamiltonian are the block
eigenvectors tensored with the Fock state |n'>.  The rotation

    U(theta, phi) = exp(-i phi Jz) exp(-i theta Jy)

with Jz = (a^dag a - b^dag b) / 2 and Jy = (a^dag b - a b^dag) / (2i) is the
loop generator on the Poincare sphere.  Both generators conserve the total
photon number, so a basis cut at total photon number n + n' + 1 is exact for
all states built here, not an approximation: the initial support lives in the
two total-number sectors n + n' and n + n' + 1 and the rotation is block
diagonal across sectors.

Basis order: ascending total photon number N, then ascending n_a within the
sector, then spin of particle 1, then spin of particle 2 (fastest).  Spin
index 0 means excited, 1 means ground, matching the block basis order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .eigensystem import EigenFrame
from .model import ModelParams

_NORM_TOL = 1e-12


@lru_cache(maxsize=None)
def _basis_tables(n_max_total: int):
    n_a, n_b, spin1, spin2 = [], [], [], []
    for total in range(n_max_total + 1):
        for na in range(total + 1):
            for s1 in (0, 1):
                for s2 in (0, 1):
                    n_a.append(na)
                    n_b.append(total - na)
                    spin1.append(s1)
                    spin2.append(s2)
    table = tuple(np.array(col, dtype=int) for col in (n_a, n_b, spin1, spin2))
    index = {key: i for i, key in enumerate(zip(*[col.tolist() for col in table]))}
    return table, index


@dataclass(frozen=True, eq=False)
class TwoModeBasis:
    """Enumeration of |n_a, n_b, s1, s2> with n_a + n_b <= n_max_total."""

    n_max_total: int

    @property
    def columns(self):
        (table, _index) = _basis_tables(self.n_max_total)
        return table

    @property
    def index(self):
        (_table, index) = _basis_tables(self.n_max_total)
        return index

    @property
    def dim(self) -> int:
        return 2 * (self.n_max_total + 1) * (self.n_max_total + 2)

    @property
    def jz(self) -> np.ndarray:
        n_a, n_b, _, _ = self.columns
        return (n_a - n_b) / 2.0

    @property
    def total_photon(self) -> np.ndarray:
        n_a, n_b, _, _ = self.columns
        return n_a + n_b

    def sector_slice(self, total: int) -> slice:
        # Sectors are contiguous; sector N starts after 4 * sum_{m<N} (m+1) states.
        start = 2 * total * (total + 1)
        return slice(start, start + 4 * (total + 1))

    @staticmethod
    def for_params(params: ModelParams) -> "TwoModeBasis":
        return TwoModeBasis(params.n_photon + params.n_prime + 1)


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Normalized state vector over a TwoModeBasis."""

    basis: TwoModeBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValueError(
                f"expected {self.basis.dim} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized: |psi| = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    def sector_populations(self) -> np.ndarray:
        """Probability carried by each total-photon sector."""
        weights = np.abs(self.amplitudes) ** 2
        totals = self.basis.total_photon
        return np.bincount(totals, weights=weights, minlength=self.basis.n_max_total + 1)


def embed_two_mode(frame: EigenFrame, params: ModelParams) -> TwoModeState:
    """Tensor the block eigenvector with |n'> of the passive mode."""
    basis = TwoModeBasis.for_params(params)
    n, nprime = params.n_photon, params.n_prime
    placements = (
        (n, nprime, 0, 0),
        (n, nprime, 0, 1),
        (n + 1, nprime, 1, 0),
        (n + 1, nprime, 1, 1),
    )
    amps = np.zeros(basis.dim, dtype=complex)
    for c, key in zip(frame.amplitudes, placements):
        assert key in basis.index, f"basis truncation does not cover {key}"
        amps[basis.index[key]] = c
    return TwoModeState(basis, amps)


@lru_cache(maxsize=None)
def _jy_sector(total: int) -> np.ndarray:
    """Jy restricted to one total-photon sector, in the ascending n_a basis."""
    dim = total + 1
    plus = np.zeros((dim, dim), dtype=complex)  # a^dag b
    for na in range(total):
        plus[na + 1, na] = np.sqrt((na + 1) * (total - na))
    return (plus - plus.conj().T) / 2j


def _sector_rotation(total: int, theta: float) -> np.ndarray:
    """exp(-i theta Jy) on one sector via its exact eigendecomposition."""
    w, v = np.linalg.eigh(_jy_sector(total))
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def two_mode_rotation(state: TwoModeState, theta: float, phi: float) -> TwoModeState:
    """Apply U(theta, phi) = exp(-i phi Jz) exp(-i theta Jy) to ``state``.

    Exact within each total-photon sector; the norm and the sector
    populations are preserved to machine precision.
    """
    basis = state.basis
    amps = state.amplitudes.copy()
    if theta != 0.0:
        for total in range(basis.n_max_total + 1):
            sec = basis.sector_slice(total)
            block = amps[sec].reshape(total + 1, 4)
            amps[sec] = (_sector_rotation(total, theta) @ block).reshape(-1)
    if phi != 0.0:
        amps *= np.exp(-1j * phi * basis.jz)
    return TwoModeState(basis, amps)
