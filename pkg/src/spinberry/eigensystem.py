"""Eigenpairs of the block Hamiltonian, gauge fixing, angle extraction and
continuity tracking around closed azimuth loops.

Levels are labeled 1..4 by ascending energy.  The spectrum does not depend on
the azimuth (the Hamiltonian at any phi is a unitary conjugation of the one at
phi = 0), so ascending-energy labels are loop stable whenever the spectrum is
nondegenerate; the maximal-overlap assignment below is the safety net that
verifies this on every run.

Every nondegenerate eigenvector can be written, up to a global phase, as

    (e^(-i phi) cos(chi/2) sin(xi/2),
               cos(chi/2) cos(xi/2),
     e^(-i phi) sin(chi/2) sin(eta/2),
               sin(chi/2) cos(eta/2))

with chi in [0, pi].  Gauge fixing chooses the global phase so that the
co-rotated components (c1 e^(i phi), c2, c3 e^(i phi), c4) are all real, and
angle extraction inverts the parameterization.  xi lands in [-pi, pi] when c2
is the phase pivot; eta (and xi under the fallback pivots) may need the full
(-2 pi, 2 pi] range because the half-angle map has period 4 pi.  Downstream
formulas only consume these angles through sin and cos of the full angle or
through squared half-angle weights, so any representative is equivalent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .errors import DegeneracyEncountered, NullOverlap, RealityViolation
from .model import BlockHamiltonian, ModelParams, _hamiltonian_entries, build_block_hamiltonian

# Relative scale for the degeneracy guard on loops.
DEGENERACY_TOL = 1e-9
# Pivot amplitudes below this are considered absent when choosing the phase.
_PIVOT_TINY = 1e-12
# Residual imaginary part allowed after gauge fixing.
_REALITY_TOL = 1e-9
# Squared population below which xi or eta is undefined and reported as 0.
_ANGLE_DEGENERATE_TOL = 1e-14
# Minimum modulus of consecutive-frame overlaps along a tracked loop.
_CONTINUITY_MIN = 0.9


@dataclass(frozen=True)
class AngleSet:
    """Extracted angles; a degenerate flag means the angle was set to 0."""

    chi: float
    xi: float
    eta: float
    xi_degenerate: bool = False
    eta_degenerate: bool = False


@dataclass(frozen=True, eq=False)
class EigenFrame:
    """One eigenpair with its label and, once extracted, its angles."""

    energy: float
    amplitudes: np.ndarray
    label_j: int
    chi: float | None = None
    xi: float | None = None
    eta: float | None = None
    xi_degenerate: bool = False
    eta_degenerate: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (4,):
            raise ValueError(f"expected 4 amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes are not normalized: |psi| = {norm!r}")
        if self.label_j not in (1, 2, 3, 4):
            raise ValueError(f"label_j must be 1..4, got {self.label_j!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def angles(self) -> AngleSet:
        if self.chi is None:
            raise ValueError("angles have not been extracted for this frame")
        return AngleSet(self.chi, self.xi, self.eta, self.xi_degenerate, self.eta_degenerate)


def hermitian_eigensystem(h: BlockHamiltonian) -> tuple[EigenFrame, ...]:
    """All four eigenpairs sorted by ascending energy, angles unset."""
    energies, vectors = np.linalg.eigh(h.entries)
    return tuple(
        EigenFrame(float(energies[j]), vectors[:, j], label_j=j + 1) for j in range(4)
    )


def _corotation(phis: np.ndarray) -> np.ndarray:
    """Phase factors that undo the e^(-i phi) carried by components 1 and 3."""
    rot = np.exp(1j * phis)
    one = np.ones_like(rot)
    return np.stack([rot, one, rot, one], axis=-1)


def gauge_fix_amplitudes(amps: np.ndarray, phis: np.ndarray | float) -> np.ndarray:
    """Vectorized gauge fix: returns amplitudes with the global phase chosen
    so the co-rotated components are real, pivot priority c2, c4, c1, c3."""
    amps = np.asarray(amps, dtype=complex)
    phis = np.asarray(phis, dtype=float)
    corot = _corotation(phis)
    v = amps * corot
    absv = np.abs(v)
    pivot = np.where(
        absv[..., 1] >= _PIVOT_TINY,
        v[..., 1],
        np.where(
            absv[..., 3] >= _PIVOT_TINY,
            v[..., 3],
            np.where(absv[..., 0] >= _PIVOT_TINY, v[..., 0], v[..., 2]),
        ),
    )
    fixed = amps * (np.conj(pivot) / np.abs(pivot))[..., None]
    residual = np.abs((fixed * corot).imag).max()
    if residual > _REALITY_TOL:
        raise RealityViolation(
            f"residual imaginary part {residual:.3e} after gauge fixing; "
            "the state is not of the co-rotated-real form"
        )
    return fixed


def fix_gauge(frame: EigenFrame, phi: float) -> EigenFrame:
    """Gauge-fixed copy of ``frame`` (angles, if any, are unaffected)."""
    fixed = gauge_fix_amplitudes(frame.amplitudes, phi)
    return replace(frame, amplitudes=fixed)


def amplitudes_from_angles(chi: float, xi: float, eta: float, phi: float) -> np.ndarray:
    """Forward parameterization of a gauge-fixed eigenvector."""
    return np.array(
        [
            np.exp(-1j * phi) * np.cos(chi / 2) * np.sin(xi / 2),
            np.cos(chi / 2) * np.cos(xi / 2),
            np.exp(-1j * phi) * np.sin(chi / 2) * np.sin(eta / 2),
            np.sin(chi / 2) * np.cos(eta / 2),
        ],
        dtype=complex,
    )


def extract_angles_batch(fixed_amps: np.ndarray, phis: np.ndarray | float):
    """(chi, xi, eta, xi_degenerate, eta_degenerate) arrays for gauge-fixed input."""
    fixed_amps = np.asarray(fixed_amps, dtype=complex)
    phis = np.asarray(phis, dtype=float)
    r = (fixed_amps * _corotation(phis)).real
    top = r[..., 0] ** 2 + r[..., 1] ** 2
    bottom = r[..., 2] ** 2 + r[..., 3] ** 2
    chi = 2.0 * np.arctan2(np.sqrt(bottom), np.sqrt(top))
    xi_degenerate = top < _ANGLE_DEGENERATE_TOL
    eta_degenerate = bottom < _ANGLE_DEGENERATE_TOL
    xi = np.where(xi_degenerate, 0.0, 2.0 * np.arctan2(r[..., 0], r[..., 1]))
    eta = np.where(eta_degenerate, 0.0, 2.0 * np.arctan2(r[..., 2], r[..., 3]))
    return chi, xi, eta, xi_degenerate, eta_degenerate


def extract_angles(frame: EigenFrame, phi: float) -> AngleSet:
    """Invert the eigenvector parameterization; requires a gauge-fixed frame.

    Raises RealityViolation when rebuilding the amplitudes from the extracted
    angles does not reproduce the input, which happens exactly when the frame
    was not gauge fixed first.
    """
    chi, xi, eta, xdeg, edeg = extract_angles_batch(frame.amplitudes, phi)
    angles = AngleSet(float(chi), float(xi), float(eta), bool(xdeg), bool(edeg))
    if not (angles.xi_degenerate or angles.eta_degenerate):
        rebuilt = amplitudes_from_angles(angles.chi, angles.xi, angles.eta, phi)
        mismatch = np.abs(rebuilt - frame.amplitudes).max()
        if mismatch > 1e-9:
            raise RealityViolation(
                f"angle round trip missed by {mismatch:.3e}; frame is not gauge fixed"
            )
    return angles


def frame_with_angles(frame: EigenFrame, phi: float) -> EigenFrame:
    """Gauge-fix ``frame`` and populate its angles."""
    fixed = fix_gauge(frame, phi)
    angles = extract_angles(fixed, phi)
    return replace(
        fixed,
        chi=angles.chi,
        xi=angles.xi,
        eta=angles.eta,
        xi_degenerate=angles.xi_degenerate,
        eta_degenerate=angles.eta_degenerate,
    )


def eigenframes_at(params: ModelParams, phi: float = 0.0) -> tuple[EigenFrame, ...]:
    """Convenience: diagonalize at ``phi`` and return frames with angles set."""
    frames = hermitian_eigensystem(build_block_hamiltonian(params, phi))
    return tuple(frame_with_angles(f, phi) for f in frames)


@dataclass(frozen=True, eq=False)
class LoopTrace:
    """Continuity-tracked samples of one level around the closed azimuth loop.

    ``phis`` holds steps points 2 pi k / steps for k = 0 .. steps-1 (the loop
    closes back onto the first sample), ``amplitudes`` has shape (steps, 4)
    and ``min_gap`` is the smallest adjacent eigenvalue gap seen anywhere on
    the loop.
    """

    params: ModelParams
    label_j: int
    phis: np.ndarray
    energies: np.ndarray
    amplitudes: np.ndarray
    min_gap: float

    @property
    def steps(self) -> int:
        return len(self.phis)

    @property
    def frame0(self) -> EigenFrame:
        """The phi = 0 frame, gauge fixed and with angles extracted."""
        frame = EigenFrame(float(self.energies[0]), self.amplitudes[0], self.label_j)
        return frame_with_angles(frame, float(self.phis[0]))

    def samples(self) -> Iterator[tuple[float, EigenFrame]]:
        for k in range(self.steps):
            yield float(self.phis[k]), EigenFrame(
                float(self.energies[k]), self.amplitudes[k], self.label_j
            )


def _greedy_assignment(abs_overlaps: np.ndarray) -> np.ndarray:
    """Stable greedy matching on descending overlap magnitude.

    Ties below 1e-12 are resolved by prior label order.  Returns perm with
    perm[i] = column matched to previous-step label i.
    """
    k = abs_overlaps.shape[0]
    pairs = sorted(
        ((i, j) for i in range(k) for j in range(k)),
        key=lambda ij: (-round(abs_overlaps[ij] / 1e-12), ij[0], ij[1]),
    )
    perm = np.full(k, -1, dtype=int)
    used = np.zeros(k, dtype=bool)
    for i, j in pairs:
        if perm[i] < 0 and not used[j]:
            perm[i] = j
            used[j] = True
    return perm


def track_all(params: ModelParams, steps: int) -> dict[int, LoopTrace]:
    """Track all four levels around phi: 0 -> 2 pi; one diagonalization pass."""
    if steps < 16:
        raise ValueError(f"steps must be at least 16, got {steps}")
    phis = 2.0 * np.pi * np.arange(steps) / steps
    entries = _hamiltonian_entries(params, phis)
    energies, vectors = np.linalg.eigh(entries)
    amps = np.swapaxes(vectors, -1, -2)  # (steps, level, component)

    spectral_range = float(energies.max() - energies.min())
    min_gap = float(np.diff(energies, axis=1).min())
    tol = DEGENERACY_TOL * max(1.0, spectral_range)
    if min_gap < tol:
        raise DegeneracyEncountered(
            f"adjacent eigenvalue gap {min_gap:.3e} fell below tolerance {tol:.3e}; "
            "the geometric phase of a degenerate level is undefined",
            min_gap=min_gap,
        )

    # Maximal-overlap assignment of step k to step k-1.  With the spectrum
    # independent of phi, ascending-energy order is already consistent; any
    # own-label overlap above 1/sqrt(2) forces the greedy match to be the
    # identity (off-row overlaps of orthonormal sets are then strictly
    # smaller), so the per-step greedy only runs when that fast check fails.
    overlaps = np.einsum("kic,kjc->kij", amps[:-1].conj(), amps[1:])
    diag = np.abs(np.einsum("kii->ki", overlaps))
    if diag.min() <= 1.0 / np.sqrt(2.0):
        for k in range(steps - 1):
            s = np.abs(amps[k].conj() @ amps[k + 1].T)
            perm = _greedy_assignment(s)
            amps[k + 1] = amps[k + 1][perm]
            energies[k + 1] = energies[k + 1][perm]
        diag = np.abs(np.einsum("kic,kic->ki", amps[:-1].conj(), amps[1:]))
    if diag.min() < _CONTINUITY_MIN:
        raise NullOverlap(
            f"consecutive frame overlap {diag.min():.3f} below {_CONTINUITY_MIN}; "
            "increase the number of loop steps"
        )

    return {
        j + 1: LoopTrace(
            params=params,
            label_j=j + 1,
            phis=phis,
            energies=energies[:, j].copy(),
            amplitudes=amps[:, j].copy(),
            min_gap=min_gap,
        )
        for j in range(4)
    }


def track_loop(params: ModelParams, label_j: int, steps: int) -> LoopTrace:
    """Track a single level; see ``track_all`` for the machinery."""
    if label_j not in (1, 2, 3, 4):
        raise ValueError(f"label_j must be 1..4, got {label_j!r}")
    return track_all(params, steps)[label_j]
