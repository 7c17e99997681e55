"""Reduced density matrices, concurrence and mixed-state geometric phases.

The mixed-state phase of a subsystem whose reduced matrix is transported
rigidly around a loop is arg of the weighted sum of its eigenvector loop
phases,

    Gamma = arg sum_l p_l exp(i beta_l),

with the weights p_l constant along the loop (verified at run time).  The
closed-form arctangent displays for Gamma are branch-lossy, so they are
evaluated internally through this arg form (for particle 2 under magnetic
driving) or with an explicit branch rule (for the two-mode subsystem), and
the numeric route always stays available as the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LoopInvariantViolation, ReducedDegeneracy
from .eigensystem import EigenFrame, LoopTrace, eigenframes_at
from .model import ModelParams
from .phases import TWO_PI, solid_angle_fixed_latitude, wilson_loop_phase, wrap_angle
from .twomode import embed_two_mode, two_mode_rotation

PARTICLE_2 = "particle2"
PARTICLE_1_FIELD = "particle1_field"

_HERMITICITY_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIGENVALUE_SLACK = 1e-12
_WEIGHT_DRIFT_TOL = 1e-9
_REDUCED_GAP_TOL = 1e-9
_NEGLIGIBLE_WEIGHT = 1e-12


@dataclass(frozen=True, eq=False)
class ReducedState:
    """A reduced density matrix tagged with the subsystem that was kept."""

    matrix: np.ndarray
    partition_tag: str

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > _HERMITICITY_TOL:
            raise ValueError("reduced matrix is not Hermitian")
        trace = rho.trace().real
        if abs(trace - 1.0) > _TRACE_TOL:
            raise ValueError(f"reduced matrix trace {trace!r} is not 1")
        eigenvalues = np.linalg.eigvalsh(rho)
        if eigenvalues.min() < -_EIGENVALUE_SLACK or eigenvalues.max() > 1.0 + _EIGENVALUE_SLACK:
            raise ValueError(f"reduced matrix eigenvalues {eigenvalues} out of [0, 1]")
        object.__setattr__(self, "matrix", rho)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _amplitude_matrix(amplitudes: np.ndarray) -> np.ndarray:
    """Reshape (..., 4) block amplitudes into (..., A, B) with A the
    particle-1-plus-field pair {(e1, n), (g1, n+1)} and B the spin of
    particle 2."""
    return np.asarray(amplitudes, dtype=complex).reshape(amplitudes.shape[:-1] + (2, 2))


def reduced_particle2_from_angles(chi: float, xi: float, eta: float, phi: float) -> np.ndarray:
    """The particle-2 reduced matrix written in the extracted angles."""
    u = math.cos(chi / 2) ** 2
    v = math.sin(chi / 2) ** 2
    diag_e = u * math.sin(xi / 2) ** 2 + v * math.sin(eta / 2) ** 2
    diag_g = u * math.cos(xi / 2) ** 2 + v * math.cos(eta / 2) ** 2
    off = 0.5 * np.exp(-1j * phi) * (u * math.sin(xi) + v * math.sin(eta))
    return np.array([[diag_e, off], [np.conj(off), diag_g]], dtype=complex)


def reduce_to_particle2(frame: EigenFrame, phi: float | None = None) -> ReducedState:
    """Partial trace over particle 1 and the field.

    When ``phi`` is supplied and the frame carries extracted angles, the
    contraction is cross-checked against its closed angle form.
    """
    m = _amplitude_matrix(frame.amplitudes)
    rho = np.einsum("ab,ac->bc", m, m.conj())
    state = ReducedState(rho, PARTICLE_2)
    if phi is not None and frame.chi is not None:
        reference = reduced_particle2_from_angles(frame.chi, frame.xi, frame.eta, phi)
        mismatch = np.abs(rho - reference).max()
        if mismatch > 1e-10:
            raise LoopInvariantViolation(
                f"particle-2 reduction disagrees with its angle form by {mismatch:.3e}"
            )
    return state


def reduce_to_particle1_field(frame: EigenFrame) -> ReducedState:
    """Partial trace over particle 2."""
    m = _amplitude_matrix(frame.amplitudes)
    rho = np.einsum("ab,cb->ac", m, m.conj())
    return ReducedState(rho, PARTICLE_1_FIELD)


def concurrence_pure(frame: EigenFrame) -> float:
    """Entanglement of the pure state across (particle 1 + field | particle 2).

    Computed gauge invariantly as twice the modulus of the amplitude-matrix
    determinant; equals |sin(chi) sin((xi - eta)/2)| in the extracted angles.
    """
    c = frame.amplitudes
    return 2.0 * abs(c[0] * c[3] - c[1] * c[2])


def concurrence_from_angles(chi: float, xi: float, eta: float) -> float:
    """Signed angle form of the pure-state concurrence."""
    return math.sin(chi) * math.sin((xi - eta) / 2)


@dataclass(frozen=True)
class MixedPhaseReport:
    """Sjoqvist-style phase: weights, per-eigenvector loop phases and Gamma."""

    weights: tuple[float, ...]
    eigenvector_phases: tuple[float, ...]
    gamma: float
    loop_steps: int
    analytic_gamma: float | None = None
    difference_mod_2pi: float | None = None
    branch_singular: bool = False
    at_concurrence_limit: bool = False

    def __post_init__(self):
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {total!r}, expected 1")


def _combine(weights, phases) -> float:
    return wrap_angle(
        float(np.angle(sum(p * np.exp(1j * b) for p, b in zip(weights, phases))))
    )


@dataclass(frozen=True)
class ClosedFormPhase:
    """A closed-form phase value plus the flags its display can require."""

    value: float
    branch_singular: bool = False
    at_concurrence_limit: bool = False


def _display_tan_argument_singular(x: float) -> bool:
    """True when x sits within 1e-9 of pi/2 + k pi, where tan diverges."""
    return abs(math.remainder(x - math.pi / 2, math.pi)) < 1e-9


def gamma2_closed_form(chi: float, xi: float, eta: float) -> ClosedFormPhase:
    """Closed-form mixed-state phase of particle 2 under the magnetic loop.

    The particle-2 Bloch vector at azimuth zero has
    s_z = -(cos^2(chi/2) cos(xi) + sin^2(chi/2) cos(eta)) and in-plane
    component cos^2(chi/2) sin(xi) + sin^2(chi/2) sin(eta).  Its eigenvector
    loop phases are pi (1 +- s_z/|s|), so the arg form has no branch
    ambiguity; the equivalent arctangent display, tan_arg = -pi s_z/|s| with
    prefactor |s|, is only flagged here for its singular points.
    """
    u = math.cos(chi / 2) ** 2
    v = math.sin(chi / 2) ** 2
    s_x = u * math.sin(xi) + v * math.sin(eta)
    s_z = -(u * math.cos(xi) + v * math.cos(eta))
    s = math.hypot(s_x, s_z)
    if s < 1e-15:
        raise ReducedDegeneracy(
            "particle-2 reduced state is maximally mixed; its eigenvector loops are undefined"
        )
    cos_latitude = s_z / s
    gamma = wrap_angle(
        math.pi
        + math.atan2(s * math.sin(math.pi * cos_latitude), math.cos(math.pi * cos_latitude))
    )
    return ClosedFormPhase(gamma, _display_tan_argument_singular(-math.pi * cos_latitude))


def _branched_arctan_term(prefactor: float, tan_argument: float) -> tuple[float, bool]:
    """arctan(prefactor * tan(x)) continued across branch cuts in x.

    The branch is chosen by continuity in the tan argument: each time x
    crosses pi/2 + k pi the principal value is shifted by pi, which makes the
    term reduce to x exactly when prefactor = 1.
    """
    k = round(tan_argument / math.pi)
    singular = _display_tan_argument_singular(tan_argument)
    value = k * math.pi + math.atan(prefactor * math.tan(tan_argument - k * math.pi))
    return value, singular


def gamma_2q_subsystem_analytic(
    chi: float,
    xi: float,
    eta: float,
    n_photon: int,
    n_prime: int,
    solid_angle: float,
) -> ClosedFormPhase:
    """Closed-form two-mode subsystem phase, in its concurrence form.

    Both algebraic routes, through the angles and through the concurrence,
    are evaluated and must agree within 1e-10 away from branch singularities.
    At concurrence 1 the arctangent factor degenerates; the linear limit
    solid_angle * cos(chi) / 4 is used and flagged.
    """
    c = concurrence_from_angles(chi, xi, eta)
    prefactor_angles = math.sqrt(
        math.sin(chi) ** 2 * math.cos((xi - eta) / 2) ** 2 + math.cos(chi) ** 2
    )
    prefactor_conc = math.sqrt(max(1.0 - c * c, 0.0))
    lead = -0.5 * solid_angle * ((n_photon - n_prime) + 0.5)

    def term(prefactor: float) -> tuple[float, bool, bool]:
        if prefactor < 1e-6:
            return solid_angle * math.cos(chi) / 4.0, False, True
        x = solid_angle * math.cos(chi) / (4.0 * prefactor)
        value, singular = _branched_arctan_term(prefactor, x)
        return value, singular, False

    value_conc, singular, limit = term(prefactor_conc)
    value_angles, _, _ = term(prefactor_angles)
    if not singular and not limit and abs(value_conc - value_angles) > 1e-10:
        raise LoopInvariantViolation(
            "angle and concurrence forms of the subsystem phase disagree by "
            f"{abs(value_conc - value_angles):.3e}"
        )
    return ClosedFormPhase(lead + value_conc, singular, limit)


def _track_reduced_eigenvectors(rhos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched diagonalization of (M, d, d) reduced matrices with ascending
    eigenvalues tracked by maximal overlap between consecutive samples."""
    from .eigensystem import _greedy_assignment

    eigenvalues, vectors = np.linalg.eigh(rhos)
    vecs = np.swapaxes(vectors, -1, -2)  # (M, level, component)
    diag = np.abs(np.einsum("kic,kic->ki", vecs[:-1].conj(), vecs[1:]))
    if diag.min() <= 1.0 / np.sqrt(2.0):
        for k in range(len(rhos) - 1):
            s = np.abs(vecs[k].conj() @ vecs[k + 1].T)
            perm = _greedy_assignment(s)
            vecs[k + 1] = vecs[k + 1][perm]
            eigenvalues[k + 1] = eigenvalues[k + 1][perm]
    return eigenvalues, vecs


def mixed_phase_numeric(
    loop: LoopTrace, keep: str = PARTICLE_2, steps: int | None = None
) -> MixedPhaseReport:
    """Mixed-state phase of a subsystem along a tracked magnetic loop.

    The reduced matrix is diagonalized at every loop sample, its eigenvectors
    are tracked by maximal overlap, each eigenvector loop contributes its
    closed Wilson phase, and the constant weights combine them.  For the
    particle-2 partition the closed form supplies the analytic partner.
    """
    if keep not in (PARTICLE_2, PARTICLE_1_FIELD):
        raise ValueError(f"unknown partition tag {keep!r}")
    amplitudes = loop.amplitudes
    if steps is not None:
        if steps < 16 or loop.steps % steps:
            raise ValueError(f"steps must divide the {loop.steps}-step loop, got {steps}")
        amplitudes = amplitudes[:: loop.steps // steps]

    m = _amplitude_matrix(amplitudes)
    if keep == PARTICLE_2:
        rhos = np.einsum("kab,kac->kbc", m, m.conj())
    else:
        rhos = np.einsum("kab,kcb->kac", m, m.conj())
    ReducedState(rhos[0], keep)  # validates Hermiticity, trace and positivity

    eigenvalues, vecs = _track_reduced_eigenvectors(rhos)
    drift = np.abs(eigenvalues - eigenvalues[0]).max()
    if drift > _WEIGHT_DRIFT_TOL:
        raise LoopInvariantViolation(
            f"reduced-state eigenvalues drift by {drift:.3e} along the loop"
        )
    gap = np.diff(eigenvalues, axis=1).min()
    if gap < _REDUCED_GAP_TOL:
        raise ReducedDegeneracy(
            f"reduced-state eigenvalue gap {gap:.3e} below {_REDUCED_GAP_TOL}"
        )

    weights = tuple(float(p) for p in eigenvalues[0])
    betas = tuple(
        wilson_loop_phase(vecs[:, level, :], closed=True)
        for level in range(vecs.shape[1])
    )
    gamma = _combine(weights, betas)

    analytic = difference = None
    branch_singular = False
    if keep == PARTICLE_2:
        frame = loop.frame0
        closed = gamma2_closed_form(frame.chi, frame.xi, frame.eta)
        analytic = closed.value
        branch_singular = closed.branch_singular
        difference = wrap_angle(analytic - gamma)
    return MixedPhaseReport(
        weights=weights,
        eigenvector_phases=betas,
        gamma=gamma,
        loop_steps=len(amplitudes),
        analytic_gamma=analytic,
        difference_mod_2pi=difference,
        branch_singular=branch_singular,
    )


def mixed_phase_two_mode_numeric(
    params: ModelParams,
    label_j: int,
    theta: float,
    steps: int = 4096,
) -> MixedPhaseReport:
    """Mixed-state phase of particle 1 plus both field modes under the
    two-mode loop at fixed latitude theta.

    The loop acts only on the kept subsystem and is diagonal in the photon
    basis, so each reduced eigenvector is transported by exact phase ramps;
    the per-eigenvector phases are open-path products including the
    transported endpoint, mirroring the whole-system two-mode loop.  The
    closed-form partner is reported with its difference, not asserted.
    """
    if label_j not in (1, 2, 3, 4):
        raise ValueError(f"label_j must be 1..4, got {label_j!r}")
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    frame = eigenframes_at(params)[label_j - 1]
    rotated = two_mode_rotation(embed_two_mode(frame, params), theta, 0.0)
    basis = rotated.basis
    m = rotated.amplitudes.reshape(-1, 2)  # (particle 1 + fields, spin of particle 2)
    rho = m @ m.conj().T
    ReducedState(rho, PARTICLE_1_FIELD)
    jz_kept = basis.jz[::2]  # particle-2 spin is the fastest basis index

    eigenvalues, vectors = np.linalg.eigh(rho)
    keep_mask = eigenvalues > _NEGLIGIBLE_WEIGHT
    kept = np.nonzero(keep_mask)[0]
    if len(kept) > 1:
        gaps = np.diff(eigenvalues[kept])
        if gaps.min() < _REDUCED_GAP_TOL:
            raise ReducedDegeneracy(
                f"reduced-state eigenvalue gap {gaps.min():.3e} below {_REDUCED_GAP_TOL}"
            )

    # The weights cannot drift: conjugating rho by the diagonal phase ramp
    # preserves its spectrum.  Verify once at a quarter turn anyway.
    ramp = np.exp(-1j * (math.pi / 2) * jz_kept)
    rho_quarter = rho * np.outer(ramp, ramp.conj())
    drift = np.abs(np.linalg.eigvalsh(rho_quarter) - eigenvalues).max()
    if drift > _WEIGHT_DRIFT_TOL:
        raise LoopInvariantViolation(
            f"reduced-state eigenvalues drift by {drift:.3e} under the loop ramp"
        )

    phis = TWO_PI * np.arange(steps + 1) / steps
    weights, betas = [], []
    for level in kept:
        v = vectors[:, level]
        states = np.exp(-1j * np.outer(phis, jz_kept)) * v
        betas.append(wilson_loop_phase(states, closed=False))
        weights.append(float(eigenvalues[level]))
    # Renormalize away the discarded numerically-zero weights.
    total = sum(weights)
    weights = [w / total for w in weights]
    gamma = _combine(weights, betas)

    closed = gamma_2q_subsystem_analytic(
        frame.chi,
        frame.xi,
        frame.eta,
        params.n_photon,
        params.n_prime,
        solid_angle_fixed_latitude(theta),
    )
    return MixedPhaseReport(
        weights=tuple(weights),
        eigenvector_phases=tuple(betas),
        gamma=gamma,
        loop_steps=steps,
        analytic_gamma=closed.value,
        difference_mod_2pi=wrap_angle(closed.value - gamma),
        branch_singular=closed.branch_singular,
        at_concurrence_limit=closed.at_concurrence_limit,
    )
