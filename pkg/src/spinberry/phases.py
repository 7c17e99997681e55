"""Whole-system geometric phases: the discretized Wilson loop and the
closed-form solid-angle expressions, for all three drivings.

Conventions used throughout:

* The numeric phase of a state sequence is -arg of the product of
  consecutive overlaps.  For a closed ray loop the product includes the
  wrap-around overlap and the result is invariant under multiplying any
  state by any unit phase.
* The classical magnetic loop (azimuth phi: 0 -> 2 pi) and the single-mode
  phase-shift loop are genuinely closed: the transport operator returns to
  the identity at 2 pi.  The two-mode rotation does not (exp(-2 pi i Jz) is
  a sector-dependent sign whenever a state straddles two total-photon
  sectors), so that loop is discretized as an open path that includes the
  transported endpoint state; this is the faithful discretization of the
  connection integral over phi in [0, 2 pi].
* Numeric phases are reported in (-pi, pi].  Analytic values are kept
  unreduced (they carry 2 pi n and solid-angle scale information) and every
  comparison is done modulo 2 pi.
* The two-mode numeric/analytic pair is reported with its difference but
  never asserted equal: with the unitary rotation the connection integrates
  to 2 pi cos(theta) <Jz>, while the solid-angle formula evaluates to
  -Omega <Jz> = 2 pi (cos(theta) - 1) <Jz>.  The 2 pi <Jz> gap between the
  two conventions is left as a first-class, inspectable output.
* No dynamical-phase subtraction is performed anywhere: the magnetic loop
  uses instantaneous eigenstates whose overlap product already isolates the
  geometric part, and the driven loops transport a fixed eigenstate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NullOverlap
from .eigensystem import LoopTrace, eigenframes_at, track_loop, EigenFrame
from .model import ModelParams, number_diagonal
from .twomode import embed_two_mode, two_mode_rotation

TWO_PI = 2.0 * math.pi

DEFAULT_MAGNETIC_STEPS = 1024
DEFAULT_QUANTIZED_STEPS = 65536
DEFAULT_TWOMODE_STEPS = 4096

# Convergence is declared when halving the step count moves the phase by
# less than this.
CONVERGENCE_TOL = 1e-6
_MIN_OVERLAP = 1e-6


def _level_index(label_j: int) -> int:
    if label_j not in (1, 2, 3, 4):
        raise ValueError(f"label_j must be 1..4, got {label_j!r}")
    return label_j - 1


def wrap_angle(x):
    """Reduce an angle (or array of angles) to the interval (-pi, pi]."""
    w = np.mod(np.asarray(x, dtype=float), TWO_PI)
    w = np.where(w > np.pi, w - TWO_PI, w)
    return float(w) if w.ndim == 0 else w


def phase_distance(a: float, b: float) -> float:
    """Distance between two phases modulo 2 pi."""
    return abs(wrap_angle(a - b))


@dataclass(frozen=True)
class PhaseReport:
    """Numeric and analytic phase for one loop, compared modulo 2 pi."""

    numeric_phase: float
    analytic_phase: float
    difference_mod_2pi: float
    loop_steps: int
    converged: bool

    @staticmethod
    def build(numeric: float, analytic: float, steps: int, converged: bool) -> "PhaseReport":
        return PhaseReport(
            numeric_phase=numeric,
            analytic_phase=analytic,
            difference_mod_2pi=wrap_angle(analytic - numeric),
            loop_steps=steps,
            converged=converged,
        )


def wilson_loop_phase(states, closed: bool = True) -> float:
    """Phase of a discretized loop: -arg of the overlap product, in (-pi, pi].

    ``states`` is a sequence (or (M, d) array) of at least 3 normalized
    vectors of a common dimension.  With ``closed`` the wrap-around overlap
    <s_last|s_first> closes the product and the result is invariant under
    per-state phase changes; without it the caller supplies the endpoint
    state explicitly and the endpoint phases are part of the answer.
    """
    s = np.asarray(states, dtype=complex)
    if s.ndim != 2 or s.shape[0] < 3:
        raise ValueError(f"need at least 3 states of a common dimension, got shape {s.shape}")
    norms = np.linalg.norm(s, axis=1)
    worst = np.abs(norms - 1.0).max()
    if worst > 1e-10:
        raise ValueError(f"states must be normalized within 1e-10 (worst deviation {worst:.3e})")

    overlaps = np.einsum("kc,kc->k", s[:-1].conj(), s[1:])
    if closed:
        overlaps = np.append(overlaps, np.vdot(s[-1], s[0]))
    moduli = np.abs(overlaps)
    if moduli.min() < _MIN_OVERLAP:
        raise NullOverlap(
            f"consecutive overlap modulus {moduli.min():.3e} below {_MIN_OVERLAP}; "
            "the loop is under-sampled"
        )
    return wrap_angle(-np.angle(np.prod(overlaps / moduli)))


def solid_angle_fixed_latitude(x: float) -> float:
    """Solid angle enclosed by a fixed-latitude circle on the unit sphere."""
    return TWO_PI * (1.0 - math.cos(x))


def berry_magnetic_analytic(chi: float, xi: float, eta: float) -> float:
    """Closed-form magnetic-loop phase: a weighted pair of solid angles.

    The two co-rotating components transport on fixed-latitude circles of
    latitudes eta and xi; the half-angle populations of chi weight them.
    The value lies in [0, 4 pi).
    """
    weight_bottom = math.sin(chi / 2) ** 2
    weight_top = math.cos(chi / 2) ** 2
    return 0.5 * (
        weight_bottom * solid_angle_fixed_latitude(eta)
        + weight_top * solid_angle_fixed_latitude(xi)
    )


def _numeric_with_convergence(states: np.ndarray, closed: bool) -> tuple[float, bool]:
    # Every other sample of a uniform grid is the half-resolution loop; an
    # open path keeps its endpoint because it holds an odd number of states.
    numeric = wilson_loop_phase(states, closed=closed)
    coarse = wilson_loop_phase(states[::2], closed=closed)
    return numeric, phase_distance(numeric, coarse) < CONVERGENCE_TOL


def berry_magnetic_report_from_trace(trace: LoopTrace) -> PhaseReport:
    """Wilson-loop phase of a tracked level against the closed form."""
    numeric, converged = _numeric_with_convergence(trace.amplitudes, closed=True)
    frame = trace.frame0
    analytic = berry_magnetic_analytic(frame.chi, frame.xi, frame.eta)
    return PhaseReport.build(numeric, analytic, trace.steps, converged)


def berry_magnetic_numeric(
    params: ModelParams, label_j: int, steps: int = DEFAULT_MAGNETIC_STEPS
) -> PhaseReport:
    """Magnetic-loop phase of level ``label_j`` by tracking the eigenvector."""
    if steps % 2:
        raise ValueError("steps must be even so the halving test can reuse the loop")
    return berry_magnetic_report_from_trace(track_loop(params, label_j, steps))


def berry_quantized_analytic(chi: float, n_photon: int) -> float:
    """Phase-shift-loop phase: pi (1 - cos chi) + 2 pi n, unreduced."""
    return math.pi * (1.0 - math.cos(chi)) + TWO_PI * n_photon


def _phase_ramp_states(amplitudes: np.ndarray, generator_diag: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """States exp(-i phi G) |psi> for a diagonal generator G, shape (len(phis), d)."""
    return np.exp(-1j * np.outer(phis, generator_diag)) * amplitudes


def berry_quantized_report_from_frame(
    frame: EigenFrame, params: ModelParams, steps: int = DEFAULT_QUANTIZED_STEPS
) -> PhaseReport:
    if steps % 2:
        raise ValueError("steps must be even so the halving test can reuse the loop")
    if frame.chi is None:
        raise ValueError("the frame needs extracted angles; see frame_with_angles")
    phis = TWO_PI * np.arange(steps) / steps
    states = _phase_ramp_states(frame.amplitudes, number_diagonal(params), phis)
    numeric, converged = _numeric_with_convergence(states, closed=True)
    analytic = berry_quantized_analytic(frame.chi, params.n_photon)
    return PhaseReport.build(numeric, analytic, steps, converged)


def berry_quantized_numeric(
    params: ModelParams, label_j: int, steps: int = DEFAULT_QUANTIZED_STEPS
) -> PhaseReport:
    """Loop the photon-number phase shift exp(-i phi a^dag a) over a fixed
    eigenstate; the loop closes exactly because the generator is integral."""
    frame = eigenframes_at(params)[_level_index(label_j)]
    return berry_quantized_report_from_frame(frame, params, steps)


def two_mode_berry_analytic(
    chi: float, n_photon: int, n_prime: int, solid_angle: float
) -> float:
    """Solid-angle form of the two-mode loop phase, unreduced and exactly
    linear in the solid angle."""
    return -0.5 * solid_angle * ((n_photon - n_prime) + math.sin(chi / 2) ** 2)


def two_mode_jz_expectation(chi: float, n_photon: int, n_prime: int) -> float:
    """<Jz> of a block eigenstate tensored with |n'>."""
    return 0.5 * ((n_photon - n_prime) + math.sin(chi / 2) ** 2)


def two_mode_berry_numeric(
    params: ModelParams,
    label_j: int,
    theta: float,
    steps: int = DEFAULT_TWOMODE_STEPS,
) -> PhaseReport:
    """Two-mode loop phase at fixed latitude theta, phi: 0 -> 2 pi.

    The endpoint state U(theta, 2 pi)|psi> is included because the rotation
    group element does not return to the identity; see the module notes.  The
    report carries the solid-angle analytic value and their difference modulo
    2 pi, which is not asserted to vanish.
    """
    if steps % 2:
        raise ValueError("steps must be even so the halving test can reuse the path")
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    frame = eigenframes_at(params)[_level_index(label_j)]
    rotated = two_mode_rotation(embed_two_mode(frame, params), theta, 0.0)
    phis = TWO_PI * np.arange(steps + 1) / steps
    states = _phase_ramp_states(rotated.amplitudes, rotated.basis.jz, phis)
    numeric, converged = _numeric_with_convergence(states, closed=False)
    analytic = two_mode_berry_analytic(
        frame.chi, params.n_photon, params.n_prime, solid_angle_fixed_latitude(theta)
    )
    return PhaseReport.build(numeric, analytic, steps, converged)
