"""Berry phases of two coupled spins in composite classical and quantized
driving fields: closed-form and Wilson-loop routes, subsystem mixed-state
phases, concurrence, and reproducible parameter sweeps."""

from .errors import (
    DegeneracyEncountered,
    LoopInvariantViolation,
    NullOverlap,
    ReducedDegeneracy,
    RealityViolation,
    SpinberryError,
    UsageError,
)
from .model import (
    BASIS_LABELS,
    BlockHamiltonian,
    ModelParams,
    build_block_hamiltonian,
    lambda_n,
    number_diagonal,
    number_operator_block,
)
from .eigensystem import (
    AngleSet,
    EigenFrame,
    LoopTrace,
    amplitudes_from_angles,
    eigenframes_at,
    extract_angles,
    fix_gauge,
    frame_with_angles,
    hermitian_eigensystem,
    track_all,
    track_loop,
)
from .twomode import TwoModeBasis, TwoModeState, embed_two_mode, two_mode_rotation
from .phases import (
    PhaseReport,
    berry_magnetic_analytic,
    berry_magnetic_numeric,
    berry_quantized_analytic,
    berry_quantized_numeric,
    phase_distance,
    solid_angle_fixed_latitude,
    two_mode_berry_analytic,
    two_mode_berry_numeric,
    two_mode_jz_expectation,
    wilson_loop_phase,
    wrap_angle,
)
from .subsystem import (
    ClosedFormPhase,
    MixedPhaseReport,
    ReducedState,
    concurrence_from_angles,
    concurrence_pure,
    gamma2_closed_form,
    gamma_2q_subsystem_analytic,
    mixed_phase_numeric,
    mixed_phase_two_mode_numeric,
    reduce_to_particle1_field,
    reduce_to_particle2,
    reduced_particle2_from_angles,
)
from .sweeps import (
    GENERIC_PARAMS,
    GENERIC_THETA,
    SCENARIOS,
    SweepSpec,
    run_scenario,
    run_scenario_suite,
    run_sweep,
)
from .svgplot import emit_plot

__version__ = "0.1.0"
