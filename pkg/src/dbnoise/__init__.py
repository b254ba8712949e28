"""Two identical electrons scattering on a driven double barrier.

Simulates counter-injected Gaussian packets on a 1D resonant-tunneling
structure whose well floor oscillates, extracts the probabilities of
detecting both electrons on the same side, and evaluates the resulting
zero-frequency noise as a function of injection energy and drive
frequency.
"""

__version__ = "0.1.0"

from .config import (
    ExperimentConfig,
    build_experiment,
    default_config,
    load_config,
    write_default_config,
)
from .errors import (
    ArcsinDomainError,
    BoundaryContaminationError,
    ConfigError,
    DbnoiseError,
    GridTooSmallError,
    MismatchedGridError,
    MismatchedTimeError,
    NegativeProbabilityError,
    NoResonanceError,
    NotSettledError,
    NotSettledInputError,
    SolverError,
    TruncationError,
)
from .model import (
    ELECTRON_MASS,
    HBAR,
    Grid1D,
    PhysicalModel,
    PotentialSpec,
    WaveField,
    WavePacketSpec,
    build_potential,
    init_gaussian,
)
from .noise import (
    NOISE_UNIT_SI,
    CountDistribution,
    NoiseRecord,
    OccupationPair,
    count_distribution,
    noise,
    variance_identity_check,
)
from .propagation import (
    PropagationConfig,
    PropagationResult,
    evolve_to,
    propagate_until_settled,
    step,
)
from .resonance import (
    RidgePrediction,
    StaticSpectrum,
    arrival_time,
    build_ridge_prediction,
    electron_velocity,
    find_resonances,
    invert_ridge,
    packet_averaged_transmission,
    ridge_frequency,
    scan_spectrum,
    shifted_resonance,
    transfer_matrix_transmission,
    transit_time,
)
from .scattering import (
    ScatteringRecord,
    analyze_pair,
    coefficients,
    overlap,
    quadrant_probabilities,
    two_particle_quadrant_oracle,
)
from .sweep import (
    RidgeReport,
    SingleResult,
    SweepPlan,
    SweepResult,
    extract_ridge,
    run_single,
    run_sweep,
)
