"""Real-time virtual sensing of structural vibration.

Reconstructs unmeasured applied forces and full-field responses from a
few measured displacement or acceleration channels, by combining
component-mode model reduction with an implicit time integrator that
performs Tikhonov-regularized inverse force identification at every step.
"""

from .akf import AkfConfig, AugmentedKalmanFilter, akf_run, akf_setup
from .errors import (
    AsymmetricInput,
    ConfigError,
    DimensionMismatch,
    DivergedFilter,
    EmptyBand,
    GridMismatch,
    InvalidBand,
    InvalidSpec,
    MeasuredModalCoordinate,
    NoConvergence,
    NonFiniteMeasurement,
    NotPositiveDefinite,
    ParseError,
    SampleRateMismatch,
    SingularBlock,
    SingularEffectiveStiffness,
    SingularNormalMatrix,
    SingularSlaveBlock,
    SingularUnmeasuredBlock,
    UnknownLabel,
    UnknownProfile,
    VibsenseError,
)
from .identify import (
    IdentifySession,
    NewmarkParams,
    NewmarkSimulator,
    NewmarkState,
    StepResult,
    forward_step,
    run_session,
    session_setup,
)
from .metrics import FdeReport, TimingStats, fde, timing_stats
from .model import (
    BeamSpec,
    FullModel,
    build_cantilever_beam,
    build_spring_mass_chain,
    import_matrices,
    load_model,
    rayleigh_damping,
    save_model,
)
from .numerics import (
    Factorization,
    factorize,
    pencil_eigenvalues,
    schur_complement_inverse,
    sym_generalized_eig,
)
from .partition import PartitionedModel, reorder
from .regularize import (
    LCurvePoint,
    LCurveResult,
    default_alpha_grid,
    lcurve_corner,
    lcurve_select,
    tikhonov_gain,
    tikhonov_solve,
)
from .rom import (
    Partition,
    ReducedModel,
    constraint_modes,
    eigenvalue_error,
    load_reduced,
    partition_by_labels,
    reduce_model,
    save_reduced,
)
from .signals import (
    SignalSeries,
    add_noise,
    bandlimited_random_force,
    chirp_tone_force,
    read_csv,
    snr_db,
    write_csv,
)

__version__ = "0.1.0"
