"""Numerical laboratory for the rank-one multiplicative perturbation
G(t) = U (I - (1-t) v v*) of a Haar unitary matrix: eigenvalue
trajectories, outlier separation by disk counting, and Monte Carlo
verification of the exact unitary-ensemble identities behind them."""

from .version import __version__
from .errors import (
    CollisionSingularity,
    ConfigInvalid,
    DegenerateNormalization,
    DegenerateOmega,
    Divergence,
    IoError,
    MatchingAmbiguous,
    NearSingular,
    NonConvergence,
    NotUnitary,
    SchemaMismatch,
    SingularInput,
    StepCollapse,
    TimeSingularity,
    UALabError,
)
from .rng import RngStream, stream
from .sampling import sample_beta, sample_haar_unitary, sample_unit_vector
from .linalg import (
    EigenSystem,
    general_eigensystem,
    singular_values,
    unitarity_defect,
    unitary_eigensystem,
)
from .model import (
    ResolventEval,
    SpectrumSnapshot,
    UAModel,
    assemble,
    expected_outlier_location,
    omega1,
    outlier_location,
    resolvent_eval,
    spectrum,
    verify_characterization,
    verify_structure,
)
from .trajectories import (
    CALIBRATED_FIELD_SIGN,
    TrajectoryBundle,
    calibrate_field_sign,
    integrate_ode,
    ode_vector_field,
    track,
    validate_dynamics,
)
from .rouche import (
    DiskSpec,
    EnsembleConfig,
    SeparationReport,
    SweepResult,
    classify_snapshot,
    critical_window_stats,
    rouche_membership,
    simplified_disks,
    theorem_disks,
    timescale_sweep,
)
from .hyper import euler_transform, hyp2f1, partition_sum_identity, pochhammer
from .cuestats import (
    IdentityReport,
    MCEstimate,
    check_averaged_law,
    cue_phase_identities,
    eigvec_overlap_check,
    empty_disk_probability,
    exact_var_w2,
    identity_suite,
    kostlan_check,
    mc_domination_w2,
    mc_w2_moments,
    poissonized_spectrum,
)
from .config import CONFIG_SCHEMA, ExperimentConfig, GridSpec, load_config, validate_config
from .runner import RunManifest, run
from .svg import emit_trajectory_svg

__all__ = [name for name in dir() if not name.startswith("_")]
