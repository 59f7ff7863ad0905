"""Backstepping stabilization of the periodic transport equation with an
internal scalar control: spectral core, feedback synthesis, Fredholm
transform, two independent simulators and a certification suite."""

from .controller import (
    GrowthCertificate,
    JumpCoefficients,
    PiecewisePoly,
    RawCoefficients,
    SpectralProfile,
    fourier_coefficients,
    gauge_transform,
    growth_certificate,
    jump_coefficients,
)
from .errors import (
    BandwidthError,
    ConfigError,
    ControllabilityError,
    DegenerateJumpsError,
    InstabilityError,
    PeriodMismatchError,
)
from .feedback import (
    FeedbackLaw,
    FeedbackSplit,
    evaluate_feedback,
    gain,
    project_to_kernel,
    regular_part,
    singular_part,
    split_feedback,
    synthesize_feedback,
    tail_ratio_probe,
)
from .finitedim import FiniteSystem, gramian_feedback_check, solve_backstepping
from .simulate import (
    DecayFit,
    SimConfig,
    Trajectory,
    closed_loop_conjugate,
    conjugate_trajectory,
    decay_fit,
    galerkin_trajectory,
    lyapunov_energy,
    project_to_d1,
    random_trig_poly,
    target_evolve,
    trajectory_agreement,
)
from .spectral import (
    DEFAULT_RTOL,
    FourierVector,
    convolve,
    derivative,
    eval_at,
    lambda_modes,
    lambda_profile,
    sample_values,
    sobolev_norm,
    sobolev_weights,
)
from .transform import BacksteppingTransform
from .verify import (
    CertificationReport,
    CheckResult,
    chi_indicator,
    criticality_check,
    operator_identity_general,
    operator_identity_residual,
    riesz_bounds_check,
    run_full_suite,
    weak_tb_check,
    weak_tb_table,
)

__version__ = "0.1.0"
