"""Exact tail asymptotics for generalised symmetrised Dirichlet random vectors."""

from .asymptotics import (
    IndexSplit,
    TailAsymptotics,
    ThresholdSpec,
    corollary2,
    index_split,
    orthant_probability,
    tau_JL,
    tau_L_full,
    tau_star_M,
    theorem31,
    threshold_normalize,
)
from .errors import (
    AccuracyError,
    AmbiguityError,
    ArgumentError,
    DegeneracyError,
    DivergedError,
    GsdError,
    InsufficientSamplesError,
    MatrixError,
    ModelValidationError,
    OracleFailure,
    OutOfDomainError,
    UnsupportedCaseError,
)
from .experiments import ExperimentReport, report_emit, run_example1, run_example2
from .kernels import BACKEND
from .model import (
    SINGULAR,
    AlphaVector,
    KotzParams,
    MixingMatrix,
    ModelSpec,
    gsd_joint_density,
    kotz_density,
    sd_density,
    subvector_joint_density,
    subvector_radial_density,
)
from .qp import QpProblem, QpSolution, brute_force_min, solve, solve_qp, verify_solution
from .radial import ChiRadial, KotzRadial, WeibullTail, law_from_dict, mda_certificate
from .sampler import McEstimate, conditional_excess, make_rng, mc_tail, sample_gsd, sample_sd

__version__ = "0.1.0"
