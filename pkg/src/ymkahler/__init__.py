"""Numerical laboratory for Yang-Mills gauge fields on a flat Kahler 4-torus.

Modules:
    algebra      su(2)/so(3)/u(1) kernel with bracket and ad-invariant metric
    lattice      periodic grid, Hodge star, Kahler operators, (p,q)/SD-ASD
                 projections, d/d*, norms, logarithmic cutoff
    gauge        connections, covariant operators, curvature, energies,
                 gauge transformations
    spectral     least eigenvalues lambda(A), mu(A), covariant solves
    deform       contraction iteration to vanishing omega-trace curvature,
                 Yang-Mills gradient flow, harmonicity residuals
    diagnostics  Bochner/Yang-Mills identity checks, rank-one structure,
                 L^p ratio probes
    io           YMK1 field snapshots, JSONL experiment records
    cli          the `ymk` command-line entry point
"""
from .algebra import SU2, SO3, U1, CLieElement, GroupKind, LieElement, group
from .errors import (
    NearReducible,
    NoContraction,
    NonConvergence,
    SolverStagnation,
    StepRejectionLimit,
    UnresolvableCutoff,
    UsageError,
    YmkError,
)
from .gauge import Connection, CurvatureSplit, GaugeTransform, curvature, random_connection
from .lattice import CutoffProfile, LatticeForm, PQForm, Torus4
from .spectral import EigenResult, MuResult, SpectralConfig, lambda_A, mu_A
from .deform import (
    DeformConfig,
    DeformResult,
    FlowConfig,
    FlowResult,
    deform_to_trace_free,
    ym_gradient_flow,
)

__version__ = "0.1.0"
