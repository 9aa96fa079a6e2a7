"""Exact closed-form moments of polynomial stochastic differential equations.

The pipeline: build the finite moment-closure linear ODE system for a target
monomial moment, check the block-triangular structural condition that
guarantees the closure terminates, solve the linear system exactly (rational
spectra) or numerically, and cross-validate with Euler--Maruyama simulation.
"""

from .closure import (
    ClosureBudget,
    DivergenceReport,
    MomentSystem,
    build_closure,
    build_closure_multi,
    check_closedness,
    system_rows,
)
from .generator import Generator, GeneratorImage, apply_generator, diffusion_product
from .model import (
    InitialCondition,
    MissingMomentError,
    ModelError,
    SdeModel,
    benchmark_names,
    dump_model,
    initial_moment,
    load_benchmark,
    load_model,
    load_model_file,
    parse_rational,
)
from .montecarlo import (
    BlowUpError,
    MomentEstimate,
    SimConfig,
    SimulationError,
    simulate_functional,
    simulate_moment,
)
from .odesolve import (
    ClosedForm,
    ClosedFormUnsupported,
    FunctionalMoment,
    OdeSolveError,
    eval_numeric,
    expm,
    linear_functional_moment,
    markov_tail_bound,
    solve_closed_form,
    solve_closed_form_float,
    solve_closed_form_vector,
)
from .poly import Monomial, ParseError, Polynomial, parse_polynomial
from .prosolve import (
    BlockWeights,
    CertificateError,
    CertificateReport,
    DependencyEdge,
    DependencyGraph,
    OrderedPartition,
    PartitionReport,
    SolvabilityResult,
    build_dependency_graph,
    certify_closure,
    check_prosolvable,
    compute_block_weights,
    verify_partition,
    weighted_degree,
)

__version__ = "0.1.0"

__all__ = [
    "BlockWeights",
    "BlowUpError",
    "CertificateError",
    "CertificateReport",
    "ClosedForm",
    "ClosedFormUnsupported",
    "ClosureBudget",
    "DependencyEdge",
    "DependencyGraph",
    "DivergenceReport",
    "FunctionalMoment",
    "Generator",
    "GeneratorImage",
    "InitialCondition",
    "MissingMomentError",
    "ModelError",
    "MomentEstimate",
    "MomentSystem",
    "Monomial",
    "OdeSolveError",
    "OrderedPartition",
    "ParseError",
    "PartitionReport",
    "Polynomial",
    "SdeModel",
    "SimConfig",
    "SimulationError",
    "SolvabilityResult",
    "apply_generator",
    "benchmark_names",
    "build_closure",
    "build_closure_multi",
    "build_dependency_graph",
    "certify_closure",
    "check_closedness",
    "check_prosolvable",
    "compute_block_weights",
    "diffusion_product",
    "dump_model",
    "eval_numeric",
    "expm",
    "initial_moment",
    "linear_functional_moment",
    "load_benchmark",
    "load_model",
    "load_model_file",
    "markov_tail_bound",
    "parse_polynomial",
    "parse_rational",
    "simulate_functional",
    "simulate_moment",
    "solve_closed_form",
    "solve_closed_form_float",
    "solve_closed_form_vector",
    "system_rows",
    "verify_partition",
    "weighted_degree",
    "__version__",
]
