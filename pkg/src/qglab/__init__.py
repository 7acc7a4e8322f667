"""Spectral laboratory for Schrödinger operators on compact metric graphs.

Operators -d²/dx² + q(x) act edgewise; at each vertex the functions are
continuous and the inward derivatives sum to sigma_v times the vertex
value.  The package computes spectra two independent ways (a matching
determinant scanned in a spectral variable, and a finite-element
discretization), verifies the averaged eigenvalue-shift identity
relating a perturbed spectrum to the free one, and evaluates
Ambarzumian-type rigidity criteria.
"""

from .errors import (
    DomainError,
    ExpressionSyntaxError,
    GraphValidationError,
    IntegrationError,
    PotentialError,
    QglabError,
    QuadratureError,
    SpectrumError,
)
from .fem import MAX_DOFS, assemble, build_mesh, coarse_ground_estimate, solve_eigen
from .fixtures import FIXTURE_NAMES, fixture_document, fixture_graph
from .graphs import (
    Edge,
    GraphClass,
    MetricGraph,
    Vertex,
    build_graph,
    free_version,
    graph_to_json,
    load_graph,
    save_graph,
    scale_graph,
)
from .kernels import USING_NUMBA
from .potentials import (
    Constant,
    Expression,
    Samples,
    evaluate,
    integrate_edge,
    parse,
    potential_from_json,
    potential_to_json,
    sup_norm_estimate,
    to_string,
)
from .rigidity import (
    AmbarzumianVerdict,
    check_conditions,
    davies_consistency,
    functionals,
    verdict_to_json,
)
from .secular import (
    EigenvalueList,
    MatchingMatrix,
    SpectrumRequest,
    assemble_matching,
    compute_spectrum,
    ground_state,
    ground_state_curve,
    rayleigh_quotient,
    secular_value,
)
from .trace import (
    TraceAverageReport,
    closeness_test,
    report_to_csv,
    report_to_json,
    rhs_functional,
    trace_average,
)
from .transfer import TransferMatrix, free_transfer, transfer

__version__ = "0.1.0"

__all__ = [
    "AmbarzumianVerdict",
    "Constant",
    "DomainError",
    "Edge",
    "EigenvalueList",
    "Expression",
    "ExpressionSyntaxError",
    "FIXTURE_NAMES",
    "GraphClass",
    "GraphValidationError",
    "IntegrationError",
    "MAX_DOFS",
    "MatchingMatrix",
    "MetricGraph",
    "PotentialError",
    "QglabError",
    "QuadratureError",
    "Samples",
    "SpectrumError",
    "SpectrumRequest",
    "TraceAverageReport",
    "TransferMatrix",
    "USING_NUMBA",
    "Vertex",
    "assemble",
    "assemble_matching",
    "build_graph",
    "build_mesh",
    "check_conditions",
    "closeness_test",
    "coarse_ground_estimate",
    "compute_spectrum",
    "davies_consistency",
    "evaluate",
    "fixture_document",
    "fixture_graph",
    "free_transfer",
    "free_version",
    "functionals",
    "graph_to_json",
    "ground_state",
    "ground_state_curve",
    "integrate_edge",
    "load_graph",
    "parse",
    "potential_from_json",
    "potential_to_json",
    "rayleigh_quotient",
    "report_to_csv",
    "report_to_json",
    "rhs_functional",
    "save_graph",
    "scale_graph",
    "secular_value",
    "solve_eigen",
    "sup_norm_estimate",
    "to_string",
    "trace_average",
    "transfer",
    "verdict_to_json",
]
