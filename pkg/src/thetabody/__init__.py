"""Semidefinite outer approximations of convex hulls of real algebraic sets.

The pipeline: a quotient oracle turns an ideal (finite points, stable sets,
cuts, or a principal generator) into an ordered monomial basis with exact
multiplication tables; the moment layer linearizes basis products into a
symmetric template; the embedded interior-point solver optimizes linear
functionals over the resulting spectrahedron; certificates and exactness
reports close the loop with exact rational verification.
"""

from .exactness import Facet, LevelReport, enumerate_facets, level_report, th1_exact_finite
from .moment import (
    MomentTemplate,
    MomentVector,
    barycenter_vector,
    build_moment_template,
    instantiate,
    instantiate_exact,
    point_to_moment_vector,
)
from .polycore import (
    GREVLEX,
    GRLEX,
    Monomial,
    Polynomial,
    ReducerSet,
    compare_monomials,
    format_polynomial,
    linear_polynomial,
    normal_form,
    parse_polynomial,
)
from .quotient import (
    CapExceededError,
    Graph,
    IdealSpec,
    QuotientOracle,
    ThetaBasis,
    basis_cut_ideal,
    basis_from_reducers,
    basis_points,
    basis_principal,
    basis_stable_set,
    complete_graph,
    cut_vectors,
    cycle_graph,
    permutation_points,
    stable_set_reducers,
)
from .sdp import (
    Phase1Result,
    SdpOptions,
    SdpProblem,
    SdpSolution,
    SdpStatus,
    phase1_interior,
    solve,
)
from .thetaops import (
    Certificate,
    LinearOptResult,
    MembershipResult,
    RayShot,
    SupportLine,
    ThetaBodyProblem,
    TracePoint,
    certificate_from_squares,
    extract_certificate,
    maximize_linear,
    membership,
    odd_cycle_sos_squares,
    point_from_moment,
    ray_shoot,
    support_contour,
    theta_problem,
    trace_boundary_2d,
    verify_sos_identity,
)

__version__ = "0.1.0"
