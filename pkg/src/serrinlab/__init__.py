"""serrinlab: a 2-D numerical laboratory for overdetermined fully nonlinear
elliptic problems.

The library covers exact extremal (Pucci-type) operator evaluation, radial
shooting oracles, a monotone wide-stencil grid solver with cut cells,
homogeneity exponents in planar sectors, and the moving-planes symmetry
procedure with its boundary diagnostics.  The `serrinlab` command drives
batch experiments from flat key-value configuration files.
"""

from .cone import (
    BetaResult,
    DecayFit,
    IterationBoundReport,
    SectorFitParams,
    SectorProblem,
    beta_limit_sequence,
    beta_of_sector,
    decay_rate_fit,
    iteration_lower_bound,
    polar_hessian,
    resolve_g2,
    shoot,
)
from .domains import Disk, DomainCurve, Egg, Ellipse, Stadium, curvature, make_domain
from .errors import (
    BracketError,
    ConfigError,
    GridError,
    IterationLimitError,
    NumericsError,
    ReflectionOutsideDomain,
    SerrinLabError,
)
from .grid import (
    BoundaryGradientReport,
    Field,
    Grid,
    SolveParams,
    boundary_gradient,
    build_grid,
    build_masked_grid,
    directional_second_diff,
    discrete_operator,
    residual,
    sample_field,
    solve,
    stability_dt,
)
from .operators import (
    OperatorSpec,
    SymMat2,
    eig2,
    eval_operator,
    pucci_minus,
    pucci_plus,
    rescale_operator,
)
from .planes import (
    BoundaryExpansionReport,
    MovingPlaneReport,
    SymmetryVerdict,
    UnnReport,
    WCompare,
    boundary_expansion_check,
    critical_position,
    gauss_map_measure,
    reflect_and_compare,
    support,
    symmetry_verdict,
    u_nn_check,
)
from .radial import (
    RadialProfile,
    SourceSpec,
    closed_form_disk_torsion,
    radial_hessian_eigs,
    radial_residual,
    solve_radial,
)

__version__ = "0.1.0"
