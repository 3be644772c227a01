"""Numerical minimal-graph Dirichlet problems in conformal cones.

A conformal cone is the product of a bounded base manifold with a ray
(-inf, A), carrying the metric phi^2(r) (sigma + dr^2) for a positive
factor phi.  Graphs over the base are minimal exactly when

    div(Du/w) = n phi'(u) / (phi(u) w),    w = sqrt(1 + |Du|^2),

with the translating special case div(Du/w) = alpha/w for phi = e^{alpha
r/n}.  The package provides: an expression language for factors and
boundary data (expr), structured grids with metric-aware operators
(geometry), profile condition checks and extensions (profiles), curvature
evaluations (curvature), graph-area functionals and competitor tests
(functional), the damped-Newton continuation solver with barriers,
comparison, infinity-limit and non-existence experiments (solver),
independent closed-form and shooting oracles (oracles), and a config-file
driven CLI (cli).
"""

from .geometry import (
    Domain, Grid, ScalarField,
    interval, rectangle, flat_disk, spherical_cap,
    build_grid, gradient, divergence, boundary_mean_curvature,
)
from .profiles import (
    ConformalProfile,
    product_profile, translating_profile, euclidean_profile, hyperbolic_profile,
    custom_profile, check_cA, check_cB, check_cC, extend_profile,
)
from .curvature import (
    graph_mean_curvature, conformal_mean_curvature,
    slab_boundary_report, foliation_mean_curvature,
)
from .functional import (
    graph_area, conformal_functional, mass_with_jump,
    functional_gradient, perturbation_test,
)
from .solver import (
    SolverConfig, SolveReport, SolveError,
    solve_dirichlet, solve_translating, barrier_bounds, comparison_check,
    solve_infinity, detect_nonexistence_sweep, build_slab,
)
from .oracles import grim_reaper, grim_reaper_slope, radial_shoot, compare_to_oracle

__version__ = "0.1.0"
