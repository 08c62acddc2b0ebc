"""Environment-induced coherence in atomic Lambda systems: closed-form
Green's-tensor analysis, a 3D FDTD solver for arbitrary voxel dielectric
environments, and adjoint-gradient inverse design of structures that
maximize the steady-state coherence."""

from .core import UNITS, DipolePair, UnitsConvention, dipole_matrices, standard_dipoles
from .analytic_greens import (
    HalfSpaceScatterDiag,
    reflector_im_greens_equal,
    reflector_scatter_equal,
    vacuum_greens,
    vacuum_im_greens_equal,
)
from .coherence import (
    RateSet,
    antinodes,
    evolve_master,
    rates_from_greens,
    reflector_coherence,
    steady_coherence,
)
from .adjoint import (
    MeritField,
    analytic_vacuum_merit,
    coherence_gradient,
    merit_density,
    merit_field_over_region,
    vacuum_merit_density,
)
from .geometry import OptimizationRegion, VoxelGeometry, read_geometry, write_geometry
from .fdtd import (
    FdtdConfig,
    GreensField,
    calibrate,
    greens_field,
    rasterize,
    run_point_source,
)
from .optimizer import (
    FIRST_ANTINODE,
    OptimizationConfig,
    OptimizationTrace,
    TraceRecord,
    iterate_once,
    run_optimization,
    single_pass,
)
from .validation import (
    ErrorBudget,
    default_zeta_grid,
    reflector_benchmark,
    vacuum_error_protocol,
)

__version__ = "1.0.0"
