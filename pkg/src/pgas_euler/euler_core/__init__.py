"""Sequential numerics: states, exact Riemann solver, Godunov sweeps, Lie splitting."""

from .godunov import (
    INFLOW_OUTFLOW,
    PERIODIC,
    BoundarySpec,
    fill_ghosts,
    ghost_pair,
    godunov_update,
    lie_step,
    line_fluxes,
    sweep_axis,
    update_lines,
)
from .riemann import (
    NoConvergence,
    RiemannFan,
    VacuumGenerated,
    godunov_interface_flux,
    interface_flux,
    pressure_residual,
    sample_interface,
    solve_star,
    star_pressure,
)
from .sedov import SedovParams, init_sedov, pressure_front_radius
from .state import (
    Axis,
    AxisState,
    ConservedState,
    FieldState,
    GasModel,
    GridSpec,
    NonPhysicalState,
    PrimitiveState,
    TimeControls,
    cons_to_prim,
    max_cfl,
    physical_flux,
    prim_to_cons,
    sound_speed,
    total_invariants,
)

__all__ = [name for name in dir() if not name.startswith("_")]
