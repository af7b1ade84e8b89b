//! Compactly supported Hamiltonians on R^{2n}, their flows and the lifts of those flows.

mod field;
mod hofer;
mod integrate;
mod lift;
mod table;

pub use field::{smooth_window, Builtin, HamiltonianField, TimeProfile};
pub use hofer::{
    admissibility_check, admissibility_threshold, displace_region, displacement_energy_upper, hofer_length,
    hz_capacity_lower, orbit_period, regular_grid, support_grid, time_grid, AdmissibilityOptions,
    AdmissibilityReport, CapacityReport, DisplacementOptions, DisplacementReport, OrbitReturn, PlanarRegion,
    SkippedMember,
};
pub use integrate::{
    flow_map, flow_point, integrate_flow, rk4_step, trajectory, FlowGrid, FlowOptions, IntegratorStats,
    DEFAULT_STEPS_PER_UNIT,
};
pub use lift::{
    lift_flow_horizontal, lift_flow_tilde, tabulate_lifts, vertical_flow, vertical_flow_from_table, LiftTable,
    LiftTableOptions, LiftedFlow, VerticalFlow, HAMILTON_SIGN,
};
pub use table::{GridTable, TABLE_BOUNDARY_TOL};
pub(crate) use lift::{time_derivative, trapezoid};
