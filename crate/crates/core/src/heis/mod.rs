//! Heisenberg group H(n): group law, dilations, homogeneous norms and graded linear maps.

mod linmap;
mod norm;
mod point;

pub use linmap::{
    classify_linmap, classify_linmap_nxr, HLinMap, HLinMapWire, LinMapClassification,
    NxrClassification, MEMBERSHIP_TOL,
};
pub use norm::{hdist, hnorm, quasi_triangle_constant, sum_norm, NormKind};
pub use point::{
    apply_j, apply_j_inv, bracket, commutator, dilate, group_inv, group_mul, homogeneous_dimension,
    j_matrix, omega, omega_matrix, AxisBox, HPoint,
};
pub(crate) use point::{dilate_unchecked, mul_unchecked};
