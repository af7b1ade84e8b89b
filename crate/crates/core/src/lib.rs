//! Numerical toolkit connecting the sub-Riemannian geometry of the Heisenberg group
//! H(n) with symplectic geometry on R^{2n}.
//!
//! * [`heis`]: group law, dilations, homogeneous norms, graded linear maps.
//! * [`cc`]: Carnot–Carathéodory distance and geodesics.
//! * [`pansu`]: difference maps and Pansu derivative estimation.
//! * [`lifting`]: horizontal lifts of curves and of symplectomorphisms.
//! * [`flows`]: Hamiltonian flows, their lifts, Hofer lengths and capacities.
//! * [`invariants`]: volume, weight and isodiameter estimates.
//! * [`ham`]: the pair group of volume preserving and vertical maps.

pub mod acceptance;
pub mod cc;
pub mod cli;
pub mod error;
pub mod flows;
pub mod ham;
pub mod heis;
pub mod invariants;
pub mod lifting;
pub mod pansu;
mod optim;
pub mod quad;
pub mod report;
pub mod roots;
pub mod rng;

pub use error::{Error, Result};
