//! Numerical laboratory for negatively curved rank-one symmetric spaces:
//! model geometry over C, H and O, Busemann calculus, boundary quadrature,
//! the associated operator bundles, and the barycentric projection with its
//! Jacobian certificates.

pub mod algebra;
pub mod busemann;
pub mod fields;
pub mod jordan;
pub mod ledger;
pub mod matrices;
pub mod operators;
pub mod projection;
pub mod quadrature;
pub mod spaces;

pub use algebra::{Algebra, Oct};
pub use spaces::{Point, Space, SpaceId};
