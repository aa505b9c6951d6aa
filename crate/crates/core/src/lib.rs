//! Numerical differential geometry of null hypersurfaces.
//!
//! Builds null frames `{ξ, N, e_1..e_n}` on degenerate hypersurfaces of
//! Lorentzian manifolds, computes their second-order invariants (B, C, τ,
//! shape operators, null mean curvature) and runs constant-angle,
//! quasi-conformal and principal-direction checks on sampled grids.

pub mod ambient;
pub mod analysis;
pub mod catalog;
pub mod driver;
pub mod expr;
pub mod frame;
pub mod immersion;
pub mod jet;
pub mod shape;
pub mod tolerances;

pub use ambient::{AmbientManifold, GeomError, GrwSpec, VectorField};
pub use expr::ExpressionField;
pub use jet::Jet2;
pub use tolerances::Tolerances;
