//! Surface finite elements for fourth-order membrane problems with point
//! Dirichlet constraints.
//!
//! The fourth-order problems are split into coupled second-order equations
//! and discretized with P1 elements on triangulated surfaces (polyhedral
//! spheres and inscribed polygons of the unit disc). Point constraints are
//! imposed either through Lagrange multipliers or through a penalty term;
//! both paths share one symmetric indefinite block system solved by a sparse
//! LDL^t factorization. An experiment harness reproduces the convergence
//! studies of the membrane problems and numerically probes the structural
//! assumptions behind them.

pub mod assembly;
pub mod error;
pub mod field;
pub mod ldl;
pub mod mesh;
pub mod norms;
pub mod probes;
pub mod problems;
pub mod quadrature;
pub mod saddle;
pub mod space;
pub mod sparse;
pub mod vec3;

pub use error::{Error, Result};
