//! Constrained Nevanlinna–Pick interpolation for algebras `H∞_B = C + B H∞`.

pub mod blaschke;
pub mod cstar;
pub mod error;
pub mod feasibility;
pub mod gap;
pub mod ideal;
pub mod jet;
pub mod lattice;
pub mod linalg;
pub mod modelspace;
pub mod problem;
pub mod quotient;

pub use blaschke::{BlaschkeProduct, Zero};
pub use error::{Error, Result};
pub use feasibility::{SearchConfig, SweepVerdict, VerdictKind};
pub use modelspace::{DerivativeKernelLabel, GrammianRep, ModelVector};
pub use jet::{Analytic, Jet, Polynomial};
pub use quotient::{CompressionRep, QuotientElement};
pub use problem::{InterpolationProblem, Targets};
