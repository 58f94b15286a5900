//! Semilinear heat flow ∂ₜu = Δu − a(u − ū) + |u|^{p−1}u on finite weighted graphs.
//!
//! The crate covers the μ-Laplacian and discrete integrals ([`graph`]), the
//! principal eigenpair of −Δ + a ([`spectral`]), potential-well quantities
//! ([`well`]), adaptive time integration ([`dynamics`]) and closed-form blow-up
//! criteria with blow-up-rate fitting ([`blowup`]).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod presets;
pub mod problem;
pub mod spectral;
pub mod well;

pub use blowup::{analyze, AnalysisOptions, AnalysisReport, BoundResult, RateFit};
pub use dynamics::{integrate, IntegratorOptions, Status, Trajectory};
pub use error::{Error, Result};
pub use graph::{parse_graph, Graph, NodeField};
pub use problem::ProblemSpec;
pub use spectral::{principal_eigenpair, EigenPair};
pub use well::{classify, Classification, WellReport};
