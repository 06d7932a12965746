//! Left-invariant metrics on 3-dimensional Lie groups: Bianchi classification, curvature,
//! isotropy, metric normal forms and Killing-algebra dimension.

pub mod automorphism;
pub mod bianchi;
pub mod curvature;
pub mod error;
pub mod geodesic;
pub mod isotropy;
pub mod lie;
pub mod linalg;
pub mod metric;
pub mod normal_form;
pub mod pipeline;
pub mod spectrum;

pub use bianchi::{classify, BianchiClass, BianchiTag};
pub use error::{Error, Result};
pub use lie::LieAlgebra3;
pub use metric::MetricForm;

use serde::{Deserialize, Serialize};

/// Numerical thresholds used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// absolute, on Jacobi residuals and derivation laws
    pub eps_jac: f64,
    /// relative to the largest singular value
    pub eps_rank: f64,
    /// eigenvalue-zero decisions for skew maps
    pub eps_eig: f64,
    /// matching of continuous table parameters
    pub eps_param: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_jac: 1e-9, eps_rank: 1e-8, eps_eig: 1e-7, eps_param: 1e-6 }
    }
}
