//! Linear algebra, random streams, samplers and distribution functions.

mod ks;
mod linalg;
mod normal;
mod rng;
mod sampling;

pub use ks::{
    ks_critical_value_05, ks_pvalue, ks_pvalue_lower, ks_statistic, ks_statistic_lower,
    ks_two_sample, ks_uniformity_test, KsAlternative, KsDecision, KsResult,
};
pub use linalg::{forward_substitute, lower_mul_vec, CorrelationMatrix, Matrix};
pub use normal::{std_normal_cdf, std_normal_quantile};
pub use rng::{RngStream, StreamRng};

pub(crate) use rng::{fnv1a, mix};
pub use sampling::{
    affine_normal, affine_student, chi_square, mvn_sample, mvt_sample, std_normal_vec,
};
