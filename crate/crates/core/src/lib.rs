//! Psychological similarity spaces: construction by metric and nonmetric
//! SMACOF, evaluation through stress and distance correlations, and linear
//! or lasso regressions from image features into the resulting spaces.
//!
//! The numerical core is generic over the floating point type through
//! [`Scalar`]; the aliases at the crate root fix it to `f64` (or `f32` for
//! the large feature matrices).

// `!(x > y)` is used deliberately so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub mod augment;
pub mod data;
pub mod distance;
mod error;
pub mod linalg;
pub mod mds;
pub mod monotone;
pub mod nnls;
pub mod pixel;
pub mod regression;
pub mod rng;

pub use error::{Error, Result};

/// Floating point type the numerical routines are written against.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Display + Debug + FromStr + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type DissimilarityMatrixF64 = data::DissimilarityMatrix<f64>;
pub type ConfigurationF64 = data::Configuration<f64>;
pub type FeatureMatrixF64 = data::FeatureMatrix<f64>;
pub type FeatureMatrixF32 = data::FeatureMatrix<f32>;
pub type TargetAssignmentF64 = data::TargetAssignment<f64>;
pub type MdsResultF64 = mds::MdsResult<f64>;
pub type RasterImageF32 = pixel::RasterImage<f32>;
pub type EvaluationReportF64 = regression::EvaluationReport<f64>;
