use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::Float;

/// Element type of every matrix in the crate. Implemented for `f32` (the
/// default) and `f64`.
pub trait Scalar:
    Float + Default + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Short type name used in reports ("f32" / "f64").
    const NAME: &'static str;

    /// Default tolerance for comparisons against the sequential oracle.
    const ORACLE_TOLERANCE: f64;

    fn cast(v: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
    const ORACLE_TOLERANCE: f64 = 1e-5;

    #[inline]
    fn cast(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
    const ORACLE_TOLERANCE: f64 = 1e-12;

    #[inline]
    fn cast(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
