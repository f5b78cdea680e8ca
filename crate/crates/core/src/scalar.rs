use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used by the model formulas and the estimators:
/// `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossless-enough conversion of a count or index.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("u64 is representable in every float type")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
