//! Scalar abstraction: every numeric kernel in this crate is generic over
//! the floating-point width.

use std::fmt;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar (f32 or f64) the pipeline is generic over.
pub trait Real: Float + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Converts an `f64` constant into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// View as `f64`, for diagnostics and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
