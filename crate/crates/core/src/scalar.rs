use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the dense kernels are generic over: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync {
    /// Relative tolerance used for the `gram = d + c` compatibility check.
    fn compatibility_tolerance() -> Self;

    /// Symmetry tolerance factor for pencil inputs.
    fn symmetry_tolerance() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    fn compatibility_tolerance() -> Self {
        1e-10
    }

    fn symmetry_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn compatibility_tolerance() -> Self {
        1e-5
    }

    fn symmetry_tolerance() -> Self {
        1e-6
    }
}
