use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar used by every numeric type in this crate.
///
/// The whole library is generic over `Real` so the same code runs at `f32`
/// or `f64` precision; concrete aliases for the common case are exported
/// from the crate root.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {
    /// Converts an `f64` literal into this scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal must be representable")
    }

    /// Widens (or passes through) this scalar as an `f64` for reporting,
    /// hashing, and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Real for T where T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}
