//! Floating-point scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for vertex and edge fields: `f32` or `f64`.
///
/// Default tolerances are a property of the precision, so they live here
/// rather than being hard-coded at the call sites.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Default relative threshold under which a vertex difference counts as flat.
    const DEFAULT_FLAT_TOL: f64;
    /// Default convergence target for the projection solvers.
    const DEFAULT_SOLVE_TOL: f64;
    /// Default relative objective tolerance for generic convex objectives.
    const DEFAULT_OBJECTIVE_TOL: f64;
    /// Default breakpoint localization width.
    const DEFAULT_EVENT_TOL: f64;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const DEFAULT_FLAT_TOL: f64 = 1e-7;
    const DEFAULT_SOLVE_TOL: f64 = 1e-9;
    const DEFAULT_OBJECTIVE_TOL: f64 = 1e-6;
    const DEFAULT_EVENT_TOL: f64 = 1e-7;
}

impl Scalar for f32 {
    const DEFAULT_FLAT_TOL: f64 = 1e-4;
    const DEFAULT_SOLVE_TOL: f64 = 1e-5;
    const DEFAULT_OBJECTIVE_TOL: f64 = 1e-4;
    const DEFAULT_EVENT_TOL: f64 = 1e-4;
}
