use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the discrepancy machinery is generic over.
///
/// The default tolerances scale with the precision of the type; the values
/// for `f64` are the ones the command-line tool uses.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Separates the tangent-cap family from the great-circle family (`|gamma - 1|`).
    fn default_gamma_tol() -> Self;
    /// Relative pivot threshold for affine rank decisions on squared pivots.
    fn default_rank_tol() -> Self;
    /// Slack for counting a point as lying on a candidate cap boundary.
    fn default_boundary_tol() -> Self;
    /// Values of `t` this close to `±1` are snapped to `±1`.
    fn snap_tol() -> Self;

    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn default_gamma_tol() -> Self {
        1e-10
    }
    fn default_rank_tol() -> Self {
        1e-10
    }
    fn default_boundary_tol() -> Self {
        1e-10
    }
    fn snap_tol() -> Self {
        1e-14
    }
}

impl Real for f32 {
    fn default_gamma_tol() -> Self {
        1e-4
    }
    fn default_rank_tol() -> Self {
        1e-5
    }
    fn default_boundary_tol() -> Self {
        1e-5
    }
    fn snap_tol() -> Self {
        1e-6
    }
}
