//! Uniform surface measure of spherical caps `{x : <w, x> >= t}` on `S^{n-1}`.
//!
//! The measure only depends on `t` and the ambient dimension `n`:
//!
//! ```text
//! mu(t) = C_n * I_{n-2}(arccos t)          for t >= 0
//! mu(t) = 1 - C_n * I_{n-2}(arccos(-t))    for t < 0
//! I_m(theta) = int_0^theta sin^m(tau) dtau,   C_n = 1 / I_{n-2}(pi)
//! ```
//!
//! `I_m` is evaluated through the reduction
//! `I_m = (-cos(theta) sin^{m-1}(theta) + (m-1) I_{m-2}) / m`, which bottoms out
//! at `I_0 = theta` and `I_1 = 1 - cos(theta)`. No quadrature is involved.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `int_0^theta sin^m(tau) dtau` for `theta` in `[0, pi]`.
pub fn sin_power_integral<T: Real>(m: usize, theta: T) -> Result<T> {
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(Error::Domain(format!(
            "sine power integral upper limit {theta} outside [0, pi]"
        )));
    }
    let (c, s) = if theta == T::PI() {
        (-T::one(), T::zero())
    } else {
        (theta.cos(), theta.sin())
    };
    Ok(reduce(m, || theta, c, s * s, || s))
}

/// `C_n = 1 / int_0^pi sin^{n-2}`.
pub fn normalization_constant<T: Real>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere dimension n = {n} < 2")));
    }
    Ok(T::one() / sin_power_integral(n - 2, T::PI())?)
}

/// One-shot cap measure; prefer [`CapMeasure`] when evaluating repeatedly.
pub fn cap_measure<T: Real>(n: usize, t: T) -> Result<T> {
    CapMeasure::new(n)?.measure(t)
}

/// Reduction for `I_m` given `cos(theta)` and `sin(theta)^2`. `theta` and
/// `sin(theta)` are only needed (and only computed) for even `m`.
#[inline]
fn reduce<T: Real>(m: usize, theta: impl FnOnce() -> T, c: T, s2: T, s: impl FnOnce() -> T) -> T {
    let (mut k, mut acc, mut s_pow) = if m % 2 == 0 {
        (0usize, theta(), s())
    } else {
        (1usize, T::one() - c, s2)
    };
    while k + 2 <= m {
        acc = (T::of_usize(k + 1) * acc - c * s_pow) / T::of_usize(k + 2);
        s_pow = s_pow * s2;
        k += 2;
    }
    acc
}

/// Cap measure evaluator for a fixed sphere `S^{n-1}`; `C_n` is computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMeasure<T = f64> {
    dimension: usize,
    normalization: T,
}

impl<T: Real> CapMeasure<T> {
    pub fn new(dimension: usize) -> Result<Self> {
        Ok(Self {
            dimension,
            normalization: normalization_constant(dimension)?,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn normalization(&self) -> T {
        self.normalization
    }

    /// Measure of the cap with threshold `t`. Values within `T::snap_tol()` of
    /// `±1` are treated as `±1`; anything further outside is an error.
    pub fn measure(&self, t: T) -> Result<T> {
        let snap = T::snap_tol();
        if !(t >= -T::one() - snap && t <= T::one() + snap) {
            return Err(Error::Domain(format!("cap threshold t = {t} outside [-1, 1]")));
        }
        Ok(self.measure_snapped(t))
    }

    /// Hot-path variant for thresholds known to lie in `[-1, 1]` up to rounding.
    /// Out-of-range inputs are clamped rather than rejected.
    #[inline]
    pub fn measure_snapped(&self, t: T) -> T {
        let snap = T::snap_tol();
        let one = T::one();
        if t >= one - snap {
            return T::zero();
        }
        if t <= -one + snap {
            return one;
        }
        if t == T::zero() {
            return T::of(0.5);
        }
        let a = t.abs();
        let s2 = (one - a) * (one + a);
        let upper = self.normalization * reduce(self.dimension - 2, || a.acos(), a, s2, || s2.sqrt());
        if t > T::zero() {
            upper
        } else {
            one - upper
        }
    }
}
