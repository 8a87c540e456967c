//! Empirical measure, local discrepancy, and exact suprema over the cap
//! threshold for a fixed direction.

use std::cmp::Ordering;

use serde::Serialize;

use crate::cap_measure::CapMeasure;
use crate::error::{Error, Result};
use crate::points::{dot, Cap, PointSet};
use crate::scalar::Real;

/// Number of sample points in the closed halfspace, `<w, x> >= t - boundary_tol`.
pub fn count_in_cap<T: Real>(ps: &PointSet<T>, cap: &Cap<T>, boundary_tol: T) -> usize {
    let thr = cap.t - boundary_tol;
    ps.iter().filter(|x| dot(&cap.w, x) >= thr).count()
}

/// Fraction of points with `<w, x> >= t`, compared exactly.
pub fn empirical_measure<T: Real>(ps: &PointSet<T>, cap: &Cap<T>) -> T {
    empirical_measure_with_tol(ps, cap, T::zero())
}

/// As [`empirical_measure`], with slack for caps that come from noisy sources.
pub fn empirical_measure_with_tol<T: Real>(ps: &PointSet<T>, cap: &Cap<T>, boundary_tol: T) -> T {
    T::of_usize(count_in_cap(ps, cap, boundary_tol)) / T::of_usize(ps.len())
}

/// `|mu_emp(w, t) - mu_cap(t)|`.
pub fn local_discrepancy<T: Real>(ps: &PointSet<T>, cap: &Cap<T>) -> Result<T> {
    let mu = CapMeasure::new(ps.dim())?;
    Ok((empirical_measure(ps, cap) - mu.measure(cap.t)?).abs())
}

/// How the supremum over `t` is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attainment {
    /// Attained at `t = argmax_t`.
    AtThreshold,
    /// Approached as `t` decreases to `argmax_t`, not attained there.
    LimitFromAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalSupremum<T = f64> {
    pub value: T,
    pub argmax_t: T,
    pub attained_side: Attainment,
}

/// Exact `sup_t |mu_emp(w, t) - mu_cap(t)|` for a fixed unit direction `w`.
pub fn directional_supremum<T: Real>(ps: &PointSet<T>, w: &[T]) -> Result<DirectionalSupremum<T>> {
    if ps.is_empty() {
        return Err(Error::Domain("empty point set".into()));
    }
    if w.len() != ps.dim() {
        return Err(Error::Domain(format!(
            "direction has {} components, points have {}",
            w.len(),
            ps.dim()
        )));
    }
    let mu = CapMeasure::new(ps.dim())?;
    let mut scratch = Vec::with_capacity(ps.len());
    Ok(directional_supremum_with(&mu, ps, w, &mut scratch))
}

/// Allocation-free core of [`directional_supremum`].
///
/// The empirical measure is a step function that only changes at the distinct
/// dot products `d_1 > ... > d_m`; the cap measure is continuous and
/// non-increasing, so on each piece the supremum sits at an endpoint.
pub(crate) fn directional_supremum_with<T: Real>(
    mu: &CapMeasure<T>,
    ps: &PointSet<T>,
    w: &[T],
    dots: &mut Vec<T>,
) -> DirectionalSupremum<T> {
    dots.clear();
    dots.extend(ps.iter().map(|x| dot(w, x)));
    dots.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));

    let n_inv = T::one() / T::of_usize(ps.len());
    let one = T::one();
    // t = 1 with nothing at or above it: both measures vanish.
    let mut best = DirectionalSupremum {
        value: T::zero(),
        argmax_t: one,
        attained_side: Attainment::AtThreshold,
    };
    let mut consider = |value: T, t: T, side: Attainment| {
        if value > best.value {
            best = DirectionalSupremum {
                value,
                argmax_t: t,
                attained_side: side,
            };
        }
    };

    let mut above = 0usize;
    let mut i = 0usize;
    while i < dots.len() {
        let d = dots[i];
        let mut j = i + 1;
        while j < dots.len() && dots[j] == d {
            j += 1;
        }
        let cap = mu.measure_snapped(d);
        let t = d.max(-one).min(one);
        // Interval (d, previous] is empty only for a group sitting at t = 1.
        if i > 0 || d < one {
            consider((T::of_usize(above) * n_inv - cap).abs(), t, Attainment::LimitFromAbove);
        }
        above = j;
        consider((T::of_usize(above) * n_inv - cap).abs(), t, Attainment::AtThreshold);
        i = j;
    }
    best
}

/// `max_i sup_t |mu_emp(x_i, t) - mu_cap(x_i, t)|`, a lower bound on the cap
/// discrepancy.
pub fn lower_bound<T: Real>(ps: &PointSet<T>) -> Result<T> {
    Ok(lower_bound_details(ps)?
        .into_iter()
        .fold(T::zero(), |m, d| m.max(d.value)))
}

/// Directional suprema at every sample point, in sample order.
pub fn lower_bound_details<T: Real>(ps: &PointSet<T>) -> Result<Vec<DirectionalSupremum<T>>> {
    let mu = CapMeasure::new(ps.dim())?;
    let mut scratch = Vec::with_capacity(ps.len());
    Ok(ps
        .iter()
        .map(|x| directional_supremum_with(&mu, ps, x, &mut scratch))
        .collect())
}
