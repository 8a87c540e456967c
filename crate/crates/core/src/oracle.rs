//! Direction-grid cross-check for `n = 2, 3`.
//!
//! The grid maximum of the exact per-direction supremum is a lower bound on
//! the cap discrepancy that shares no code with the subset enumeration.
//! Grids are nested: halving the resolution refines every ring.

use rayon::prelude::*;

use crate::cap_measure::CapMeasure;
use crate::discrepancy::directional_supremum_with;
use crate::enumerator::{enumerate, EnumerationConfig};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::scalar::Real;
use crate::subset::boundary_residual;

/// Largest sample size `cross_check` accepts.
pub const MAX_CROSS_CHECK_POINTS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Angular step in radians.
    pub resolution: f64,
}

impl GridSpec {
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Config(format!("grid resolution {resolution} must be positive")));
        }
        Ok(Self { resolution })
    }

    /// Accepted gap between the exact value and the grid bound, `5 r`.
    pub fn tolerance(&self) -> f64 {
        5.0 * self.resolution
    }

    /// Latitudes `k r` plus the south pole.
    fn polar_angles(&self) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        let mut v: Vec<f64> = (0..)
            .map(|k| k as f64 * self.resolution)
            .take_while(|&th| th < pi)
            .collect();
        v.push(pi);
        v
    }

    /// Longitudes on a circle of radius `radius`: the smallest power of two
    /// that keeps the arc step at most `r`.
    fn ring_size(&self, radius: f64) -> usize {
        let want = (std::f64::consts::TAU * radius / self.resolution).ceil().max(1.0);
        (want as usize).next_power_of_two()
    }

    /// Number of grid directions for `n` in `{2, 3}`.
    pub fn len(&self, n: usize) -> Result<usize> {
        match n {
            2 => Ok(self.ring_size(1.0)),
            3 => Ok(self.polar_angles().iter().map(|th| self.ring(th.sin())).sum()),
            _ => Err(unsupported(n)),
        }
    }

    fn ring(&self, radius: f64) -> usize {
        if radius <= 0.0 {
            1
        } else {
            self.ring_size(radius)
        }
    }
}

fn unsupported(n: usize) -> Error {
    Error::Config(format!("grid oracle supports n = 2 or 3, got {n}"))
}

/// Max over grid directions of the exact supremum over `t`.
pub fn grid_lower_bound<T: Real>(ps: &PointSet<T>, grid: &GridSpec) -> Result<T> {
    let n = ps.dim();
    let mu = CapMeasure::<T>::new(n)?;
    let ring_max = |polar: f64| -> T {
        let radius = polar.sin().max(0.0);
        let m = grid.ring(if n == 2 { 1.0 } else { radius });
        let (z, r) = if n == 2 { (0.0, 1.0) } else { (polar.cos(), radius) };
        let mut dots = Vec::with_capacity(ps.len());
        let mut w = vec![T::zero(); n];
        let mut best = T::zero();
        for k in 0..m {
            let (s, c) = (std::f64::consts::TAU * k as f64 / m as f64).sin_cos();
            w[0] = T::of(r * c);
            w[1] = T::of(r * s);
            if n == 3 {
                w[2] = T::of(z);
            }
            best = best.max(directional_supremum_with(&mu, ps, &w, &mut dots).value);
        }
        best
    };
    match n {
        2 => Ok(ring_max(std::f64::consts::FRAC_PI_2)),
        3 => Ok(grid
            .polar_angles()
            .into_par_iter()
            .map(ring_max)
            .reduce(T::zero, |a, b| a.max(b))),
        _ => Err(unsupported(n)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub delta: f64,
    pub grid_bound: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

/// Compares [`enumerate`] with [`grid_lower_bound`] and checks the argmax cap.
pub fn cross_check<T: Real>(ps: &PointSet<T>, grid: &GridSpec, config: &EnumerationConfig<T>) -> Result<Verdict> {
    if !(2..=3).contains(&ps.dim()) {
        return Err(unsupported(ps.dim()));
    }
    if ps.len() > MAX_CROSS_CHECK_POINTS {
        return Err(Error::Config(format!(
            "cross check is limited to {MAX_CROSS_CHECK_POINTS} points, got {}",
            ps.len()
        )));
    }
    let report = enumerate(ps, config)?;
    let bound = grid_lower_bound(ps, grid)?.to_f64_lossy();
    let delta = report.delta.to_f64_lossy();
    let tolerance = grid.tolerance();
    let mut failures = Vec::new();
    if delta < bound - 1e-10 {
        failures.push(format!("delta {delta} below grid bound {bound}"));
    }
    if (delta - bound).abs() > tolerance {
        failures.push(format!("gap {} exceeds {tolerance}", (delta - bound).abs()));
    }
    let residual = boundary_residual(ps, &report.argmax_subset, &report.argmax_cap).to_f64_lossy();
    if !(residual <= 1e-8) {
        failures.push(format!("argmax boundary residual {residual}"));
    }
    let (emp, cap) = (
        report.argmax_empirical.to_f64_lossy(),
        report.argmax_cap_measure.to_f64_lossy(),
    );
    if !(emp + 1e-10 >= cap) {
        failures.push(format!("argmax empirical {emp} below cap measure {cap}"));
    }
    Ok(Verdict {
        pass: failures.is_empty(),
        delta,
        grid_bound: bound,
        tolerance,
        failures,
    })
}
