//! Point generators on `S^{n-1}`: normalised Gaussians and Lambert's
//! cylindrical equal-area map, each driven by pseudorandom or Sobol' uniforms.
//!
//! Every scheme is sequential, so the first `M` points of a sample of size
//! `N > M` are exactly the sample of size `M` with the same seed.

mod normal;
mod sobol;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::scalar::Real;

pub use normal::inverse_normal_cdf;
pub use sobol::{sobol_sequence, Sobol, MAX_DIM as SOBOL_MAX_DIM};

/// Pseudorandom generator behind the Monte Carlo schemes.
pub const MC_GENERATOR: &str = "ChaCha8 (rand_chacha), seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GaussMc,
    GaussSobol,
    LambertMc,
    LambertSobol,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::GaussMc,
        Scheme::GaussSobol,
        Scheme::LambertMc,
        Scheme::LambertSobol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::GaussMc => "gauss-mc",
            Scheme::GaussSobol => "gauss-sobol",
            Scheme::LambertMc => "lambert-mc",
            Scheme::LambertSobol => "lambert-sobol",
        }
    }

    pub fn is_qmc(self) -> bool {
        matches!(self, Scheme::GaussSobol | Scheme::LambertSobol)
    }

    pub fn is_lambert(self) -> bool {
        matches!(self, Scheme::LambertMc | Scheme::LambertSobol)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// `seed` seeds the generator for MC schemes and is the skip offset for QMC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerSpec {
    pub scheme: Scheme,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(scheme: Scheme, dim: usize, count: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            scheme,
            dim,
            count,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config(format!("dimension {} < 2", self.dim)));
        }
        if self.count == 0 {
            return Err(Error::Config("sample size must be positive".into()));
        }
        if self.scheme.is_lambert() && self.dim != 3 {
            return Err(Error::Config(format!(
                "{} requires dimension 3, got {}",
                self.scheme, self.dim
            )));
        }
        if self.scheme == Scheme::GaussSobol && self.dim > SOBOL_MAX_DIM {
            return Err(Error::Config(format!(
                "gauss-sobol supports dimension <= {SOBOL_MAX_DIM}"
            )));
        }
        Ok(())
    }
}

/// Uniform in `(0, 1)` from the top 53 bits, offset by half a step.
#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Normalised vector of inverse normal CDF values.
pub fn gaussian_point(uniforms: &[f64]) -> Result<Vec<f64>> {
    if let Some(u) = uniforms.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(Error::Domain(format!("uniform input {u} outside (0, 1)")));
    }
    let g: Vec<f64> = uniforms.iter().map(|&u| inverse_normal_cdf(u)).collect();
    let nrm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(g.into_iter().map(|v| v / nrm).collect())
}

pub fn lambert_point(u: f64, v: f64) -> Result<[f64; 3]> {
    if !((0.0..1.0).contains(&u) && (0.0..1.0).contains(&v)) {
        return Err(Error::Domain(format!("Lambert input ({u}, {v}) outside [0, 1)^2")));
    }
    let z = 2.0 * v - 1.0;
    let r = ((1.0 - z) * (1.0 + z)).sqrt();
    let (s, c) = (std::f64::consts::TAU * u).sin_cos();
    Ok([r * c, r * s, z])
}

fn gaussian_mc(spec: &SamplerSpec, out: &mut Vec<f64>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut u = vec![0.0; spec.dim];
    while out.len() < spec.count * spec.dim {
        u.iter_mut().for_each(|x| *x = open_unit(rng.next_u64()));
        match gaussian_point(&u) {
            Ok(p) => out.extend(p),
            Err(Error::ZeroVector) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn gaussian_sobol(spec: &SamplerSpec, out: &mut Vec<f64>) -> Result<()> {
    let mut gen = Sobol::new(spec.dim, spec.seed)?;
    let mut u = vec![0.0; spec.dim];
    while out.len() < spec.count * spec.dim {
        gen.next_point(&mut u)?;
        match gaussian_point(&u) {
            Ok(p) => out.extend(p),
            // The centre point (1/2, ..., 1/2) and any point with a zero
            // coordinate are passed over.
            Err(Error::ZeroVector) | Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn lambert_mc(spec: &SamplerSpec, out: &mut Vec<f64>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.count {
        let u = open_unit(rng.next_u64());
        let v = open_unit(rng.next_u64());
        out.extend(lambert_point(u, v)?);
    }
    Ok(())
}

fn lambert_sobol(spec: &SamplerSpec, out: &mut Vec<f64>) -> Result<()> {
    let mut gen = Sobol::new(2, spec.seed)?;
    let mut uv = [0.0; 2];
    for _ in 0..spec.count {
        gen.next_point(&mut uv)?;
        out.extend(lambert_point(uv[0], uv[1])?);
    }
    Ok(())
}

/// Generates the sample in `f64` and converts to `T`.
pub fn sample<T: Real>(spec: &SamplerSpec) -> Result<PointSet<T>> {
    spec.validate()?;
    let mut data = Vec::with_capacity(spec.count * spec.dim);
    match spec.scheme {
        Scheme::GaussMc => gaussian_mc(spec, &mut data)?,
        Scheme::GaussSobol => gaussian_sobol(spec, &mut data)?,
        Scheme::LambertMc => lambert_mc(spec, &mut data)?,
        Scheme::LambertSobol => lambert_sobol(spec, &mut data)?,
    }
    PointSet::new(spec.dim, data.into_iter().map(T::of).collect())
}
