//! Per-subset linear algebra: augmented Gram matrices, affine rank, the
//! `gamma` quadratic form, and the candidate caps a subset induces.
//!
//! For an index set `I` let `X_I` hold the points as columns and
//! `X~_I = [X_I; -1^T]`. Then `X~_I^T X~_I = G_II + 1 1^T` with `G` the Gram
//! matrix of the whole sample, `gamma_I = 1^T (X~_I^T X~_I)^{-1} 1`, and
//!
//! * `gamma_I < 1`: the cap through `I` with the largest threshold has
//!   `t_I = sqrt((1 - gamma_I) / gamma_I)` and
//!   `w_I = (1 + t_I^2) / t_I * X_I (X~_I^T X~_I)^{-1} 1`;
//! * `gamma_I = 1`: the caps through `I` are hemispheres, `t = 0`, with `w`
//!   any unit vector in `Ker X_I^T`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, pivoted_cholesky_rank, Mat, PivotedQr};
use crate::points::{dot, norm, Cap, PointSet};
use crate::scalar::Real;

/// Residual bound for boundary feasibility of produced caps.
pub fn feasibility_tolerance<T: Real>() -> T {
    T::of(1e-8).max(T::epsilon().sqrt() * T::of(4.0))
}

/// Row-major `N x N` Gram matrix `G_ij = <x_i, x_j>`.
#[derive(Debug, Clone)]
pub struct Gram<T = f64> {
    size: usize,
    data: Vec<T>,
}

impl<T: Real> Gram<T> {
    pub fn new(ps: &PointSet<T>) -> Self {
        let size = ps.len();
        let mut data = vec![T::zero(); size * size];
        for i in 0..size {
            for j in i..size {
                let v = dot(ps.point(i), ps.point(j));
                data[i * size + j] = v;
                data[j * size + i] = v;
            }
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.size + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.size..(i + 1) * self.size]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Phi1,
    Phi0,
    Skip,
}

/// Which unit vector of `Ker X_I^T` represents a great-circle candidate. Any
/// choice yields the same discrepancy; the alternative exists to test that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelConvention {
    /// Last column of the pivoted QR's `Q`, first non-negligible entry positive.
    #[default]
    LastColumn,
    /// First complement column of `Q`, first non-negligible entry negative.
    FirstComplementNegated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCandidate<T = f64> {
    pub indices: Vec<usize>,
    pub aug_rank: usize,
    pub gamma: Option<T>,
    pub family: Family,
    pub caps: Vec<Cap<T>>,
    /// Why a subset with full affine rank was skipped, if it was.
    pub note: Option<String>,
}

/// Tolerances shared by the subset computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T = f64> {
    pub gamma_tol: T,
    pub rank_tol: T,
    pub boundary_tol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            gamma_tol: T::default_gamma_tol(),
            rank_tol: T::default_rank_tol(),
            boundary_tol: T::default_boundary_tol(),
        }
    }
}

/// Subset computations over a fixed sample, backed by its Gram matrix.
#[derive(Debug, Clone)]
pub struct SubsetAlgebra<'a, T = f64> {
    ps: &'a PointSet<T>,
    gram: Gram<T>,
    pub tol: Tolerances<T>,
    pub kernel: KernelConvention,
}

impl<'a, T: Real> SubsetAlgebra<'a, T> {
    pub fn new(ps: &'a PointSet<T>) -> Self {
        Self::with_gram(ps, Gram::new(ps))
    }

    pub fn with_gram(ps: &'a PointSet<T>, gram: Gram<T>) -> Self {
        Self {
            ps,
            gram,
            tol: Tolerances::default(),
            kernel: KernelConvention::default(),
        }
    }

    pub fn points(&self) -> &'a PointSet<T> {
        self.ps
    }

    pub fn gram(&self) -> &Gram<T> {
        &self.gram
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        if indices.is_empty() {
            return Err(Error::Domain("empty index set".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.ps.len()) {
            return Err(Error::Domain(format!("index {bad} out of range")));
        }
        Ok(())
    }

    /// `X~_I^T X~_I`, entry `(a, b) = <x_a, x_b> + 1`.
    pub fn augmented_gram(&self, indices: &[usize]) -> Result<Mat<T>> {
        self.check_indices(indices)?;
        let k = indices.len();
        let mut m = Mat::zeros(k, k);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                m[(a, b)] = self.gram.get(i, j) + T::one();
            }
        }
        Ok(m)
    }

    /// Rank of `X~_I` from diagonally pivoted Cholesky of the augmented Gram
    /// matrix; pivots at or below `rank_tol * max diagonal` count as zero.
    pub fn affine_rank(&self, indices: &[usize], rank_tol: T) -> Result<usize> {
        Ok(pivoted_cholesky_rank(&self.augmented_gram(indices)?, rank_tol))
    }

    fn gamma_weights(&self, indices: &[usize]) -> Result<(T, Vec<T>)> {
        let a = self.augmented_gram(indices)?;
        let l = cholesky(&a).ok_or_else(|| Error::DegenerateSubset {
            indices: indices.to_vec(),
            reason: "augmented Gram matrix not positive definite".into(),
        })?;
        let y = cholesky_solve(&l, &vec![T::one(); indices.len()]);
        let gamma = y.iter().copied().sum::<T>();
        Ok((gamma, y))
    }

    /// `gamma_I = 1^T (X~_I^T X~_I)^{-1} 1`, via Cholesky.
    pub fn gamma(&self, indices: &[usize]) -> Result<T> {
        Ok(self.gamma_weights(indices)?.0)
    }

    /// The tangent cap `(w_I, t_I)` with `t_I > 0`. The opposite cap is its
    /// negation.
    ///
    /// `w_I = ((1 + t^2) / t) X_I y` where `|X_I y| = t / (1 + t^2)`, so `w_I` is
    /// evaluated as `X_I y / |X_I y|`. The explicit factor loses accuracy
    /// when `gamma` is close to one.
    pub fn phi1_cap(&self, indices: &[usize], gamma: T) -> Result<Cap<T>> {
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(Error::Domain(format!(
                "gamma = {gamma} outside (0, 1) for subset {indices:?}"
            )));
        }
        let (_, y) = self.gamma_weights(indices)?;
        let t = ((T::one() - gamma) / gamma).sqrt().min(T::one());
        let mut w = vec![T::zero(); self.ps.dim()];
        for (&i, &yi) in indices.iter().zip(&y) {
            for (wk, &xk) in w.iter_mut().zip(self.ps.point(i)) {
                *wk = *wk + yi * xk;
            }
        }
        let nrm = norm(&w);
        if !(nrm > T::zero()) {
            return Err(Error::DegenerateSubset {
                indices: indices.to_vec(),
                reason: "tangent direction vanishes".into(),
            });
        }
        w.iter_mut().for_each(|v| *v = *v / nrm);
        Ok(Cap { w, t })
    }

    /// A unit vector orthogonal to every point of `I`, from a pivoted QR of
    /// `X_I`. Fails when no such vector exists to within the feasibility
    /// tolerance.
    pub fn phi0_kernel_direction(&self, indices: &[usize]) -> Result<Vec<T>> {
        self.check_indices(indices)?;
        let n = self.ps.dim();
        let k = indices.len();
        let degenerate = |reason: String| Error::DegenerateSubset {
            indices: indices.to_vec(),
            reason,
        };
        let cols: Vec<&[T]> = indices.iter().map(|&i| self.ps.point(i)).collect();
        let qr = PivotedQr::new(&Mat::from_columns(n, &cols));
        let rank = qr.rank(self.tol.rank_tol);
        // The great-circle family has rank X_I = #I - 1; the complement of the
        // first #I - 1 pivoted columns is never empty for #I <= n.
        let first = rank.min(k.saturating_sub(1));
        if first >= n {
            return Err(degenerate("kernel of X_I^T is trivial".into()));
        }
        let q = qr.q();
        let (col, positive) = match self.kernel {
            KernelConvention::LastColumn => (n - 1, true),
            KernelConvention::FirstComplementNegated => (first, false),
        };
        let mut w = q.column(col).to_vec();
        let cut = T::of(1e-12).max(T::epsilon() * T::of(64.0));
        if let Some(&lead) = w.iter().find(|v| v.abs() > cut) {
            if (lead > T::zero()) != positive {
                w.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let residual = cols.iter().fold(T::zero(), |m, x| m.max(dot(&w, x).abs()));
        if residual > feasibility_tolerance() {
            return Err(degenerate(format!("kernel residual {residual}")));
        }
        Ok(w)
    }

    /// Sorts a subset into the tangent family, the great-circle family, or
    /// neither, and builds its candidate caps.
    ///
    /// A subset whose `gamma` is within `gamma_tol` of one but whose points
    /// admit no exact kernel direction is evaluated as a tangent cap when
    /// `gamma < 1`.
    pub fn classify(&self, indices: &[usize], min_bound: usize) -> Result<SubsetCandidate<T>> {
        self.check_indices(indices)?;
        if indices.len() > min_bound {
            return Err(Error::Domain(format!(
                "subset of size {} exceeds bound {min_bound}",
                indices.len()
            )));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let aug_rank = self.affine_rank(&sorted, self.tol.rank_tol)?;
        let mut cand = SubsetCandidate {
            indices: sorted,
            aug_rank,
            gamma: None,
            family: Family::Skip,
            caps: Vec::new(),
            note: None,
        };
        if aug_rank < cand.indices.len() {
            return Ok(cand);
        }
        let gamma = match self.gamma(&cand.indices) {
            Ok(g) => g,
            Err(e) => {
                cand.note = Some(e.to_string());
                return Ok(cand);
            }
        };
        cand.gamma = Some(gamma);
        let one = T::one();
        let near_one = (gamma - one).abs() <= self.tol.gamma_tol;
        if near_one && cand.indices.len() == min_bound {
            match self.phi0_kernel_direction(&cand.indices) {
                Ok(w) => {
                    let cap = Cap { w, t: T::zero() };
                    cand.caps = vec![cap.clone(), cap.negated()];
                    cand.family = Family::Phi0;
                    return Ok(cand);
                }
                Err(e) => cand.note = Some(e.to_string()),
            }
        }
        let tangent = gamma < one - self.tol.gamma_tol || (cand.note.is_some() && gamma < one);
        if tangent && gamma > T::zero() {
            match self.phi1_cap(&cand.indices, gamma) {
                Ok(cap) => {
                    cand.caps = vec![cap.clone(), cap.negated()];
                    cand.family = Family::Phi1;
                }
                Err(e) => cand.note = Some(e.to_string()),
            }
        }
        Ok(cand)
    }
}

/// Max over `i in I` of `|<w, x_i> - t|`.
pub fn boundary_residual<T: Real>(ps: &PointSet<T>, indices: &[usize], cap: &Cap<T>) -> T {
    indices
        .iter()
        .fold(T::zero(), |m, &i| m.max((dot(&cap.w, ps.point(i)) - cap.t).abs()))
}

/// `| |w| - 1 |`.
pub fn unit_residual<T: Real>(cap: &Cap<T>) -> T {
    (norm(&cap.w) - T::one()).abs()
}
