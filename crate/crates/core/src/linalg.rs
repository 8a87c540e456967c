//! Small dense linear algebra for the per-subset computations: Householder QR
//! with column pivoting, Cholesky, and pivoted Cholesky rank. Sizes here are
//! at most `n + 1` rows, so everything is plain loops over column-major storage.

use crate::scalar::Real;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[T]>>(rows: usize, columns: &[C]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            let c = c.as_ref();
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    fn column_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (yi, &a) in y.iter_mut().zip(self.column(j)) {
                *yi = *yi + a * xj;
            }
        }
        y
    }

    pub fn transpose_mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.cols).map(|j| crate::points::dot(self.column(j), x)).collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

/// Result of a column-pivoted Householder QR, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr<T> {
    /// Householder vectors (column `k` holds `v_k` in rows `k..m`).
    reflectors: Mat<T>,
    betas: Vec<T>,
    /// `|R_kk|^2` in elimination order.
    pub diag_sq: Vec<T>,
    /// Column permutation: step `k` eliminated original column `perm[k]`.
    pub perm: Vec<usize>,
    /// Largest squared column norm of the input.
    pub scale_sq: T,
}

impl<T: Real> PivotedQr<T> {
    /// Deterministic Businger–Golub pivoting: the column with the largest
    /// remaining norm goes next, ties resolved towards the lower index.
    pub fn new(a: &Mat<T>) -> Self {
        let m = a.rows;
        let n = a.cols;
        let steps = m.min(n);
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<T> = (0..n).map(|j| crate::points::dot(r.column(j), r.column(j))).collect();
        let scale_sq = norms.iter().fold(T::zero(), |acc, &v| acc.max(v));
        let mut reflectors = Mat::zeros(m, steps);
        let mut betas = vec![T::zero(); steps];
        let mut diag_sq = Vec::with_capacity(steps);

        for k in 0..steps {
            let mut p = k;
            for j in k + 1..n {
                if norms[j] > norms[p] {
                    p = j;
                }
            }
            if p != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, p)];
                    r[(i, p)] = tmp;
                }
                norms.swap(k, p);
                perm.swap(k, p);
            }
            let x_norm_sq = (k..m).fold(T::zero(), |acc, i| acc + r[(i, k)] * r[(i, k)]);
            let x_norm = x_norm_sq.sqrt();
            if x_norm == T::zero() {
                diag_sq.push(T::zero());
                continue;
            }
            let x0 = r[(k, k)];
            let alpha = if x0 >= T::zero() { -x_norm } else { x_norm };
            let v = reflectors.column_mut(k);
            v[k] = x0 - alpha;
            for i in k + 1..m {
                v[i] = r[(i, k)];
            }
            let vtv = (k..m).fold(T::zero(), |acc, i| acc + v[i] * v[i]);
            let beta = if vtv == T::zero() { T::zero() } else { T::of(2.0) / vtv };
            betas[k] = beta;
            r[(k, k)] = alpha;
            for i in k + 1..m {
                r[(i, k)] = T::zero();
            }
            for j in k + 1..n {
                let v = reflectors.column(k);
                let s = (k..m).fold(T::zero(), |acc, i| acc + v[i] * r[(i, j)]) * beta;
                for i in k..m {
                    r[(i, j)] = r[(i, j)] - s * v[i];
                }
                // Downdate is unstable once the remainder is tiny; recompute.
                norms[j] = (k + 1..m).fold(T::zero(), |acc, i| acc + r[(i, j)] * r[(i, j)]);
            }
            diag_sq.push(alpha * alpha);
        }
        Self {
            reflectors,
            betas,
            diag_sq,
            perm,
            scale_sq,
        }
    }

    /// Number of `|R_kk|^2` exceeding `rel_tol` times the largest squared
    /// column norm.
    pub fn rank(&self, rel_tol: T) -> usize {
        let thr = rel_tol * self.scale_sq;
        self.diag_sq.iter().take_while(|&&d| d > thr).count()
    }

    /// Explicit orthogonal factor `Q` (`m x m`).
    pub fn q(&self) -> Mat<T> {
        let m = self.reflectors.rows;
        let mut q = Mat::identity(m);
        for k in (0..self.betas.len()).rev() {
            let beta = self.betas[k];
            if beta == T::zero() {
                continue;
            }
            let v = self.reflectors.column(k);
            for j in 0..m {
                let s = (k..m).fold(T::zero(), |acc, i| acc + v[i] * q[(i, j)]) * beta;
                for i in k..m {
                    q[(i, j)] = q[(i, j)] - s * v[i];
                }
            }
        }
        q
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// or `None` when a pivot is not positive.
pub fn cholesky<T: Real>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the Cholesky factor.
pub fn cholesky_solve<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.rows;
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s = s - l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s = s - l[(k, i)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Rank of a symmetric positive semidefinite matrix: number of diagonally
/// pivoted Cholesky pivots exceeding `rel_tol` times the largest diagonal.
/// Pivot choice is the largest remaining diagonal, ties to the lower index.
pub fn pivoted_cholesky_rank<T: Real>(a: &Mat<T>, rel_tol: T) -> usize {
    let n = a.rows;
    let mut w = a.clone();
    let max_diag = (0..n).fold(T::zero(), |m, i| m.max(w[(i, i)]));
    let thr = rel_tol * max_diag;
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        for j in k + 1..n {
            if w[(order[j], order[j])] > w[(order[p], order[p])] {
                p = j;
            }
        }
        order.swap(k, p);
        let piv = order[k];
        let d = w[(piv, piv)];
        if !(d > thr) {
            return k;
        }
        // Schur complement update on the remaining indices.
        for a_ in k + 1..n {
            let i = order[a_];
            let f = w[(i, piv)] / d;
            for b_ in k + 1..n {
                let j = order[b_];
                w[(i, j)] = w[(i, j)] - f * w[(piv, j)];
            }
        }
    }
    n
}
