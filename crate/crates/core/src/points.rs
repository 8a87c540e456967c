use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Tolerance on `| |x| - 1 |` accepted when loading sample points.
pub fn unit_tolerance<T: Real>() -> T {
    T::of(1e-9).max(T::epsilon() * T::of(64.0))
}

/// `N >= 1` unit vectors in `R^n`, `n >= 2`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T = f64> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> PointSet<T> {
    /// Validates that every row has unit norm within [`unit_tolerance`] and
    /// renormalizes rows that are not already unit to working precision.
    /// Rows that already are keep their exact bits.
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("ambient dimension {dim} < 2")));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(Error::Domain(format!(
                "{} coordinates do not form a non-empty set of {dim}-vectors",
                data.len()
            )));
        }
        let mut data = data;
        let tol = unit_tolerance::<T>();
        let exact = T::epsilon() * T::of(4.0);
        for (index, row) in data.chunks_exact_mut(dim).enumerate() {
            let nrm = norm(row);
            if !((nrm - T::one()).abs() <= tol) {
                return Err(Error::NotUnit {
                    index,
                    norm: nrm.to_f64_lossy(),
                    tol: tol.to_f64_lossy(),
                });
            }
            if (dot(row, row) - T::one()).abs() > exact {
                row.iter_mut().for_each(|v| *v = *v / nrm);
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (index, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    index,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sample size `N`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// The first `len` points.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::Domain(format!(
                "prefix length {len} outside [1, {}]",
                self.len()
            )));
        }
        Ok(Self {
            dim: self.dim,
            data: self.data[..len * self.dim].to_vec(),
        })
    }

    /// Converts to another scalar type, renormalizing as needed.
    pub fn cast<U: Real>(&self) -> Result<PointSet<U>> {
        let data = self.data.iter().map(|v| U::of(v.to_f64_lossy())).collect();
        PointSet::new(self.dim, data)
    }
}

/// Closed halfspace `H(w, t) = {x : <w, x> >= t}` restricted to the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap<T = f64> {
    pub w: Vec<T>,
    pub t: T,
}

impl<T: Real> Cap<T> {
    pub fn new(w: Vec<T>, t: T) -> Result<Self> {
        let nrm = norm(&w);
        if !((nrm - T::one()).abs() <= T::of(1e-8).max(T::epsilon() * T::of(64.0))) {
            return Err(Error::Domain(format!("cap direction has norm {nrm}")));
        }
        if !(t >= -T::one() && t <= T::one()) {
            return Err(Error::Domain(format!("cap threshold {t} outside [-1, 1]")));
        }
        Ok(Self { w, t })
    }

    /// The complementary-orientation cap `H(-w, -t)`.
    pub fn negated(&self) -> Self {
        Self {
            w: self.w.iter().map(|&v| -v).collect(),
            t: -self.t,
        }
    }
}
