//! Unscrambled Sobol' points in Gray-code order.
//!
//! Direction numbers for dimensions 2..=8 are the first rows of the
//! Joe and Kuo `new-joe-kuo-6.21201` table; dimension 1 is the base-2 van der
//! Corput sequence.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;
const BITS: usize = 32;

/// `(s, a, m_1..m_s)` per dimension 2..=8.
const TABLE: [(u32, u32, &[u32]); MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
];

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = TABLE[dim - 1];
    let s = s as usize;
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Stateful generator yielding 32-bit integer coordinates.
#[derive(Debug, Clone)]
pub struct Sobol {
    dim: usize,
    v: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    /// Positioned so that the next call to [`Sobol::next_raw`] yields point `skip + 1`.
    pub fn new(dim: usize, skip: u64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!("Sobol dimension {dim} outside 1..={MAX_DIM}")));
        }
        if skip >= (1u64 << BITS) - 1 {
            return Err(Error::Config(format!("Sobol skip {skip} exceeds 2^{BITS} - 2")));
        }
        let v: Vec<_> = (0..dim).map(direction_numbers).collect();
        let gray = skip ^ (skip >> 1);
        let state = v
            .iter()
            .map(|vd| {
                (0..BITS)
                    .filter(|&k| (gray >> k) & 1 == 1)
                    .fold(0u32, |acc, k| acc ^ vd[k])
            })
            .collect();
        Ok(Self {
            dim,
            v,
            state,
            index: skip,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Next point as integers in `[0, 2^32)`.
    pub fn next_raw(&mut self) -> Result<&[u32]> {
        let c = self.index.trailing_ones() as usize;
        if c >= BITS {
            return Err(Error::Config("Sobol sequence exhausted".into()));
        }
        for (x, vd) in self.state.iter_mut().zip(&self.v) {
            *x ^= vd[c];
        }
        self.index += 1;
        Ok(&self.state)
    }

    pub fn next_point(&mut self, out: &mut [f64]) -> Result<()> {
        let raw = self.next_raw()?;
        for (o, &x) in out.iter_mut().zip(raw) {
            *o = x as f64 * (1.0 / 4_294_967_296.0);
        }
        Ok(())
    }
}

/// Points `skip + 1 ..= skip + count` of the `dim`-dimensional sequence.
pub fn sobol_sequence(dim: usize, count: usize, skip: u64) -> Result<Vec<Vec<f64>>> {
    let mut gen = Sobol::new(dim, skip)?;
    (0..count)
        .map(|_| {
            let mut p = vec![0.0; dim];
            gen.next_point(&mut p)?;
            Ok(p)
        })
        .collect()
}
