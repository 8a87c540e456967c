use std::cmp::Ordering;

use crate::cap_measure::CapMeasure;
use crate::linalg::{Mat, PivotedQr};
use crate::points::dot;
use crate::scalar::Real;
use crate::subset::{Family, Gram, SubsetAlgebra, Tolerances};

use super::{EnumerationConfig, EnumerationStats, Strategy};

/// Best candidate seen so far within one family.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Best<T> {
    pub delta: T,
    pub family: Family,
    pub indices: Vec<usize>,
    pub negated: bool,
}

impl<T: Real> Best<T> {
    /// Larger delta wins; ties go to the smaller family tag, then the
    /// lexicographically smaller index set, then the non-negated cap.
    pub fn beats(&self, other: &Self) -> bool {
        match self.delta.partial_cmp(&other.delta) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => (self.family, &self.indices, self.negated) < (other.family, &other.indices, other.negated),
        }
    }
}

/// Per-cutoff results of a (partial) enumeration.
#[derive(Debug, Clone)]
pub(crate) struct Accumulator<T> {
    pub best1: Vec<Option<Best<T>>>,
    pub best0: Vec<Option<Best<T>>>,
    floor1: Vec<T>,
    floor0: Vec<T>,
    /// Indexed by the cutoff bucket of the subset's largest index; the
    /// `subsets_pruned` field is unused here.
    pub stats: Vec<EnumerationStats>,
    /// Pruned subsets per cutoff, already cumulative.
    pub pruned: Vec<u128>,
}

fn pick<T: Real>(a: Option<Best<T>>, b: Option<Best<T>>) -> Option<Best<T>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.beats(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

impl<T: Real> Accumulator<T> {
    pub fn new(buckets: usize) -> Self {
        Self {
            best1: vec![None; buckets],
            best0: vec![None; buckets],
            floor1: vec![T::neg_infinity(); buckets],
            floor0: vec![T::neg_infinity(); buckets],
            stats: vec![EnumerationStats::default(); buckets],
            pruned: vec![0; buckets],
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        for b in 0..self.stats.len() {
            self.stats[b].merge(&other.stats[b]);
            self.pruned[b] += other.pruned[b];
            self.best1[b] = pick(self.best1[b].take(), other.best1[b].clone());
            self.best0[b] = pick(self.best0[b].take(), other.best0[b].clone());
            self.floor1[b] = self.floor1[b].max(other.floor1[b]);
            self.floor0[b] = self.floor0[b].max(other.floor0[b]);
        }
        self
    }

    #[inline]
    fn floor(&self, family: Family, b: usize) -> T {
        match family {
            Family::Phi0 => self.floor0[b],
            _ => self.floor1[b],
        }
    }

    /// Offers the candidate `prefix ++ tail` for cutoff `b`, allocating only
    /// when it wins.
    #[inline]
    fn offer(&mut self, family: Family, b: usize, prefix: &[usize], tail: Option<usize>, negated: bool, delta: T) {
        let floor = match family {
            Family::Phi0 => &mut self.floor0[b],
            _ => &mut self.floor1[b],
        };
        if !(delta >= *floor) {
            return;
        }
        *floor = delta;
        let slot = match family {
            Family::Phi0 => &mut self.best0[b],
            _ => &mut self.best1[b],
        };
        if let Some(cur) = slot {
            if delta == cur.delta {
                let key = prefix.iter().copied().chain(tail);
                let ord = key.cmp(cur.indices.iter().copied());
                if ord == Ordering::Greater || (ord == Ordering::Equal && (negated || !cur.negated)) {
                    return;
                }
            }
        }
        *slot = Some(Best {
            delta,
            family,
            indices: prefix.iter().copied().chain(tail).collect(),
            negated,
        });
    }
}

/// Incrementally factored DFS path: `L L^T` is the augmented Gram matrix of
/// the current index set and `z = L^{-1} 1`, so `gamma = |z|^2`.
struct Path<T> {
    indices: Vec<usize>,
    /// Row-major lower triangle with stride `cap`.
    l: Vec<T>,
    z: Vec<T>,
    gamma: Vec<T>,
    cap: usize,
    row: Vec<T>,
}

impl<T: Real> Path<T> {
    fn new(cap: usize) -> Self {
        Self {
            indices: Vec::with_capacity(cap),
            l: vec![T::zero(); cap * cap],
            z: Vec::with_capacity(cap),
            gamma: Vec::with_capacity(cap),
            cap,
            row: vec![T::zero(); cap],
        }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    fn last(&self) -> usize {
        *self.indices.last().expect("non-empty path")
    }

    fn gamma(&self) -> T {
        *self.gamma.last().expect("non-empty path")
    }

    /// Appends `j` if the augmented columns stay independent: the new
    /// Cholesky pivot must exceed `rank_tol` times the largest diagonal.
    fn try_push(&mut self, gram: &Gram<T>, j: usize, rank_tol: T) -> bool {
        let k = self.len();
        let one = T::one();
        let gj = gram.row(j);
        let mut sq = T::zero();
        let mut lz = T::zero();
        let mut max_diag = gj[j] + one;
        for m in 0..k {
            let i = self.indices[m];
            max_diag = max_diag.max(gram.get(i, i) + one);
            let mut s = gj[i] + one;
            for p in 0..m {
                s = s - self.l[m * self.cap + p] * self.row[p];
            }
            let v = s / self.l[m * self.cap + m];
            self.row[m] = v;
            sq = sq + v * v;
            lz = lz + v * self.z[m];
        }
        let pivot = gj[j] + one - sq;
        if !(pivot > rank_tol * max_diag) {
            return false;
        }
        let d = pivot.sqrt();
        for p in 0..k {
            self.l[k * self.cap + p] = self.row[p];
        }
        self.l[k * self.cap + k] = d;
        let zk = (one - lz) / d;
        self.z.push(zk);
        let prev = self.gamma.last().copied().unwrap_or(T::zero());
        self.gamma.push(prev + zk * zk);
        self.indices.push(j);
        true
    }

    fn pop(&mut self) {
        self.indices.pop();
        self.z.pop();
        self.gamma.pop();
    }

    /// `y = (X~^T X~)^{-1} 1 = L^{-T} z`.
    fn weights(&self, y: &mut Vec<T>) {
        let k = self.len();
        y.clear();
        y.extend_from_slice(&self.z);
        for i in (0..k).rev() {
            let mut s = y[i];
            for m in i + 1..k {
                s = s - self.l[m * self.cap + i] * y[m];
            }
            y[i] = s / self.l[i * self.cap + i];
        }
    }
}

#[derive(Default)]
struct Scratch<T> {
    y: Vec<T>,
    acc: Vec<T>,
    /// Per point: plane coordinates and their squared norm.
    proj: Vec<[T; 3]>,
    keys: Vec<u64>,
    ext: Vec<u64>,
    always: Vec<u32>,
    win_a: Vec<u32>,
    win_b: Vec<u32>,
    cnt_plus: Vec<u32>,
    cnt_minus: Vec<u32>,
    indices: Vec<usize>,
}

/// Fixed-point scale of sweep keys: angles in `[0, 4)` map to `[0, 2^42)`.
const KEY_ONE: f64 = (1u64 << 40) as f64;
const TWO: u64 = 2 << 40;
const FOUR: u64 = 4 << 40;
/// Low bits of a packed key hold the point index.
const INDEX_BITS: u32 = 22;
/// Window entries keep the cutoff bucket below a 44-bit key.
const MAX_BUCKET_BITS: u32 = 20;

pub(crate) struct Walker<'a, 'p, T> {
    alg: &'a SubsetAlgebra<'p, T>,
    mu: CapMeasure<T>,
    tol: Tolerances<T>,
    min_bound: usize,
    n_points: usize,
    /// Increasing sample sizes; the last one is `n_points`.
    cutoffs: Vec<usize>,
    n_inv: Vec<T>,
    /// Smallest cutoff bucket containing each point.
    bucket: Vec<u32>,
    sweep_last: bool,
    verify_dots: bool,
    /// `binom[r * (min_bound + 1) + s] = C(r, s)`, saturating.
    binom: Vec<u128>,
}

/// Monotone stand-in for the polar angle of `(x, y) != 0`, in `[0, 4)`, with
/// `key(-v) = key(v) + 2 (mod 4)`. Starts at the direction `(1, 0)`.
#[inline]
fn pseudo_angle<T: Real>(x: T, y: T) -> T {
    let a = x / (x.abs() + y.abs());
    if y < T::zero() {
        T::of(3.0) + a
    } else {
        T::one() - a
    }
}

impl<'a, 'p, T: Real> Walker<'a, 'p, T> {
    pub fn new(
        alg: &'a SubsetAlgebra<'p, T>,
        mu: CapMeasure<T>,
        min_bound: usize,
        cutoffs: &[usize],
        config: &EnumerationConfig<T>,
    ) -> Self {
        let n_points = alg.points().len();
        let n = alg.points().dim();
        debug_assert_eq!(cutoffs.last(), Some(&n_points));
        let width = min_bound + 1;
        let mut binom = vec![0u128; (n_points + 1) * width];
        for r in 0..=n_points {
            binom[r * width] = 1;
            for s in 1..width.min(r + 1) {
                let above = binom[(r - 1) * width + s - 1];
                let same = if s < r { binom[(r - 1) * width + s] } else { 0 };
                binom[r * width + s] = above.saturating_add(same);
            }
        }
        let mut bucket = Vec::with_capacity(n_points);
        for (b, &end) in cutoffs.iter().enumerate() {
            bucket.resize(end, b as u32);
        }
        Self {
            alg,
            mu,
            tol: config.tol,
            min_bound,
            n_points,
            cutoffs: cutoffs.to_vec(),
            n_inv: cutoffs.iter().map(|&c| T::one() / T::of_usize(c)).collect(),
            bucket,
            sweep_last: config.strategy == Strategy::Sweep
                && min_bound == n
                && n >= 2
                && n_points < (1 << INDEX_BITS)
                && cutoffs.len() <= (1 << MAX_BUCKET_BITS),
            verify_dots: config.verify_dots,
            binom,
        }
    }

    pub fn buckets(&self) -> usize {
        self.cutoffs.len()
    }

    fn gram(&self) -> &Gram<T> {
        self.alg.gram()
    }

    /// Number of subsets of size `1..=levels` drawn from `r` elements.
    fn extensions(&self, r: usize, levels: usize) -> u128 {
        let width = self.min_bound + 1;
        (1..=levels).map(|s| self.binom[r * width + s]).sum()
    }

    /// Records the never-visited extensions of a dependent prefix ending in `j`.
    fn prune(&self, acc: &mut Accumulator<T>, j: usize, levels: usize) {
        if levels == 0 {
            return;
        }
        for (b, &end) in self.cutoffs.iter().enumerate() {
            if end > j {
                acc.pruned[b] += self.extensions(end - 1 - j, levels);
            }
        }
    }

    /// Enumerates every subset whose smallest index is `first`.
    pub fn run_from(&self, first: usize) -> Accumulator<T> {
        let mut acc = Accumulator::new(self.buckets());
        let mut path = Path::new(self.min_bound);
        let mut scratch = Scratch::default();
        scratch.cnt_plus.resize(self.buckets(), 0);
        scratch.cnt_minus.resize(self.buckets(), 0);
        let b = self.bucket[first] as usize;
        acc.stats[b].subsets_enumerated += 1;
        if !path.try_push(self.gram(), first, self.tol.rank_tol) {
            // A single unit vector is always affinely independent; only
            // pathological tolerances get here.
            acc.stats[b].subsets_skipped_rank += 1;
            self.prune(&mut acc, first, self.min_bound - 1);
            return acc;
        }
        self.score_path(&path, &mut acc, &mut scratch);
        if self.min_bound > 1 {
            self.descend(&mut path, first + 1, &mut acc, &mut scratch);
        }
        acc
    }

    fn descend(&self, path: &mut Path<T>, start: usize, acc: &mut Accumulator<T>, scratch: &mut Scratch<T>) {
        let k = path.len();
        if self.sweep_last && k + 1 == self.min_bound {
            self.sweep(path, acc, scratch);
            return;
        }
        for j in start..self.n_points {
            let b = self.bucket[j] as usize;
            acc.stats[b].subsets_enumerated += 1;
            if !path.try_push(self.gram(), j, self.tol.rank_tol) {
                acc.stats[b].subsets_skipped_rank += 1;
                self.prune(acc, j, self.min_bound - k - 1);
                continue;
            }
            self.score_path(path, acc, scratch);
            if k + 1 < self.min_bound {
                self.descend(path, j + 1, acc, scratch);
            }
            path.pop();
        }
    }

    /// Turns per-bucket inside counts into per-cutoff local discrepancies of
    /// the cap with measure `cap_plus` and of its negation.
    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn emit(
        &self,
        acc: &mut Accumulator<T>,
        family: Family,
        prefix: &[usize],
        tail: Option<usize>,
        cap_plus: T,
        plus: &[u32],
        minus: &[u32],
    ) {
        let from = self.bucket[tail.unwrap_or(*prefix.last().expect("non-empty subset"))] as usize;
        let cap_minus = T::one() - cap_plus;
        let (mut cp, mut cm) = (0usize, 0usize);
        for b in 0..self.buckets() {
            cp += plus[b] as usize;
            cm += minus[b] as usize;
            if b >= from {
                let d_plus = (T::of_usize(cp) * self.n_inv[b] - cap_plus).abs();
                let d_minus = (T::of_usize(cm) * self.n_inv[b] - cap_minus).abs();
                if d_plus.max(d_minus) >= acc.floor(family, b) {
                    acc.offer(family, b, prefix, tail, false, d_plus);
                    acc.offer(family, b, prefix, tail, true, d_minus);
                }
            }
        }
    }

    /// Classifies the subset on the path and scores its caps directly.
    fn score_path(&self, path: &Path<T>, acc: &mut Accumulator<T>, scratch: &mut Scratch<T>) {
        let gamma = path.gamma();
        let one = T::one();
        let k = path.len();
        let stats = &mut acc.stats[self.bucket[path.last()] as usize];
        if (gamma - one).abs() <= self.tol.gamma_tol && k == self.min_bound {
            if let Ok(w) = self.alg.phi0_kernel_direction(&path.indices) {
                stats.phi0_subsets += 1;
                self.score_great_circle(
                    &path.indices,
                    None,
                    &w,
                    acc,
                    &mut scratch.cnt_plus,
                    &mut scratch.cnt_minus,
                );
                return;
            }
            if gamma >= one {
                stats.subsets_skipped_gamma += 1;
                return;
            }
        } else if !(gamma < one - self.tol.gamma_tol) {
            stats.subsets_skipped_gamma += 1;
            return;
        }
        stats.phi1_subsets += 1;
        self.score_tangent(path, acc, scratch);
    }

    /// Scores `(w_I, t_I)` and `(-w_I, -t_I)` using Gram-matrix dot products:
    /// `<w_I, x_j> = s * sum_a G[j, a] y_a` with `s = 1 / (gamma t)`.
    fn score_tangent(&self, path: &Path<T>, acc: &mut Accumulator<T>, scratch: &mut Scratch<T>) {
        let one = T::one();
        let gamma = path.gamma();
        path.weights(&mut scratch.y);
        let t = ((one - gamma) / gamma).sqrt().min(one);
        let gram = self.gram();
        let dots = &mut scratch.acc;
        dots.clear();
        dots.resize(self.n_points, T::zero());
        for (&i, &yi) in path.indices.iter().zip(&scratch.y) {
            for (a, &g) in dots.iter_mut().zip(gram.row(i)) {
                *a = *a + g * yi;
            }
        }
        // In units of sum_a G[j, a] y_a the boundary sits at gamma t^2 = 1 - gamma.
        let thr = one - gamma;
        let slack = self.tol.boundary_tol * gamma * t;
        let (lo, hi) = (thr - slack, thr + slack);
        let (plus, minus) = (&mut scratch.cnt_plus, &mut scratch.cnt_minus);
        plus.fill(0);
        minus.fill(0);
        for (&d, &b) in dots.iter().zip(&self.bucket) {
            plus[b as usize] += (d >= lo) as u32;
            minus[b as usize] += (d <= hi) as u32;
        }
        for &i in &path.indices {
            let b = self.bucket[i] as usize;
            plus[b] += !(dots[i] >= lo) as u32;
            minus[b] += !(dots[i] <= hi) as u32;
        }
        if self.verify_dots {
            self.check_dots(path, &scratch.y, dots, gamma, t);
        }
        let cap_plus = self.mu.measure_snapped(t);
        self.emit(
            acc,
            Family::Phi1,
            &path.indices,
            None,
            cap_plus,
            &scratch.cnt_plus,
            &scratch.cnt_minus,
        );
    }

    fn check_dots(&self, path: &Path<T>, y: &[T], dots: &[T], gamma: T, t: T) {
        let ps = self.alg.points();
        let scale = T::one() / (gamma * t);
        let mut w = vec![T::zero(); ps.dim()];
        for (&i, &yi) in path.indices.iter().zip(y) {
            for (wk, &xk) in w.iter_mut().zip(ps.point(i)) {
                *wk = *wk + scale * yi * xk;
            }
        }
        for (j, x) in ps.iter().enumerate() {
            let direct = dot(&w, x);
            let via_gram = scale * dots[j];
            assert!(
                (direct - via_gram).abs() <= T::of(1e-9),
                "Gram dot product mismatch for subset {:?}, point {j}: {direct} vs {via_gram}",
                path.indices
            );
        }
    }

    /// Scores the hemispheres `(w, 0)` and `(-w, 0)` with explicit dot
    /// products; the subset is `prefix ++ tail`.
    fn score_great_circle(
        &self,
        prefix: &[usize],
        tail: Option<usize>,
        w: &[T],
        acc: &mut Accumulator<T>,
        plus: &mut [u32],
        minus: &mut [u32],
    ) {
        let ps = self.alg.points();
        let tol = self.tol.boundary_tol;
        plus.fill(0);
        minus.fill(0);
        for (j, x) in ps.iter().enumerate() {
            let d = dot(w, x);
            let member = prefix.contains(&j) || tail == Some(j);
            let b = self.bucket[j] as usize;
            plus[b] += (member || d >= -tol) as u32;
            minus[b] += (member || d <= tol) as u32;
        }
        self.emit(acc, Family::Phi0, prefix, tail, T::of(0.5), plus, minus);
    }

    /// Last level when `#I = n`: all completions of the `(n-1)`-prefix at once.
    ///
    /// In augmented coordinates `x~ = (x, -1)` a cap is a vector `v = (w, t)`
    /// with `x` inside iff `<v, x~> >= 0`. Caps whose boundary contains the
    /// prefix live in the 2-dimensional orthogonal complement of the prefix
    /// columns. Projecting every `x~_j` onto an orthonormal basis of that plane
    /// gives `q_j`; the cap through the prefix and point `c` is `rot90(q_c)`
    /// (and its negation), its inside is the closed half-plane left of `q_c`,
    /// and `gamma = 1 - u^2 / |q_c|^2` with `u` the `t`-component of `rot90(q_c)`.
    /// Side counts come from one angular sort and four monotone pointers.
    fn sweep(&self, path: &Path<T>, acc: &mut Accumulator<T>, scratch: &mut Scratch<T>) {
        let ps = self.alg.points();
        let n = ps.dim();
        let one = T::one();
        let last = path.last();
        if last + 1 >= self.n_points {
            return;
        }
        let nb = self.buckets();

        let cols: Vec<Vec<T>> = path
            .indices
            .iter()
            .map(|&i| {
                let mut c = ps.point(i).to_vec();
                c.push(-one);
                c
            })
            .collect();
        let q = PivotedQr::new(&Mat::from_columns(n + 1, &cols)).q();
        let (e1, e2) = (q.column(n - 1), q.column(n));
        let r = (e1[n], e2[n]);

        let zero_thr = self.tol.boundary_tol * self.tol.boundary_tol;
        let rank_thr = self.tol.rank_tol * T::of(2.0);
        let eps = (self.tol.boundary_tol.to_f64_lossy() * KEY_ONE).ceil() as u64;

        for (b, &end) in self.cutoffs.iter().enumerate() {
            let start = if b == 0 { 0 } else { self.cutoffs[b - 1] };
            let fresh = end.saturating_sub(start.max(last + 1));
            acc.stats[b].subsets_enumerated += fresh as u128;
        }

        let Scratch {
            proj,
            keys,
            ext,
            always,
            win_a,
            win_b,
            cnt_plus: plus,
            cnt_minus: minus,
            indices,
            ..
        } = scratch;
        proj.resize(self.n_points, [T::zero(); 3]);
        keys.resize(self.n_points, 0);
        let mut m = 0usize;
        always.clear();
        always.resize(nb, 0);
        for (j, (x, slot)) in ps.iter().zip(proj.iter_mut()).enumerate() {
            let (mut qx, mut qy) = (-e1[n], -e2[n]);
            for ((&a, &b), &xk) in e1.iter().zip(e2).zip(x) {
                qx = qx + a * xk;
                qy = qy + b * xk;
            }
            let n2 = qx * qx + qy * qy;
            *slot = [qx, qy, n2];
            if j > last && !(n2 > rank_thr) {
                acc.stats[self.bucket[j] as usize].subsets_skipped_rank += 1;
            }
            if n2 <= zero_thr || (j <= last && path.indices.contains(&j)) {
                always[self.bucket[j] as usize] += 1;
            } else {
                // An angle that rounds up to 4 wraps to 0.
                let key = ((pseudo_angle(qx, qy).to_f64_lossy() * KEY_ONE) as u64) & (FOUR - 1);
                keys[m] = (key << INDEX_BITS) | j as u64;
                m += 1;
            }
        }
        keys.truncate(m);
        keys.sort_unstable();

        // Window entries: the sorted keys shifted by 4, followed by a copy
        // shifted by 8 so that windows never wrap, preceded by the few keys
        // that a window reaching below the smallest key needs. The point's
        // cutoff bucket sits in the low bits.
        let bits = usize::BITS - (nb - 1).leading_zeros();
        let mask = (1u64 << bits) - 1;
        let index_mask = (1u64 << INDEX_BITS) - 1;
        let entry =
            |k: u64, shift: u64| (((k >> INDEX_BITS) + shift) << bits) | self.bucket[(k & index_mask) as usize] as u64;
        ext.clear();
        if let Some(&first) = keys.first() {
            let floor = (first >> INDEX_BITS) + FOUR - eps;
            ext.extend(
                keys.iter()
                    .filter(|&&k| (k >> INDEX_BITS) >= floor)
                    .map(|&k| entry(k, 0)),
            );
        }
        ext.extend(keys.iter().map(|&k| entry(k, FOUR)));
        ext.extend(keys.iter().map(|&k| entry(k, 2 * FOUR)));
        win_a.clear();
        win_a.resize(nb, 0);
        win_b.clear();
        win_b.resize(nb, 0);

        // Only completions `c > last` are scored; the pointers can skip the rest.
        let mut n_cand = 0usize;
        for p in 0..m {
            let k = keys[p];
            keys[n_cand] = k;
            n_cand += ((k & index_mask) as usize > last) as usize;
        }

        let (mut lo_a, mut hi_a, mut lo_b, mut hi_b) = (0usize, 0usize, 0usize, 0usize);
        for &packed in &keys[..n_cand] {
            let key = (packed >> INDEX_BITS) + FOUR;
            let c = (packed & index_mask) as usize;
            // Upper pointers move first so no count goes negative.
            let top_a = ((key + TWO + eps) << bits) | mask;
            while let Some(&e) = ext.get(hi_a) {
                if e > top_a {
                    break;
                }
                win_a[(e & mask) as usize] += 1;
                hi_a += 1;
            }
            let bottom_a = (key - eps) << bits;
            while let Some(&e) = ext.get(lo_a) {
                if e >= bottom_a {
                    break;
                }
                win_a[(e & mask) as usize] -= 1;
                lo_a += 1;
            }
            let top_b = ((key + FOUR + eps) << bits) | mask;
            while let Some(&e) = ext.get(hi_b) {
                if e > top_b {
                    break;
                }
                win_b[(e & mask) as usize] += 1;
                hi_b += 1;
            }
            let bottom_b = (key + TWO - eps) << bits;
            while let Some(&e) = ext.get(lo_b) {
                if e >= bottom_b {
                    break;
                }
                win_b[(e & mask) as usize] -= 1;
                lo_b += 1;
            }

            let [qx, qy, n2] = proj[c];
            if !(n2 > rank_thr) {
                continue;
            }
            let stats = &mut acc.stats[self.bucket[c] as usize];
            let u = qx * r.1 - qy * r.0;
            let gamma = (n2 - u * u) / n2;
            if (gamma - one).abs() <= self.tol.gamma_tol {
                indices.clear();
                indices.extend_from_slice(&path.indices);
                indices.push(c);
                if let Ok(w) = self.alg.phi0_kernel_direction(indices) {
                    stats.phi0_subsets += 1;
                    self.score_great_circle(&path.indices, Some(c), &w, acc, plus, minus);
                    continue;
                }
                if gamma >= one {
                    stats.subsets_skipped_gamma += 1;
                    continue;
                }
            }
            stats.phi1_subsets += 1;
            let (inside, outside) = if u > T::zero() {
                (&*win_a, &*win_b)
            } else {
                (&*win_b, &*win_a)
            };
            for b in 0..nb {
                plus[b] = inside[b] + always[b];
                minus[b] = outside[b] + always[b];
            }
            let t = (u.abs() / (n2 - u * u).sqrt()).min(one);
            let cap_plus = self.mu.measure_snapped(t);
            self.emit(acc, Family::Phi1, &path.indices, Some(c), cap_plus, plus, minus);
        }
    }
}
