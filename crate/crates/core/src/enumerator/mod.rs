//! Exact cap discrepancy by enumeration of boundary subsets.
//!
//! Every index set `I` with `1 <= #I <= min{n, rank X~}` is visited in
//! depth-first lexicographic order. Subsets of full affine rank are split by
//! `gamma_I` into tangent caps (`gamma < 1`) and, at the top size only,
//! great-circle caps (`gamma = 1`). Both orientations of every candidate cap
//! are scored and the maximum local discrepancy is the cap discrepancy.
//!
//! Affine rank is maintained incrementally along the DFS path with a growing
//! Cholesky factor of the augmented Gram matrix; once a prefix is affinely
//! dependent all its extensions are pruned. When the top size equals the
//! ambient dimension, the last level is handled by a rotational sweep: all
//! hyperplanes through an `(n-1)`-prefix form a pencil, and one angular sort of
//! the sample around it yields the side counts for every completion at once.
//!
//! The work is split by first index and reduced with a total order on
//! `(delta, family, indices, orientation)`, so results do not depend on the
//! number of threads. The full `N x N` Gram matrix is precomputed (32 MB at
//! `N = 2000`).

mod walk;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::cap_measure::CapMeasure;
use crate::error::{Error, Result};
use crate::linalg::{Mat, PivotedQr};
use crate::points::{dot, norm, Cap, PointSet};
use crate::scalar::Real;
use crate::subset::{Family, KernelConvention, SubsetAlgebra, Tolerances};

use walk::{Accumulator, Best, Walker};

/// How the last enumeration level is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Rotational sweep at the last level when `min_bound = n`.
    #[default]
    Sweep,
    /// Score every subset on its own (O(N * #I) per subset).
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationConfig<T = f64> {
    pub tol: Tolerances<T>,
    /// Worker threads; 0 picks the hardware parallelism.
    pub threads: usize,
    pub strategy: Strategy,
    pub kernel: KernelConvention,
    /// Recompute candidate dot products directly and assert agreement with
    /// the Gram-based values to 1e-9.
    pub verify_dots: bool,
}

impl<T: Real> Default for EnumerationConfig<T> {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            threads: 0,
            strategy: Strategy::default(),
            kernel: KernelConvention::default(),
            verify_dots: false,
        }
    }
}

impl<T: Real> EnumerationConfig<T> {
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GlobalRankInfo {
    /// Rank of the `(n + 1) x N` augmented sample matrix.
    pub full_rank: usize,
    /// `min{n, full_rank}`, the largest subset size that needs visiting.
    pub min_bound: usize,
}

/// Rank of `X~` by column-pivoted Householder QR; squared diagonal entries at
/// or below `rank_tol` times the largest squared column norm count as zero.
pub fn global_rank_bound<T: Real>(ps: &PointSet<T>, rank_tol: T) -> GlobalRankInfo {
    let n = ps.dim();
    let cols: Vec<Vec<T>> = ps
        .iter()
        .map(|x| {
            let mut c = x.to_vec();
            c.push(-T::one());
            c
        })
        .collect();
    let full_rank = PivotedQr::new(&Mat::from_columns(n + 1, &cols)).rank(rank_tol).max(1);
    GlobalRankInfo {
        full_rank,
        min_bound: full_rank.min(n),
    }
}

/// `sum_{i=1}^{min_bound} C(N, i)`, exactly.
pub fn subset_space_size(n_points: u64, min_bound: u64) -> Result<u128> {
    if min_bound < 1 || min_bound > n_points {
        return Err(Error::Domain(format!(
            "subset bound {min_bound} outside [1, {n_points}]"
        )));
    }
    let overflow = || Error::Overflow {
        n: n_points,
        bound: min_bound,
    };
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for i in 1..=min_bound as u128 {
        // C(N, i) = C(N, i - 1) * (N - i + 1) / i, exact at every step.
        c = c.checked_mul(n_points as u128 - i + 1).ok_or_else(overflow)? / i;
        total = total.checked_add(c).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// Bookkeeping for one enumeration. `subsets_enumerated + subsets_pruned`
/// always equals [`subset_space_size`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    /// Subsets visited (classified), including the rank-deficient ones.
    pub subsets_enumerated: u128,
    /// Extensions of affinely dependent prefixes that were never visited.
    pub subsets_pruned: u128,
    pub subsets_skipped_rank: u128,
    pub subsets_skipped_gamma: u128,
    pub phi1_subsets: u128,
    pub phi0_subsets: u128,
}

impl EnumerationStats {
    fn merge(&mut self, o: &Self) {
        self.subsets_enumerated += o.subsets_enumerated;
        self.subsets_pruned += o.subsets_pruned;
        self.subsets_skipped_rank += o.subsets_skipped_rank;
        self.subsets_skipped_gamma += o.subsets_skipped_gamma;
        self.phi1_subsets += o.phi1_subsets;
        self.phi0_subsets += o.phi0_subsets;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport<T = f64> {
    pub delta: T,
    pub delta1: T,
    pub delta0: T,
    pub argmax_cap: Cap<T>,
    pub argmax_subset: Vec<usize>,
    pub argmax_family: Family,
    /// Whether the maximising cap is the negation of the subset's base cap.
    pub argmax_negated: bool,
    /// Empirical and cap measure of the maximising cap.
    pub argmax_empirical: T,
    pub argmax_cap_measure: T,
    pub dimension: usize,
    pub sample_size: usize,
    pub rank: GlobalRankInfo,
    pub stats: EnumerationStats,
    pub tolerances: Tolerances<T>,
    pub wall_time: f64,
    pub thread_count: usize,
}

pub(crate) fn resolve_threads(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Computes the cap discrepancy of `ps`.
pub fn enumerate<T: Real>(ps: &PointSet<T>, config: &EnumerationConfig<T>) -> Result<DiscrepancyReport<T>> {
    let mut reports = enumerate_prefixes(ps, &[ps.len()], config)?;
    Ok(reports.pop().expect("one report per size"))
}

/// Cap discrepancies of the nested prefixes `ps[..size]`, one report per
/// entry of `sizes` (strictly increasing).
///
/// Prefixes that share the subset bound are handled in a single pass: every
/// candidate cap is counted against each prefix containing its subset. The
/// reports are identical to separate [`enumerate`] calls except for
/// `wall_time`, which is the time of the shared pass.
pub fn enumerate_prefixes<T: Real>(
    ps: &PointSet<T>,
    sizes: &[usize],
    config: &EnumerationConfig<T>,
) -> Result<Vec<DiscrepancyReport<T>>> {
    if sizes.is_empty() {
        return Err(Error::Config("no sample sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 || sizes[sizes.len() - 1] > ps.len() {
        return Err(Error::Config(format!(
            "sample sizes must increase strictly within [1, {}]",
            ps.len()
        )));
    }
    let prefixes: Vec<PointSet<T>> = sizes.iter().map(|&s| ps.prefix(s)).collect::<Result<_>>()?;
    let ranks: Vec<GlobalRankInfo> = prefixes
        .iter()
        .map(|p| global_rank_bound(p, config.tol.rank_tol))
        .collect();
    let mut reports = Vec::with_capacity(sizes.len());
    let mut lo = 0;
    while lo < sizes.len() {
        let mut hi = lo + 1;
        while hi < sizes.len() && ranks[hi].min_bound == ranks[lo].min_bound {
            hi += 1;
        }
        reports.extend(enumerate_group(&prefixes[lo..hi], &ranks[lo..hi], config)?);
        lo = hi;
    }
    Ok(reports)
}

/// One enumeration pass over the largest prefix, reporting every prefix.
fn enumerate_group<T: Real>(
    prefixes: &[PointSet<T>],
    ranks: &[GlobalRankInfo],
    config: &EnumerationConfig<T>,
) -> Result<Vec<DiscrepancyReport<T>>> {
    let start = Instant::now();
    let threads = resolve_threads(config.threads);
    let ps = prefixes.last().expect("non-empty group");
    let min_bound = ranks[0].min_bound;
    let cutoffs: Vec<usize> = prefixes.iter().map(|p| p.len()).collect();
    let mu = CapMeasure::new(ps.dim())?;
    let mut alg = SubsetAlgebra::new(ps);
    alg.tol = config.tol;
    alg.kernel = config.kernel;

    let walker = Walker::new(&alg, mu, min_bound, &cutoffs, config);
    let buckets = cutoffs.len();
    // The merge is order independent, so the serial fold matches the pool.
    let acc = if threads == 1 {
        (0..ps.len())
            .map(|first| walker.run_from(first))
            .fold(Accumulator::new(buckets), Accumulator::merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..ps.len())
                .into_par_iter()
                .map(|first| walker.run_from(first))
                .reduce(|| Accumulator::new(buckets), Accumulator::merge)
        })
    };
    let wall_time = start.elapsed().as_secs_f64();

    let mut stats = EnumerationStats::default();
    let mut reports = Vec::with_capacity(buckets);
    for (b, prefix) in prefixes.iter().enumerate() {
        stats.merge(&acc.stats[b]);
        let mut cumulative = stats;
        cumulative.subsets_pruned = acc.pruned[b];

        let best1 = acc.best1[b].clone();
        let best0 = acc.best0[b].clone();
        let delta1 = best1.as_ref().map_or(T::zero(), |b| b.delta);
        let delta0 = best0.as_ref().map_or(T::zero(), |b| b.delta);
        let best = match (best1, best0) {
            (Some(a), Some(z)) => {
                if z.beats(&a) {
                    z
                } else {
                    a
                }
            }
            (Some(a), None) => a,
            (None, Some(z)) => z,
            // Every singleton is a tangent candidate, so this is unreachable for
            // valid point sets.
            (None, None) => return Err(Error::Domain("no candidate caps".into())),
        };
        let argmax_cap = reconstruct_cap(&alg, &best)?;
        let argmax_empirical = boundary_count(prefix, &best.indices, &argmax_cap, config.tol.boundary_tol);
        let argmax_cap_measure = mu.measure_snapped(argmax_cap.t);
        reports.push(DiscrepancyReport {
            delta: best.delta,
            delta1,
            delta0,
            argmax_cap,
            argmax_subset: best.indices,
            argmax_family: best.family,
            argmax_negated: best.negated,
            argmax_empirical,
            argmax_cap_measure,
            dimension: ps.dim(),
            sample_size: prefix.len(),
            rank: ranks[b],
            stats: cumulative,
            tolerances: config.tol,
            wall_time,
            thread_count: threads,
        });
    }
    Ok(reports)
}

/// Empirical measure of `cap` counting the subset's own points as inside and
/// others within `boundary_tol`.
fn boundary_count<T: Real>(ps: &PointSet<T>, indices: &[usize], cap: &Cap<T>, boundary_tol: T) -> T {
    let thr = cap.t - boundary_tol;
    let inside = ps
        .iter()
        .enumerate()
        .filter(|(j, x)| indices.contains(j) || dot(&cap.w, x) >= thr)
        .count();
    T::of_usize(inside) / T::of_usize(ps.len())
}

fn reconstruct_cap<T: Real>(alg: &SubsetAlgebra<'_, T>, best: &Best<T>) -> Result<Cap<T>> {
    let base = match best.family {
        Family::Phi0 => Cap {
            w: alg.phi0_kernel_direction(&best.indices)?,
            t: T::zero(),
        },
        _ => {
            let cap = alg.gamma(&best.indices).and_then(|g| alg.phi1_cap(&best.indices, g));
            match cap {
                Ok(c) => c,
                Err(_) => hyperplane_through(alg.points(), &best.indices)?,
            }
        }
    };
    Ok(if best.negated { base.negated() } else { base })
}

/// Unit-normalised cap whose boundary hyperplane passes through `#I = n`
/// affinely independent points, oriented to `t >= 0`.
fn hyperplane_through<T: Real>(ps: &PointSet<T>, indices: &[usize]) -> Result<Cap<T>> {
    let n = ps.dim();
    let cols: Vec<Vec<T>> = indices
        .iter()
        .map(|&i| {
            let mut c = ps.point(i).to_vec();
            c.push(-T::one());
            c
        })
        .collect();
    let q = PivotedQr::new(&Mat::from_columns(n + 1, &cols)).q();
    let v = q.column(n);
    let scale = norm(&v[..n]);
    if scale == T::zero() {
        return Err(Error::DegenerateSubset {
            indices: indices.to_vec(),
            reason: "no hyperplane direction".into(),
        });
    }
    let sign = if v[n] < T::zero() { -T::one() } else { T::one() };
    Ok(Cap {
        w: v[..n].iter().map(|&c| sign * c / scale).collect(),
        t: (sign * v[n] / scale).min(T::one()),
    })
}
