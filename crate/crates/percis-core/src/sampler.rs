//! Shortest-path sampling from the state-aware importance distribution or
//! the uniform baseline.
//!
//! Pairs are drawn in sorted-state space with two binary searches over
//! prefix-sum arrays (`O(log n)` per pair after `O(n)` preprocessing),
//! then one shortest path of the pair is selected uniformly with a
//! balanced bidirectional BFS: both frontiers grow level by level, the
//! cheaper side (by frontier degree sum) expands first, path counts are
//! kept per side, and the path is reconstructed through a middle edge
//! chosen proportionally to the forward/backward count product.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{batch_base, sample_rng, LANE_PAIR, LANE_PATH};
use crate::states::PercolationStates;

const UNSET: u32 = u32::MAX;

/// Prefix-sum arrays over the sorted states enabling `O(log n)` pair
/// draws.
///
/// With states `x_0 >= x_1 >= ... >= x_{n-1}`:
/// `w[i] = sum_{j>=i} x_j`, `ci[i] = (n-i) x_i - w[i]` (the total weight of
/// pairs starting at sorted position `i`), `r[i] = sum_{j>=i} ci[j]`, and
/// `c = r[0]` equals the total pair weight.
#[derive(Debug, Clone)]
pub struct ImportanceIndex {
    x: Vec<f64>,
    w: Vec<f64>,
    ci: Vec<f64>,
    r: Vec<f64>,
    c: f64,
}

impl ImportanceIndex {
    /// `O(n)` preprocessing over the sorted states.
    pub fn build(ps: &PercolationStates) -> Self {
        let sorted = ps.sorted();
        let n = sorted.len();
        let mut w = vec![0.0; n + 1];
        let mut ci = vec![0.0; n];
        let mut r = vec![0.0; n + 1];
        let mut c = 0.0;
        for i in (0..n).rev() {
            w[i] = w[i + 1] + sorted[i];
            ci[i] = (n - i) as f64 * sorted[i] - w[i];
            r[i] = r[i + 1] + ci[i];
            c += ci[i];
        }
        ImportanceIndex {
            x: sorted.to_vec(),
            w,
            ci,
            r,
            c,
        }
    }

    /// Total pair weight; agrees with the states' `C`.
    pub fn total(&self) -> f64 {
        self.c
    }

    pub fn suffix_state_sums(&self) -> &[f64] {
        &self.w
    }

    pub fn start_weights(&self) -> &[f64] {
        &self.ci
    }

    pub fn suffix_weight_sums(&self) -> &[f64] {
        &self.r
    }

    fn len(&self) -> usize {
        self.ci.len()
    }

    /// Cumulative marginal mass of start positions `0..=x`.
    #[inline]
    fn start_cdf(&self, x: usize) -> f64 {
        (self.c - self.r[x + 1]) / self.c
    }

    /// Cumulative conditional mass of targets `s+1..=x` given start `s`.
    #[inline]
    fn target_cdf(&self, s: usize, x: usize, xs: f64) -> f64 {
        ((x - s + 1) as f64 * xs - self.w[s] + self.w[x + 1]) / self.ci[s]
    }

    /// Draws a pair of sorted positions `(s, t)`, `t > s`, with
    /// probability proportional to `x_s - x_t`.
    ///
    /// Returns `None` when the first search lands on a zero-mass start or
    /// the second collapses onto `s` (floating boundaries of measure
    /// zero); the caller redraws with fresh variates.
    pub fn sample_pair(&self, u1: f64, u2: f64) -> Option<(usize, usize)> {
        let n = self.len();
        debug_assert!(self.c > 0.0);

        let mut lo = 0i64;
        let mut hi = n as i64 - 1;
        while lo <= hi {
            let mid = (lo + hi) / 2;
            if u1 <= self.start_cdf(mid as usize) {
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
        let s = lo as usize;
        if s >= n || self.ci[s] <= 0.0 {
            return None;
        }

        let xs = self.sorted_value(s);
        let mut lo = s as i64;
        let mut hi = n as i64 - 1;
        while lo <= hi {
            let mid = (lo + hi) / 2;
            if u2 <= self.target_cdf(s, mid as usize, xs) {
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
        let t = lo as usize;
        if t >= n || t <= s {
            return None;
        }
        Some((s, t))
    }

    #[inline]
    fn sorted_value(&self, i: usize) -> f64 {
        self.x[i]
    }
}

/// One sampled shortest path, reduced to its endpoints and internal nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub source: u32,
    pub target: u32,
    /// Internal nodes in path order (endpoints excluded).
    pub internal: Vec<u32>,
    /// True iff `target` is unreachable from `source`.
    pub empty: bool,
}

impl PathSample {
    pub fn unreachable(source: u32, target: u32) -> Self {
        PathSample {
            source,
            target,
            internal: Vec::new(),
            empty: true,
        }
    }

    pub fn internal_count(&self) -> usize {
        self.internal.len()
    }
}

/// Which distribution a batch was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleDistribution {
    Importance,
    Uniform,
}

/// A batch of i.i.d. path samples; unreachable pairs still count.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub samples: Vec<PathSample>,
    pub dist: SampleDistribution,
    pub master_seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_internal_count(&self) -> usize {
        self.samples
            .iter()
            .map(PathSample::internal_count)
            .max()
            .unwrap_or(0)
    }
}

/// Wall-clock split of a batch: pair draws vs path BFS work.
#[derive(Debug, Clone, Copy, Default)]
pub struct BatchTimings {
    pub pair_time: Duration,
    pub path_time: Duration,
}

/// Uniform ordered pair with `s != t`.
pub fn sample_pair_uniform(n: usize, rng: &mut impl Rng) -> (u32, u32) {
    debug_assert!(n >= 2);
    let s = rng.gen_range(0..n) as u32;
    let mut t = rng.gen_range(0..n - 1) as u32;
    if t >= s {
        t += 1;
    }
    (s, t)
}

/// Reusable buffers for the bidirectional search; one per worker.
#[derive(Debug)]
pub struct BbfsScratch {
    dist_f: Vec<u32>,
    dist_b: Vec<u32>,
    sigma_f: Vec<f64>,
    sigma_b: Vec<f64>,
    touched_f: Vec<u32>,
    touched_b: Vec<u32>,
    levels_f: Vec<Vec<u32>>,
    levels_b: Vec<Vec<u32>>,
    middle: Vec<(u32, u32)>,
}

impl BbfsScratch {
    pub fn new(n: usize) -> Self {
        BbfsScratch {
            dist_f: vec![UNSET; n],
            dist_b: vec![UNSET; n],
            sigma_f: vec![0.0; n],
            sigma_b: vec![0.0; n],
            touched_f: Vec::new(),
            touched_b: Vec::new(),
            levels_f: Vec::new(),
            levels_b: Vec::new(),
            middle: Vec::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched_f {
            self.dist_f[v as usize] = UNSET;
            self.sigma_f[v as usize] = 0.0;
        }
        for &v in &self.touched_b {
            self.dist_b[v as usize] = UNSET;
            self.sigma_b[v as usize] = 0.0;
        }
        self.touched_f.clear();
        self.touched_b.clear();
        for level in &mut self.levels_f {
            level.clear();
        }
        for level in &mut self.levels_b {
            level.clear();
        }
        self.middle.clear();
    }

    fn level_mut(levels: &mut Vec<Vec<u32>>, depth: usize) -> &mut Vec<u32> {
        while levels.len() <= depth {
            levels.push(Vec::new());
        }
        &mut levels[depth]
    }
}

/// Selects an index proportionally to `weights`, falling back to the last
/// positive entry on floating roundoff.
fn pick_weighted<I: Iterator<Item = f64> + Clone>(weights: I, total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.clone().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if acc > target {
            return i;
        }
    }
    last
}

/// Draws one shortest path from `source` to `target` uniformly at random
/// over all shortest paths, or an empty sample when unreachable.
pub fn random_shortest_path(
    g: &Graph,
    source: u32,
    target: u32,
    rng: &mut ChaCha8Rng,
) -> PathSample {
    let mut scratch = BbfsScratch::new(g.node_count());
    random_shortest_path_with(g, source, target, rng, &mut scratch)
}

/// As [`random_shortest_path`] but reusing caller-owned buffers.
pub fn random_shortest_path_with(
    g: &Graph,
    source: u32,
    target: u32,
    rng: &mut ChaCha8Rng,
    sc: &mut BbfsScratch,
) -> PathSample {
    assert_ne!(source, target, "path endpoints must differ");
    sc.reset();

    sc.dist_f[source as usize] = 0;
    sc.sigma_f[source as usize] = 1.0;
    sc.touched_f.push(source);
    BbfsScratch::level_mut(&mut sc.levels_f, 0).push(source);

    sc.dist_b[target as usize] = 0;
    sc.sigma_b[target as usize] = 1.0;
    sc.touched_b.push(target);
    BbfsScratch::level_mut(&mut sc.levels_b, 0).push(target);

    let mut deg_f = g.out_degree(source);
    let mut deg_b = g.in_degree(target);
    // completed frontier expansions per side
    let mut rf = 0usize;
    let mut rb = 0usize;
    let mut best = usize::MAX;

    loop {
        if best <= rf + rb {
            break;
        }
        if sc.levels_f[rf].is_empty() || sc.levels_b[rb].is_empty() {
            // one side is exhausted, so its labeling is complete
            break;
        }
        if deg_f <= deg_b {
            let mut next_deg = 0usize;
            BbfsScratch::level_mut(&mut sc.levels_f, rf + 1);
            for fi in 0..sc.levels_f[rf].len() {
                let u = sc.levels_f[rf][fi];
                let su = sc.sigma_f[u as usize];
                for &w in g.out_neighbors(u) {
                    if sc.dist_b[w as usize] != UNSET {
                        best = best.min(rf + 1 + sc.dist_b[w as usize] as usize);
                    }
                    let dw = sc.dist_f[w as usize];
                    if dw == UNSET {
                        sc.dist_f[w as usize] = (rf + 1) as u32;
                        sc.sigma_f[w as usize] = su;
                        sc.touched_f.push(w);
                        sc.levels_f[rf + 1].push(w);
                        next_deg += g.out_degree(w);
                    } else if dw as usize == rf + 1 {
                        sc.sigma_f[w as usize] += su;
                    }
                }
            }
            rf += 1;
            deg_f = next_deg;
        } else {
            let mut next_deg = 0usize;
            BbfsScratch::level_mut(&mut sc.levels_b, rb + 1);
            for bi in 0..sc.levels_b[rb].len() {
                let y = sc.levels_b[rb][bi];
                let sy = sc.sigma_b[y as usize];
                for &w in g.in_neighbors(y) {
                    if sc.dist_f[w as usize] != UNSET {
                        best = best.min(sc.dist_f[w as usize] as usize + 1 + rb);
                    }
                    let dw = sc.dist_b[w as usize];
                    if dw == UNSET {
                        sc.dist_b[w as usize] = (rb + 1) as u32;
                        sc.sigma_b[w as usize] = sy;
                        sc.touched_b.push(w);
                        sc.levels_b[rb + 1].push(w);
                        next_deg += g.in_degree(w);
                    } else if dw as usize == rb + 1 {
                        sc.sigma_b[w as usize] += sy;
                    }
                }
            }
            rb += 1;
            deg_b = next_deg;
        }
    }

    if best == usize::MAX {
        return PathSample::unreachable(source, target);
    }
    let d = best;

    // Cut the paths at forward depth k: every shortest path crosses
    // exactly one edge (u, v) with dist_f(u) = k and dist_b(v) = d-k-1,
    // and both labelings are final up to those depths.
    let k = (d as i64 - 1 - rb as i64).max(0) as usize;
    debug_assert!(k <= rf);
    let back_depth = (d - k - 1) as u32;
    sc.middle.clear();
    let mut sigma_total = 0.0;
    for fi in 0..sc.levels_f[k].len() {
        let u = sc.levels_f[k][fi];
        debug_assert_eq!(sc.dist_f[u as usize] as usize, k);
        for &v in g.out_neighbors(u) {
            if sc.dist_b[v as usize] == back_depth {
                sc.middle.push((u, v));
                sigma_total += sc.sigma_f[u as usize] * sc.sigma_b[v as usize];
            }
        }
    }
    debug_assert!(sigma_total > 0.0);

    let choice = pick_weighted(
        sc.middle
            .iter()
            .map(|&(u, v)| sc.sigma_f[u as usize] * sc.sigma_b[v as usize]),
        sigma_total,
        rng.gen::<f64>(),
    );
    let (mid_u, mid_v) = sc.middle[choice];

    let mut internal = Vec::with_capacity(d.saturating_sub(1));

    // walk back from mid_u to the source, predecessor chosen
    // proportionally to its forward path count
    let mut cur = mid_u;
    while sc.dist_f[cur as usize] > 0 {
        internal.push(cur);
        let want = sc.dist_f[cur as usize] - 1;
        let total = sc.sigma_f[cur as usize];
        let choice = pick_weighted(
            g.in_neighbors(cur).iter().map(|&w| {
                if sc.dist_f[w as usize] == want {
                    sc.sigma_f[w as usize]
                } else {
                    0.0
                }
            }),
            total,
            rng.gen::<f64>(),
        );
        cur = g.in_neighbors(cur)[choice];
    }
    internal.reverse();

    // walk forward from mid_v to the target, symmetrically
    let mut cur = mid_v;
    while sc.dist_b[cur as usize] > 0 {
        internal.push(cur);
        let want = sc.dist_b[cur as usize] - 1;
        let total = sc.sigma_b[cur as usize];
        let choice = pick_weighted(
            g.out_neighbors(cur).iter().map(|&w| {
                if sc.dist_b[w as usize] == want {
                    sc.sigma_b[w as usize]
                } else {
                    0.0
                }
            }),
            total,
            rng.gen::<f64>(),
        );
        cur = g.out_neighbors(cur)[choice];
    }

    debug_assert_eq!(internal.len(), d - 1);
    PathSample {
        source,
        target,
        internal,
        empty: false,
    }
}

fn draw_pairs(
    g: &Graph,
    ps: &PercolationStates,
    count: u64,
    dist: SampleDistribution,
    base: &ChaCha8Rng,
    index_offset: u64,
) -> Vec<(u32, u32)> {
    let n = g.node_count();
    match dist {
        SampleDistribution::Importance => {
            let idx = ImportanceIndex::build(ps);
            let perm = ps.perm();
            (0..count)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(base, index_offset + i, LANE_PAIR);
                    loop {
                        let u1: f64 = rng.gen();
                        let u2: f64 = rng.gen();
                        if let Some((s, t)) = idx.sample_pair(u1, u2) {
                            return (perm[s], perm[t]);
                        }
                    }
                })
                .collect()
        }
        SampleDistribution::Uniform => (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(base, index_offset + i, LANE_PAIR);
                sample_pair_uniform(n, &mut rng)
            })
            .collect(),
    }
}

fn resolve_paths(
    g: &Graph,
    pairs: &[(u32, u32)],
    base: &ChaCha8Rng,
    index_offset: u64,
) -> Vec<PathSample> {
    pairs
        .par_iter()
        .enumerate()
        .map_init(
            || BbfsScratch::new(g.node_count()),
            |sc, (i, &(s, t))| {
                let mut rng = sample_rng(base, index_offset + i as u64, LANE_PATH);
                random_shortest_path_with(g, s, t, &mut rng, sc)
            },
        )
        .collect()
}

/// Draws `count` i.i.d. path samples from the chosen distribution.
///
/// Sample `i` is keyed by `(master_seed, i)`, so the batch is identical
/// for any worker count.
pub fn draw_batch(
    g: &Graph,
    ps: &PercolationStates,
    count: u64,
    dist: SampleDistribution,
    master_seed: u64,
) -> Result<SampleBatch> {
    draw_batch_timed(g, ps, count, dist, master_seed).map(|(batch, _)| batch)
}

/// As [`draw_batch`], also reporting the pair-draw / path-BFS time split.
pub fn draw_batch_timed(
    g: &Graph,
    ps: &PercolationStates,
    count: u64,
    dist: SampleDistribution,
    master_seed: u64,
) -> Result<(SampleBatch, BatchTimings)> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "batch size must be at least 1".into(),
        ));
    }
    if g.node_count() < 2 {
        return Err(Error::InvalidParameter(
            "sampling requires at least 2 nodes".into(),
        ));
    }
    if ps.node_count() != g.node_count() {
        return Err(Error::InvalidParameter(format!(
            "{} states for a graph with {} nodes",
            ps.node_count(),
            g.node_count()
        )));
    }
    let base = batch_base(master_seed);

    let start = Instant::now();
    let pairs = draw_pairs(g, ps, count, dist, &base, 0);
    let pair_time = start.elapsed();

    let start = Instant::now();
    let samples = resolve_paths(g, &pairs, &base, 0);
    let path_time = start.elapsed();

    Ok((
        SampleBatch {
            samples,
            dist,
            master_seed,
        },
        BatchTimings {
            pair_time,
            path_time,
        },
    ))
}

/// Streaming batch extension used by the target-error search: draws the
/// samples with global indices `[from, to)` of the stream keyed by
/// `master_seed`, exactly as [`draw_batch`] would have produced them.
pub fn draw_range(
    g: &Graph,
    ps: &PercolationStates,
    from: u64,
    to: u64,
    dist: SampleDistribution,
    master_seed: u64,
) -> (Vec<PathSample>, BatchTimings) {
    debug_assert!(from < to);
    let base = batch_base(master_seed);

    let start = Instant::now();
    let pairs = draw_pairs(g, ps, to - from, dist, &base, from);
    let pair_time = start.elapsed();

    let start = Instant::now();
    let samples = resolve_paths(g, &pairs, &base, from);
    let path_time = start.elapsed();

    (
        samples,
        BatchTimings {
            pair_time,
            path_time,
        },
    )
}
