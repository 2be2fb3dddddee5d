//! Random graphs with independent edges `A_ij ~ Bernoulli(π_i π_j)`.
//!
//! Two samplers produce the same law. The dense one visits every pair. The
//! sparse one sorts the weights in decreasing order and, along each row,
//! jumps over pairs with geometric skips drawn under the current bound
//! `π_i π_j`, accepting the landing pair with probability `p/q`. Its expected
//! cost is `O(n + E)`.
//!
//! Every random stream is a ChaCha8 generator seeded from a hash of the
//! master seed, the replicate index and a purpose tag, so replicates can run
//! in any order on any number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::{apply_scaling, ScalingMap, WeightModel, WeightVector};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "DEGREENET_THREADS";

/// Default cap on stored edges.
pub const DEFAULT_EDGE_CAP: usize = 50_000_000;

/// Purpose tags that separate the random streams of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Weights = 0x5745_4947_4854_5321,
    Graph = 0x4752_4150_4821_2121,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `stream` for replicate `replicate_id` under `master_seed`.
pub fn stream_seed(master_seed: u64, replicate_id: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ replicate_id) ^ stream as u64)
}

pub fn stream_rng(master_seed: u64, replicate_id: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master_seed, replicate_id, stream))
}

/// One realized graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphSample {
    pub degrees: Vec<u32>,
    pub edge_count: u64,
    /// Pairs `(i, j)` with `i < j` in the original indexing, sorted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(u32, u32)>>,
    pub seed: u64,
    pub replicate_id: u64,
}

impl GraphSample {
    pub fn degree_sum(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    /// `Σ d_i = 2 |E|`.
    pub fn handshake_holds(&self) -> bool {
        self.degree_sum() == 2 * self.edge_count
    }

    /// Counts of each degree value `0..=max`.
    pub fn histogram(&self) -> Vec<u64> {
        let max = self.degrees.iter().copied().max().unwrap_or(0) as usize;
        let mut h = vec![0u64; max + 1];
        for &d in &self.degrees {
            h[d as usize] += 1;
        }
        h
    }
}

/// Which pair-visiting strategy to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Dense,
    #[default]
    Sparse,
}

#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    pub kind: SamplerKind,
    pub store_edges: bool,
    pub edge_cap: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            kind: SamplerKind::Sparse,
            store_edges: false,
            edge_cap: DEFAULT_EDGE_CAP,
        }
    }
}

/// `E|E| = (‖π‖₁² - ‖π‖₂²)/2`.
pub fn expected_edges(pi: &WeightVector) -> f64 {
    let l1 = pi.l1();
    0.5 * (l1 * l1 - pi.l2sq())
}

fn check_budget(pi: &WeightVector, opts: &SampleOptions) -> Result<()> {
    if opts.store_edges {
        let expected = expected_edges(pi);
        if expected > opts.edge_cap as f64 {
            return Err(Error::MemoryBudget {
                expected,
                cap: opts.edge_cap,
            });
        }
    }
    Ok(())
}

struct Tally {
    degrees: Vec<u32>,
    edge_count: u64,
    edges: Option<Vec<(u32, u32)>>,
}

impl Tally {
    fn new(n: usize, store: bool) -> Self {
        Self {
            degrees: vec![0; n],
            edge_count: 0,
            edges: store.then(Vec::new),
        }
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize) {
        self.degrees[i] += 1;
        self.degrees[j] += 1;
        self.record(i, j);
    }

    /// Count the edge without touching `degrees`.
    #[inline]
    fn record(&mut self, i: usize, j: usize) {
        self.edge_count += 1;
        if let Some(e) = self.edges.as_mut() {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            e.push((a as u32, b as u32));
        }
    }

    fn finish(mut self, seed: u64, replicate_id: u64) -> GraphSample {
        if let Some(e) = self.edges.as_mut() {
            e.sort_unstable();
        }
        GraphSample {
            degrees: self.degrees,
            edge_count: self.edge_count,
            edges: self.edges,
            seed,
            replicate_id,
        }
    }
}

fn dense<R: Rng>(pi: &[f64], rng: &mut R, tally: &mut Tally) {
    let n = pi.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < pi[i] * pi[j] {
                tally.add(i, j);
            }
        }
    }
}

/// One node in rank order. Weight, original index and running degree share a
/// cache line, so a landing pair costs one memory access.
#[derive(Clone, Copy)]
struct Ranked {
    w: f64,
    index: u32,
    degree: u32,
}

/// Rows processed side by side by the sparse sampler.
const LANES: usize = 8;

/// A row of the sparse sampler in flight: row `i` has its next candidate
/// pair at `j`, proposed under bound `q`.
struct Lane {
    i: usize,
    wi: f64,
    j: usize,
    q: f64,
}

/// Ask for `nodes[j]` to be brought into cache ahead of use.
#[inline(always)]
fn prefetch(nodes: &[Ranked], j: usize) {
    #[cfg(target_arch = "x86_64")]
    {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        let ptr = nodes[j..].as_ptr() as *const i8;
        // SAFETY: prefetching has no observable effect and `ptr` is in bounds.
        unsafe { _mm_prefetch::<_MM_HINT_T0>(ptr) };
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = (nodes, j);
}

/// Move `lane` to its next candidate column, or return false when the row
/// is exhausted.
#[inline]
fn land<R: Rng>(lane: &mut Lane, nodes: &[Ranked], rng: &mut R) -> bool {
    let n = nodes.len();
    if lane.j >= n || lane.q <= 0.0 {
        return false;
    }
    if lane.q < 1.0 {
        // Number of failures before the first success under bound q.
        let u = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / (-lane.q).ln_1p()).floor();
        if skip >= (n - lane.j) as f64 {
            return false;
        }
        lane.j += skip as usize;
    }
    prefetch(nodes, lane.j);
    true
}

/// Start row `i`, skipping rows with no candidates. None once the remaining
/// weights are zero.
fn open_row<R: Rng>(next: &mut usize, nodes: &[Ranked], rng: &mut R) -> Option<Lane> {
    let n = nodes.len();
    while *next + 1 < n {
        let i = *next;
        *next += 1;
        let wi = nodes[i].w;
        if wi == 0.0 {
            *next = n;
            return None;
        }
        let mut lane = Lane {
            i,
            wi,
            j: i + 1,
            q: wi * nodes[i + 1].w,
        };
        if land(&mut lane, nodes, rng) {
            return Some(lane);
        }
    }
    None
}

fn sparse<R: Rng>(pi: &WeightVector, rng: &mut R, tally: &mut Tally) {
    let (w, order) = pi.sorted_desc();
    let mut nodes: Vec<Ranked> = w
        .into_iter()
        .zip(order)
        .map(|(w, index)| Ranked {
            w,
            index: index as u32,
            degree: 0,
        })
        .collect();
    // Several rows advance in turn so their cache misses overlap. Each row
    // still walks its columns in order with its own bound, so the law is
    // the same as handling rows one at a time.
    let mut next = 0;
    let mut lanes: Vec<Lane> = Vec::with_capacity(LANES);
    while lanes.len() < LANES {
        match open_row(&mut next, &nodes, rng) {
            Some(l) => lanes.push(l),
            None => break,
        }
    }
    while !lanes.is_empty() {
        let mut c = 0;
        while c < lanes.len() {
            let lane = &mut lanes[c];
            let p = lane.wi * nodes[lane.j].w;
            if rng.random::<f64>() * lane.q < p {
                nodes[lane.i].degree += 1;
                nodes[lane.j].degree += 1;
                tally.record(nodes[lane.i].index as usize, nodes[lane.j].index as usize);
            }
            lane.q = p;
            lane.j += 1;
            if land(lane, &nodes, rng) {
                c += 1;
                continue;
            }
            match open_row(&mut next, &nodes, rng) {
                Some(l) => {
                    lanes[c] = l;
                    c += 1;
                }
                None => {
                    lanes.swap_remove(c);
                }
            }
        }
    }
    for v in nodes {
        tally.degrees[v.index as usize] = v.degree;
    }
}

/// Sample with explicit options.
pub fn sample_graph_with(pi: &WeightVector, seed: u64, replicate_id: u64, opts: &SampleOptions) -> Result<GraphSample> {
    check_budget(pi, opts)?;
    let mut rng = stream_rng(seed, replicate_id, Stream::Graph);
    let mut tally = Tally::new(pi.len(), opts.store_edges);
    match opts.kind {
        SamplerKind::Dense => dense(pi.values(), &mut rng, &mut tally),
        SamplerKind::Sparse => sparse(pi, &mut rng, &mut tally),
    }
    Ok(tally.finish(seed, replicate_id))
}

/// Visit every pair once. Deterministic in `(seed, replicate_id)`.
///
/// ```
/// use degreenet::{sampler::sample_graph, weights::WeightVector};
/// let pi = WeightVector::new(vec![1.0, 1.0], "full", None).unwrap();
/// let g = sample_graph(&pi, 7, 0, true).unwrap();
/// assert_eq!(g.degrees, vec![1, 1]);
/// assert_eq!(g.edges, Some(vec![(0, 1)]));
/// ```
pub fn sample_graph(pi: &WeightVector, seed: u64, replicate_id: u64, store_edges: bool) -> Result<GraphSample> {
    sample_graph_with(
        pi,
        seed,
        replicate_id,
        &SampleOptions {
            kind: SamplerKind::Dense,
            store_edges,
            ..SampleOptions::default()
        },
    )
}

/// Geometric-skip sampler with the same law as [`sample_graph`]; degrees only.
pub fn sample_graph_sparse(pi: &WeightVector, seed: u64, replicate_id: u64) -> Result<GraphSample> {
    sample_graph_with(pi, seed, replicate_id, &SampleOptions::default())
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Run `f` on a pool sized by `threads`, or by [`THREADS_ENV`], or by the
/// number of cores.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let threads = threads.or_else(configured_threads).unwrap_or(0);
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Weights for one replicate: a fresh draw for random models, then the
/// optional rescaling.
pub fn replicate_weights(
    model: &WeightModel,
    map: Option<&ScalingMap>,
    n: usize,
    master_seed: u64,
    replicate_id: u64,
) -> Result<WeightVector> {
    let mut rng = stream_rng(master_seed, replicate_id, Stream::Weights);
    let seed = stream_seed(master_seed, replicate_id, Stream::Weights);
    let pi = model.draw(n, &mut rng, Some(seed))?;
    match map {
        Some(m) => apply_scaling(&pi, m, n),
        None => Ok(pi),
    }
}

/// Graphs from the hierarchical model, one per replicate, in replicate order.
pub fn sample_population(
    model: &WeightModel,
    map: Option<&ScalingMap>,
    n: usize,
    replicates: u64,
    master_seed: u64,
    opts: &SampleOptions,
) -> Result<Vec<GraphSample>> {
    if replicates == 0 {
        return Err(Error::domain("sample_population", "need at least one replicate"));
    }
    let fixed = if model.is_random() {
        None
    } else {
        Some(replicate_weights(model, map, n, master_seed, 0)?)
    };
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let pi = match &fixed {
                Some(p) => p.clone(),
                None => replicate_weights(model, map, n, master_seed, r)?,
            };
            sample_graph_with(&pi, master_seed, r, opts)
        })
        .collect()
}

/// Sum of per-replicate degree histograms.
pub fn pooled_histogram(samples: &[GraphSample]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for s in samples {
        let h = s.histogram();
        if h.len() > out.len() {
            out.resize(h.len(), 0);
        }
        for (o, c) in out.iter_mut().zip(h) {
            *o += c;
        }
    }
    out
}

/// CSV with columns `replicate_id,k,count`, zero counts omitted.
pub fn histograms_csv(samples: &[GraphSample]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from(crate::degree_laws::SCHEMA_HEADER);
    out.push_str("\nreplicate_id,k,count\n");
    for s in samples {
        for (k, c) in s.histogram().iter().enumerate() {
            if *c > 0 {
                let _ = writeln!(out, "{},{k},{c}", s.replicate_id);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_laws::conditional_moments;
    use crate::weights::{materialize_power_law, PowerLawModel};
    use proptest::prelude::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = stream_seed(1, 0, Stream::Graph);
        assert_ne!(a, stream_seed(1, 1, Stream::Graph));
        assert_ne!(a, stream_seed(1, 0, Stream::Weights));
        assert_ne!(a, stream_seed(2, 0, Stream::Graph));
        assert_eq!(a, stream_seed(1, 0, Stream::Graph));
    }

    #[test]
    fn complete_pair() {
        let pi = WeightVector::new(vec![1.0, 1.0], "t", None).unwrap();
        for r in 0..20 {
            assert_eq!(sample_graph(&pi, 3, r, false).unwrap().degrees, vec![1, 1]);
            assert_eq!(sample_graph_sparse(&pi, 3, r).unwrap().degrees, vec![1, 1]);
        }
    }

    #[test]
    fn zero_weights_no_edges() {
        let pi = WeightVector::homogeneous(0.0, 500).unwrap();
        let g = sample_graph_sparse(&pi, 1, 0).unwrap();
        assert_eq!(g.edge_count, 0);
    }

    #[test]
    fn budget_enforced() {
        let pi = WeightVector::homogeneous(1.0, 100).unwrap();
        let opts = SampleOptions {
            store_edges: true,
            edge_cap: 100,
            ..SampleOptions::default()
        };
        assert!(matches!(
            sample_graph_with(&pi, 0, 0, &opts),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn sparse_edges_in_original_indexing() {
        let pi = WeightVector::new(vec![0.1, 1.0, 0.0, 1.0], "t", None).unwrap();
        let opts = SampleOptions {
            store_edges: true,
            ..SampleOptions::default()
        };
        let g = sample_graph_with(&pi, 5, 0, &opts).unwrap();
        let e = g.edges.unwrap();
        assert!(e.contains(&(1, 3)));
        assert!(e.iter().all(|&(a, b)| a != 2 && b != 2 && a < b));
        assert_eq!(g.degrees[2], 0);
    }

    #[test]
    fn erdos_renyi_mean_degree() {
        let p: f64 = 0.05;
        let pi = WeightVector::homogeneous(p.sqrt(), 200).unwrap();
        let reps = 4000;
        for kind in [SamplerKind::Dense, SamplerKind::Sparse] {
            let opts = SampleOptions {
                kind,
                ..SampleOptions::default()
            };
            let d: Vec<f64> = (0..reps)
                .map(|r| sample_graph_with(&pi, 11, r, &opts).unwrap().degree_sum() as f64 / 200.0)
                .collect();
            let (m, v) = crate::numeric::sample_mean_var(&d);
            let se = (v / reps as f64).sqrt();
            assert!((m - 199.0 * p).abs() < 3.0 * se, "{kind:?}: {m}");
        }
    }

    #[test]
    fn hub_mean_degree() {
        let pi = materialize_power_law(&PowerLawModel::new(0.5, 1.0).unwrap(), 1000).unwrap();
        let want = conditional_moments(&pi, 0).unwrap();
        let reps = 4000u64;
        let d: Vec<f64> = (0..reps)
            .map(|r| sample_graph_sparse(&pi, 21, r).unwrap().degrees[0] as f64)
            .collect();
        let (m, _) = crate::numeric::sample_mean_var(&d);
        let se = (want.variance / reps as f64).sqrt();
        assert!((m - want.mean).abs() < 3.0 * se, "{m} vs {}", want.mean);
    }

    #[test]
    fn population_is_thread_independent() {
        let model: WeightModel =
            serde_json::from_str(r#"{"kind":"bounded_pareto","beta":3.0,"a":0.3333333333333333,"b":1.0}"#).unwrap();
        let opts = SampleOptions::default();
        let one = with_pool(Some(1), || sample_population(&model, None, 300, 8, 99, &opts).unwrap());
        let four = with_pool(Some(4), || sample_population(&model, None, 300, 8, 99, &opts).unwrap());
        assert_eq!(one, four);
        assert!(one.windows(2).all(|w| w[0].degrees != w[1].degrees));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn handshake_and_bounds(v in prop::collection::vec(0.0f64..=1.0, 2..80), seed in any::<u64>(), dense_kind in any::<bool>()) {
            let pi = WeightVector::new(v, "prop", None).unwrap();
            let n = pi.len() as u32;
            let opts = SampleOptions {
                kind: if dense_kind { SamplerKind::Dense } else { SamplerKind::Sparse },
                store_edges: true,
                ..SampleOptions::default()
            };
            let g = sample_graph_with(&pi, seed, 0, &opts).unwrap();
            prop_assert!(g.handshake_holds());
            prop_assert!(g.degrees.iter().all(|&d| d < n));
            let e = g.edges.unwrap();
            prop_assert_eq!(e.len() as u64, g.edge_count);
            prop_assert!(e.iter().all(|&(a, b)| a < b));
            prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
