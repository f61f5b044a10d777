//! Parameter sweeps: grids built from the `seq` range operator and quantile rules,
//! batch execution, and the non-noise validity filter.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::baselines::{cut_dendrogram, dbscan_indexed, single_linkage, DbscanParams};
use crate::clustertree::{build_rsl_tree, condense_tree, default_k, Dendrogram, RslParams};
use crate::error::{invalid, Error, Result};
use crate::eval::{compare, non_noise_fraction, NoiseMode};
use crate::spatial::{distance_quantiles, quantile_sorted, NeighborIndex, PointSet};
use crate::stability::{extract_optimal, FlatClustering};

/// Default minimum non-noise fraction for a result to count.
pub const DEFAULT_VALIDITY: f64 = 0.75;

/// `{x, x+s, x+2s, ...}` up to `y`, always ending with `y`.
pub fn seq(x: i64, y: i64, s: i64) -> Result<Vec<i64>> {
    if x > y {
        return Err(invalid(format!("seq start {x} exceeds end {y}")));
    }
    if s < 1 {
        return Err(invalid("seq step must be positive"));
    }
    let mut out: Vec<i64> = (x..=y).step_by(s as usize).collect();
    if *out.last().unwrap() != y {
        out.push(y);
    }
    Ok(out)
}

/// Real-valued `seq`: `x + i·s` for `i = 0, 1, ...` while not past `y`, then `y` if it
/// was not reached. Steps are counted with a small tolerance so `seq(0.1, 0.95, 0.025)`
/// has 35 entries.
pub fn seq_real(x: f64, y: f64, s: f64) -> Result<Vec<f64>> {
    if !(x <= y) {
        return Err(invalid("seq start exceeds end"));
    }
    if !(s > 0.0) {
        return Err(invalid("seq step must be positive"));
    }
    let steps = libm::floor((y - x) / s + 1e-9) as usize;
    let mut out: Vec<f64> = (0..=steps).map(|i| (x + i as f64 * s).min(y)).collect();
    let last = *out.last().unwrap();
    if y - last > 1e-9 * s {
        out.push(y);
    }
    Ok(out)
}

/// Probabilities at which truth cluster sizes are sampled for `min_pts` / `k`.
pub fn size_quantile_probs() -> Vec<f64> {
    seq_real(0.10, 0.95, 0.025).expect("static range")
}

/// Probabilities at which pairwise distances are sampled for `eps`.
pub fn distance_quantile_probs() -> Vec<f64> {
    seq_real(0.01, 0.20, 0.01).expect("static range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rsl,
    Sl,
    Dbscan,
    External,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rsl => "rsl",
            Algorithm::Sl => "sl",
            Algorithm::Dbscan => "dbscan",
            Algorithm::External => "external",
        }
    }
}

/// One parameter assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Rsl {
        alpha: f64,
        k: usize,
        min_cluster_size: usize,
    },
    SlCut {
        num_clusters: usize,
    },
    Dbscan {
        eps: f64,
        min_pts: usize,
    },
    /// A labeling produced elsewhere; scored without execution.
    External {
        name: String,
        labels: FlatClustering,
    },
}

impl Config {
    pub fn param_string(&self) -> String {
        match self {
            Config::Rsl { alpha, k, min_cluster_size } => {
                format!("alpha={alpha};k={k};min_cluster_size={min_cluster_size}")
            }
            Config::SlCut { num_clusters } => format!("num_clusters={num_clusters}"),
            Config::Dbscan { eps, min_pts } => format!("eps={eps};min_pts={min_pts}"),
            Config::External { name, .. } => format!("source={name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub algorithm: Algorithm,
    /// Name written in the algorithm column of every row.
    pub label: String,
    pub grid: Vec<Config>,
    pub validity_min_non_noise: f64,
    pub noise_mode: NoiseMode,
}

impl SweepPlan {
    pub fn new(algorithm: Algorithm, grid: Vec<Config>) -> Result<Self> {
        if grid.is_empty() {
            return Err(invalid("sweep grid is empty"));
        }
        Ok(SweepPlan {
            algorithm,
            label: algorithm.name().to_string(),
            grid,
            validity_min_non_noise: DEFAULT_VALIDITY,
            noise_mode: NoiseMode::Singleton,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_validity(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(invalid("validity fraction must lie in [0, 1]"));
        }
        self.validity_min_non_noise = fraction;
        Ok(self)
    }

    pub fn with_noise_mode(mut self, mode: NoiseMode) -> Self {
        self.noise_mode = mode;
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Cut-based grid: `num_clusters ∈ seq(2, n_true, 1)`.
pub fn build_grid_hierarchical(n_true: usize) -> Result<SweepPlan> {
    if n_true < 2 {
        return Err(invalid("need at least two truth clusters"));
    }
    let grid = seq(2, n_true as i64, 1)?.into_iter().map(|c| Config::SlCut { num_clusters: c as usize }).collect();
    SweepPlan::new(Algorithm::Sl, grid)
}

/// Quantiles of the truth cluster sizes, rounded half-up, clamped to at least 2,
/// deduplicated.
pub fn size_quantiles(truth_sizes: &[usize]) -> Result<Vec<usize>> {
    if truth_sizes.is_empty() {
        return Err(invalid("truth sizes are empty"));
    }
    let mut sorted: Vec<f64> = truth_sizes.iter().map(|&s| s as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for p in size_quantile_probs() {
        let q = quantile_sorted(&sorted, p)?;
        out.push((libm::floor(q + 0.5) as usize).max(2));
    }
    out.dedup();
    Ok(out)
}

/// DBSCAN grid: `min_pts` from truth-size quantiles crossed with `eps` from pairwise
/// distance quantiles at 0.01..0.20.
pub fn build_grid_density(truth_sizes: &[usize], ps: &PointSet) -> Result<SweepPlan> {
    let min_pts = size_quantiles(truth_sizes)?;
    let mut eps = distance_quantiles(ps, &distance_quantile_probs())?;
    eps.dedup();
    let grid = min_pts.iter().flat_map(|&m| eps.iter().map(move |&e| Config::Dbscan { eps: e, min_pts: m })).collect();
    SweepPlan::new(Algorithm::Dbscan, grid)
}

/// RSL grid: `alpha = √2`, `k` from the truth-size quantiles restricted to
/// `k >= ceil(dim · ln n)` and `k <= n`, `min_cluster_size = k`. Falls back to the
/// default `k` when no quantile qualifies.
pub fn build_grid_rsl(truth_sizes: &[usize], n: usize, dim: usize) -> Result<SweepPlan> {
    let floor_k = default_k(n, dim);
    let mut ks: Vec<usize> = size_quantiles(truth_sizes)?.into_iter().filter(|&k| k >= floor_k && k <= n).collect();
    if ks.is_empty() {
        ks.push(floor_k.min(n));
    }
    let alpha = core::f64::consts::SQRT_2;
    let grid = ks.into_iter().map(|k| Config::Rsl { alpha, k, min_cluster_size: k }).collect();
    SweepPlan::new(Algorithm::Rsl, grid)
}

/// The single default RSL configuration for `n` points.
pub fn default_rsl_config(n: usize) -> Config {
    let p = RslParams::with_defaults(n);
    Config::Rsl { alpha: p.alpha(), k: p.k(), min_cluster_size: p.k() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// Too much noise; scores omitted.
    Invalid,
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: String,
    pub params: String,
    pub ari: Option<f64>,
    pub ri: Option<f64>,
    pub non_noise_fraction: Option<f64>,
    pub num_clusters: Option<usize>,
    pub status: RowStatus,
}

/// Runs one RSL configuration end to end.
pub fn run_rsl(ps: &PointSet, alpha: f64, k: usize, min_cluster_size: usize) -> Result<FlatClustering> {
    let params = RslParams::new(alpha, k)?;
    let dend = build_rsl_tree(ps, &params)?;
    let tree = condense_tree(&dend, min_cluster_size)?;
    Ok(extract_optimal(&tree).1)
}

#[derive(Default)]
struct Cache {
    sl: Option<Dendrogram>,
    index: Option<NeighborIndex>,
}

fn execute(config: &Config, ps: &PointSet, cache: &mut Cache) -> Result<FlatClustering> {
    match config {
        Config::Rsl { alpha, k, min_cluster_size } => run_rsl(ps, *alpha, *k, *min_cluster_size),
        Config::SlCut { num_clusters } => {
            if cache.sl.is_none() {
                cache.sl = Some(single_linkage(ps)?);
            }
            cut_dendrogram(cache.sl.as_ref().unwrap(), *num_clusters)
        }
        Config::Dbscan { eps, min_pts } => {
            let params = DbscanParams::new(*eps, *min_pts)?;
            let index = cache.index.get_or_insert_with(|| NeighborIndex::build(ps));
            Ok(dbscan_indexed(index, &params))
        }
        Config::External { labels, .. } => {
            if labels.len() != ps.len() {
                return Err(Error::LengthMismatch(labels.len(), ps.len()));
            }
            Ok(labels.clone())
        }
    }
}

/// Executes every configuration in grid order and scores it against `truth`.
/// Per-configuration failures are recorded in the row; only a truth/point count
/// mismatch aborts the sweep.
pub fn run_sweep(plan: &SweepPlan, ps: &PointSet, truth: &FlatClustering) -> Result<Vec<SweepRow>> {
    if truth.len() != ps.len() {
        return Err(Error::LengthMismatch(truth.len(), ps.len()));
    }
    let mut cache = Cache::default();
    let rows = plan
        .grid
        .iter()
        .map(|config| {
            let mut row = SweepRow {
                algorithm: plan.label.clone(),
                params: config.param_string(),
                ari: None,
                ri: None,
                non_noise_fraction: None,
                num_clusters: None,
                status: RowStatus::Ok,
            };
            match execute(config, ps, &mut cache) {
                Err(e) => row.status = RowStatus::Error(e.to_string()),
                Ok(flat) => {
                    let frac = non_noise_fraction(&flat);
                    row.non_noise_fraction = Some(frac);
                    row.num_clusters = Some(flat.num_clusters());
                    if frac < plan.validity_min_non_noise {
                        row.status = RowStatus::Invalid;
                    } else {
                        match compare(truth, &flat, plan.noise_mode) {
                            Ok(s) => {
                                row.ari = Some(s.ari);
                                row.ri = Some(s.ri);
                            }
                            Err(e) => row.status = RowStatus::Error(e.to_string()),
                        }
                    }
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// ARI distribution of one algorithm over its valid rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub configurations: usize,
    pub valid: usize,
    pub min_ari: Option<f64>,
    pub mean_ari: Option<f64>,
    pub max_ari: Option<f64>,
}

/// Groups rows by algorithm, in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<AlgorithmSummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.algorithm.as_str()) {
            names.push(&r.algorithm);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.algorithm == name).collect();
            let aris: Vec<f64> = group.iter().filter_map(|r| r.ari).collect();
            let (min, max, mean) = if aris.is_empty() {
                (None, None, None)
            } else {
                (
                    Some(aris.iter().copied().fold(f64::INFINITY, f64::min)),
                    Some(aris.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                    Some(aris.iter().sum::<f64>() / aris.len() as f64),
                )
            };
            AlgorithmSummary {
                algorithm: name.to_string(),
                configurations: group.len(),
                valid: aris.len(),
                min_ari: min,
                mean_ari: mean,
                max_ari: max,
            }
        })
        .collect()
}

/// Point count per truth cluster, noise excluded.
pub fn truth_sizes(truth: &FlatClustering) -> Vec<usize> {
    truth.cluster_sizes().into_iter().skip(1).collect()
}
