//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use poi_core::baselines::cut_dendrogram;
use poi_core::clustertree::{build_rsl_tree, condense_tree, RslParams};
use poi_core::eval::{compare, non_noise_fraction, NoiseMode};
use poi_core::spatial::{distance_quantiles, PointSet};
use poi_core::stability::{extract_at_lambda, extract_optimal};
use poi_core::sweep::{
    build_grid_density, build_grid_hierarchical, build_grid_rsl, default_rsl_config, distance_quantile_probs,
    run_sweep, size_quantiles, summarize, truth_sizes, Algorithm, Config, SweepPlan, DEFAULT_VALIDITY,
};
use poi_core::synth::generate_scene;
use poi_core::trajectory::{extract_stay_points, Exemplar, StayPointConfig};

use crate::error::{PoiError, Result};
use crate::io::{self, MetricsRow, TrajectoryFormat};

#[derive(Debug, Parser)]
#[command(name = "poi", version, about = "Discover points of interest from trajectory exemplars")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract stay-point exemplars from a trajectory CSV.
    Exemplars(ExemplarsArgs),
    /// Cluster exemplars into POIs with robust single linkage.
    Poi(PoiArgs),
    /// Compare two label files.
    Eval(EvalArgs),
    /// Run parameter sweeps against a truth labeling.
    Sweep(SweepArgs),
    /// Generate a labeled synthetic scene.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseModeArg {
    Singleton,
    Exclude,
}

impl From<NoiseModeArg> for NoiseMode {
    fn from(m: NoiseModeArg) -> Self {
        match m {
            NoiseModeArg::Singleton => NoiseMode::Singleton,
            NoiseModeArg::Exclude => NoiseMode::Exclude,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExemplarsArgs {
    /// Trajectory CSV with columns object_id,t,x,y.
    #[arg(long)]
    pub input: PathBuf,
    /// Exemplar CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Maximum distance from the anchor point, in meters.
    #[arg(long)]
    pub dist_threshold: f64,
    /// Minimum dwell time, in seconds.
    #[arg(long)]
    pub time_threshold: f64,
    /// Treat x,y as longitude,latitude degrees and project to meters first.
    #[arg(long)]
    pub latlon: bool,
}

#[derive(Debug, Args)]
pub struct PoiArgs {
    /// Exemplar CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for labels.csv, tree.json and stability.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Defaults to k.
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    /// Label by a single density level instead of stability extraction.
    #[arg(long, conflicts_with = "cut")]
    pub lambda: Option<f64>,
    /// Label by cutting the merge hierarchy into this many clusters.
    #[arg(long)]
    pub cut: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Reference labels (point_index,label).
    pub labels_a: PathBuf,
    /// Labels to score.
    pub labels_b: PathBuf,
    #[arg(long, value_enum, default_value = "singleton")]
    pub noise_mode: NoiseModeArg,
    /// Metrics CSV to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAlgorithm {
    /// The single default RSL configuration.
    RslDefault,
    Rsl,
    Sl,
    Dbscan,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub exemplars: PathBuf,
    /// Truth labels aligned with the exemplar rows.
    #[arg(long)]
    pub truth: PathBuf,
    /// Directory for sweep.csv and summary.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rsl-default,rsl,sl,dbscan")]
    pub algorithms: Vec<SweepAlgorithm>,
    /// Label files produced by other tools, scored as they are.
    #[arg(long)]
    pub external: Vec<PathBuf>,
    /// DBSCAN eps values; default from pairwise distance quantiles.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// DBSCAN min_pts values; default from truth size quantiles.
    #[arg(long, value_delimiter = ',')]
    pub min_pts: Vec<usize>,
    /// RSL k values; default from truth size quantiles.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Single-linkage cluster counts; default 2..=number of truth clusters.
    #[arg(long, value_delimiter = ',')]
    pub cut: Vec<usize>,
    /// Minimum non-noise fraction for a configuration to be scored.
    #[arg(long, default_value_t = DEFAULT_VALIDITY)]
    pub validity: f64,
    #[arg(long, value_enum, default_value = "singleton")]
    pub noise_mode: NoiseModeArg,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene specification JSON.
    #[arg(long)]
    pub scene: PathBuf,
    /// Overrides the seed in the scene file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for exemplars.csv and truth.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Runs one command, writing human-readable progress to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Exemplars(a) => cmd_exemplars(a, out),
        Command::Poi(a) => cmd_poi(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Synth(a) => cmd_synth(a, out),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| PoiError::io("stdout", e))
}

fn make_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| PoiError::io(dir, e))
}

pub fn cmd_exemplars(a: &ExemplarsArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = StayPointConfig::new(a.dist_threshold, a.time_threshold)?;
    let format = if a.latlon { TrajectoryFormat::LonLat } else { TrajectoryFormat::Planar };
    let trajectories = io::read_trajectories(&a.input, format)?;
    let exemplars: Vec<Exemplar> = trajectories.iter().flat_map(|t| extract_stay_points(t, &cfg)).collect();
    io::write_exemplars_file(&a.output, &exemplars)?;
    say(out, format_args!("trajectories: {}", trajectories.len()))?;
    say(out, format_args!("exemplars: {}", exemplars.len()))
}

pub fn cmd_poi(a: &PoiArgs, out: &mut dyn Write) -> Result<()> {
    let exemplars = io::read_exemplars(&a.input)?;
    let ps = io::exemplar_points(&exemplars)?;
    let n = ps.len();
    let defaults = RslParams::with_defaults(n);
    let params = RslParams::new(a.alpha.unwrap_or(defaults.alpha()), a.k.unwrap_or(defaults.k()))?;
    let min_cluster_size = a.min_cluster_size.unwrap_or(params.k());
    let dend = build_rsl_tree(&ps, &params)?;
    let tree = condense_tree(&dend, min_cluster_size)?;
    let (report, optimal) = extract_optimal(&tree);
    let labels = match (a.lambda, a.cut) {
        (Some(lambda), _) => extract_at_lambda(&tree, lambda)?,
        (None, Some(c)) => cut_dendrogram(&dend, c)?,
        (None, None) => optimal,
    };
    make_dir(&a.out_dir)?;
    io::write_labels_file(&a.out_dir.join("labels.csv"), &labels)?;
    io::write_tree_file(&a.out_dir.join("tree.json"), &tree)?;
    io::write_stability_file(&a.out_dir.join("stability.json"), &report)?;
    say(out, format_args!("exemplars: {n}"))?;
    say(out, format_args!("alpha: {} k: {} min_cluster_size: {min_cluster_size}", params.alpha(), params.k()))?;
    say(out, format_args!("POIs: {}", labels.num_clusters()))?;
    say(out, format_args!("noise fraction: {}", 1.0 - non_noise_fraction(&labels)))
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let la = io::read_labels(&a.labels_a)?;
    let lb = io::read_labels(&a.labels_b)?;
    if la.len() != lb.len() {
        return Err(PoiError::Mismatch(format!(
            "{} has {} labels but {} has {}",
            a.labels_a.display(),
            la.len(),
            a.labels_b.display(),
            lb.len()
        )));
    }
    let scores = compare(&la, &lb, a.noise_mode.into())?;
    let source =
        a.labels_b.file_name().map_or_else(|| a.labels_b.display().to_string(), |s| s.to_string_lossy().into());
    let row = MetricsRow::new(Algorithm::External.name(), &format!("source={source}"), scores, &lb);
    if let Some(path) = &a.output {
        io::write_metrics_file(path, std::slice::from_ref(&row))?;
    }
    let mut buf = Vec::new();
    io::write_metrics(&mut buf, &[row])?;
    out.write_all(&buf).map_err(|e| PoiError::io("stdout", e))
}

fn dbscan_plan(a: &SweepArgs, sizes: &[usize], ps: &PointSet) -> Result<SweepPlan> {
    if a.eps.is_empty() && a.min_pts.is_empty() {
        return Ok(build_grid_density(sizes, ps)?);
    }
    let min_pts = if a.min_pts.is_empty() { size_quantiles(sizes)? } else { a.min_pts.clone() };
    let eps = if a.eps.is_empty() {
        let mut e = distance_quantiles(ps, &distance_quantile_probs())?;
        e.dedup();
        e
    } else {
        a.eps.clone()
    };
    let grid = min_pts.iter().flat_map(|&m| eps.iter().map(move |&e| Config::Dbscan { eps: e, min_pts: m })).collect();
    Ok(SweepPlan::new(Algorithm::Dbscan, grid)?)
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let exemplars = io::read_exemplars(&a.exemplars)?;
    let ps = io::exemplar_points(&exemplars)?;
    let truth = io::read_labels(&a.truth)?;
    if truth.len() != ps.len() {
        return Err(PoiError::Mismatch(format!(
            "{} has {} labels for {} exemplars",
            a.truth.display(),
            truth.len(),
            ps.len()
        )));
    }
    let n = ps.len();
    let sizes = truth_sizes(&truth);
    let mut plans = Vec::new();
    for alg in &a.algorithms {
        let plan = match alg {
            SweepAlgorithm::RslDefault => {
                SweepPlan::new(Algorithm::Rsl, vec![default_rsl_config(n)])?.with_label("rsl-default")
            }
            SweepAlgorithm::Rsl if a.k.is_empty() => build_grid_rsl(&sizes, n, 2)?,
            SweepAlgorithm::Rsl => {
                let alpha = std::f64::consts::SQRT_2;
                let grid = a.k.iter().map(|&k| Config::Rsl { alpha, k, min_cluster_size: k }).collect();
                SweepPlan::new(Algorithm::Rsl, grid)?
            }
            SweepAlgorithm::Sl if a.cut.is_empty() => build_grid_hierarchical(truth.num_clusters())?,
            SweepAlgorithm::Sl => {
                SweepPlan::new(Algorithm::Sl, a.cut.iter().map(|&c| Config::SlCut { num_clusters: c }).collect())?
            }
            SweepAlgorithm::Dbscan => dbscan_plan(a, &sizes, &ps)?,
        };
        plans.push(plan);
    }
    for path in &a.external {
        let labels = io::read_labels(path)?;
        let name = path.file_name().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
        plans.push(SweepPlan::new(Algorithm::External, vec![Config::External { name, labels }])?);
    }
    if plans.is_empty() {
        return Err(PoiError::Mismatch("no algorithms selected".into()));
    }

    let mut rows = Vec::new();
    for plan in plans {
        let plan = plan.with_validity(a.validity)?.with_noise_mode(a.noise_mode.into());
        rows.extend(run_sweep(&plan, &ps, &truth)?);
    }
    let summary = summarize(&rows);
    make_dir(&a.out_dir)?;
    io::write_sweep_file(&a.out_dir.join("sweep.csv"), &rows)?;
    io::write_summary_file(&a.out_dir.join("summary.json"), &summary)?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    for s in &summary {
        say(
            out,
            format_args!(
                "{}: {} configurations, {} valid, ARI min {} mean {} max {}",
                s.algorithm,
                s.configurations,
                s.valid,
                fmt(s.min_ari),
                fmt(s.mean_ari),
                fmt(s.max_ari)
            ),
        )?;
    }
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let mut spec = io::read_scene(&a.scene)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let scene = generate_scene(&spec)?;
    let exemplars: Vec<Exemplar> = scene
        .points
        .coords()
        .iter()
        .enumerate()
        .map(|(i, p)| Exemplar {
            x: p[0],
            y: p[1],
            source_object: format!("s{i}"),
            t_start: 0.0,
            t_end: 0.0,
            support: 1,
        })
        .collect();
    make_dir(&a.out_dir)?;
    io::write_exemplars_file(&a.out_dir.join("exemplars.csv"), &exemplars)?;
    io::write_labels_file(&a.out_dir.join("truth.csv"), &scene.truth)?;
    say(out, format_args!("exemplars: {}", exemplars.len()))?;
    say(out, format_args!("sites: {}", scene.truth.num_clusters()))?;
    say(out, format_args!("clutter: {}", scene.truth.noise_count()))
}
