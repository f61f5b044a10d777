//! File formats: trajectory and exemplar CSV, label CSV, condensed tree and stability
//! JSON, scene specifications, and metric reports.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use poi_core::clustertree::{Cluster, CondensedTree};
use poi_core::eval::Agreement;
use poi_core::stability::StabilityReport;
use poi_core::sweep::{AlgorithmSummary, RowStatus, SweepRow};
use poi_core::synth::{Building, Junction, SceneSpec};
use poi_core::trajectory::{project_equirectangular, Exemplar, Trajectory, TrajectoryPoint};
use poi_core::{FlatClustering, PointSet};
use serde::{Deserialize, Serialize};

use crate::error::{PoiError, Result};

/// Coordinate convention of the `x`, `y` trajectory columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryFormat {
    /// Planar meters.
    #[default]
    Planar,
    /// `x` is longitude and `y` latitude in degrees; projected to meters around the
    /// mean latitude of the whole file.
    LonLat,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| PoiError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| PoiError::io(path, e))
}

fn name_of(path: &Path) -> String {
    path.display().to_string()
}

fn csv_error(source_name: &str, e: csv::Error) -> PoiError {
    match e.position() {
        Some(pos) => PoiError::parse(source_name, pos.line(), e.to_string()),
        None => PoiError::format(source_name, e.to_string()),
    }
}

fn require_columns<R: Read>(rdr: &mut csv::Reader<R>, source_name: &str, columns: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| csv_error(source_name, e))?.clone();
    for col in columns {
        if !headers.iter().any(|h| h.trim() == *col) {
            return Err(PoiError::format(source_name, format!("missing column `{col}`")));
        }
    }
    Ok(())
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

#[derive(Deserialize)]
struct TrajectoryRow {
    object_id: String,
    t: f64,
    x: f64,
    y: f64,
}

/// Parses `object_id,t,x,y` records into one trajectory per object, in order of first
/// appearance, each sorted by time.
pub fn parse_trajectories<R: Read>(input: R, source_name: &str, format: TrajectoryFormat) -> Result<Vec<Trajectory>> {
    let mut rdr = reader(input);
    require_columns(&mut rdr, source_name, &["object_id", "t", "x", "y"])?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<(u64, TrajectoryPoint)>> = HashMap::new();
    let headers = rdr.headers().map_err(|e| csv_error(source_name, e))?.clone();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(source_name, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: TrajectoryRow =
            rec.deserialize(Some(&headers)).map_err(|e| PoiError::parse(source_name, line, e.to_string()))?;
        if !(row.t.is_finite() && row.x.is_finite() && row.y.is_finite()) {
            return Err(PoiError::parse(source_name, line, "non-finite value"));
        }
        if row.t < 0.0 {
            return Err(PoiError::parse(source_name, line, "negative timestamp"));
        }
        let group = groups.entry(row.object_id.clone()).or_insert_with(|| {
            order.push(row.object_id.clone());
            Vec::new()
        });
        group.push((line, TrajectoryPoint { t: row.t, x: row.x, y: row.y }));
    }
    if order.is_empty() {
        return Err(PoiError::format(source_name, "no trajectory records"));
    }

    if format == TrajectoryFormat::LonLat {
        let all: Vec<(f64, f64)> = order.iter().flat_map(|id| groups[id].iter().map(|(_, p)| (p.x, p.y))).collect();
        let (projected, _) = project_equirectangular(&all);
        let mut it = projected.into_iter();
        for id in &order {
            for (_, p) in groups.get_mut(id).unwrap() {
                let [x, y] = it.next().unwrap();
                p.x = x;
                p.y = y;
            }
        }
    }

    order
        .into_iter()
        .map(|id| {
            let mut rows = groups.remove(&id).unwrap();
            rows.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
            if let Some(w) = rows.windows(2).find(|w| w[0].1.t == w[1].1.t) {
                return Err(PoiError::parse(
                    source_name,
                    w[0].0.max(w[1].0),
                    format!("duplicate timestamp {} for object `{id}`", w[1].1.t),
                ));
            }
            Ok(Trajectory::new(id, rows.into_iter().map(|(_, p)| p).collect())?)
        })
        .collect()
}

pub fn read_trajectories(path: &Path, format: TrajectoryFormat) -> Result<Vec<Trajectory>> {
    parse_trajectories(open(path)?, &name_of(path), format)
}

#[derive(Serialize, Deserialize)]
struct ExemplarRow {
    x: f64,
    y: f64,
    #[serde(default)]
    object_id: String,
    #[serde(default)]
    t_start: f64,
    #[serde(default)]
    t_end: f64,
    #[serde(default = "one")]
    support: usize,
}

fn one() -> usize {
    1
}

pub fn write_exemplars<W: Write>(out: W, exemplars: &[Exemplar]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if exemplars.is_empty() {
        w.write_record(["x", "y", "object_id", "t_start", "t_end", "support"]).map_err(|e| csv_error("output", e))?;
    }
    for e in exemplars {
        w.serialize(ExemplarRow {
            x: e.x,
            y: e.y,
            object_id: e.source_object.clone(),
            t_start: e.t_start,
            t_end: e.t_end,
            support: e.support,
        })
        .map_err(|e| csv_error("output", e))?;
    }
    w.flush().map_err(|e| PoiError::format("output", e.to_string()))?;
    Ok(())
}

/// Reads exemplar rows. Only `x` and `y` are required.
pub fn parse_exemplars<R: Read>(input: R, source_name: &str) -> Result<Vec<Exemplar>> {
    let mut rdr = reader(input);
    require_columns(&mut rdr, source_name, &["x", "y"])?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<ExemplarRow>() {
        let row = rec.map_err(|e| csv_error(source_name, e))?;
        if !(row.x.is_finite() && row.y.is_finite()) {
            return Err(PoiError::parse(source_name, out.len() as u64 + 2, "non-finite coordinate"));
        }
        out.push(Exemplar {
            x: row.x,
            y: row.y,
            source_object: row.object_id,
            t_start: row.t_start,
            t_end: row.t_end,
            support: row.support,
        });
    }
    if out.is_empty() {
        return Err(PoiError::format(source_name, "no exemplar records"));
    }
    Ok(out)
}

pub fn read_exemplars(path: &Path) -> Result<Vec<Exemplar>> {
    parse_exemplars(open(path)?, &name_of(path))
}

pub fn write_exemplars_file(path: &Path, exemplars: &[Exemplar]) -> Result<()> {
    write_exemplars(create(path)?, exemplars)
}

pub fn exemplar_points(exemplars: &[Exemplar]) -> Result<PointSet> {
    Ok(PointSet::new(exemplars.iter().map(Exemplar::position).collect())?)
}

#[derive(Serialize, Deserialize)]
struct LabelRow {
    point_index: usize,
    label: usize,
}

pub fn write_labels<W: Write>(out: W, labels: &FlatClustering) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["point_index", "label"]).map_err(|e| csv_error("output", e))?;
    for (i, &l) in labels.labels().iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()]).map_err(|e| csv_error("output", e))?;
    }
    w.flush().map_err(|e| PoiError::format("output", e.to_string()))?;
    Ok(())
}

pub fn write_labels_file(path: &Path, labels: &FlatClustering) -> Result<()> {
    write_labels(create(path)?, labels)
}

/// Reads `point_index,label` rows. Indices must cover `0..n` exactly once; labels are
/// renumbered densely with `0` kept as noise.
pub fn parse_labels<R: Read>(input: R, source_name: &str) -> Result<FlatClustering> {
    let mut rdr = reader(input);
    require_columns(&mut rdr, source_name, &["point_index", "label"])?;
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<LabelRow>() {
        rows.push(rec.map_err(|e| csv_error(source_name, e))?);
    }
    if rows.is_empty() {
        return Err(PoiError::format(source_name, "no label records"));
    }
    let mut raw: Vec<Option<usize>> = vec![None; rows.len()];
    for (line, row) in (2u64..).zip(&rows) {
        match raw.get_mut(row.point_index) {
            None => {
                return Err(PoiError::parse(source_name, line, format!("point_index {} out of range", row.point_index)))
            }
            Some(Some(_)) => {
                return Err(PoiError::parse(source_name, line, format!("point_index {} repeated", row.point_index)))
            }
            Some(slot) => *slot = Some(row.label),
        }
    }
    let raw: Vec<usize> = raw.into_iter().map(|l| l.expect("every index filled")).collect();
    Ok(FlatClustering::from_raw(&raw))
}

pub fn read_labels(path: &Path) -> Result<FlatClustering> {
    parse_labels(open(path)?, &name_of(path))
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterDoc {
    id: usize,
    parent: Option<usize>,
    lambda_birth: f64,
    lambda_death: f64,
    children: Vec<usize>,
    members: Vec<(usize, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeDoc {
    n: usize,
    clusters: Vec<ClusterDoc>,
}

pub fn write_tree<W: Write>(out: W, tree: &CondensedTree) -> Result<()> {
    let doc = TreeDoc {
        n: tree.n(),
        clusters: tree
            .clusters()
            .iter()
            .map(|c| ClusterDoc {
                id: c.id,
                parent: c.parent,
                lambda_birth: c.lambda_birth,
                lambda_death: c.lambda_death,
                children: c.children.clone(),
                members: c.members.clone(),
            })
            .collect(),
    };
    write_json(out, &doc)
}

pub fn parse_tree<R: Read>(input: R, source_name: &str) -> Result<CondensedTree> {
    let doc: TreeDoc = serde_json::from_reader(input).map_err(|e| PoiError::format(source_name, e.to_string()))?;
    let clusters = doc
        .clusters
        .into_iter()
        .map(|c| Cluster {
            id: c.id,
            parent: c.parent,
            lambda_birth: c.lambda_birth,
            lambda_death: c.lambda_death,
            children: c.children,
            members: c.members,
        })
        .collect();
    Ok(CondensedTree::new(doc.n, clusters)?)
}

#[derive(Serialize)]
struct StabilityDoc {
    objective: f64,
    selected: Vec<usize>,
    scores: BTreeMap<usize, f64>,
}

pub fn write_stability<W: Write>(out: W, report: &StabilityReport) -> Result<()> {
    let doc = StabilityDoc {
        objective: report.objective,
        selected: report.selected.clone(),
        scores: report.scores.iter().copied().enumerate().collect(),
    };
    write_json(out, &doc)
}

fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| PoiError::format("output", e.to_string()))?;
    writeln!(out).map_err(|e| PoiError::format("output", e.to_string()))?;
    out.flush().map_err(|e| PoiError::format("output", e.to_string()))
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(create(path)?, value)
}

pub fn write_tree_file(path: &Path, tree: &CondensedTree) -> Result<()> {
    write_tree(create(path)?, tree)
}

pub fn write_stability_file(path: &Path, report: &StabilityReport) -> Result<()> {
    write_stability(create(path)?, report)
}

#[derive(Debug, Serialize, Deserialize)]
struct BuildingDoc {
    min: [f64; 2],
    max: [f64; 2],
    expected_stops: f64,
    dispersion: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JunctionDoc {
    site: [f64; 2],
    expected_stops: f64,
    dispersion: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default)]
    buildings: Vec<BuildingDoc>,
    #[serde(default)]
    junctions: Vec<JunctionDoc>,
    #[serde(default)]
    clutter_rate: f64,
    #[serde(default)]
    seed: u64,
}

pub fn parse_scene<R: Read>(input: R, source_name: &str) -> Result<SceneSpec> {
    let doc: SceneDoc = serde_json::from_reader(input).map_err(|e| PoiError::format(source_name, e.to_string()))?;
    Ok(SceneSpec {
        buildings: doc
            .buildings
            .into_iter()
            .map(|b| Building { min: b.min, max: b.max, expected_stops: b.expected_stops, dispersion: b.dispersion })
            .collect(),
        junctions: doc
            .junctions
            .into_iter()
            .map(|j| Junction { site: j.site, expected_stops: j.expected_stops, dispersion: j.dispersion })
            .collect(),
        clutter_rate: doc.clutter_rate,
        seed: doc.seed,
    })
}

pub fn read_scene(path: &Path) -> Result<SceneSpec> {
    parse_scene(open(path)?, &name_of(path))
}

pub fn write_scene<W: Write>(out: W, spec: &SceneSpec) -> Result<()> {
    let doc = SceneDoc {
        buildings: spec
            .buildings
            .iter()
            .map(|b| BuildingDoc { min: b.min, max: b.max, expected_stops: b.expected_stops, dispersion: b.dispersion })
            .collect(),
        junctions: spec
            .junctions
            .iter()
            .map(|j| JunctionDoc { site: j.site, expected_stops: j.expected_stops, dispersion: j.dispersion })
            .collect(),
        clutter_rate: spec.clutter_rate,
        seed: spec.seed,
    };
    write_json(out, &doc)
}

/// One line of a metric report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub algorithm: String,
    pub param_string: String,
    pub ari: f64,
    pub ri: f64,
    pub non_noise_fraction: f64,
    pub num_clusters: usize,
}

impl MetricsRow {
    pub fn new(algorithm: &str, param_string: &str, scores: Agreement, labels: &FlatClustering) -> Self {
        MetricsRow {
            algorithm: algorithm.into(),
            param_string: param_string.into(),
            ari: scores.ari,
            ri: scores.ri,
            non_noise_fraction: poi_core::eval::non_noise_fraction(labels),
            num_clusters: labels.num_clusters(),
        }
    }
}

pub fn write_metrics<W: Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| csv_error("output", e))?;
    }
    w.flush().map_err(|e| PoiError::format("output", e.to_string()))?;
    Ok(())
}

pub fn write_metrics_file(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_metrics(create(path)?, rows)
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    algorithm: &'a str,
    param_string: &'a str,
    ari: Option<f64>,
    ri: Option<f64>,
    non_noise_fraction: Option<f64>,
    num_clusters: Option<usize>,
    status: String,
}

fn status_text(s: &RowStatus) -> String {
    match s {
        RowStatus::Ok => "ok".into(),
        RowStatus::Invalid => "invalid".into(),
        RowStatus::Error(msg) => format!("error: {msg}"),
    }
}

/// Sweep rows as metric CSV plus a trailing `status` column; scores are empty for
/// rows that are invalid or failed.
pub fn write_sweep_rows<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(SweepCsvRow {
            algorithm: &r.algorithm,
            param_string: &r.params,
            ari: r.ari,
            ri: r.ri,
            non_noise_fraction: r.non_noise_fraction,
            num_clusters: r.num_clusters,
            status: status_text(&r.status),
        })
        .map_err(|e| csv_error("output", e))?;
    }
    w.flush().map_err(|e| PoiError::format("output", e.to_string()))?;
    Ok(())
}

pub fn write_sweep_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_sweep_rows(create(path)?, rows)
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    algorithm: &'a str,
    configurations: usize,
    valid: usize,
    min_ari: Option<f64>,
    mean_ari: Option<f64>,
    max_ari: Option<f64>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    algorithms: Vec<SummaryEntry<'a>>,
}

pub fn write_summary<W: Write>(out: W, summary: &[AlgorithmSummary]) -> Result<()> {
    let doc = SummaryDoc {
        algorithms: summary
            .iter()
            .map(|s| SummaryEntry {
                algorithm: &s.algorithm,
                configurations: s.configurations,
                valid: s.valid,
                min_ari: s.min_ari,
                mean_ari: s.mean_ari,
                max_ari: s.max_ari,
            })
            .collect(),
    };
    write_json(out, &doc)
}

pub fn write_summary_file(path: &Path, summary: &[AlgorithmSummary]) -> Result<()> {
    write_summary(create(path)?, summary)
}
