//! End-to-end acceptance checks. Each check prints one PASS or FAIL line; the binary
//! exits non-zero if any check fails or overruns its time budget.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::VecDeque;
use std::f64::consts::SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use poi_core::baselines::single_linkage;
use poi_core::clustertree::{build_rsl_tree, condense_tree, level_set_oracle, Cluster, CondensedTree, RslParams};
use poi_core::eval::{adjusted_rand_index, compare, ContingencyTable, NoiseMode};
use poi_core::spatial::{core_distances, Point};
use poi_core::stability::{clusters_at_lambda, extract_at_lambda, extract_optimal, satisfies_branch_constraint};
use poi_core::sweep::{
    build_grid_density, build_grid_hierarchical, default_rsl_config, distance_quantile_probs, run_rsl, run_sweep, seq,
    size_quantile_probs, size_quantiles, summarize, truth_sizes, Algorithm, Config, RowStatus, SweepPlan,
};
use poi_core::synth::{generate_scene, Building, Junction, SceneSpec};
use poi_core::{FlatClustering, PointSet, NOISE};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Check = (&'static str, Option<f64>, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let checks: [Check; 9] = [
        ("oracle equivalence", Some(10.0), oracle_equivalence),
        ("single-linkage equivalence", Some(5.0), single_linkage_equivalence),
        ("optimal flat extraction", Some(5.0), optimal_extraction),
        ("adjusted Rand index", None, ari_correctness),
        ("synthetic scene", Some(60.0), synthetic_scene),
        ("two-blob consistency", None, two_blob_consistency),
        ("density-level cuts", None, lambda_cuts),
        ("CLI determinism", None, cli_determinism),
        ("sweep arithmetic", None, sweep_arithmetic),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        let (mut ok, mut detail) = match outcome {
            Ok(Ok(detail)) => (true, detail),
            Ok(Err(why)) => (false, why),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let budget = match limit {
            Some(l) => format!("{secs:.2}s of {l}s"),
            None => format!("{secs:.2}s"),
        };
        if limit.is_some_and(|l| secs > l) {
            ok = false;
            detail = format!("over time budget; {detail}");
        }
        if !ok {
            failures += 1;
        }
        println!("{} [{}] {name} ({budget}): {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if failures > 0 {
        println!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}

fn uniform_points(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point> {
    (0..n).map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)]).collect()
}

fn dist(a: &Point, b: &Point) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Components of the graph on points with `r_k <= r`, edges where `d / alpha <= r`,
/// by repeated label propagation.
fn brute_components(pts: &[Point], alpha: f64, k: usize, r: f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let rk: Vec<f64> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = pts.iter().map(|q| dist(&pts[i], q)).collect();
            row.sort_by(f64::total_cmp);
            row[k - 1]
        })
        .collect();
    let active: Vec<bool> = rk.iter().map(|&v| v <= r).collect();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if active[i] && active[j] && dist(&pts[i], &pts[j]) / alpha <= r && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in (0..n).filter(|&i| active[i]) {
        match comps.iter_mut().find(|c| label[c[0]] == label[i]) {
            Some(c) => c.push(i),
            None => comps.push(vec![i]),
        }
    }
    comps
}

fn oracle_equivalence() -> Outcome {
    let mut radii = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(6..=12);
        let pts = uniform_points(&mut rng, n, 10.0);
        let ps = PointSet::new(pts.clone()).unwrap();
        for alpha in [1.0, SQRT_2, 2.0] {
            for k in [2, 3] {
                let params = RslParams::new(alpha, k).unwrap();
                let dend = build_rsl_tree(&ps, &params).unwrap();
                let cd = core_distances(&ps, k).unwrap();
                for level in level_set_oracle(&ps, &params).unwrap() {
                    let got = dend.level_set(level.radius, &cd);
                    ensure!(
                        got == level.components,
                        "seed {seed} alpha {alpha} k {k} r {}: tree {got:?} vs oracle {:?}",
                        level.radius,
                        level.components
                    );
                    let brute = brute_components(&pts, alpha, k, level.radius);
                    ensure!(brute == level.components, "seed {seed}: oracle disagrees with label propagation");
                    radii += 1;
                }
            }
        }
    }
    Ok(format!("{radii} critical radii over 600 (set, alpha, k) cases"))
}

fn single_linkage_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = if seed == 0 { 200 } else { rng.random_range(2..=200) };
        let ps = PointSet::new(uniform_points(&mut rng, n, 100.0)).unwrap();
        let mut sl: Vec<f64> = single_linkage(&ps).unwrap().merges().iter().map(|m| m.radius).collect();
        let rsl_tree = build_rsl_tree(&ps, &RslParams::new(1.0, 2).unwrap()).unwrap();
        let mut rsl: Vec<f64> = rsl_tree.merges().iter().map(|m| m.radius).collect();
        sl.sort_by(f64::total_cmp);
        rsl.sort_by(f64::total_cmp);
        ensure!(sl.len() == rsl.len(), "seed {seed}: merge counts differ");
        for (a, b) in sl.iter().zip(&rsl) {
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            ensure!(rel <= 1e-12, "seed {seed}: radius {a} vs {b}");
        }
    }
    Ok(format!("50 sets, worst relative difference {worst:e}"))
}

/// Random condensed tree with dyadic levels so every stability sum is exact.
fn random_tree(rng: &mut ChaCha8Rng, max_clusters: usize) -> CondensedTree {
    let n = rng.random_range(12..=40);
    let eighth = |steps: usize| steps as f64 / 8.0;
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut queue: VecDeque<(Option<usize>, Vec<usize>, f64)> =
        VecDeque::from([(None, (0..n).collect(), eighth(rng.random_range(1..=4)))]);
    while let Some((parent, mut pts, birth)) = queue.pop_front() {
        let id = clusters.len();
        let span = rng.random_range(1..=16);
        let death = birth + eighth(span);
        let room = clusters.len() + 1 + queue.len() + 2 <= max_clusters;
        let split = pts.len() >= 4 && room && (id == 0 || rng.random_bool(0.85));
        let mut members = Vec::new();
        let mut parts = Vec::new();
        pts.shuffle(rng);
        if split {
            let shed = rng.random_range(0..=pts.len() - 2);
            for &p in &pts[..shed] {
                members.push((p, birth + eighth(rng.random_range(0..=span))));
            }
            let rest = &pts[shed..];
            let cut = rng.random_range(1..rest.len());
            for &p in rest {
                members.push((p, death));
            }
            parts.push(rest[..cut].to_vec());
            parts.push(rest[cut..].to_vec());
        } else {
            members.push((pts[0], death));
            for &p in &pts[1..] {
                members.push((p, birth + eighth(rng.random_range(0..=span))));
            }
        }
        members.sort_by_key(|m| m.0);
        if let Some(p) = parent {
            clusters[p].children.push(id);
        }
        clusters.push(Cluster { id, parent, lambda_birth: birth, lambda_death: death, children: Vec::new(), members });
        for part in parts {
            queue.push_back((Some(id), part, death));
        }
    }
    CondensedTree::new(n, clusters).expect("generated tree is well formed")
}

/// Every admissible selection below `id`, with `id` itself as one option.
fn selections(tree: &CondensedTree, id: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![id]];
    out.extend(children_selections(tree, id));
    out
}

fn children_selections(tree: &CondensedTree, id: usize) -> Vec<Vec<usize>> {
    let children = &tree.clusters()[id].children;
    if children.is_empty() {
        return Vec::new();
    }
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for &c in children {
        let opts = selections(tree, c);
        acc = acc.iter().flat_map(|a| opts.iter().map(move |o| [a.clone(), o.clone()].concat())).collect();
    }
    acc
}

fn relative_mass(c: &Cluster) -> f64 {
    c.members.iter().map(|&(_, lam)| lam - c.lambda_birth).sum()
}

fn optimal_extraction() -> Outcome {
    let mut enumerated = 0;
    let mut largest = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let tree = random_tree(&mut rng, 12);
        largest = largest.max(tree.clusters().len());
        ensure!(tree.clusters().len() <= 12 && tree.clusters().len() >= 3, "seed {seed}: bad tree size");
        let mut best = f64::NEG_INFINITY;
        for mut sel in children_selections(&tree, 0) {
            sel.sort_unstable();
            let j: f64 = sel.iter().map(|&c| relative_mass(&tree.clusters()[c])).sum();
            best = best.max(j);
            enumerated += 1;
        }
        let (report, flat) = extract_optimal(&tree);
        ensure!(report.objective == best, "seed {seed}: J {} vs exhaustive {best}", report.objective);
        ensure!(satisfies_branch_constraint(&tree, &report.selected), "seed {seed}: branch constraint violated");
        for leaf in tree.clusters().iter().filter(|c| c.children.is_empty()) {
            let mut hits = 0;
            let mut cur = leaf.parent;
            if report.selected.contains(&leaf.id) {
                hits += 1;
            }
            while let Some(id) = cur {
                if report.selected.contains(&id) {
                    hits += 1;
                }
                cur = tree.clusters()[id].parent;
            }
            ensure!(hits == 1, "seed {seed}: leaf {} covered {hits} times", leaf.id);
        }
        ensure!(flat.num_clusters() == report.selected.len(), "seed {seed}: label count differs from selection");
    }
    Ok(format!("50 trees, {enumerated} selections enumerated, {largest} clusters max"))
}

fn brute_pairs(a: &[usize], b: &[usize]) -> (u64, u64, u64, u64) {
    let mut out = (0, 0, 0, 0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let sa = a[i] != NOISE && a[i] == a[j];
            let sb = b[i] != NOISE && b[i] == b[j];
            out.0 += u64::from(sa && sb);
            out.1 += u64::from(sa);
            out.2 += u64::from(sb);
            out.3 += 1;
        }
    }
    out
}

fn ari_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3000);
    for trial in 0..200 {
        let n = rng.random_range(2..=50);
        let a = FlatClustering::from_raw(&(0..n).map(|_| rng.random_range(0..5)).collect::<Vec<_>>());
        let b = FlatClustering::from_raw(&(0..n).map(|_| rng.random_range(0..5)).collect::<Vec<_>>());
        let (idx, sa, sb, total) = brute_pairs(a.labels(), b.labels());
        let table = ContingencyTable::new(&a, &b, NoiseMode::Singleton).unwrap();
        ensure!(table.pair_sums() == (idx, sa, sb, total), "trial {trial}: pair sums differ");
        let (i, x, y, t) = (idx as i128, sa as i128, sb as i128, total as i128);
        let den = t * (x + y) - 2 * x * y;
        let expected = if den == 0 {
            if i == x && i == y {
                1.0
            } else {
                0.0
            }
        } else {
            (2 * t * i - 2 * x * y) as f64 / den as f64
        };
        let got = adjusted_rand_index(&a, &b, NoiseMode::Singleton).unwrap();
        ensure!(got == expected, "trial {trial}: ARI {got} vs {expected}");
        let ri = (total + 2 * idx - sa - sb) as f64 / total as f64;
        ensure!(compare(&a, &b, NoiseMode::Singleton).unwrap().ri == ri, "trial {trial}: RI differs");

        // identical partitions under a relabeling
        let mut perm: Vec<usize> = (1..=a.num_clusters()).collect();
        perm.shuffle(&mut rng);
        let relabeled: Vec<usize> = a.labels().iter().map(|&l| if l == NOISE { NOISE } else { perm[l - 1] }).collect();
        let relabeled = FlatClustering::new(relabeled).unwrap();
        if n >= 2 {
            ensure!(
                adjusted_rand_index(&a, &relabeled, NoiseMode::Singleton).unwrap() == 1.0,
                "trial {trial}: relabeling"
            );
        }
    }
    let textbook = adjusted_rand_index(
        &FlatClustering::new(vec![1, 1, 2, 2]).unwrap(),
        &FlatClustering::new(vec![1, 2, 1, 2]).unwrap(),
        NoiseMode::Singleton,
    )
    .unwrap();
    ensure!(textbook == -0.5, "[1,1,2,2] vs [1,2,1,2] gave {textbook}");

    let mut sum = 0.0;
    for _ in 0..200 {
        let a = FlatClustering::from_raw(&(0..1000).map(|_| rng.random_range(1..=10)).collect::<Vec<_>>());
        let b = FlatClustering::from_raw(&(0..1000).map(|_| rng.random_range(1..=10)).collect::<Vec<_>>());
        sum += adjusted_rand_index(&a, &b, NoiseMode::Singleton).unwrap();
    }
    let mean = sum / 200.0;
    ensure!((-0.05..=0.05).contains(&mean), "independent labelings average ARI {mean}");
    Ok(format!("200 pairs exact, textbook pair -0.5, random mean {mean:.5}"))
}

/// 12 buildings and 6 junctions on a 6 x 3 grid with 120 m pitch.
fn scene_spec() -> SceneSpec {
    let dispersion = 3.0;
    let mut buildings = Vec::new();
    let mut junctions = Vec::new();
    for i in 0..18 {
        let (x, y) = ((i % 6) as f64 * 120.0, (i / 6) as f64 * 120.0);
        if i < 12 {
            buildings.push(Building { min: [x, y], max: [x + 20.0, y + 20.0], expected_stops: 80.0, dispersion });
        } else {
            junctions.push(Junction { site: [x + 10.0, y + 10.0], expected_stops: 80.0, dispersion });
        }
    }
    SceneSpec { buildings, junctions, clutter_rate: 75.0, seed: 7 }
}

/// Smallest gap between site footprints (junctions as points).
fn min_site_gap(spec: &SceneSpec) -> f64 {
    let boxes: Vec<(Point, Point)> =
        spec.buildings.iter().map(|b| (b.min, b.max)).chain(spec.junctions.iter().map(|j| (j.site, j.site))).collect();
    let mut gap = f64::INFINITY;
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            let dx = (b.0[0] - a.1[0]).max(a.0[0] - b.1[0]).max(0.0);
            let dy = (b.0[1] - a.1[1]).max(a.0[1] - b.1[1]).max(0.0);
            gap = gap.min((dx * dx + dy * dy).sqrt());
        }
    }
    gap
}

fn synthetic_scene() -> Outcome {
    let spec = scene_spec();
    let max_dispersion = spec
        .buildings
        .iter()
        .map(|b| b.dispersion)
        .chain(spec.junctions.iter().map(|j| j.dispersion))
        .fold(0.0, f64::max);
    let gap = min_site_gap(&spec);
    ensure!(gap >= 8.0 * max_dispersion, "site gap {gap} below 8 dispersions");
    let scene = generate_scene(&spec).unwrap();
    let n = scene.points.len();
    let clutter = scene.truth.noise_count() as f64 / n as f64;
    ensure!((1300..=1700).contains(&n), "scene has {n} exemplars");
    ensure!((0.035..=0.065).contains(&clutter), "clutter fraction {clutter}");
    ensure!(scene.truth.num_clusters() == 18, "expected 18 sites");

    let Config::Rsl { alpha, k, min_cluster_size } = default_rsl_config(n) else { unreachable!() };
    let rsl = run_rsl(&scene.points, alpha, k, min_cluster_size).unwrap();
    let rsl_ari = adjusted_rand_index(&scene.truth, &rsl, NoiseMode::Singleton).unwrap();

    let sizes = truth_sizes(&scene.truth);
    let mut rows = run_sweep(&build_grid_density(&sizes, &scene.points).unwrap(), &scene.points, &scene.truth).unwrap();
    rows.extend(run_sweep(&build_grid_hierarchical(18).unwrap(), &scene.points, &scene.truth).unwrap());
    let summary = summarize(&rows);
    let mean_of =
        |name: &str| summary.iter().find(|s| s.algorithm == name).and_then(|s| s.mean_ari).unwrap_or(f64::NEG_INFINITY);
    let (db_mean, sl_mean) = (mean_of("dbscan"), mean_of("sl"));
    ensure!(rsl_ari >= 0.90, "RSL ARI {rsl_ari:.4} below 0.90");
    ensure!(rsl_ari >= db_mean, "RSL ARI {rsl_ari:.4} below DBSCAN mean {db_mean:.4}");
    ensure!(rsl_ari >= sl_mean, "RSL ARI {rsl_ari:.4} below SL mean {sl_mean:.4}");
    Ok(format!(
        "n={n}, k={k}, RSL ARI {rsl_ari:.4} with {} POIs; DBSCAN mean {db_mean:.4} over {} valid; SL mean {sl_mean:.4}",
        rsl.num_clusters(),
        summary.iter().find(|s| s.algorithm == "dbscan").map_or(0, |s| s.valid)
    ))
}

/// Two unit-variance Gaussian blobs 20 units apart; the first half of the points come
/// from the blob at the origin.
fn two_blobs(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let pts = (0..n)
        .map(|i| {
            let cx = if i < n / 2 { 0.0 } else { 20.0 };
            [cx + z.sample(&mut rng), z.sample(&mut rng)]
        })
        .collect();
    PointSet::new(pts).unwrap()
}

fn default_tree(ps: &PointSet) -> CondensedTree {
    let params = RslParams::with_defaults(ps.len());
    let dend = build_rsl_tree(ps, &params).unwrap();
    condense_tree(&dend, params.k()).unwrap()
}

/// Fraction of points that the root's first split places on their own blob's side,
/// under the better of the two side assignments.
fn top_split_agreement(ps: &PointSet) -> f64 {
    let n = ps.len();
    let tree = default_tree(ps);
    let children = &tree.root().children;
    if children.len() != 2 {
        return 0.0;
    }
    let mut side = vec![None; n];
    for (s, &c) in children.iter().enumerate() {
        for &(p, _) in &tree.clusters()[c].members {
            side[p] = Some(s);
        }
    }
    let truth = |p: usize| usize::from(p >= n / 2);
    let direct = (0..n).filter(|&p| side[p] == Some(truth(p))).count();
    let swapped = (0..n).filter(|&p| side[p] == Some(1 - truth(p))).count();
    direct.max(swapped) as f64 / n as f64
}

fn two_blob_consistency() -> Outcome {
    let small = top_split_agreement(&two_blobs(200, 41));
    let large = top_split_agreement(&two_blobs(800, 42));
    ensure!(small >= 0.99, "n=200 agreement {small}");
    ensure!(large >= 0.99, "n=800 agreement {large}");
    ensure!(large >= small, "agreement fell from {small} to {large}");
    Ok(format!("agreement {small:.4} at n=200, {large:.4} at n=800"))
}

fn lambda_cuts() -> Outcome {
    let ps = two_blobs(200, 41);
    let tree = default_tree(&ps);
    let all = extract_at_lambda(&tree, 0.0).unwrap();
    ensure!(all.num_clusters() == 1 && all.noise_count() == 0, "λ=0 gave {} clusters", all.num_clusters());
    let above = tree.max_lambda() * (1.0 + 1e-9) + f64::MIN_POSITIVE;
    let none = extract_at_lambda(&tree, above).unwrap();
    ensure!(none.noise_count() == ps.len(), "λ above max left {} points labeled", ps.len() - none.noise_count());

    let (report, _) = extract_optimal(&tree);
    let mut levels: Vec<f64> = vec![0.0];
    for c in tree.clusters() {
        levels.push(c.lambda_birth);
        levels.push(c.lambda_death);
        levels.extend(c.members.iter().map(|m| m.1));
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mids: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    levels.extend(mids);
    let mut best_cut = f64::NEG_INFINITY;
    for &lam in &levels {
        let cut_j: f64 = clusters_at_lambda(&tree, lam).iter().map(|&c| report.scores[c]).sum();
        ensure!(report.objective >= cut_j, "cut at λ={lam} reaches J={cut_j} above optimum {}", report.objective);
        best_cut = best_cut.max(cut_j);
    }
    Ok(format!("{} levels checked, optimum {:.4} vs best cut {best_cut:.4}", levels.len(), report.objective))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_poi"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if !out.status.success() {
        return Err(format!("poi {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn hash_tree(dir: &Path, hasher: &mut Sha256) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        hasher.update(path.file_name().unwrap().to_string_lossy().as_bytes());
        if path.is_dir() {
            hash_tree(&path, hasher);
        } else {
            hasher.update(std::fs::read(&path).unwrap());
        }
    }
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let small = SceneSpec {
        buildings: (0..4)
            .map(|i| Building {
                min: [i as f64 * 100.0, 0.0],
                max: [i as f64 * 100.0 + 15.0, 15.0],
                expected_stops: 40.0,
                dispersion: 2.0,
            })
            .collect(),
        junctions: (0..2)
            .map(|i| Junction { site: [50.0 + i as f64 * 100.0, 80.0], expected_stops: 40.0, dispersion: 2.0 })
            .collect(),
        clutter_rate: 12.0,
        seed: 1,
    };
    let mut scene_json = Vec::new();
    poi::io::write_scene(&mut scene_json, &small).unwrap();
    std::fs::write(root.join("scene.json"), scene_json).unwrap();
    let mut traj = String::from("object_id,t,x,y\n");
    for obj in 0..3 {
        for step in 0..40 {
            let t = step as f64 * 10.0;
            // dwell for 10 samples, walk for 10, repeat
            let x = if (step / 10) % 2 == 0 { (step / 20) as f64 * 300.0 + obj as f64 } else { step as f64 * 15.0 };
            traj.push_str(&format!("o{obj},{t},{:.6},{:.6}\n", x * 1e-5, 0.001 * obj as f64));
        }
    }
    std::fs::write(root.join("traj.csv"), traj).unwrap();
    run_cli(root, &["synth", "--scene", "scene.json", "--out-dir", "inputs"])?;

    let commands: Vec<Vec<&str>> = vec![
        vec!["synth", "--scene", "scene.json", "--seed", "5", "--out-dir", "out/synth"],
        vec![
            "exemplars",
            "--input",
            "traj.csv",
            "--output",
            "out/ex.csv",
            "--dist-threshold",
            "0.5",
            "--time-threshold",
            "30",
        ],
        vec![
            "exemplars",
            "--input",
            "traj.csv",
            "--output",
            "out/ex_ll.csv",
            "--dist-threshold",
            "5",
            "--time-threshold",
            "30",
            "--latlon",
        ],
        vec!["poi", "--input", "inputs/exemplars.csv", "--out-dir", "out/poi"],
        vec!["poi", "--input", "inputs/exemplars.csv", "--out-dir", "out/poi_lambda", "--lambda", "0.5"],
        vec![
            "poi",
            "--input",
            "inputs/exemplars.csv",
            "--out-dir",
            "out/poi_cut",
            "--alpha",
            "1",
            "--k",
            "2",
            "--cut",
            "6",
        ],
        vec!["eval", "inputs/truth.csv", "out/poi/labels.csv", "--output", "out/eval.csv"],
        vec!["sweep", "--exemplars", "inputs/exemplars.csv", "--truth", "inputs/truth.csv", "--out-dir", "out/sweep"],
    ];
    let mut digests = Vec::new();
    for _ in 0..3 {
        let _ = std::fs::remove_dir_all(root.join("out"));
        let mut hasher = Sha256::new();
        for args in &commands {
            hasher.update(run_cli(root, args)?);
        }
        hash_tree(&root.join("out"), &mut hasher);
        digests.push(hasher.finalize());
    }
    ensure!(digests[0] == digests[1] && digests[1] == digests[2], "outputs differ between runs");
    let hex: String = digests[0].iter().take(6).map(|b| format!("{b:02x}")).collect();
    Ok(format!("{} commands x 3 runs, digest {hex}…", commands.len()))
}

fn sweep_arithmetic() -> Outcome {
    ensure!(build_grid_hierarchical(26).unwrap().len() == 25, "n_true=26 should give 25 rows");
    for n_true in 2..=60 {
        ensure!(build_grid_hierarchical(n_true).unwrap().len() == n_true - 1, "n_true={n_true}");
    }
    for (x, y, s) in [(1i64, 10i64, 1i64), (1, 10, 3), (2, 2, 5), (0, 100, 7), (5, 9, 4)] {
        let expected = ((y - x) / s + 1 + i64::from((y - x) % s != 0)) as usize;
        ensure!(seq(x, y, s).unwrap().len() == expected, "seq({x},{y},{s})");
    }
    ensure!(size_quantile_probs().len() == 35, "size quantile count");
    ensure!(distance_quantile_probs().len() == 20, "distance quantile count");

    let scene = generate_scene(&scene_spec()).unwrap();
    let sizes = truth_sizes(&scene.truth);
    let density = build_grid_density(&sizes, &scene.points).unwrap();
    let min_pts = size_quantiles(&sizes).unwrap().len();
    let eps_count = density.len() / min_pts;
    ensure!(density.len() == min_pts * eps_count && eps_count <= 20, "density grid {}", density.len());

    // 8 points: all-noise DBSCAN is excluded, 6 of 8 labeled is kept, 5 of 8 is not
    let pts: Vec<Point> = (0..8).map(|i| [(i % 4) as f64 * 100.0, (i / 4) as f64 * 100.0]).collect();
    let ps = PointSet::new(pts).unwrap();
    let truth = FlatClustering::new(vec![1, 1, 1, 1, 2, 2, 2, 2]).unwrap();
    let exactly = FlatClustering::new(vec![1, 1, 1, 0, 2, 2, 2, 0]).unwrap();
    let below = FlatClustering::new(vec![1, 1, 0, 0, 2, 2, 2, 0]).unwrap();
    let plan = SweepPlan::new(Algorithm::Dbscan, vec![Config::Dbscan { eps: 1.0, min_pts: 3 }]).unwrap();
    let rows = run_sweep(&plan, &ps, &truth).unwrap();
    ensure!(rows[0].status == RowStatus::Invalid && rows[0].ari.is_none(), "all-noise row was scored");
    let ext = SweepPlan::new(
        Algorithm::External,
        vec![
            Config::External { name: "exactly".into(), labels: exactly },
            Config::External { name: "below".into(), labels: below },
        ],
    )
    .unwrap();
    let rows = run_sweep(&ext, &ps, &truth).unwrap();
    ensure!(rows[0].non_noise_fraction == Some(0.75), "fraction {:?}", rows[0].non_noise_fraction);
    ensure!(rows[0].status == RowStatus::Ok && rows[0].ari.is_some(), "75% row excluded");
    ensure!(rows[1].status == RowStatus::Invalid, "62.5% row included");
    Ok(format!("hierarchical 25 rows; density {min_pts} x {eps_count}; validity boundary inclusive"))
}
