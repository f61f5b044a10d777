//! Reference clusterers: classical single linkage and DBSCAN.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::clustertree::Dendrogram;
use crate::error::{invalid, Error, Result};
use crate::spatial::{NeighborIndex, PointSet};
use crate::stability::FlatClustering;
use crate::unionfind::UnionFind;
use crate::NOISE;

/// Single-linkage dendrogram: Kruskal over every pair sorted by
/// (distance, smaller index, larger index).
pub fn single_linkage(ps: &PointSet) -> Result<Dendrogram> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, got: n });
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((ps.dist(i, j), i, j));
        }
    }
    edges.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(Dendrogram::from_sorted_edges(n, &edges))
}

/// Stops the merge replay once `num_clusters` components remain. Components are
/// labeled `1..=num_clusters` in order of their smallest point index.
pub fn cut_dendrogram(dend: &Dendrogram, num_clusters: usize) -> Result<FlatClustering> {
    let n = dend.n_leaves();
    if num_clusters == 0 || num_clusters > n {
        return Err(invalid(alloc::format!("num_clusters must lie in 1..={n}, got {num_clusters}")));
    }
    let mut uf = UnionFind::new(n);
    let mut rep: Vec<usize> = (0..n).collect();
    for m in &dend.merges()[..n - num_clusters] {
        let (a, b) = (rep[m.left], rep[m.right]);
        uf.union(a, b);
        rep.push(a);
    }
    let mut label_of_root = vec![NOISE; n];
    let mut next = 0;
    let labels = (0..n)
        .map(|i| {
            let r = uf.find(i);
            if label_of_root[r] == NOISE {
                next += 1;
                label_of_root[r] = next;
            }
            label_of_root[r]
        })
        .collect();
    FlatClustering::new(labels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    eps: f64,
    min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(invalid("eps must be positive and finite"));
        }
        if min_pts == 0 {
            return Err(invalid("min_pts must be at least 1"));
        }
        Ok(DbscanParams { eps, min_pts })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn min_pts(&self) -> usize {
        self.min_pts
    }
}

/// DBSCAN with brute-force region queries.
pub fn dbscan(ps: &PointSet, params: &DbscanParams) -> FlatClustering {
    let eps = params.eps;
    run_dbscan(ps.len(), params.min_pts, |i| (0..ps.len()).filter(|&j| ps.dist(i, j) <= eps).collect())
}

/// DBSCAN answering region queries from a prebuilt [`NeighborIndex`].
pub fn dbscan_indexed(index: &NeighborIndex, params: &DbscanParams) -> FlatClustering {
    run_dbscan(index.len(), params.min_pts, |i| {
        let mut nb: Vec<usize> = index.within(i, params.eps).collect();
        nb.sort_unstable();
        nb
    })
}

/// Points are scanned in ascending index; a border point joins the first cluster
/// that reaches it. Region query results must be in ascending index order.
fn run_dbscan(n: usize, min_pts: usize, region: impl Fn(usize) -> Vec<usize>) -> FlatClustering {
    const UNSEEN: usize = usize::MAX;
    let mut labels = vec![UNSEEN; n];
    let mut cluster = 0;
    for i in 0..n {
        if labels[i] != UNSEEN {
            continue;
        }
        let nb = region(i);
        if nb.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        cluster += 1;
        labels[i] = cluster;
        let mut queue: VecDeque<usize> = nb.into_iter().filter(|&q| q != i).collect();
        while let Some(q) = queue.pop_front() {
            if labels[q] == NOISE {
                labels[q] = cluster;
                continue;
            }
            if labels[q] != UNSEEN {
                continue;
            }
            labels[q] = cluster;
            let qn = region(q);
            if qn.len() >= min_pts {
                queue.extend(qn.into_iter().filter(|&r| labels[r] == UNSEEN || labels[r] == NOISE));
            }
        }
    }
    FlatClustering::new(labels).expect("clusters are numbered densely")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustertree::{build_rsl_tree, RslParams};
    use crate::eval::{adjusted_rand_index, NoiseMode};
    use rand::rngs::SmallRng;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn ps(v: &[(f64, f64)]) -> PointSet {
        PointSet::new(v.iter().map(|&(x, y)| [x, y]).collect()).unwrap()
    }

    /// Two 8-point blobs inside unit squares 50 m apart.
    fn two_blobs() -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for off in [0.0, 50.0] {
            for i in 0..8 {
                v.push((off + (i % 4) as f64 * 0.3, (i / 4) as f64 * 0.5));
            }
        }
        v
    }

    #[test]
    fn colinear_single_linkage() {
        let d = single_linkage(&ps(&[(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)])).unwrap();
        let radii: Vec<f64> = d.merges().iter().map(|m| m.radius).collect();
        assert_eq!(radii, vec![1.0, 9.0]);
        let two = single_linkage(&ps(&[(0.0, 0.0), (3.0, 4.0)])).unwrap();
        assert_eq!(two.merges()[0].radius, 5.0);
    }

    #[test]
    fn single_linkage_equals_rsl_alpha_one_k_two() {
        let mut rng = SmallRng::seed_from_u64(1);
        for _ in 0..10 {
            let coords = (0..40).map(|_| [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)]).collect();
            let p = PointSet::new(coords).unwrap();
            let mut sl: Vec<f64> = single_linkage(&p).unwrap().merges().iter().map(|m| m.radius).collect();
            let mut rsl: Vec<f64> = build_rsl_tree(&p, &RslParams::new(1.0, 2).unwrap())
                .unwrap()
                .merges()
                .iter()
                .map(|m| m.radius)
                .collect();
            sl.sort_by(f64::total_cmp);
            rsl.sort_by(f64::total_cmp);
            assert_eq!(sl, rsl);
        }
    }

    #[test]
    fn cuts() {
        let p = ps(&two_blobs());
        let d = single_linkage(&p).unwrap();
        assert_eq!(cut_dendrogram(&d, 1).unwrap().labels(), &[1; 16]);
        let all = cut_dendrogram(&d, 16).unwrap();
        assert_eq!(all.labels(), (1..=16).collect::<Vec<_>>().as_slice());
        let two = cut_dendrogram(&d, 2).unwrap();
        assert_eq!(&two.labels()[..8], &[1; 8]);
        assert_eq!(&two.labels()[8..], &[2; 8]);
        assert!(cut_dendrogram(&d, 0).is_err());
        assert!(cut_dendrogram(&d, 17).is_err());
        for c in 1..=16 {
            assert_eq!(cut_dendrogram(&d, c).unwrap().num_clusters(), c);
        }
    }

    #[test]
    fn dbscan_extremes() {
        let p = ps(&two_blobs());
        let one = dbscan(&p, &DbscanParams::new(1000.0, 1).unwrap());
        assert_eq!(one.labels(), &[1; 16]);
        let sparse = ps(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)]);
        assert_eq!(dbscan(&sparse, &DbscanParams::new(5.0, 2).unwrap()).labels(), &[0, 0, 0]);
        assert!(DbscanParams::new(0.0, 2).is_err());
        assert!(DbscanParams::new(1.0, 0).is_err());
    }

    /// Brute-force density connectivity: core points joined when within eps, border
    /// points assigned to any core neighbor's component.
    fn density_components(p: &PointSet, eps: f64, min_pts: usize) -> Vec<Option<usize>> {
        let n = p.len();
        let within = |i: usize, j: usize| p.dist(i, j) <= eps;
        let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| within(i, j)).count() >= min_pts).collect();
        let mut comp: Vec<Option<usize>> = vec![None; n];
        let mut changed = true;
        for i in 0..n {
            if core[i] {
                comp[i] = Some(i);
            }
        }
        while changed {
            changed = false;
            for i in 0..n {
                for j in 0..n {
                    if core[i] && core[j] && within(i, j) && comp[j] > comp[i] {
                        comp[j] = comp[i];
                        changed = true;
                    }
                }
            }
        }
        for i in 0..n {
            if !core[i] {
                comp[i] = (0..n).find(|&j| core[j] && within(i, j)).and_then(|j| comp[j]);
            }
        }
        comp
    }

    #[test]
    fn dbscan_two_blobs_match_density_connectivity() {
        let p = ps(&two_blobs());
        let diameter = libm::sqrt(0.9 * 0.9 + 0.5 * 0.5);
        let flat = dbscan(&p, &DbscanParams::new(diameter, 4).unwrap());
        assert_eq!(flat.num_clusters(), 2);
        let oracle = density_components(&p, diameter, 4);
        let oracle_labels: Vec<usize> = oracle.iter().map(|c| c.map_or(0, |x| x + 1)).collect();
        let oracle_flat = FlatClustering::from_raw(&oracle_labels);
        assert_eq!(adjusted_rand_index(&flat, &oracle_flat, NoiseMode::Singleton).unwrap(), 1.0);
        assert_eq!(&flat.labels()[..8], &[1; 8]);
        assert_eq!(&flat.labels()[8..], &[2; 8]);
    }

    #[test]
    fn indexed_matches_brute_force_and_shuffles() {
        let mut rng = SmallRng::seed_from_u64(4);
        let mut coords: Vec<[f64; 2]> = Vec::new();
        for c in [[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]] {
            for _ in 0..20 {
                coords.push([c[0] + rng.random_range(0.0..4.0), c[1] + rng.random_range(0.0..4.0)]);
            }
        }
        let p = PointSet::new(coords.clone()).unwrap();
        let index = NeighborIndex::build(&p);
        let mut prev_noise = usize::MAX;
        for eps in [0.5, 1.0, 2.0, 3.0, 5.0, 8.0] {
            let params = DbscanParams::new(eps, 4).unwrap();
            let a = dbscan(&p, &params);
            assert_eq!(a, dbscan_indexed(&index, &params));
            assert!(a.noise_count() <= prev_noise);
            prev_noise = a.noise_count();
        }
        // well-separated blobs, eps large enough that every point is core: no shared borders
        let params = DbscanParams::new(8.0, 4).unwrap();
        let base = dbscan(&p, &params);
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.shuffle(&mut rng);
        let shuffled = PointSet::new(order.iter().map(|&i| coords[i]).collect()).unwrap();
        let s = dbscan(&shuffled, &params);
        let mut back = vec![0; coords.len()];
        for (pos, &i) in order.iter().enumerate() {
            back[i] = s.labels()[pos];
        }
        let back = FlatClustering::from_raw(&back);
        assert_eq!(adjusted_rand_index(&base, &back, NoiseMode::Singleton).unwrap(), 1.0);
    }
}
