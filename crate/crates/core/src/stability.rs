//! Cluster stability and flat extraction.
//!
//! With the finite-sample density surrogate `λ = 1/r`, the excess-of-mass integrals
//! become sums of λ differences over member points. The relative excess of mass
//! `E_R(C)` caps each point at the level where it leaves `C` itself; it is the weight
//! maximized by [`extract_optimal`] subject to selecting exactly one cluster on every
//! leaf-to-root path (the root excluded).

use alloc::vec;
use alloc::vec::Vec;

use crate::clustertree::{Cluster, CondensedTree};
use crate::error::{invalid, Error, Result};
use crate::NOISE;

/// One label per point: `0` is noise, clusters are `1..=num_clusters`, each used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlatClustering {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl FlatClustering {
    /// Wraps labels that already use `1..=m` densely.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let m = labels.iter().copied().max().unwrap_or(NOISE);
        let mut used = vec![false; m + 1];
        for &l in &labels {
            used[l] = true;
        }
        if let Some(gap) = (1..=m).find(|&l| !used[l]) {
            return Err(invalid(alloc::format!("cluster label {gap} is never used")));
        }
        Ok(FlatClustering { labels, num_clusters: m })
    }

    /// Renumbers arbitrary non-zero labels to `1..=m` in ascending order of the
    /// original values. Zero stays noise.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut distinct: Vec<usize> = raw.iter().copied().filter(|&l| l != NOISE).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let labels =
            raw.iter().map(|&l| if l == NOISE { NOISE } else { distinct.binary_search(&l).unwrap() + 1 }).collect();
        FlatClustering { labels, num_clusters: distinct.len() }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    /// Point count per cluster label; index 0 holds the noise count.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters + 1];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Stability scores of every cluster and the selected set.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `E_R` indexed by cluster id.
    pub scores: Vec<f64>,
    /// Selected cluster ids, ascending.
    pub selected: Vec<usize>,
    /// Sum of the selected scores, accumulated in ascending id order.
    pub objective: f64,
}

/// Excess of mass of a cluster: every point of its subtree contributes the level at
/// which it finally leaves the subtree minus the cluster's birth level.
pub fn excess_of_mass(tree: &CondensedTree, id: usize) -> Result<f64> {
    let c = tree.cluster(id)?;
    let mut last = vec![f64::NEG_INFINITY; tree.n()];
    for cid in tree.subtree(id) {
        for &(p, lam) in &tree.clusters()[cid].members {
            last[p] = last[p].max(lam);
        }
    }
    Ok(last.iter().filter(|l| l.is_finite()).map(|&l| l - c.lambda_birth).sum())
}

/// Relative excess of mass: each member contributes the level at which it leaves the
/// cluster itself (capped at the cluster's death) minus the birth level.
pub fn relative_excess_of_mass(tree: &CondensedTree, id: usize) -> Result<f64> {
    Ok(stability_of(tree.cluster(id)?))
}

fn stability_of(c: &Cluster) -> f64 {
    c.members.iter().map(|&(_, lam)| lam - c.lambda_birth).sum()
}

/// Maximizes total relative excess of mass with exactly one selected cluster per
/// leaf-to-root path, excluding the root, by bottom-up propagation. Ties favor the
/// parent. A tree that never splits yields one cluster holding every point.
pub fn extract_optimal(tree: &CondensedTree) -> (StabilityReport, FlatClustering) {
    let clusters = tree.clusters();
    let scores: Vec<f64> = clusters.iter().map(stability_of).collect();
    let mut propagated = vec![0.0; clusters.len()];
    let mut selected = vec![false; clusters.len()];

    // children always carry larger ids than their parent
    for id in (1..clusters.len()).rev() {
        let c = &clusters[id];
        if c.children.is_empty() {
            propagated[id] = scores[id];
            selected[id] = true;
            continue;
        }
        let below: f64 = c.children.iter().map(|&ch| propagated[ch]).sum();
        if scores[id] >= below {
            propagated[id] = scores[id];
            selected[id] = true;
            for d in tree.subtree(id).into_iter().filter(|&d| d != id) {
                selected[d] = false;
            }
        } else {
            propagated[id] = below;
        }
    }

    let selected: Vec<usize> = (1..clusters.len()).filter(|&i| selected[i]).collect();
    let objective = selected.iter().map(|&i| scores[i]).sum();
    let flat = if selected.is_empty() {
        FlatClustering { labels: vec![1; tree.n()], num_clusters: 1 }
    } else {
        label_points(tree, selected.clone(), |_| true)
    };
    (StabilityReport { scores, selected, objective }, flat)
}

/// Numbers `ids` by ascending birth level (ties by id) and labels each cluster's
/// members accepted by `keep`.
fn label_points(tree: &CondensedTree, mut ids: Vec<usize>, keep: impl Fn(f64) -> bool) -> FlatClustering {
    let clusters = tree.clusters();
    ids.sort_by(|&a, &b| clusters[a].lambda_birth.total_cmp(&clusters[b].lambda_birth).then(a.cmp(&b)));
    let mut labels = vec![NOISE; tree.n()];
    let mut next = 0;
    for id in ids {
        let mut used = false;
        for &(p, lam) in &clusters[id].members {
            if keep(lam) {
                if !used {
                    next += 1;
                    used = true;
                }
                labels[p] = next;
            }
        }
    }
    FlatClustering { labels, num_clusters: next }
}

/// Flat clustering from a single density level. The root spans `[0, λ_death]`;
/// other clusters span `(λ_birth, λ_death]`; a member is present while
/// `λ <= λ_departure`.
pub fn extract_at_lambda(tree: &CondensedTree, lambda: f64) -> Result<FlatClustering> {
    if !(lambda >= 0.0) {
        return Err(invalid("lambda must be non-negative"));
    }
    let present: Vec<usize> = tree
        .clusters()
        .iter()
        .filter(|c| {
            let above_birth = c.parent.is_none() || c.lambda_birth < lambda;
            above_birth && lambda <= c.lambda_death
        })
        .map(|c| c.id)
        .collect();
    Ok(label_points(tree, present, |dep| lambda <= dep))
}

/// Clusters alive at `lambda`, as used by [`extract_at_lambda`].
pub fn clusters_at_lambda(tree: &CondensedTree, lambda: f64) -> Vec<usize> {
    tree.clusters()
        .iter()
        .filter(|c| (c.parent.is_none() || c.lambda_birth < lambda) && lambda <= c.lambda_death)
        .map(|c| c.id)
        .collect()
}

/// Checks the selection constraint: exactly one selected cluster on every path from a
/// leaf cluster to the root.
pub fn satisfies_branch_constraint(tree: &CondensedTree, selected: &[usize]) -> bool {
    let clusters = tree.clusters();
    if selected.contains(&0) {
        return false;
    }
    clusters.iter().filter(|c| c.children.is_empty()).all(|leaf| {
        let mut hits = 0;
        let mut cur = Some(leaf.id);
        while let Some(id) = cur {
            if selected.contains(&id) {
                hits += 1;
            }
            cur = clusters[id].parent;
        }
        hits == 1
    })
}

impl StabilityReport {
    /// Score of one cluster.
    pub fn score(&self, id: usize) -> Result<f64> {
        self.scores.get(id).copied().ok_or(Error::UnknownCluster(id))
    }
}
