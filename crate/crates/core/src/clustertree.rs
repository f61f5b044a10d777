//! Robust Single Linkage cluster trees.
//!
//! The RSL graph `G_r` has a node for every point whose core distance is at most `r`
//! and an edge between nodes closer than `alpha * r`. Both conditions collapse into
//! a single edge weight, `max(r_k(i), r_k(j), d(i, j) / alpha)`: the pair is joined in
//! `G_r` exactly when that weight is at most `r`. The components of `G_r` at every `r`
//! are therefore those of the minimum spanning tree under this weight, restricted to
//! edges of weight `<= r`, which is how [`build_rsl_tree`] computes them.
//! [`level_set_oracle`] rebuilds `G_r` explicitly and is kept for verification.
//!
//! [`condense_tree`] turns the binary dendrogram into a cluster tree over density
//! levels `λ = 1/r`, discarding splits that shed fewer than `min_cluster_size` points.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{invalid, Error, Result};
use crate::spatial::{core_distances, CoreDistances, PointSet};
use crate::unionfind::UnionFind;

/// Scale factor and neighborhood size for Robust Single Linkage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RslParams {
    alpha: f64,
    k: usize,
}

impl RslParams {
    pub fn new(alpha: f64, k: usize) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(invalid("alpha must be a finite value >= 1"));
        }
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        Ok(RslParams { alpha, k })
    }

    /// `alpha = √2` and `k = max(2, ceil(2 ln n))` for planar data.
    pub fn with_defaults(n: usize) -> Self {
        RslParams { alpha: core::f64::consts::SQRT_2, k: default_k(n, 2) }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Smallest neighborhood size at which RSL attains its optimal rate,
/// `max(2, ceil(dim * ln n))` (natural log).
pub fn default_k(n: usize, dim: usize) -> usize {
    let bound = libm::ceil(dim as f64 * libm::log(n.max(1) as f64)) as usize;
    bound.max(2)
}

/// One agglomeration step. Node ids `0..n` are the leaves; merge `i` creates node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub radius: f64,
    pub size: usize,
}

/// Binary merge hierarchy over `n` leaves with non-decreasing merge radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Replays spanning-tree edges `(weight, i, j)`, already sorted ascending,
    /// through a union-find.
    pub(crate) fn from_sorted_edges(n: usize, edges: &[(f64, usize, usize)]) -> Self {
        let mut uf = UnionFind::new(n);
        let mut node_of: Vec<usize> = (0..n).collect();
        let mut merges = Vec::with_capacity(n.saturating_sub(1));
        for &(radius, i, j) in edges {
            let (ri, rj) = (uf.find(i), uf.find(j));
            if ri == rj {
                continue;
            }
            let (left, right) = (node_of[ri], node_of[rj]);
            let size = uf.size_of(ri) + uf.size_of(rj);
            let root = uf.union(ri, rj).expect("distinct components");
            node_of[root] = n + merges.len();
            merges.push(Merge { left, right, radius, size });
        }
        Dendrogram { n, merges }
    }

    pub fn n_leaves(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn root(&self) -> usize {
        self.n + self.merges.len() - 1
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n
    }

    pub fn merge(&self, node: usize) -> Option<&Merge> {
        node.checked_sub(self.n).and_then(|i| self.merges.get(i))
    }

    pub fn size(&self, node: usize) -> usize {
        self.merge(node).map_or(1, |m| m.size)
    }

    /// Leaves under `node`, ascending.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size(node));
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            match self.merge(v) {
                Some(m) => {
                    stack.push(m.left);
                    stack.push(m.right);
                }
                None => out.push(v),
            }
        }
        out.sort_unstable();
        out
    }

    /// Component label per leaf after applying every merge with radius `<= r`.
    /// Each component is labeled by its smallest point index.
    pub fn components_at(&self, r: f64) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n);
        let mut node_rep: Vec<usize> = (0..self.n).collect();
        for m in self.merges.iter().take_while(|m| m.radius <= r) {
            let (a, b) = (node_rep[m.left], node_rep[m.right]);
            uf.union(a, b);
            node_rep.push(a);
        }
        let mut smallest = vec![usize::MAX; self.n];
        for i in 0..self.n {
            let root = uf.find(i);
            smallest[root] = smallest[root].min(i);
        }
        (0..self.n).map(|i| smallest[uf.find(i)]).collect()
    }

    /// Components of `G_r`: points with core distance `<= r`, grouped by the merges
    /// applied up to `r`. Canonical form: members ascending, components ordered by
    /// their smallest member.
    pub fn level_set(&self, r: f64, cd: &CoreDistances) -> Vec<Vec<usize>> {
        let labels = self.components_at(r);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n];
        for i in (0..self.n).filter(|&i| cd.get(i) <= r) {
            let rep = labels[i];
            if slot[rep] == usize::MAX {
                slot[rep] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[rep]].push(i);
        }
        groups
    }
}

/// Smallest `r` at which `i` and `j` are both nodes of `G_r` and adjacent.
pub fn rsl_merge_radius(ps: &PointSet, cd: &CoreDistances, alpha: f64, i: usize, j: usize) -> Result<f64> {
    let d = ps.distance(i, j)?;
    Ok(edge_weight(cd.get(i), cd.get(j), d, alpha))
}

#[inline]
fn edge_weight(ri: f64, rj: f64, d: f64, alpha: f64) -> f64 {
    ri.max(rj).max(d / alpha)
}

fn edge_order(a: &(f64, usize, usize), b: &(f64, usize, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2))
}

/// Dense Prim's algorithm over the complete graph; returns edges `(w, min, max)`
/// sorted by weight, then by index pair.
pub(crate) fn prim_mst(n: usize, weight: impl Fn(usize, usize) -> f64) -> Vec<(f64, usize, usize)> {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = weight(current, j);
            if w < best[j] {
                best[j] = w;
                from[j] = current;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        let (a, b) = (from[next].min(next), from[next].max(next));
        edges.push((best[next], a, b));
        current = next;
    }
    edges.sort_unstable_by(edge_order);
    edges
}

/// Builds the RSL dendrogram. Merge radii are the `r` values at which components
/// of `G_r` join.
pub fn build_rsl_tree(ps: &PointSet, params: &RslParams) -> Result<Dendrogram> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, got: n });
    }
    let cd = core_distances(ps, params.k)?;
    Ok(build_rsl_tree_with(ps, &cd, params.alpha))
}

/// As [`build_rsl_tree`], reusing precomputed core distances.
pub fn build_rsl_tree_with(ps: &PointSet, cd: &CoreDistances, alpha: f64) -> Dendrogram {
    let radii = cd.radii();
    let edges = prim_mst(ps.len(), |i, j| edge_weight(radii[i], radii[j], ps.dist(i, j), alpha));
    Dendrogram::from_sorted_edges(ps.len(), &edges)
}

/// Components of an explicitly built `G_r` at one critical radius.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub radius: f64,
    pub components: Vec<Vec<usize>>,
}

/// Brute-force cluster tree: builds `G_r` from its node and edge conditions at every
/// critical radius and finds components by breadth-first search. Quartic in `n`;
/// intended for small verification inputs.
pub fn level_set_oracle(ps: &PointSet, params: &RslParams) -> Result<Vec<LevelSet>> {
    let n = ps.len();
    if params.k > n {
        return Err(Error::KTooLarge { k: params.k, n });
    }
    let coords = ps.coords();
    let dist = |i: usize, j: usize| {
        let (dx, dy) = (coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
        libm::sqrt(dx * dx + dy * dy)
    };
    let rk: Vec<f64> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| dist(i, j)).collect();
            row.sort_by(f64::total_cmp);
            row[params.k - 1]
        })
        .collect();

    let mut critical: Vec<f64> = rk.clone();
    for i in 0..n {
        for j in i + 1..n {
            critical.push(dist(i, j) / params.alpha);
        }
    }
    critical.sort_by(f64::total_cmp);
    critical.dedup();

    let mut out = Vec::with_capacity(critical.len());
    for &r in &critical {
        let present: Vec<bool> = rk.iter().map(|&v| v <= r).collect();
        // Edge rule compared as d / alpha <= r so critical radii land exactly on it.
        let adjacent = |i: usize, j: usize| dist(i, j) / params.alpha <= r;
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for s in 0..n {
            if !present[s] || seen[s] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for w in 0..n {
                    if present[w] && !seen[w] && adjacent(v, w) {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        out.push(LevelSet { radius: r, components });
    }
    Ok(out)
}

/// A cluster of the condensed tree. Lambdas are density levels (1/meters).
///
/// `members` lists every point that belonged to the cluster, with the level at which
/// it left: either the level of a split that shed it as noise, or `lambda_death` for
/// points that stayed until the cluster split into children or vanished.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: usize,
    pub parent: Option<usize>,
    pub lambda_birth: f64,
    pub lambda_death: f64,
    pub children: Vec<usize>,
    pub members: Vec<(usize, f64)>,
}

/// Hierarchy of high-density clusters. Cluster `0` is the root and every cluster's id
/// equals its index; parents precede their children.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTree {
    n: usize,
    clusters: Vec<Cluster>,
}

impl CondensedTree {
    /// Validates and wraps a cluster list.
    pub fn new(n: usize, clusters: Vec<Cluster>) -> Result<Self> {
        let bad = |m: alloc::string::String| Err(Error::MalformedTree(m));
        if clusters.is_empty() {
            return bad("no clusters".into());
        }
        for (idx, c) in clusters.iter().enumerate() {
            if c.id != idx {
                return bad(alloc::format!("cluster at position {idx} has id {}", c.id));
            }
            match c.parent {
                None if idx != 0 => return bad(alloc::format!("cluster {idx} has no parent")),
                Some(_) if idx == 0 => return bad("root has a parent".into()),
                Some(p) if p >= idx => return bad(alloc::format!("cluster {idx} precedes its parent {p}")),
                Some(p) if !clusters[p].children.contains(&idx) => {
                    return bad(alloc::format!("cluster {p} does not list child {idx}"))
                }
                Some(p) if clusters[p].lambda_death != c.lambda_birth => {
                    return bad(alloc::format!("cluster {idx} is not born at its parent's death"))
                }
                _ => {}
            }
            if !(c.lambda_birth <= c.lambda_death) || c.lambda_birth < 0.0 || !c.lambda_death.is_finite() {
                return bad(alloc::format!("cluster {idx} has an invalid lambda interval"));
            }
            if c.members.is_empty() {
                return bad(alloc::format!("cluster {idx} has no members"));
            }
            for &ch in &c.children {
                if clusters.get(ch).and_then(|x| x.parent) != Some(idx) {
                    return bad(alloc::format!("child {ch} of cluster {idx} does not point back"));
                }
            }
            let mut seen = vec![false; n];
            for &(p, lam) in &c.members {
                if p >= n || core::mem::replace(&mut seen[p], true) {
                    return bad(alloc::format!("cluster {idx} has an invalid or repeated member {p}"));
                }
                if !(c.lambda_birth <= lam && lam <= c.lambda_death) {
                    return bad(alloc::format!("member {p} of cluster {idx} departs outside its interval"));
                }
            }
            if idx == 0 && seen.iter().any(|s| !s) {
                return bad("root does not contain every point".into());
            }
            if let Some(p) = c.parent {
                let parent = &clusters[p];
                for &(x, _) in &c.members {
                    match parent.members.iter().find(|m| m.0 == x) {
                        Some(&(_, lam)) if lam == parent.lambda_death => {}
                        _ => return bad(alloc::format!("member {x} of cluster {idx} did not survive its parent")),
                    }
                }
            }
        }
        Ok(CondensedTree { n, clusters })
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, id: usize) -> Result<&Cluster> {
        self.clusters.get(id).ok_or(Error::UnknownCluster(id))
    }

    pub fn root(&self) -> &Cluster {
        &self.clusters[0]
    }

    /// Ids of `id` and all its descendants.
    pub fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            out.push(c);
            stack.extend(self.clusters[c].children.iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// Largest density level in the tree.
    pub fn max_lambda(&self) -> f64 {
        self.clusters.iter().map(|c| c.lambda_death).fold(0.0, f64::max)
    }
}

/// Condenses a dendrogram into a cluster tree over `λ = 1/r`.
///
/// A zero merge radius (coincident points) maps to twice the reciprocal of the
/// smallest positive radius in the dendrogram, or 1 when every radius is zero.
pub fn condense_tree(dend: &Dendrogram, min_cluster_size: usize) -> Result<CondensedTree> {
    let n = dend.n_leaves();
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, got: n });
    }
    if min_cluster_size < 2 {
        return Err(invalid("min_cluster_size must be at least 2"));
    }
    if min_cluster_size > n {
        return Err(invalid(alloc::format!("min_cluster_size {min_cluster_size} exceeds {n} points")));
    }
    let min_pos = dend.merges().iter().map(|m| m.radius).filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
    let cap = if min_pos.is_finite() { 2.0 / min_pos } else { 1.0 };
    let lambda = |r: f64| if r > 0.0 { 1.0 / r } else { cap };

    let root_node = dend.root();
    let root_lambda = lambda(dend.merge(root_node).expect("internal root").radius);
    let mut clusters = vec![Cluster {
        id: 0,
        parent: None,
        lambda_birth: root_lambda,
        lambda_death: root_lambda,
        children: Vec::new(),
        members: Vec::new(),
    }];

    let mut stack = vec![(root_node, 0usize)];
    while let Some((node, cid)) = stack.pop() {
        let m = *dend.merge(node).expect("clusters live on internal nodes");
        let lam = lambda(m.radius);
        let big_left = dend.size(m.left) >= min_cluster_size;
        let big_right = dend.size(m.right) >= min_cluster_size;
        match (big_left, big_right) {
            (true, true) => {
                clusters[cid].lambda_death = lam;
                clusters[cid].members.extend(dend.leaves(node).into_iter().map(|p| (p, lam)));
                for child in [m.left, m.right] {
                    let id = clusters.len();
                    clusters.push(Cluster {
                        id,
                        parent: Some(cid),
                        lambda_birth: lam,
                        lambda_death: lam,
                        children: Vec::new(),
                        members: Vec::new(),
                    });
                    clusters[cid].children.push(id);
                    stack.push((child, id));
                }
            }
            (true, false) | (false, true) => {
                let (keep, shed) = if big_left { (m.left, m.right) } else { (m.right, m.left) };
                clusters[cid].members.extend(dend.leaves(shed).into_iter().map(|p| (p, lam)));
                stack.push((keep, cid));
            }
            (false, false) => {
                clusters[cid].lambda_death = lam;
                clusters[cid].members.extend(dend.leaves(node).into_iter().map(|p| (p, lam)));
            }
        }
    }
    for c in &mut clusters {
        c.members.sort_unstable_by_key(|m| m.0);
    }
    Ok(CondensedTree { n, clusters })
}
