//! Euclidean point sets and the neighbor queries built on them.
//!
//! Everything here is brute force over the full distance matrix. [`NeighborIndex`]
//! caches sorted neighbor rows so repeated radius queries (DBSCAN sweeps) do not
//! recompute distances; it must agree exactly with the direct computation.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{invalid, Error, Result};

/// A planar position in meters.
pub type Point = [f64; 2];

/// Euclidean distance between two points.
#[inline]
pub fn euclidean(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    libm::sqrt(dx * dx + dy * dy)
}

/// A non-empty set of finite planar points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<Point>,
}

impl PointSet {
    pub fn new(coords: Vec<Point>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::TooFewPoints { required: 1, got: 0 });
        }
        if coords.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(PointSet { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// Always false; a `PointSet` holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> Result<&Point> {
        self.coords.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.len() })
    }

    /// Distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        Ok(euclidean(self.point(i)?, self.point(j)?))
    }

    #[inline]
    pub(crate) fn dist(&self, i: usize, j: usize) -> f64 {
        euclidean(&self.coords[i], &self.coords[j])
    }

    /// Distances from point `i` to every point, itself included.
    pub(crate) fn row(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.dist(i, j)).collect()
    }
}

/// Per-point radius of the smallest closed ball holding `k` points.
///
/// The point itself counts as its own first neighbor, so `k = 1` gives zero
/// everywhere and `k = 2` gives nearest-neighbor distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreDistances {
    k: usize,
    radii: Vec<f64>,
}

impl CoreDistances {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn get(&self, i: usize) -> f64 {
        self.radii[i]
    }
}

/// Computes `r_k(x_i)` for every point.
pub fn core_distances(ps: &PointSet, k: usize) -> Result<CoreDistances> {
    let n = ps.len();
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let radii = (0..n)
        .map(|i| {
            let mut row = ps.row(i);
            let (_, kth, _) = row.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect();
    Ok(CoreDistances { k, radii })
}

/// Empirical quantile of sorted data, interpolating linearly between the two
/// closest order statistics (position `(len - 1) * p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("quantile probability must lie in [0, 1]"));
    }
    if sorted.is_empty() {
        return Err(Error::TooFewPoints { required: 1, got: 0 });
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// All `n(n-1)/2` distinct-pair distances, sorted ascending.
pub fn sorted_pair_distances(ps: &PointSet) -> Vec<f64> {
    let n = ps.len();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(ps.dist(i, j));
        }
    }
    d.sort_unstable_by(f64::total_cmp);
    d
}

/// Quantiles of the pairwise distance distribution at each probability.
pub fn distance_quantiles(ps: &PointSet, probs: &[f64]) -> Result<Vec<f64>> {
    if ps.len() < 2 {
        return Err(Error::TooFewPoints { required: 2, got: ps.len() });
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(invalid(alloc::format!("probability {p} outside [0, 1]")));
    }
    let d = sorted_pair_distances(ps);
    probs.iter().map(|&p| quantile_sorted(&d, p)).collect()
}

/// Every point's neighbors sorted by distance (ties by index), for fast radius queries.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    rows: Vec<Vec<(f64, u32)>>,
}

impl NeighborIndex {
    pub fn build(ps: &PointSet) -> Self {
        let n = ps.len();
        let rows = (0..n)
            .map(|i| {
                let mut row: Vec<(f64, u32)> = (0..n).map(|j| (ps.dist(i, j), j as u32)).collect();
                row.sort_unstable_by(|a, b| match a.0.total_cmp(&b.0) {
                    Ordering::Equal => a.1.cmp(&b.1),
                    o => o,
                });
                row
            })
            .collect();
        NeighborIndex { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of points within `radius` of point `i` (closed ball, self included).
    pub fn count_within(&self, i: usize, radius: f64) -> usize {
        self.rows[i].partition_point(|&(d, _)| d <= radius)
    }

    /// Indices of the points within `radius` of point `i`, nearest first.
    pub fn within(&self, i: usize, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let m = self.count_within(i, radius);
        self.rows[i][..m].iter().map(|&(_, j)| j as usize)
    }

    /// Distance from `i` to its `k`-th nearest point, self counted first.
    pub fn kth_distance(&self, i: usize, k: usize) -> f64 {
        self.rows[i][k - 1].0
    }
}
