//! Pair-counting agreement between flat clusterings.
//!
//! Noise (label 0) needs a convention because truth labelings usually have none.
//! [`NoiseMode::Singleton`] treats every noise point as its own cluster;
//! [`NoiseMode::Exclude`] drops points that are noise in either labeling.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stability::FlatClustering;
use crate::NOISE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Singleton,
    Exclude,
}

/// Co-assignment counts between two labelings.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: BTreeMap<(usize, usize), u64>,
    rows: BTreeMap<usize, u64>,
    cols: BTreeMap<usize, u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(a: &FlatClustering, b: &FlatClustering, mode: NoiseMode) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch(a.len(), b.len()));
        }
        let mut t = ContingencyTable { counts: BTreeMap::new(), rows: BTreeMap::new(), cols: BTreeMap::new(), n: 0 };
        // singleton noise ids start past every real label
        let mut fresh = a.num_clusters().max(b.num_clusters()) + 1;
        for (&la, &lb) in a.labels().iter().zip(b.labels()) {
            let (ra, rb) = match mode {
                NoiseMode::Exclude if la == NOISE || lb == NOISE => continue,
                NoiseMode::Exclude => (la, lb),
                NoiseMode::Singleton => {
                    let mut lift = |l: usize| {
                        if l == NOISE {
                            fresh += 1;
                            fresh
                        } else {
                            l
                        }
                    };
                    (lift(la), lift(lb))
                }
            };
            *t.counts.entry((ra, rb)).or_insert(0) += 1;
            *t.rows.entry(ra).or_insert(0) += 1;
            *t.cols.entry(rb).or_insert(0) += 1;
            t.n += 1;
        }
        Ok(t)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts.get(&(row, col)).copied().unwrap_or(0)
    }

    /// `(Σ C(n_ij, 2), Σ C(a_i, 2), Σ C(b_j, 2), C(n, 2))`.
    pub fn pair_sums(&self) -> (u64, u64, u64, u64) {
        let c2 = |x: u64| x * x.saturating_sub(1) / 2;
        (
            self.counts.values().map(|&v| c2(v)).sum(),
            self.rows.values().map(|&v| c2(v)).sum(),
            self.cols.values().map(|&v| c2(v)).sum(),
            c2(self.n),
        )
    }
}

/// Rand and adjusted Rand indices of one comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub ri: f64,
    pub ari: f64,
}

/// Scores two labelings under the chosen noise convention.
pub fn compare(a: &FlatClustering, b: &FlatClustering, mode: NoiseMode) -> Result<Agreement> {
    let table = ContingencyTable::new(a, b, mode)?;
    if table.n() < 2 {
        return Err(Error::TooFewPoints { required: 2, got: table.n() as usize });
    }
    let (index, sum_a, sum_b, total) = table.pair_sums();
    let agreeing = total + 2 * index - sum_a - sum_b;
    let ri = agreeing as f64 / total as f64;
    Ok(Agreement { ri, ari: ari_from_pair_sums(index, sum_a, sum_b, total) })
}

/// Hubert-Arabie ARI from pair sums. When the maximum equals the expected index the
/// score is 1 for identical partitions and 0 otherwise.
pub fn ari_from_pair_sums(index: u64, sum_a: u64, sum_b: u64, total: u64) -> f64 {
    // scaled by 2 * total so numerator and denominator stay integral
    let (index, sum_a, sum_b, total) = (index as i128, sum_a as i128, sum_b as i128, total as i128);
    let num = 2 * index * total - 2 * sum_a * sum_b;
    let den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if den == 0 {
        return if index == sum_a && index == sum_b { 1.0 } else { 0.0 };
    }
    num as f64 / den as f64
}

pub fn rand_index(a: &FlatClustering, b: &FlatClustering, mode: NoiseMode) -> Result<f64> {
    compare(a, b, mode).map(|s| s.ri)
}

pub fn adjusted_rand_index(a: &FlatClustering, b: &FlatClustering, mode: NoiseMode) -> Result<f64> {
    compare(a, b, mode).map(|s| s.ari)
}

/// Fraction of points with a non-noise label; 0 for an empty labeling.
pub fn non_noise_fraction(c: &FlatClustering) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    (c.len() - c.noise_count()) as f64 / c.len() as f64
}

/// Brute-force pair counts `(both same, same in a, same in b, pairs)` with noise as
/// singletons. Quadratic; used to cross-check the contingency table.
pub fn pair_counts_brute_force(a: &[usize], b: &[usize]) -> (u64, u64, u64, u64) {
    let same = |l: &[usize], i: usize, j: usize| l[i] != NOISE && l[i] == l[j];
    let mut out = (0, 0, 0, 0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let (sa, sb) = (same(a, i, j), same(b, i, j));
            out.0 += (sa && sb) as u64;
            out.1 += sa as u64;
            out.2 += sb as u64;
            out.3 += 1;
        }
    }
    out
}

impl ContingencyTable {
    /// Row labels in ascending order, with their totals.
    pub fn row_marginals(&self) -> Vec<(usize, u64)> {
        self.rows.iter().map(|(&k, &v)| (k, v)).collect()
    }

    pub fn col_marginals(&self) -> Vec<(usize, u64)> {
        self.cols.iter().map(|(&k, &v)| (k, v)).collect()
    }
}
