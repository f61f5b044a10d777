//! Labeled synthetic stop scenes.
//!
//! Each site (building or junction) emits a Poisson number of stops. Building stops
//! are uniform over the footprint plus Gaussian jitter; junction stops are Gaussian
//! around the site. Background clutter is uniform over the padded bounding box and
//! labeled noise. Every site draws from its own generator seeded from the scene seed
//! and the site index.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{invalid, Error, Result};
use crate::spatial::{Point, PointSet};
use crate::stability::FlatClustering;
use crate::NOISE;

#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub min: Point,
    pub max: Point,
    pub expected_stops: f64,
    pub dispersion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub site: Point,
    pub expected_stops: f64,
    pub dispersion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub buildings: Vec<Building>,
    pub junctions: Vec<Junction>,
    /// Expected number of uniform background stops.
    pub clutter_rate: f64,
    pub seed: u64,
}

/// Generated stops with their causal site labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub points: PointSet,
    pub truth: FlatClustering,
    /// Truth label of each site (buildings first, then junctions); `None` if the site
    /// drew no stops.
    pub site_labels: Vec<Option<usize>>,
}

impl SceneSpec {
    fn validate(&self) -> Result<()> {
        if self.buildings.is_empty() && self.junctions.is_empty() {
            return Err(Error::EmptyScene);
        }
        let ok_rate = |r: f64| r >= 0.0 && r.is_finite();
        for (i, b) in self.buildings.iter().enumerate() {
            if !(b.min[0] < b.max[0] && b.min[1] < b.max[1]) || b.min.iter().chain(&b.max).any(|v| !v.is_finite()) {
                return Err(invalid(alloc::format!("building {i} has a degenerate footprint")));
            }
            if !ok_rate(b.expected_stops) || !(b.dispersion > 0.0 && b.dispersion.is_finite()) {
                return Err(invalid(alloc::format!("building {i} needs stops >= 0 and dispersion > 0")));
            }
        }
        for (i, j) in self.junctions.iter().enumerate() {
            if j.site.iter().any(|v| !v.is_finite()) {
                return Err(invalid(alloc::format!("junction {i} has a non-finite site")));
            }
            if !ok_rate(j.expected_stops) || !(j.dispersion > 0.0 && j.dispersion.is_finite()) {
                return Err(invalid(alloc::format!("junction {i} needs stops >= 0 and dispersion > 0")));
            }
        }
        if !ok_rate(self.clutter_rate) {
            return Err(invalid("clutter_rate must be non-negative"));
        }
        Ok(())
    }

    /// Bounding box of all sites padded by three dispersions.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut grow = |a: Point, b: Point, pad: f64| {
            for d in 0..2 {
                lo[d] = lo[d].min(a[d] - pad);
                hi[d] = hi[d].max(b[d] + pad);
            }
        };
        for b in &self.buildings {
            grow(b.min, b.max, 3.0 * b.dispersion);
        }
        for j in &self.junctions {
            grow(j.site, j.site, 3.0 * j.dispersion);
        }
        (lo, hi)
    }
}

fn site_rng(seed: u64, index: u64) -> ChaCha8Rng {
    // splitmix64 finalizer over the site index
    let mut z = index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(seed ^ z)
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// Draws a scene. Points are ordered by site, clutter last; truth labels follow site
/// order, skipping sites that drew nothing.
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let mut coords: Vec<Point> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut site_labels = Vec::new();
    let mut next_label = 0;
    let mut emit = |pts: Vec<Point>, coords: &mut Vec<Point>, labels: &mut Vec<usize>| {
        if pts.is_empty() {
            return None;
        }
        next_label += 1;
        labels.extend(core::iter::repeat_n(next_label, pts.len()));
        coords.extend(pts);
        Some(next_label)
    };

    for (i, b) in spec.buildings.iter().enumerate() {
        let mut rng = site_rng(spec.seed, i as u64);
        let count = poisson_count(&mut rng, b.expected_stops);
        let jitter = Normal::new(0.0, b.dispersion).expect("validated dispersion");
        let pts = (0..count)
            .map(|_| {
                let x = rng.random_range(b.min[0]..b.max[0]) + jitter.sample(&mut rng);
                let y = rng.random_range(b.min[1]..b.max[1]) + jitter.sample(&mut rng);
                [x, y]
            })
            .collect();
        site_labels.push(emit(pts, &mut coords, &mut labels));
    }
    for (i, j) in spec.junctions.iter().enumerate() {
        let mut rng = site_rng(spec.seed, (spec.buildings.len() + i) as u64);
        let count = poisson_count(&mut rng, j.expected_stops);
        let spread = Normal::new(0.0, j.dispersion).expect("validated dispersion");
        let pts =
            (0..count).map(|_| [j.site[0] + spread.sample(&mut rng), j.site[1] + spread.sample(&mut rng)]).collect();
        site_labels.push(emit(pts, &mut coords, &mut labels));
    }

    let (lo, hi) = spec.bounds();
    let mut rng = site_rng(spec.seed, (spec.buildings.len() + spec.junctions.len()) as u64);
    let clutter = poisson_count(&mut rng, spec.clutter_rate);
    for _ in 0..clutter {
        coords.push([rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])]);
        labels.push(NOISE);
    }

    Ok(Scene { points: PointSet::new(coords)?, truth: FlatClustering::new(labels)?, site_labels })
}
