//! Trajectories and exemplar aggregation.
//!
//! An exemplar is one significant position distilled from a run of consecutive
//! trajectory points. [`extract_stay_points`] is the default aggregation;
//! [`extract_mean_speed_exemplars`] shows a different one plugged into the same output type.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::spatial::{euclidean, Point};

/// A timestamped planar sample; `t` in seconds, `x`/`y` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl TrajectoryPoint {
    pub fn position(&self) -> Point {
        [self.x, self.y]
    }
}

/// The time-ordered samples of one moving object.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    object_id: String,
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// Requires finite values, non-negative times, and strictly increasing `t`.
    pub fn new(object_id: impl Into<String>, points: Vec<TrajectoryPoint>) -> Result<Self> {
        let object_id = object_id.into();
        let fail = |reason: String| Error::InvalidTrajectory { object_id: object_id.clone(), reason };
        for (i, p) in points.iter().enumerate() {
            if !(p.t.is_finite() && p.x.is_finite() && p.y.is_finite()) {
                return Err(fail(alloc::format!("point {i} has a non-finite value")));
            }
            if p.t < 0.0 {
                return Err(fail(alloc::format!("point {i} has negative time {}", p.t)));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(fail(alloc::format!("time does not increase at point {}", i + 1)));
        }
        Ok(Trajectory { object_id, points })
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// An aggregated position and the time span and sample count behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    pub x: f64,
    pub y: f64,
    pub source_object: String,
    pub t_start: f64,
    pub t_end: f64,
    pub support: usize,
}

impl Exemplar {
    pub fn position(&self) -> Point {
        [self.x, self.y]
    }

    fn from_window(object: &str, window: &[TrajectoryPoint]) -> Self {
        let k = window.len() as f64;
        let (sx, sy) = window.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Exemplar {
            x: sx / k,
            y: sy / k,
            source_object: object.into(),
            t_start: window[0].t,
            t_end: window[window.len() - 1].t,
            support: window.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayPointConfig {
    dist_threshold: f64,
    time_threshold: f64,
}

impl StayPointConfig {
    pub fn new(dist_threshold: f64, time_threshold: f64) -> Result<Self> {
        if !(dist_threshold > 0.0 && dist_threshold.is_finite()) {
            return Err(invalid("dist_threshold must be positive"));
        }
        if !(time_threshold > 0.0 && time_threshold.is_finite()) {
            return Err(invalid("time_threshold must be positive"));
        }
        Ok(StayPointConfig { dist_threshold, time_threshold })
    }

    pub fn dist_threshold(&self) -> f64 {
        self.dist_threshold
    }

    pub fn time_threshold(&self) -> f64 {
        self.time_threshold
    }
}

/// Anchor-scan stay point detection.
///
/// From anchor `i`, extend `j` while every point stays within `dist_threshold` of
/// `p_i`. If the window spans at least `time_threshold`, emit its mean position and
/// continue after `j`; otherwise move the anchor forward by one.
pub fn extract_stay_points(traj: &Trajectory, cfg: &StayPointConfig) -> Vec<Exemplar> {
    let pts = traj.points();
    let mut out = Vec::new();
    let mut i = 0;
    while i < pts.len() {
        let anchor = pts[i].position();
        let mut j = i;
        while j + 1 < pts.len() && euclidean(&anchor, &pts[j + 1].position()) <= cfg.dist_threshold {
            j += 1;
        }
        if pts[j].t - pts[i].t >= cfg.time_threshold {
            out.push(Exemplar::from_window(traj.object_id(), &pts[i..=j]));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Mean position of each full, non-overlapping window of `segment_len` points whose
/// average speed (path length over elapsed time) exceeds `speed_threshold`.
pub fn extract_mean_speed_exemplars(
    traj: &Trajectory,
    segment_len: usize,
    speed_threshold: f64,
) -> Result<Vec<Exemplar>> {
    if segment_len < 2 {
        return Err(invalid("segment_len must be at least 2"));
    }
    Ok(traj
        .points()
        .chunks_exact(segment_len)
        .filter(|w| {
            let path: f64 = w.windows(2).map(|p| euclidean(&p[0].position(), &p[1].position())).sum();
            path / (w[w.len() - 1].t - w[0].t) > speed_threshold
        })
        .map(|w| Exemplar::from_window(traj.object_id(), w))
        .collect())
}

/// Mean Earth radius used by [`project_equirectangular`], in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Projects `(lon, lat)` degrees to planar meters: `x = R·lon·cos(lat0)`, `y = R·lat`,
/// with `lat0` the mean latitude of the input. Returns the projected points and `lat0`.
pub fn project_equirectangular(lon_lat: &[(f64, f64)]) -> (Vec<Point>, f64) {
    if lon_lat.is_empty() {
        return (Vec::new(), 0.0);
    }
    let lat0 = lon_lat.iter().map(|p| p.1).sum::<f64>() / lon_lat.len() as f64;
    (project_with_origin(lon_lat, lat0), lat0)
}

/// Same projection with an explicit reference latitude (degrees).
pub fn project_with_origin(lon_lat: &[(f64, f64)], lat0_deg: f64) -> Vec<Point> {
    let cos0 = libm::cos(lat0_deg.to_radians());
    lon_lat
        .iter()
        .map(|&(lon, lat)| [EARTH_RADIUS_M * lon.to_radians() * cos0, EARTH_RADIUS_M * lat.to_radians()])
        .collect()
}
