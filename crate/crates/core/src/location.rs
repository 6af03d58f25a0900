//! Per-node location service and trajectory prediction.
//!
//! Each node keeps the last `N_h` mobility entries of every node it has heard
//! about (itself included). Predictions walk the announced waypoint path at
//! the speed estimated from the position history, or extrapolate along the
//! steering vector when no waypoints are known.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::error::LocationError;
use crate::geometry::Vec3;
use crate::kernel::RandomStream;
use crate::routing::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityEntry {
    pub node: NodeId,
    /// Seconds.
    pub timestamp: f64,
    /// Measured position.
    pub position: Vec3,
    /// Current steering vector (m/s).
    pub steering: Vec3,
    /// Planned trajectory, next waypoint first.
    pub waypoints: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionConfig {
    /// Prediction width in update intervals.
    pub width: u32,
    /// Mobility update interval in seconds.
    pub update_interval: f64,
    /// Maximum positioning error in meters.
    pub max_position_error: f64,
}

impl PredictionConfig {
    pub fn horizon(&self) -> f64 {
        f64::from(self.width) * self.update_interval
    }
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig {
            width: 15,
            update_interval: 0.25,
            max_position_error: 0.0,
        }
    }
}

/// Ring buffers of the most recent mobility entries per node.
#[derive(Debug, Clone)]
pub struct LocationTable {
    history_size: usize,
    entries: BTreeMap<NodeId, VecDeque<MobilityEntry>>,
}

impl LocationTable {
    pub fn new(history_size: usize) -> Self {
        assert!(history_size > 0, "history size must be positive");
        LocationTable {
            history_size,
            entries: BTreeMap::new(),
        }
    }

    pub fn history_size(&self) -> usize {
        self.history_size
    }

    /// Appends `entry`, evicting the oldest record beyond `N_h`. Entries not
    /// newer than the newest stored one are discarded; returns whether the
    /// entry was kept.
    pub fn record_update(&mut self, entry: MobilityEntry) -> bool {
        let buf = self.entries.entry(entry.node).or_default();
        if buf.back().is_some_and(|newest| entry.timestamp <= newest.timestamp) {
            return false;
        }
        if buf.len() == self.history_size {
            buf.pop_front();
        }
        buf.push_back(entry);
        true
    }

    pub fn history(&self, node: NodeId) -> Option<&VecDeque<MobilityEntry>> {
        self.entries.get(&node)
    }

    pub fn newest(&self, node: NodeId) -> Option<&MobilityEntry> {
        self.entries.get(&node).and_then(|b| b.back())
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.entries.contains_key(&node)
    }

    pub fn predict(&self, node: NodeId, horizon: f64) -> Result<Vec3, LocationError> {
        let history = self
            .entries
            .get(&node)
            .ok_or(LocationError::UnknownNode(node))?;
        predict_position(history.iter(), horizon).ok_or(LocationError::UnknownNode(node))
    }
}

/// Measured position: `true_pos` offset by a uniformly oriented vector of
/// uniform length in `[0, e_max]`.
pub fn apply_gnss_noise(true_pos: Vec3, e_max: f64, rng: &mut RandomStream) -> Vec3 {
    assert!(e_max >= 0.0, "maximum positioning error must be non-negative");
    if e_max == 0.0 {
        return true_pos;
    }
    true_pos + random_unit_vector(rng) * rng.uniform(0.0, e_max)
}

fn random_unit_vector(rng: &mut RandomStream) -> Vec3 {
    // Archimedes: z uniform in [-1, 1] and azimuth uniform gives a uniform
    // point on the sphere.
    let z: f64 = rng.rng().random_range(-1.0..=1.0);
    let phi = rng.uniform(0.0, std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Mean speed over consecutive history pairs; a single entry falls back to
/// the magnitude of its steering vector.
pub fn estimate_speed<'a>(history: impl IntoIterator<Item = &'a MobilityEntry>) -> Option<f64> {
    let mut prev: Option<&MobilityEntry> = None;
    let mut newest = None;
    let mut sum = 0.0;
    let mut pairs = 0u32;
    for e in history {
        if let Some(p) = prev {
            let dt = e.timestamp - p.timestamp;
            if dt > 0.0 {
                sum += (e.position - p.position).norm() / dt;
                pairs += 1;
            }
        }
        prev = Some(e);
        newest = Some(e);
    }
    let newest = newest?;
    Some(if pairs > 0 {
        sum / f64::from(pairs)
    } else {
        newest.steering.norm()
    })
}

/// Position `horizon` seconds after the newest entry of `history`, or `None`
/// for an empty history.
pub fn predict_position<'a, I>(history: I, horizon: f64) -> Option<Vec3>
where
    I: IntoIterator<Item = &'a MobilityEntry>,
    I::IntoIter: Clone,
{
    assert!(horizon >= 0.0, "prediction horizon must be non-negative");
    let iter = history.into_iter();
    let newest = iter.clone().last()?;
    if horizon == 0.0 {
        return Some(newest.position);
    }
    let speed = estimate_speed(iter)?;
    let travel = speed * horizon;
    if newest.waypoints.is_empty() {
        return Some(newest.position + newest.steering.unit() * travel);
    }
    Some(advance_along_path(newest.position, &newest.waypoints, travel))
}

/// Walks `distance` meters along the polyline `start → waypoints…`, stopping
/// at the final waypoint.
pub fn advance_along_path(start: Vec3, waypoints: &[Vec3], distance: f64) -> Vec3 {
    let mut here = start;
    let mut left = distance;
    for &wp in waypoints {
        let leg = wp - here;
        let len = leg.norm();
        if left <= len {
            if len == 0.0 {
                return here;
            }
            return here + leg * (left / len);
        }
        left -= len;
        here = wp;
    }
    here
}

/// Distance between the predicted positions of `a` and `b` after `horizon`.
pub fn predicted_distance(
    table: &LocationTable,
    a: NodeId,
    b: NodeId,
    horizon: f64,
) -> Result<f64, LocationError> {
    let pa = table.predict(a, horizon)?;
    if a == b {
        return Ok(0.0);
    }
    let pb = table.predict(b, horizon)?;
    Ok(pa.distance(pb))
}
