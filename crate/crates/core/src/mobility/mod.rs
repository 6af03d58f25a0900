//! Three-layer swarm mobility: steerings produce desired velocities, their
//! weighted mean is the node's steering vector, and locomotion turns that
//! into physically feasible movement.

mod locomotion;
mod steering;
mod trace;

use std::collections::VecDeque;

pub use locomotion::locomotion_apply;
pub use steering::{
    alignment_step, cohesion_step, collision_avoidance_step, controlled_waypoint_step,
};
pub use trace::{load_trace, parse_trace, write_trace, NodeTrace, Trace};

use crate::error::MobilityError;
use crate::geometry::Vec3;
use crate::kernel::RandomStream;

/// 50 km/h in m/s.
pub const REFERENCE_SPEED: f64 = 50.0 / 3.6;

/// Axis-aligned box with one corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionArea {
    extents: Vec3,
}

impl MissionArea {
    /// Returns `None` unless every extent is strictly positive and finite.
    pub fn new(extents: Vec3) -> Option<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        (ok(extents.x) && ok(extents.y) && ok(extents.z)).then_some(MissionArea { extents })
    }

    pub fn extents(&self) -> Vec3 {
        self.extents
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0.0..=self.extents.x).contains(&p.x)
            && (0.0..=self.extents.y).contains(&p.y)
            && (0.0..=self.extents.z).contains(&p.z)
    }

    pub fn clamp(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(0.0, self.extents.x),
            p.y.clamp(0.0, self.extents.y),
            p.z.clamp(0.0, self.extents.z),
        )
    }

    pub fn random_point(&self, rng: &mut RandomStream) -> Vec3 {
        Vec3::new(
            rng.uniform(0.0, self.extents.x),
            rng.uniform(0.0, self.extents.y),
            rng.uniform(0.0, self.extents.z),
        )
    }
}

impl Default for MissionArea {
    fn default() -> Self {
        MissionArea {
            extents: Vec3::new(500.0, 500.0, 250.0),
        }
    }
}

/// Desired velocity (m/s) of one steering together with its weight.
/// Weight zero marks the steering as inert for this tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringOutput {
    pub desired: Vec3,
    pub weight: f64,
}

impl SteeringOutput {
    pub fn new(desired: Vec3, weight: f64) -> Self {
        debug_assert!(weight >= 0.0);
        SteeringOutput { desired, weight }
    }

    pub fn inert() -> Self {
        SteeringOutput {
            desired: Vec3::ZERO,
            weight: 0.0,
        }
    }
}

/// Weighted mean `Σ wᵢ·vᵢ / Σ wᵢ` of the steering outputs.
pub fn combine_steerings(outputs: &[SteeringOutput]) -> Result<Vec3, MobilityError> {
    let mut total = 0.0;
    let mut acc = Vec3::ZERO;
    for o in outputs.iter().filter(|o| o.weight > 0.0) {
        acc += o.desired * o.weight;
        total += o.weight;
    }
    if total > 0.0 {
        Ok(acc / total)
    } else {
        Err(MobilityError::NoActiveSteering)
    }
}

/// Future waypoints a node has committed to. The queue is kept at its
/// look-ahead length by drawing a fresh uniform waypoint on every arrival.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointQueue {
    targets: VecDeque<Vec3>,
    look_ahead: usize,
    pub arrival_radius: f64,
}

impl WaypointQueue {
    pub const DEFAULT_LOOK_AHEAD: usize = 3;
    pub const DEFAULT_ARRIVAL_RADIUS: f64 = 5.0;

    pub fn random(
        area: &MissionArea,
        look_ahead: usize,
        arrival_radius: f64,
        rng: &mut RandomStream,
    ) -> Self {
        assert!(look_ahead > 0, "waypoint look-ahead must be positive");
        let targets = (0..look_ahead).map(|_| area.random_point(rng)).collect();
        WaypointQueue {
            targets,
            look_ahead,
            arrival_radius,
        }
    }

    /// Builds a queue from explicit targets; look-ahead equals their count.
    pub fn from_targets(targets: Vec<Vec3>, arrival_radius: f64) -> Self {
        assert!(!targets.is_empty(), "waypoint queue must not be empty");
        WaypointQueue {
            look_ahead: targets.len(),
            targets: targets.into(),
            arrival_radius,
        }
    }

    pub fn head(&self) -> Vec3 {
        self.targets[0]
    }

    pub fn targets(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.targets.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub(crate) fn advance(&mut self, area: &MissionArea, rng: &mut RandomStream) {
        self.targets.pop_front();
        while self.targets.len() < self.look_ahead {
            self.targets.push_back(area.random_point(rng));
        }
    }
}
