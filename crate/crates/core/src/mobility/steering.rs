use super::{MissionArea, SteeringOutput, WaypointQueue};
use crate::geometry::Vec3;
use crate::kernel::RandomStream;

/// Exploration steering: fly toward the head of the waypoint queue at
/// `speed`. Arriving within the queue's radius pops the head and tops the
/// queue up with a fresh random waypoint.
pub fn controlled_waypoint_step(
    pos: Vec3,
    queue: &mut WaypointQueue,
    speed: f64,
    weight: f64,
    area: &MissionArea,
    rng: &mut RandomStream,
) -> SteeringOutput {
    let mut guard = queue.len();
    while (queue.head() - pos).norm() <= queue.arrival_radius && guard > 0 {
        queue.advance(area, rng);
        guard -= 1;
    }
    SteeringOutput::new((queue.head() - pos).unit() * speed, weight)
}

/// Separation steering as a linear potential field.
///
/// Every neighbor closer than `min_distance` pushes along `unit(pos − nbr)`
/// with strength `(min_distance − d) / min_distance`; the sum is scaled by
/// `max_speed`. Coincident neighbors push along +x at full strength. When no
/// neighbor is inside the threshold the steering is inert (weight 0).
pub fn collision_avoidance_step(
    pos: Vec3,
    neighbor_positions: &[Vec3],
    min_distance: f64,
    max_speed: f64,
    weight: f64,
) -> SteeringOutput {
    assert!(min_distance > 0.0, "min_distance must be positive");
    let mut repulsion = Vec3::ZERO;
    let mut triggered = false;
    for &nbr in neighbor_positions {
        let offset = pos - nbr;
        let d = offset.norm();
        if d >= min_distance {
            continue;
        }
        triggered = true;
        let dir = if d > 0.0 { offset / d } else { Vec3::X };
        repulsion += dir * ((min_distance - d) / min_distance);
    }
    if triggered {
        SteeringOutput::new(repulsion * max_speed, weight)
    } else {
        SteeringOutput::inert()
    }
}

/// Attraction toward the centroid of the other swarm members.
pub fn cohesion_step(pos: Vec3, others: &[Vec3], speed: f64, weight: f64) -> SteeringOutput {
    if others.is_empty() || weight <= 0.0 {
        return SteeringOutput::inert();
    }
    let centroid = others.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / others.len() as f64;
    SteeringOutput::new((centroid - pos).unit() * speed, weight)
}

/// Velocity matching: the mean of the other members' steering vectors.
pub fn alignment_step(others_steering: &[Vec3], weight: f64) -> SteeringOutput {
    if others_steering.is_empty() || weight <= 0.0 {
        return SteeringOutput::inert();
    }
    let mean = others_steering.iter().fold(Vec3::ZERO, |acc, &v| acc + v)
        / others_steering.len() as f64;
    SteeringOutput::new(mean, weight)
}
