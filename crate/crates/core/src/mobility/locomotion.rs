use super::MissionArea;
use crate::geometry::Vec3;

/// Single UAV locomotion class: clamps the commanded velocity to `v_max`,
/// integrates over `dt` and keeps the result inside the mission area.
pub fn locomotion_apply(
    pos: Vec3,
    desired_velocity: Vec3,
    dt: f64,
    v_max: f64,
    area: &MissionArea,
) -> Vec3 {
    assert!(dt > 0.0 && v_max > 0.0, "dt and v_max must be positive");
    let v = desired_velocity.clamp_norm(v_max);
    area.clamp(pos + v * dt)
}
