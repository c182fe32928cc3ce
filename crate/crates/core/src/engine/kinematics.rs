use super::{AvatarPose, SessionConfig};
use crate::geometry::Point3;

/// Height above the spawn point of the bouncing ball. A triangular wave of
/// the effective (unpaused) time: up over the first half period, down over
/// the second.
pub fn ball_height(elapsed_active: f64, config: &SessionConfig, paused_accum: f64) -> f64 {
    let t = (elapsed_active - paused_accum).max(0.0);
    let phase = (t / config.bounce_period).fract();
    let tri = if phase < 0.5 { 2.0 * phase } else { 2.0 - 2.0 * phase };
    config.bounce_height * tri
}

/// The ball freezes while the hand is within the pause radius.
pub fn check_proximity_pause(hand: Point3, ball_center: Point3, config: &SessionConfig) -> bool {
    hand.distance(&ball_center) <= config.hand_proximity_pause
}

/// Grasp zone spans from the ball's periphery to its centre, inclusive.
pub fn check_grasp(hand: Point3, ball_center: Point3, ball_diameter: f64) -> bool {
    hand.distance(&ball_center) <= ball_diameter / 2.0
}

/// Angular distance in the azimuth/elevation plane. Treated as flat since
/// the tolerance is a few degrees.
pub fn gaze_offset(pose: &AvatarPose, config: &SessionConfig) -> f64 {
    let d_az = pose.head_azimuth;
    let d_el = pose.head_elevation - config.gaze_center_elevation;
    d_az.hypot(d_el)
}

pub fn gaze_on_center(pose: &AvatarPose, config: &SessionConfig) -> bool {
    gaze_offset(pose, config) <= config.gaze_tolerance
}
