//! Shared geometric and kinematic types.
//!
//! World frame: x east, y north, z up, meters. A *course* is a rotation about
//! +z measured from +y, counter-clockwise seen from above, wrapped to
//! (−π, π]. At course `c` the forward axis is `(−sin c, cos c, 0)` and the
//! right axis is `(cos c, sin c, 0)`.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::Vector3;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Largest camera tilt the simulated gimbal can reach.
pub const MAX_TILT: f64 = FRAC_PI_4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("heading is undefined between vertically stacked points")]
    UndefinedHeading,
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Unit forward vector for a course.
pub fn forward(course: f64) -> Vec3 {
    Vec3::new(-course.sin(), course.cos(), 0.0)
}

/// Unit right vector for a course.
pub fn right(course: f64) -> Vec3 {
    Vec3::new(course.cos(), course.sin(), 0.0)
}

/// Position plus yaw-only orientation, with a camera tilt carried alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub course: f64,
    /// Camera pitch, positive looking down.
    pub tilt: f64,
}

impl Pose {
    /// Builds a pose, wrapping the course and clamping the tilt to the
    /// gimbal range.
    pub fn new(position: Vec3, course: f64, tilt: f64) -> Self {
        Self {
            position,
            course: wrap_angle(course),
            tilt: tilt.clamp(-MAX_TILT, MAX_TILT),
        }
    }

    pub fn level(position: Vec3, course: f64) -> Self {
        Self::new(position, course, 0.0)
    }

    /// Optical axis of the camera (course and tilt applied).
    pub fn view_forward(&self) -> Vec3 {
        let (s, c) = self.course.sin_cos();
        let (st, ct) = self.tilt.sin_cos();
        Vec3::new(-s * ct, c * ct, -st)
    }

    pub fn view_right(&self) -> Vec3 {
        right(self.course)
    }

    pub fn view_up(&self) -> Vec3 {
        self.view_right().cross(&self.view_forward())
    }
}

/// Rotates `local` (x right, y forward, z up) by the pose course, then
/// translates. Tilt is a camera-view property and is not applied.
pub fn transform_to_world(pose: &Pose, local: &Vec3) -> Vec3 {
    let (s, c) = pose.course.sin_cos();
    pose.position + Vec3::new(c * local.x - s * local.y, s * local.x + c * local.y, local.z)
}

/// Inverse of [`transform_to_world`].
pub fn inverse_transform(pose: &Pose, world: &Vec3) -> Vec3 {
    let d = world - pose.position;
    let (s, c) = pose.course.sin_cos();
    Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
}

/// Course that points the forward axis from `from` toward `to`.
pub fn heading_between(from: &Vec3, to: &Vec3) -> Result<f64, WorldError> {
    let d = to - from;
    let horizontal = d.x.hypot(d.y);
    if horizontal <= 1e-12 * (1.0 + d.z.abs()) {
        return Err(WorldError::UndefinedHeading);
    }
    Ok(wrap_angle((-d.x).atan2(d.y)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorState {
    pub id: String,
    /// Feet position; z is ground level.
    pub position: Vec3,
    pub facing: f64,
    pub height: f64,
}

impl ActorState {
    pub fn new(id: impl Into<String>, position: Vec3, facing: f64, height: f64) -> Self {
        Self {
            id: id.into(),
            position,
            facing: wrap_angle(facing),
            height,
        }
    }

    /// Point the camera frames: three quarters of the actor height above the feet.
    pub fn aim_point(&self) -> Vec3 {
        self.position + Vec3::new(0.0, 0.0, 0.75 * self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneState {
    pub pose: Pose,
    pub velocity: Vec3,
    pub course_rate: f64,
}

impl DroneState {
    pub fn at_rest(pose: Pose) -> Self {
        Self {
            pose,
            velocity: Vec3::zeros(),
            course_rate: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.pose.course.is_finite()
            && self.course_rate.is_finite()
    }
}

/// Timestamped poses of the drone and actors: the only view of the world the
/// planning layers get.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerSnapshot {
    pub timestamp: f64,
    pub drone: DroneState,
    pub actors: Vec<ActorState>,
}

impl TrackerSnapshot {
    pub fn actor(&self, id: &str) -> Option<&ActorState> {
        self.actors.iter().find(|a| a.id == id)
    }
}
