//! Framing properties: from a parsed shot sentence to exact values, and
//! between those values and camera poses.
//!
//! A single subject is framed from a sphere centred on its aim point; a pair
//! of subjects is framed from the toric surface on which the two aim points
//! subtend a fixed angle.

mod placement;
mod projection;
mod resolve;

use nalgebra::Vector2;
use thiserror::Error;

pub use placement::{
    frame_view, place, size_for_arc_angle, sphere_place, toric_alpha, toric_place, world_to_manifold,
    arc_angle_for_size, Placement,
};
pub use projection::{project, Projection};
pub use resolve::{
    frame_height, profile_angle, resolve_spec, resolve_spec_detailed, screen_x, size_to_distance,
    vertical_angle, DiscardedConstraint, Resolution,
};

/// Normalized screen coordinates in [−1, 1]², +x right, +y up.
pub type ScreenPoint = Vector2<f64>;

/// Largest vertical angle a framing may request, either sign.
pub const MAX_VERTICAL: f64 = std::f64::consts::FRAC_PI_3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FramingError {
    #[error("unknown actor `{0}`")]
    UnknownActor(String),
    #[error("actor `{0}` appears twice in one shot")]
    DuplicateSubject(String),
    #[error("subjects share the same screen position; no toric surface exists")]
    DegenerateToric,
    #[error("subjects' aim points coincide")]
    CoincidentActors,
    #[error("camera coincides with an aim point")]
    CameraAtAimPoint,
    #[error("expected {expected} subject(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid framing properties: {0}")]
    Invalid(&'static str),
}

/// Pinhole camera parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// Vertical field of view, radians.
    pub vfov: f64,
    /// Width over height.
    pub aspect: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            vfov: 60f64.to_radians(),
            aspect: 16.0 / 9.0,
        }
    }
}

impl CameraIntrinsics {
    pub fn tan_half_vfov(&self) -> f64 {
        (self.vfov / 2.0).tan()
    }

    pub fn tan_half_hfov(&self) -> f64 {
        self.aspect * self.tan_half_vfov()
    }

    pub fn is_valid(&self) -> bool {
        self.vfov > 0.0 && self.vfov < std::f64::consts::PI && self.aspect > 0.0
    }
}

/// The interpolated property set: screen positions, vertical angle, profile
/// angle and size.
///
/// For a single subject, `profile` is the camera azimuth around the subject
/// relative to its facing (0 front, positive toward the subject's left) and
/// `size_distance` is the camera range to the aim point. For two subjects the
/// camera position is fixed by the screen positions, the vertical angle and
/// the size, where `size_distance` measures the range to the first subject;
/// `profile` then only describes the azimuth around the first subject.
#[derive(Debug, Clone, PartialEq)]
pub struct FramingProperties {
    /// One entry per subject, in subject order.
    pub screen: Vec<ScreenPoint>,
    pub vertical: f64,
    pub profile: f64,
    pub size_distance: f64,
}

impl FramingProperties {
    pub fn subject_count(&self) -> usize {
        self.screen.len()
    }

    pub fn validate(&self) -> Result<(), FramingError> {
        if !(1..=2).contains(&self.screen.len()) {
            return Err(FramingError::Invalid("one or two screen positions required"));
        }
        if self
            .screen
            .iter()
            .any(|s| !(s.x.abs() <= 1.0 && s.y.abs() <= 1.0))
        {
            return Err(FramingError::Invalid("screen position outside [-1, 1]"));
        }
        if !(self.vertical.abs() <= MAX_VERTICAL + 1e-12) {
            return Err(FramingError::Invalid("vertical angle outside [-60°, 60°]"));
        }
        if !(self.size_distance > 0.0 && self.size_distance.is_finite()) || !self.profile.is_finite() {
            return Err(FramingError::Invalid("size distance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Sphere,
    Toric,
}

/// Coordinates of a camera on its framing surface.
///
/// Sphere: `u` is the world course from the aim point to the camera, `v` the
/// elevation, `scale` the radius in meters. Toric: `u` is the angle at the
/// first subject between the second subject and the camera, `v` the rotation
/// of the generating arc about the subject axis, `scale` the subtended angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldPoint {
    pub kind: ManifoldKind,
    pub u: f64,
    pub v: f64,
    pub scale: f64,
}
