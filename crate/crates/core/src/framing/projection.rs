use super::{CameraIntrinsics, ScreenPoint};
use crate::world::{Pose, Vec3};

/// Result of projecting a world point through a camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// In front of the camera; coordinates may fall outside the frame.
    Front(ScreenPoint),
    Behind,
}

impl Projection {
    pub fn point(&self) -> Option<ScreenPoint> {
        match self {
            Projection::Front(p) => Some(*p),
            Projection::Behind => None,
        }
    }

    /// In front of the camera and inside the image rectangle.
    pub fn in_frame(&self) -> bool {
        matches!(self, Projection::Front(p) if p.x.abs() <= 1.0 && p.y.abs() <= 1.0)
    }
}

/// Pinhole projection with the pose course and tilt applied.
pub fn project(camera: &Pose, point: &Vec3, intrinsics: &CameraIntrinsics) -> Projection {
    let w = point - camera.position;
    let forward = w.dot(&camera.view_forward());
    if forward <= 0.0 {
        return Projection::Behind;
    }
    let x = w.dot(&camera.view_right()) / forward / intrinsics.tan_half_hfov();
    let y = w.dot(&camera.view_up()) / forward / intrinsics.tan_half_vfov();
    Projection::Front(ScreenPoint::new(x, y))
}

/// Screen position clamped to the frame; points behind the camera are pushed
/// to the side edge they lie toward.
pub(crate) fn clamped_screen(camera: &Pose, point: &Vec3, intrinsics: &CameraIntrinsics) -> ScreenPoint {
    match project(camera, point, intrinsics) {
        Projection::Front(p) => ScreenPoint::new(p.x.clamp(-1.0, 1.0), p.y.clamp(-1.0, 1.0)),
        Projection::Behind => {
            let side = (point - camera.position).dot(&camera.view_right());
            ScreenPoint::new(if side >= 0.0 { 1.0 } else { -1.0 }, 0.0)
        }
    }
}
