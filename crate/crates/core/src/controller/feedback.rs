use super::{DroneModel, FlightControl, StateEstimate};
use crate::navigator::NavigationData;
use crate::world::{forward, right, wrap_angle};

/// Full-state feedback gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// Horizontal position, 1/s².
    pub kp: f64,
    /// Horizontal velocity, 1/s.
    pub kv: f64,
    /// Altitude, 1/s.
    pub kz: f64,
    /// Course, 1/s.
    pub kpsi: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self { kp: 0.8, kv: 1.2, kz: 1.0, kpsi: 2.0 }
    }
}

/// Saturation of each control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLimits {
    pub max_pitch: f64,
    pub max_roll: f64,
    pub max_yaw_rate: f64,
    pub max_climb_rate: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self {
            max_pitch: 12f64.to_radians(),
            max_roll: 12f64.to_radians(),
            max_yaw_rate: 90f64.to_radians(),
            max_climb_rate: 1.0,
        }
    }
}

impl ControlLimits {
    pub fn contains(&self, c: &FlightControl) -> bool {
        c.pitch.abs() <= self.max_pitch
            && c.roll.abs() <= self.max_roll
            && c.yaw_rate.abs() <= self.max_yaw_rate
            && c.climb_rate.abs() <= self.max_climb_rate
    }
}

/// Controls that pull the estimate onto the navigator's setpoint.
///
/// Horizontally a PD law on position and velocity, plus the commanded
/// acceleration and the thrust that cancels drag at the commanded velocity, rotated into the body frame by the
/// estimated course. Altitude and course are proportional loops with the
/// commanded climb and course rates fed forward.
pub fn compute_control(
    estimate: &StateEstimate,
    nav: &NavigationData,
    model: &DroneModel,
    gains: &Gains,
    limits: &ControlLimits,
) -> FlightControl {
    let p = estimate.position();
    let v = estimate.velocity();
    let mut a = gains.kp * (nav.position - p) + gains.kv * (nav.velocity - v) + model.drag * nav.velocity + nav.acceleration;
    a.z = 0.0;
    let course = estimate.course();
    let a_forward = a.dot(&forward(course));
    let a_right = a.dot(&right(course));
    let sat = |x: f64, m: f64| x.clamp(-m, m);
    FlightControl {
        pitch: sat((a_forward / model.g).atan(), limits.max_pitch),
        roll: sat(-(a_right / model.g).atan(), limits.max_roll),
        yaw_rate: sat(gains.kpsi * wrap_angle(nav.course - course) + nav.course_rate, limits.max_yaw_rate),
        climb_rate: sat(gains.kz * (nav.position.z - p.z) + nav.velocity.z, limits.max_climb_rate),
    }
}
