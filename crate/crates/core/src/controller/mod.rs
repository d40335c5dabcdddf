//! Drone-independent servo loop.
//!
//! The drone is modelled as first-order in its four generic controls: pitch
//! and roll tilt the thrust into a horizontal acceleration against linear
//! drag, climb rate and yaw rate are followed with a lag. Both the plant and
//! the estimator step this one model with an exact zero-order hold.

mod feedback;
mod kalman;

pub use feedback::{compute_control, ControlLimits, Gains};
pub use kalman::{KalmanError, KalmanTuning, Measurement, StateEstimate};

use crate::navigator::NavigationData;
use crate::world::{forward, right, wrap_angle, DroneState, Pose, Vec3};

/// The four generic flight controls.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlightControl {
    /// Positive tips the nose down and accelerates forward, radians.
    pub pitch: f64,
    /// Positive rolls right and accelerates left, radians.
    pub roll: f64,
    pub yaw_rate: f64,
    pub climb_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneModel {
    pub g: f64,
    /// Horizontal velocity decay, 1/s.
    pub drag: f64,
    /// Climb-rate lag, s.
    pub tau_z: f64,
    /// Yaw-rate lag, s.
    pub tau_psi: f64,
    /// Control period, s.
    pub dt: f64,
}

impl Default for DroneModel {
    fn default() -> Self {
        Self { g: 9.81, drag: 0.3, tau_z: 0.25, tau_psi: 0.15, dt: 0.01 }
    }
}

impl DroneModel {
    pub fn is_valid(&self) -> bool {
        [self.g, self.drag, self.tau_z, self.tau_psi, self.dt].iter().all(|v| *v > 0.0 && v.is_finite())
            && self.dt <= 0.02
    }

    /// The same model with drag and both lags scaled, for robustness runs.
    pub fn perturbed(&self, drag: f64, tau_z: f64, tau_psi: f64) -> Self {
        Self {
            drag: self.drag * drag,
            tau_z: self.tau_z * tau_z,
            tau_psi: self.tau_psi * tau_psi,
            ..*self
        }
    }

    /// World-frame horizontal acceleration commanded by pitch and roll at a
    /// given course, before drag.
    pub fn thrust_acceleration(&self, course: f64, control: &FlightControl) -> Vec3 {
        self.g * control.pitch.tan() * forward(course) - self.g * control.roll.tan() * right(course)
    }

    /// Advances `state` by `dt` with the controls and an extra acceleration
    /// (process noise) held constant over the step.
    pub fn propagate(&self, state: &DroneState, control: &FlightControl, disturbance: &Vec3, dt: f64) -> DroneState {
        let p = state.pose.position;
        let v = state.velocity;

        // horizontal: v' = a - drag v
        let a = self.thrust_acceleration(state.pose.course, control) + Vec3::new(disturbance.x, disturbance.y, 0.0);
        let e = (-self.drag * dt).exp();
        let phi1 = (1.0 - e) / self.drag;
        let phi2 = (dt - phi1) / self.drag;
        let vx = v.x * e + a.x * phi1;
        let vy = v.y * e + a.y * phi1;
        let px = p.x + v.x * phi1 + a.x * phi2;
        let py = p.y + v.y * phi1 + a.y * phi2;

        // vertical: v_z' = (climb - v_z)/tau_z + n_z
        let climb = control.climb_rate + self.tau_z * disturbance.z;
        let ez = (-dt / self.tau_z).exp();
        let vz = climb + (v.z - climb) * ez;
        let pz = p.z + climb * dt + (v.z - climb) * self.tau_z * (1.0 - ez);

        // course rate follows the yaw-rate command
        let epsi = (-dt / self.tau_psi).exp();
        let rate = control.yaw_rate + (state.course_rate - control.yaw_rate) * epsi;
        let course = state.pose.course
            + control.yaw_rate * dt
            + (state.course_rate - control.yaw_rate) * self.tau_psi * (1.0 - epsi);

        DroneState {
            pose: Pose {
                position: Vec3::new(px, py, pz),
                course: wrap_angle(course),
                tilt: state.pose.tilt,
            },
            velocity: Vec3::new(vx, vy, vz),
            course_rate: rate,
        }
    }
}

/// Estimator plus feedback, run at the model rate.
#[derive(Debug, Clone)]
pub struct Controller {
    pub model: DroneModel,
    pub gains: Gains,
    pub limits: ControlLimits,
    pub tuning: KalmanTuning,
    /// Measurement covariance: position (m²) on the diagonal, then course (rad²).
    pub measurement_noise: nalgebra::Matrix4<f64>,
    pub estimate: Option<StateEstimate>,
    pub last_control: FlightControl,
}

impl Controller {
    /// Controller whose filter expects measurement noise of `sigma` (meters
    /// for position, radians for course).
    pub fn new(model: DroneModel, sigma: f64) -> Self {
        Self {
            model,
            gains: Gains::default(),
            limits: ControlLimits::default(),
            tuning: KalmanTuning::default(),
            measurement_noise: kalman::measurement_covariance(sigma),
            estimate: None,
            last_control: FlightControl::default(),
        }
    }

    /// Predicts with the previous control, corrects with `measurement`, and
    /// returns the next control toward `nav`. Without a setpoint the drone is
    /// held level with zero rates.
    pub fn step(
        &mut self,
        measurement: &Measurement,
        nav: Option<&NavigationData>,
    ) -> Result<FlightControl, KalmanError> {
        let estimate = match &self.estimate {
            None => StateEstimate::from_measurement(measurement, &self.measurement_noise),
            Some(prev) => {
                let predicted = prev.predict(&self.model, &self.last_control, &self.tuning);
                predicted.update(measurement, &self.measurement_noise)?
            }
        };
        let control = match nav {
            Some(nav) => compute_control(&estimate, nav, &self.model, &self.gains, &self.limits),
            None => FlightControl::default(),
        };
        self.estimate = Some(estimate);
        self.last_control = control;
        Ok(control)
    }
}
