use nalgebra::{Matrix4, SMatrix, SVector};
use thiserror::Error;

use super::{DroneModel, FlightControl};
use crate::world::{wrap_angle, DroneState, Pose, Vec3};

pub type State7 = SVector<f64, 7>;
pub type Cov7 = SMatrix<f64, 7, 7>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KalmanError {
    #[error("measurement noise matrix is not positive definite")]
    NotPositiveDefinite,
}

/// A tracker fix of the drone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub position: Vec3,
    pub course: f64,
}

/// Process noise the filter assumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanTuning {
    /// Unmodelled acceleration, m/s² per axis.
    pub accel_sigma: f64,
    /// Unmodelled course rate, rad/s.
    pub course_rate_sigma: f64,
}

impl Default for KalmanTuning {
    fn default() -> Self {
        Self { accel_sigma: 0.5, course_rate_sigma: 0.1 }
    }
}

/// Diagonal measurement covariance for a tracker with noise `sigma`, floored
/// so it stays invertible.
pub(super) fn measurement_covariance(sigma: f64) -> Matrix4<f64> {
    let s2 = sigma.max(1e-4).powi(2);
    Matrix4::from_diagonal_element(s2)
}

/// Mean and covariance over position, velocity and course. The course rate
/// rides along deterministically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEstimate {
    pub mean: State7,
    pub covariance: Cov7,
    pub course_rate: f64,
}

const H_ROWS: [usize; 4] = [0, 1, 2, 6];

impl StateEstimate {
    /// Starts at the measurement with its own uncertainty and a loose
    /// velocity prior.
    pub fn from_measurement(m: &Measurement, noise: &Matrix4<f64>) -> Self {
        let mut mean = State7::zeros();
        mean.fixed_rows_mut::<3>(0).copy_from(&m.position);
        mean[6] = wrap_angle(m.course);
        let mut covariance = Cov7::from_diagonal_element(1.0);
        for (i, &row) in H_ROWS.iter().enumerate() {
            covariance[(row, row)] = noise[(i, i)];
        }
        Self { mean, covariance, course_rate: 0.0 }
    }

    pub fn position(&self) -> Vec3 {
        self.mean.fixed_rows::<3>(0).into_owned()
    }

    pub fn velocity(&self) -> Vec3 {
        self.mean.fixed_rows::<3>(3).into_owned()
    }

    pub fn course(&self) -> f64 {
        self.mean[6]
    }

    pub fn as_drone_state(&self) -> DroneState {
        DroneState {
            pose: Pose { position: self.position(), course: self.course(), tilt: 0.0 },
            velocity: self.velocity(),
            course_rate: self.course_rate,
        }
    }

    /// Smallest covariance eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.covariance.symmetric_eigenvalues().min()
    }

    /// One model step: the mean follows the shared dynamics; the covariance
    /// goes through the transition matrix at the current course plus
    /// discretized white-acceleration noise.
    pub fn predict(&self, model: &DroneModel, control: &FlightControl, tuning: &KalmanTuning) -> Self {
        let dt = model.dt;
        let next = model.propagate(&self.as_drone_state(), control, &Vec3::zeros(), dt);

        let e = (-model.drag * dt).exp();
        let ez = (-dt / model.tau_z).exp();
        let mut f = Cov7::identity();
        for axis in 0..2 {
            f[(axis, axis + 3)] = (1.0 - e) / model.drag;
            f[(axis + 3, axis + 3)] = e;
        }
        f[(2, 5)] = model.tau_z * (1.0 - ez);
        f[(5, 5)] = ez;

        let qa = tuning.accel_sigma.powi(2);
        let mut q = Cov7::zeros();
        for axis in 0..3 {
            q[(axis, axis)] = qa * dt.powi(4) / 4.0;
            q[(axis, axis + 3)] = qa * dt.powi(3) / 2.0;
            q[(axis + 3, axis)] = qa * dt.powi(3) / 2.0;
            q[(axis + 3, axis + 3)] = qa * dt * dt;
        }
        q[(6, 6)] = (tuning.course_rate_sigma * dt).powi(2);

        let mut mean = State7::zeros();
        mean.fixed_rows_mut::<3>(0).copy_from(&next.pose.position);
        mean.fixed_rows_mut::<3>(3).copy_from(&next.velocity);
        mean[6] = next.pose.course;
        let p = f * self.covariance * f.transpose() + q;
        Self {
            mean,
            covariance: (p + p.transpose()) * 0.5,
            course_rate: next.course_rate,
        }
    }

    /// Measurement update on position and course (Joseph form).
    pub fn update(&self, m: &Measurement, noise: &Matrix4<f64>) -> Result<Self, KalmanError> {
        if noise.cholesky().is_none() || (noise - noise.transpose()).abs().max() > 1e-12 {
            return Err(KalmanError::NotPositiveDefinite);
        }
        let mut h = SMatrix::<f64, 4, 7>::zeros();
        for (i, &row) in H_ROWS.iter().enumerate() {
            h[(i, row)] = 1.0;
        }
        let predicted = h * self.mean;
        let mut innovation = SVector::<f64, 4>::new(
            m.position.x - predicted[0],
            m.position.y - predicted[1],
            m.position.z - predicted[2],
            0.0,
        );
        innovation[3] = wrap_angle(m.course - predicted[3]);

        let s = h * self.covariance * h.transpose() + noise;
        let s_inv = s.try_inverse().ok_or(KalmanError::NotPositiveDefinite)?;
        let k = self.covariance * h.transpose() * s_inv;
        let mut mean = self.mean + k * innovation;
        mean[6] = wrap_angle(mean[6]);
        let a = Cov7::identity() - k * h;
        let p = a * self.covariance * a.transpose() + k * noise * k.transpose();
        Ok(Self {
            mean,
            covariance: (p + p.transpose()) * 0.5,
            course_rate: self.course_rate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn start() -> StateEstimate {
        let m = Measurement { position: Vec3::new(0.0, 0.0, 1.0), course: 0.0 };
        StateEstimate::from_measurement(&m, &measurement_covariance(0.005))
    }

    #[test]
    fn zero_control_only_grows_covariance() {
        let model = DroneModel::default();
        // a settled filter: drag barely shrinks the small velocity variance
        let e = StateEstimate { covariance: Cov7::from_diagonal_element(1e-8), ..start() };
        let next = e.predict(&model, &FlightControl::default(), &KalmanTuning::default());
        assert_eq!(next.mean, e.mean);
        assert!(next.covariance.trace() > e.covariance.trace());
        assert!((next.covariance - e.covariance).symmetric_eigenvalues().min() >= -1e-15);
    }

    #[test]
    fn zero_innovation_shrinks_covariance() {
        let model = DroneModel::default();
        let e = start().predict(&model, &FlightControl::default(), &KalmanTuning::default());
        let m = Measurement { position: e.position(), course: e.course() };
        let next = e.update(&m, &measurement_covariance(0.005)).unwrap();
        assert_eq!(next.mean, e.mean);
        assert!(next.covariance.trace() < e.covariance.trace());
    }

    #[test]
    fn uninformative_measurement_changes_nothing() {
        let e = start();
        let m = Measurement { position: Vec3::new(5.0, -3.0, 2.0), course: 2.0 };
        let next = e.update(&m, &Matrix4::from_diagonal_element(1e12)).unwrap();
        assert!((next.mean - e.mean).norm() < 1e-8);
    }

    #[test]
    fn rejects_bad_noise() {
        let e = start();
        let m = Measurement { position: Vec3::zeros(), course: 0.0 };
        assert_eq!(e.update(&m, &Matrix4::zeros()), Err(KalmanError::NotPositiveDefinite));
        let mut skew = Matrix4::identity();
        skew[(0, 1)] = 0.5;
        assert_eq!(e.update(&m, &skew), Err(KalmanError::NotPositiveDefinite));
    }

    #[test]
    fn course_innovation_wraps() {
        let noise = measurement_covariance(0.005);
        let near_pi = Measurement { position: Vec3::zeros(), course: 3.1 };
        let e = StateEstimate::from_measurement(&near_pi, &noise);
        let across = Measurement { position: Vec3::zeros(), course: -3.1 };
        let next = e.update(&across, &noise).unwrap();
        // the estimate moves through ±π, not back through 0
        assert!(next.course().abs() > 3.0);
    }

    #[test]
    fn filtering_beats_raw_measurements() {
        let model = DroneModel::default();
        let tuning = KalmanTuning::default();
        let sigma = 0.005;
        let noise = measurement_covariance(sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = Normal::new(0.0, sigma).unwrap();
        let control = FlightControl { pitch: 0.02, roll: -0.01, yaw_rate: 0.1, climb_rate: 0.05 };
        let mut truth = DroneState::at_rest(Pose::level(Vec3::new(0.0, 0.0, 1.0), 0.0));
        let mut est = start();
        let (mut raw_sq, mut est_sq) = (0.0, 0.0);
        for i in 0..1000 {
            truth = model.propagate(&truth, &control, &Vec3::zeros(), model.dt);
            let noise_v = Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng));
            let m = Measurement { position: truth.pose.position + noise_v, course: truth.pose.course + n.sample(&mut rng) };
            est = est.predict(&model, &control, &tuning).update(&m, &noise).unwrap();
            if i >= 100 {
                raw_sq += noise_v.norm_squared();
                est_sq += (est.position() - truth.pose.position).norm_squared();
            }
            assert!(est.min_eigenvalue() >= -1e-9);
            assert!((est.covariance - est.covariance.transpose()).abs().max() == 0.0);
        }
        assert!(est_sq < raw_sq, "{est_sq} vs {raw_sq}");
    }
}
