//! The controller's state estimator on its own: a coasting drone measured
//! with 5 mm / 5 mrad noise, filtered at 100 Hz.

use cinedrone::controller::{Controller, DroneModel, FlightControl, Measurement};
use cinedrone::world::{DroneState, Pose, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let sigma = 0.005;
    let model = DroneModel::default();
    let mut controller = Controller::new(model, sigma);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut truth = DroneState::at_rest(Pose::level(Vec3::new(0.0, 0.0, 1.0), 0.3));
    truth.velocity = Vec3::new(0.6, -0.2, 0.0);
    let (mut raw_sq, mut est_sq) = (0.0, 0.0);
    let steps = 1000;
    for i in 0..steps {
        let m = Measurement {
            position: truth.pose.position + Vec3::from_fn(|_, _| noise.sample(&mut rng)),
            course: truth.pose.course + noise.sample(&mut rng),
        };
        controller.step(&m, None).unwrap();
        let est = controller.estimate.as_ref().unwrap();
        raw_sq += (m.position - truth.pose.position).norm_squared();
        est_sq += (est.position() - truth.pose.position).norm_squared();
        if i % 200 == 0 {
            println!(
                "t {:.1}: true v ({:+.3}, {:+.3}), estimated v ({:+.3}, {:+.3}), smallest covariance eigenvalue {:.2e}",
                i as f64 * model.dt,
                truth.velocity.x,
                truth.velocity.y,
                est.velocity().x,
                est.velocity().y,
                est.min_eigenvalue()
            );
        }
        truth = model.propagate(&truth, &FlightControl::default(), &Vec3::zeros(), model.dt);
    }
    println!(
        "position RMSE: raw {:.2} mm, filtered {:.2} mm",
        (raw_sq / steps as f64).sqrt() * 1e3,
        (est_sq / steps as f64).sqrt() * 1e3
    );
}
