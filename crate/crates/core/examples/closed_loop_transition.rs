//! Flies the bundled front-to-three-quarter-back-right transition through the
//! whole loop (tracker, director, navigator, controller, plant) and reports
//! how well the framing held.

use cinedrone::framing::{world_to_manifold, CameraIntrinsics};
use cinedrone::metrics;
use cinedrone::simulator::{bundled, run_scenario};
use cinedrone::world::{ActorState, Vec3};

fn main() {
    let scenario = bundled("front_to_backright").unwrap();
    let log = run_scenario(&scenario);
    for e in &log.events {
        println!("[{:6.2}] {:?} {}", e.time, e.kind, e.detail);
    }

    let a = &scenario.actors[0];
    let actor = ActorState::new("A", Vec3::from(a.waypoints[0].position), a.waypoints[0].facing, a.height);
    let intr = CameraIntrinsics::default();
    println!("{:>5} {:>8} {:>8} {:>8}", "t", "speed", "profile", "error");
    for r in log.records.iter().step_by(100) {
        let profile = world_to_manifold(&r.truth.pose, &[&actor], &intr).unwrap().profile;
        let err = metrics::screen_error(r).map_or("-".into(), |e| format!("{e:.4}"));
        println!("{:>5.1} {:>8.3} {:>8.1} {:>8}", r.time, r.truth.velocity.norm(), profile.to_degrees(), err);
    }
    println!("\n{}", metrics::compute(&log.records));
}
