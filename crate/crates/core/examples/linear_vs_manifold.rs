//! Why transitions interpolate framings rather than positions.
//!
//! Two actors face each other; the camera moves from behind A's shoulder to
//! behind B's. Blending camera poses directly swings the view past both
//! actors, while blending framing properties keeps them in frame throughout.

use std::f64::consts::PI;

use cinedrone::framing::{place, project, resolve_spec, CameraIntrinsics};
use cinedrone::psl::parse;
use cinedrone::trajectory::{linear_pose_between, plan_transition, target_pose_at};
use cinedrone::world::{ActorState, DroneState, Pose, TrackerSnapshot, Vec3};

fn main() {
    let intr = CameraIntrinsics::default();
    let actors = vec![
        ActorState::new("A", Vec3::new(0.0, -1.0, 0.0), 0.0, 1.8),
        ActorState::new("B", Vec3::new(0.0, 1.0, 0.0), PI, 1.8),
    ];
    let from = parse("MS on A screenleft and B screenright").unwrap();
    let to = parse("MS on B screenright and A screenleft").unwrap();
    let props = resolve_spec(&from, &actors, &intr).unwrap();
    let start = place(&[&actors[0], &actors[1]], &props, &intr).unwrap().pose;
    let snapshot = TrackerSnapshot { timestamp: 0.0, drone: DroneState::at_rest(start), actors: actors.clone() };
    let plan = plan_transition(&snapshot, &to, 0.0).unwrap();
    let end = target_pose_at(&plan, plan.tf, &snapshot).unwrap();

    let describe = |pose: &Pose| -> String {
        actors
            .iter()
            .map(|a| match project(pose, &a.aim_point(), &intr).point() {
                Some(p) if p.x.abs() <= 1.0 && p.y.abs() <= 1.0 => format!("{} ({:+.2},{:+.2})", a.id, p.x, p.y),
                Some(_) => format!("{} out of frame", a.id),
                None => format!("{} behind", a.id),
            })
            .collect::<Vec<_>>()
            .join(", ")
    };

    println!("{:>5}  {:<40} framing interpolation", "s", "linear baseline");
    for i in 0..=10 {
        let s = i as f64 / 10.0;
        let linear = linear_pose_between(&start, &end, s);
        let framed = target_pose_at(&plan, plan.t0 + s * (plan.tf - plan.t0), &snapshot).unwrap();
        println!("{s:>5.1}  {:<40} {}", describe(&linear), describe(&framed));
    }
}
