//! A transition planned by blending framing properties: front to
//! three-quarter back right around a standing actor, sampled once a second.

use cinedrone::framing::{place, resolve_spec, CameraIntrinsics};
use cinedrone::psl::parse;
use cinedrone::trajectory::{interpolate_properties, plan_transition, target_pose_at};
use cinedrone::world::{ActorState, DroneState, TrackerSnapshot, Vec3};

fn main() {
    let intr = CameraIntrinsics::default();
    let actor = ActorState::new("A", Vec3::zeros(), 0.0, 1.8);
    let start_props = resolve_spec(&parse("MS on A front").unwrap(), std::slice::from_ref(&actor), &intr).unwrap();
    let start = place(&[&actor], &start_props, &intr).unwrap().pose;
    let snapshot = TrackerSnapshot { timestamp: 0.0, drone: DroneState::at_rest(start), actors: vec![actor] };

    let plan = plan_transition(&snapshot, &parse("MS on A 34backright in 6s").unwrap(), 0.0).unwrap();
    println!("plan over [{}, {}] s", plan.t0, plan.tf);
    println!("{:>4} {:>9} {:>8} {:>8}   camera", "t", "profile", "vert", "size");
    for i in 0..=6 {
        let t = i as f64;
        let p = interpolate_properties(&plan, t);
        let pose = target_pose_at(&plan, t, &snapshot).unwrap();
        println!(
            "{t:>4.1} {:>9.1} {:>8.1} {:>8.3}   ({:.3}, {:.3}, {:.3}) course {:.1}",
            p.profile.to_degrees(),
            p.vertical.to_degrees(),
            p.size_distance,
            pose.position.x,
            pose.position.y,
            pose.position.z,
            pose.course.to_degrees()
        );
    }
}
