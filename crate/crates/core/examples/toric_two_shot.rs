//! Two-subject placement on the toric surface.
//!
//! The subtended angle fixes the torus, the size picks the range to the first
//! subject; the printout checks both screen positions and the radius law.

use cinedrone::framing::{project, resolve_spec, toric_alpha, toric_place, CameraIntrinsics};
use cinedrone::psl::parse;
use cinedrone::world::{ActorState, Vec3};

fn main() {
    let intr = CameraIntrinsics::default();
    let a = ActorState::new("A", Vec3::new(0.0, -1.0, 0.0), 0.0, 1.8);
    let b = ActorState::new("B", Vec3::new(0.0, 1.0, 0.0), std::f64::consts::PI, 1.7);
    let scene = [a.clone(), b.clone()];

    for text in [
        "MS on A screenleft and B screenright",
        "MS on B screenright and A screenleft",
        "FS on A screenleft and B screencenter",
        "MLS on A screenright and B screenleft high",
    ] {
        let sentence = parse(text).unwrap();
        let props = resolve_spec(&sentence, &scene, &intr).unwrap();
        let (first, second) = if sentence.subjects[0].actor_id == "A" { (&a, &b) } else { (&b, &a) };
        let pose = toric_place(first, second, &props, &intr).unwrap();
        let alpha = toric_alpha(props.screen[0].x, props.screen[1].x, &intr).unwrap();
        let chord = (first.aim_point() - second.aim_point()).norm();
        let to_first = (first.aim_point() - pose.position).norm();

        println!("{text}");
        println!(
            "  camera ({:.3}, {:.3}, {:.3}) course {:.1} tilt {:.1}",
            pose.position.x,
            pose.position.y,
            pose.position.z,
            pose.course.to_degrees(),
            pose.tilt.to_degrees()
        );
        for (actor, want) in [first, second].iter().zip(&props.screen) {
            let seen = project(&pose, &actor.aim_point(), &intr).point().unwrap();
            println!("  {} wanted x {:+.2}, seen ({:+.4}, {:+.4})", actor.id, want.x, seen.x, seen.y);
        }
        println!(
            "  alpha {:.2} deg, torus radius {:.3} m, range to first {:.3} m (asked {:.3})",
            alpha.to_degrees(),
            chord / (2.0 * alpha.sin()),
            to_first,
            props.size_distance
        );
    }
}
