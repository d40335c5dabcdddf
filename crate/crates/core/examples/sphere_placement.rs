//! Single-subject placement: one medium shot from every profile keyword,
//! checked by projecting the subject back through the placed camera.

use cinedrone::framing::{project, resolve_spec, sphere_place, CameraIntrinsics};
use cinedrone::psl::{parse, Profile};
use cinedrone::world::{ActorState, Vec3};

fn main() {
    let intr = CameraIntrinsics::default();
    let actor = ActorState::new("A", Vec3::new(0.0, 0.0, 0.0), 0.0, 1.8);
    println!("actor A at the origin facing +y, aim point z = {:.2}", actor.aim_point().z);
    println!("{:<12} {:>7} {:>7} {:>7} {:>8} {:>7}  screen", "profile", "x", "y", "z", "course", "tilt");
    for profile in Profile::ALL {
        let sentence = parse(&format!("MS on A {} high screenleft", profile.keyword())).unwrap();
        let props = resolve_spec(&sentence, std::slice::from_ref(&actor), &intr).unwrap();
        let pose = sphere_place(&actor, &props, &intr).unwrap();
        let seen = project(&pose, &actor.aim_point(), &intr).point().unwrap();
        let p = pose.position;
        println!(
            "{:<12} {:>7.3} {:>7.3} {:>7.3} {:>8.1} {:>7.1}  ({:+.3}, {:+.3})",
            profile.keyword(),
            p.x,
            p.y,
            p.z,
            pose.course.to_degrees(),
            pose.tilt.to_degrees(),
            seen.x,
            seen.y
        );
    }
}
