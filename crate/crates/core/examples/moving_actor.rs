//! A held three-quarter-left medium shot on an actor who walks four meters.

use cinedrone::metrics::{compute, screen_error};
use cinedrone::simulator::{bundled, run_scenario};

fn main() {
    let log = run_scenario(&bundled("moving_actor").unwrap());
    for r in log.records.iter().step_by(50) {
        let s = &r.subjects;
        let Some(first) = s.first() else { continue };
        let seen = first.screen.map_or("behind".to_string(), |p| format!("({:+.3}, {:+.3})", p.x, p.y));
        println!(
            "{:5.1}  actor x {:+.2}  drone ({:+.2}, {:+.2})  screen {seen}  error {:.4}",
            r.time,
            first.aim.x,
            r.truth.pose.position.x,
            r.truth.pose.position.y,
            screen_error(r).unwrap_or(0.0)
        );
    }
    println!("\n{}", compute(&log.records));
}
