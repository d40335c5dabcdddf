//! Interactive console against a simulated drone. Each line typed is handed
//! to the director immediately; the simulation advances one second between
//! prompts. With stdin not a terminal, lines are read until end of input.
//!
//! ```text
//! printf 'takeoff\nMS on A front\nMS on A left in 3s\nland\n' | cargo run --example director_console
//! ```

use std::io::BufRead;

use cinedrone::simulator::{bundled, SimConfig, Simulation};

fn main() {
    let mut scenario = bundled("hover_transition").unwrap();
    scenario.commands.clear();
    scenario.duration = 3600.0;
    let mut sim = Simulation::new(scenario, SimConfig::default());
    sim.step();

    let advance = |sim: &mut Simulation, seconds: f64| {
        let n = (seconds / sim.dt()).round() as usize;
        let mut last = None;
        for _ in 0..n {
            last = Some(sim.step());
        }
        for e in sim.drain_events() {
            println!("  [{:7.2}] {:?}: {}", e.time, e.kind, e.detail);
        }
        if let Some(r) = last {
            let p = r.truth.pose.position;
            println!(
                "  t {:.2} {} battery {:.1}% at ({:.2}, {:.2}, {:.2}) course {:.0} deg",
                r.time,
                r.state,
                r.battery,
                p.x,
                p.y,
                p.z,
                r.truth.pose.course.to_degrees()
            );
        }
    };

    println!("commands: takeoff, land, record on|off, a shot sentence (e.g. MS on A 34left), or wait <seconds>");
    for line in std::io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(secs) = line.strip_prefix("wait ").and_then(|s| s.trim().parse::<f64>().ok()) {
            advance(&mut sim, secs);
            continue;
        }
        match sim.execute(line) {
            Ok(detail) => println!("ok: {detail}"),
            Err(e) => println!("error: {e}"),
        }
        advance(&mut sim, 1.0);
    }
    advance(&mut sim, 8.0);
}
