//! Runs a scenario (a bundled name or a TOML path) and writes its run log as
//! CSV and its metrics as JSON next to each other.
//!
//! ```text
//! cargo run --example scenario_export -- two_actors_diverging out/
//! ```

use std::path::PathBuf;

use cinedrone::metrics::compute;
use cinedrone::simulator::{bundled, run_scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "single_actor_orbit".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let scenario = match bundled(&which) {
        Some(s) => s,
        None => Scenario::load(&which)?,
    };
    scenario.check_commands()?;
    let log = run_scenario(&scenario);
    let report = compute(&log.records);

    let stem = PathBuf::from(&which).file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    std::fs::create_dir_all(&out)?;
    let csv = out.join(format!("{stem}.csv"));
    let json = out.join(format!("{stem}.metrics.json"));
    std::fs::write(&csv, log.to_csv())?;
    std::fs::write(&json, report.to_json())?;

    println!("{report}");
    println!("wrote {} ({} rows) and {}", csv.display(), log.records.len(), json.display());
    Ok(())
}
