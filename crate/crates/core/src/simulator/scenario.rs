//! Scenario files: a TOML document describing the start pose, scripted
//! actors, timed console commands and noise levels.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::director::interpret;
use crate::world::{wrap_angle, ActorState, Pose, Vec3};

/// Scenario format version this build reads.
pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub seed: u64,
    /// Seconds.
    pub duration: f64,
    pub drone_start: StartPose,
    #[serde(default)]
    pub actors: Vec<ActorScript>,
    #[serde(default)]
    pub commands: Vec<ScriptedCommand>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub position: [f64; 3],
    /// Radians from +y, counter-clockwise.
    #[serde(default)]
    pub course: f64,
    #[serde(default)]
    pub tilt: f64,
}

impl StartPose {
    pub fn pose(&self) -> Pose {
        Pose::new(Vec3::from(self.position), self.course, self.tilt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorScript {
    pub id: String,
    /// Meters.
    pub height: f64,
    pub waypoints: Vec<Waypoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub time: f64,
    pub position: [f64; 3],
    /// Radians from +y, counter-clockwise.
    #[serde(default)]
    pub facing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedCommand {
    pub time: f64,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Tracker noise: meters on positions, radians on the drone course.
    #[serde(default)]
    pub measurement_sigma: f64,
    /// Unmodelled acceleration on the drone, m/s² per axis.
    #[serde(default)]
    pub process_sigma: f64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("commands[{index}] at t={time} s, column {column}: {message}")]
    Command { index: usize, time: f64, column: usize, message: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.into() }
}

impl Scenario {
    /// Parses and validates the structure (commands are checked separately
    /// by [`Scenario::check_commands`]).
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != SCENARIO_VERSION {
            return Err(invalid("version", format!("expected {SCENARIO_VERSION}, found {}", self.version)));
        }
        if !(self.duration > 0.0 && self.duration <= 3600.0) {
            return Err(invalid("duration", "must be in (0, 3600] seconds"));
        }
        let start = &self.drone_start;
        if !start.position.iter().chain([&start.course, &start.tilt]).all(|v| v.is_finite()) {
            return Err(invalid("drone_start", "values must be finite"));
        }
        if start.position[2] < 0.0 {
            return Err(invalid("drone_start.position", "altitude must not be negative"));
        }
        for (i, actor) in self.actors.iter().enumerate() {
            let field = format!("actors[{i}] ({})", actor.id);
            if actor.id.is_empty() || actor.id.chars().any(char::is_whitespace) {
                return Err(invalid(format!("actors[{i}].id"), "must be a non-empty word"));
            }
            if self.actors[..i].iter().any(|a| a.id == actor.id) {
                return Err(invalid(format!("actors[{i}].id"), format!("duplicate id `{}`", actor.id)));
            }
            if !(actor.height > 0.0 && actor.height.is_finite()) {
                return Err(invalid(format!("{field}.height"), "must be positive"));
            }
            if actor.waypoints.is_empty() {
                return Err(invalid(format!("{field}.waypoints"), "needs at least one waypoint"));
            }
            for (j, w) in actor.waypoints.iter().enumerate() {
                if !w.position.iter().chain([&w.time, &w.facing]).all(|v| v.is_finite()) {
                    return Err(invalid(format!("{field}.waypoints[{j}]"), "values must be finite"));
                }
                if j > 0 && w.time <= actor.waypoints[j - 1].time {
                    return Err(invalid(
                        format!("{field}.waypoints[{j}].time"),
                        format!("{} does not follow {}; waypoint times must strictly increase", w.time, actor.waypoints[j - 1].time),
                    ));
                }
            }
        }
        for (i, c) in self.commands.iter().enumerate() {
            if !(c.time >= 0.0 && c.time <= self.duration) {
                return Err(invalid(format!("commands[{i}].time"), format!("{} is outside [0, {}]", c.time, self.duration)));
            }
        }
        for (name, v) in [("measurement_sigma", self.noise.measurement_sigma), ("process_sigma", self.noise.process_sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("noise.{name}"), "must be a non-negative number"));
            }
        }
        Ok(())
    }

    /// Every command text must interpret; the first failure is reported with
    /// its time and column (1-based).
    pub fn check_commands(&self) -> Result<(), ScenarioError> {
        for (index, c) in self.commands.iter().enumerate() {
            if let Err(e) = interpret(&c.text) {
                return Err(ScenarioError::Command {
                    index,
                    time: c.time,
                    column: e.position() + 1,
                    message: e.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Number of simulation ticks including both ends.
    pub fn tick_count(&self, dt: f64) -> usize {
        (self.duration / dt).round() as usize + 1
    }
}

/// Actor at time `t`: linear between waypoints, facing along the shorter
/// arc, held at the first or last waypoint outside their span.
pub fn actor_state_at(script: &ActorScript, t: f64) -> ActorState {
    let w = &script.waypoints;
    let at = |wp: &Waypoint| ActorState::new(script.id.clone(), Vec3::from(wp.position), wp.facing, script.height);
    let first = &w[0];
    let last = &w[w.len() - 1];
    if t <= first.time {
        return at(first);
    }
    if t >= last.time {
        return at(last);
    }
    let k = w.partition_point(|wp| wp.time <= t);
    let (a, b) = (&w[k - 1], &w[k]);
    let s = (t - a.time) / (b.time - a.time);
    let pa = Vec3::from(a.position);
    let pb = Vec3::from(b.position);
    let facing = a.facing + s * wrap_angle(b.facing - a.facing);
    ActorState::new(script.id.clone(), pa + (pb - pa) * s, facing, script.height)
}

/// Scenario files shipped with the crate, by name.
pub const BUNDLED: [(&str, &str); 6] = [
    ("single_actor_orbit", include_str!("../../scenarios/single_actor_orbit.toml")),
    ("front_to_backright", include_str!("../../scenarios/front_to_backright.toml")),
    ("hover_transition", include_str!("../../scenarios/hover_transition.toml")),
    ("moving_actor", include_str!("../../scenarios/moving_actor.toml")),
    ("two_actors_diverging", include_str!("../../scenarios/two_actors_diverging.toml")),
    ("over_the_shoulder", include_str!("../../scenarios/over_the_shoulder.toml")),
];

/// A bundled scenario by name.
pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_toml(text).expect("bundled scenarios are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn walker(waypoints: Vec<Waypoint>) -> ActorScript {
        ActorScript { id: "A".into(), height: 1.8, waypoints }
    }

    fn wp(time: f64, x: f64, facing: f64) -> Waypoint {
        Waypoint { time, position: [x, 0.0, 0.0], facing }
    }

    #[test]
    fn interpolation_and_hold() {
        let s = walker(vec![wp(0.0, 0.0, 0.0), wp(10.0, 10.0, 0.0)]);
        assert_abs_diff_eq!(actor_state_at(&s, 5.0).position, Vec3::new(5.0, 0.0, 0.0), epsilon = 1e-12);
        let late = walker(vec![wp(2.0, 1.0, 0.5), wp(3.0, 2.0, 0.5)]);
        assert_eq!(actor_state_at(&late, 0.0).position, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(actor_state_at(&late, 9.0).position, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn facing_takes_the_short_way() {
        let s = walker(vec![wp(0.0, 0.0, 170f64.to_radians()), wp(2.0, 0.0, (-170f64).to_radians())]);
        assert_abs_diff_eq!(actor_state_at(&s, 1.0).facing.abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn bundled_scenarios_load() {
        for (name, _) in BUNDLED {
            let s = bundled(name).unwrap();
            s.check_commands().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
        }
    }

    #[test]
    fn validation_names_actor_and_index() {
        let mut s = bundled("moving_actor").unwrap();
        s.actors[0].waypoints[1].time = s.actors[0].waypoints[0].time;
        let msg = s.validate().unwrap_err().to_string();
        assert!(msg.starts_with("actors[0] (A).waypoints[1].time"), "{msg}");

        let mut s = bundled("moving_actor").unwrap();
        s.commands[0].time = s.duration + 1.0;
        assert!(s.validate().unwrap_err().to_string().starts_with("commands[0].time"));

        let e = Scenario::from_toml("version = 1\nseed = 1\nduration = 5.0\nspeed = 3\n[drone_start]\nposition = [0.0, 0.0, 0.0]\n")
            .unwrap_err();
        assert!(e.to_string().contains("speed"), "{e}");
    }

    #[test]
    fn bad_command_reports_time_and_column() {
        let mut s = bundled("single_actor_orbit").unwrap();
        s.commands[1].text = "MS on A frnt".into();
        let e = s.check_commands().unwrap_err().to_string();
        assert!(e.starts_with(&format!("commands[1] at t={} s, column 9", s.commands[1].time)), "{e}");
    }
}
