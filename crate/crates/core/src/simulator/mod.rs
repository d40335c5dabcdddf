//! Ground truth: the plant, scripted actors, a noisy tracker, and the fixed
//! step loop that runs a whole scenario through the director, navigator and
//! controller.

mod log;
mod scenario;

pub use log::{header, EstimateRecord, EventKind, LogError, LogEvent, RunLog, SubjectRecord, TickRecord, SUBJECT_SLOTS};
pub use scenario::{
    actor_state_at, bundled, ActorScript, NoiseSpec, Scenario, ScenarioError, ScriptedCommand, StartPose, Waypoint,
    BUNDLED, SCENARIO_VERSION,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::controller::{Controller, FlightControl, Measurement};
use crate::director::{parse_script, Director, Effect, PlanSettings, SessionState, GROUND_LEVEL};
use crate::framing::{project, ScreenPoint};
use crate::navigator::{NavigationData, SteeringLimits, NAV_RATE};
use crate::trajectory::{interpolate_properties, target_pose_at};
use crate::controller::DroneModel;
use crate::world::{ActorState, DroneState, TrackerSnapshot, Vec3, MAX_TILT};

/// Everything about a run that is not in the scenario file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Model the controller believes in; its `dt` is the simulation step.
    pub model: DroneModel,
    /// Model that moves the true drone; equal to `model` unless perturbed.
    pub plant: DroneModel,
    pub limits: SteeringLimits,
    pub plan: PlanSettings,
    /// Navigator updates per second.
    pub nav_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            model: DroneModel::default(),
            plant: DroneModel::default(),
            limits: SteeringLimits::default(),
            plan: PlanSettings::default(),
            nav_rate: NAV_RATE,
        }
    }
}

impl SimConfig {
    /// Plant with drag and both lags scaled by the given factors.
    pub fn with_perturbed_plant(mut self, drag: f64, tau_z: f64, tau_psi: f64) -> Self {
        self.plant = self.model.perturbed(drag, tau_z, tau_psi);
        self
    }
}

/// One plant step: the shared model plus an acceleration disturbance, with
/// the floor at z = 0.
pub fn step_plant(state: &DroneState, control: &FlightControl, model: &DroneModel, dt: f64, noise: &Vec3) -> DroneState {
    let mut next = model.propagate(state, control, noise, dt);
    if next.pose.position.z < 0.0 {
        next.pose.position.z = 0.0;
        next.velocity.z = next.velocity.z.max(0.0);
    }
    next
}

/// Simulated motion capture: truth plus Gaussian noise from a seeded stream.
#[derive(Debug, Clone)]
pub struct Tracker {
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl Tracker {
    pub fn new(seed: u64, sigma: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma")),
        }
    }

    fn draw(&mut self) -> f64 {
        match &self.noise {
            Some(n) => n.sample(&mut self.rng),
            None => 0.0,
        }
    }

    /// Noisy fix of the drone position and course. The gimbal tilt is known
    /// exactly; velocity is left to the consumers.
    pub fn measure_drone(&mut self, truth: &DroneState) -> DroneState {
        let noise = Vec3::new(self.draw(), self.draw(), self.draw());
        let mut pose = truth.pose;
        pose.position += noise;
        pose.course = crate::world::wrap_angle(pose.course + self.draw());
        DroneState::at_rest(pose)
    }

    /// Actor positions get horizontal noise; height and facing pass through.
    pub fn measure_actor(&mut self, truth: &ActorState) -> ActorState {
        let mut a = truth.clone();
        a.position.x += self.draw();
        a.position.y += self.draw();
        a
    }

    pub fn snapshot(&mut self, time: f64, drone: &DroneState, actors: &[ActorState]) -> TrackerSnapshot {
        TrackerSnapshot {
            timestamp: time,
            drone: self.measure_drone(drone),
            actors: actors.iter().map(|a| self.measure_actor(a)).collect(),
        }
    }
}

fn process_noise(seed: u64, sigma: f64) -> (ChaCha8Rng, Option<Normal<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (rng, (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma")))
}

/// Whether the navigator runs on tick `i` of a `rate`-per-second schedule
/// laid over ticks of `dt`.
fn nav_due(i: usize, dt: f64, rate: f64) -> bool {
    let slot = |i: usize| (i as f64 * dt * rate + 1e-9).floor() as i64;
    i == 0 || slot(i) > slot(i - 1)
}

/// Live state of a running scenario, advanced one tick at a time. The batch
/// runner and the live service both drive this.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub config: SimConfig,
    pub director: Director,
    pub controller: Controller,
    pub truth: DroneState,
    pub actors: Vec<ActorState>,
    pub nav: Option<NavigationData>,
    pub last_snapshot: Option<TrackerSnapshot>,
    tracker: Tracker,
    process: (ChaCha8Rng, Option<Normal<f64>>),
    pending: Vec<(f64, String)>,
    tick: usize,
    events: Vec<LogEvent>,
}

impl Simulation {
    pub fn new(scenario: Scenario, config: SimConfig) -> Self {
        let start = scenario.drone_start.pose();
        let state = if start.position.z > GROUND_LEVEL { SessionState::Ready } else { SessionState::Grounded };
        let mut pending: Vec<(f64, String)> = scenario.commands.iter().map(|c| (c.time, c.text.clone())).collect();
        // stable: equal times keep file order
        pending.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            director: Director::new(state, config.limits, config.plan),
            controller: Controller::new(config.model, scenario.noise.measurement_sigma),
            truth: DroneState::at_rest(start),
            actors: Vec::new(),
            nav: None,
            last_snapshot: None,
            tracker: Tracker::new(scenario.seed, scenario.noise.measurement_sigma),
            process: process_noise(scenario.seed, scenario.noise.process_sigma),
            pending,
            tick: 0,
            events: Vec::new(),
            scenario,
            config,
        }
    }

    pub fn dt(&self) -> f64 {
        self.config.model.dt
    }

    /// Time of the next tick.
    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt()
    }

    /// Events since the last call.
    pub fn drain_events(&mut self) -> Vec<LogEvent> {
        std::mem::take(&mut self.events)
    }

    /// Queues a console line for the next tick.
    pub fn submit(&mut self, text: impl Into<String>) {
        let t = self.time();
        self.pending.push((t, text.into()));
        self.pending.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    /// Runs a console line right now against the latest snapshot, returning
    /// the outcome, for interactive clients that want an immediate answer.
    /// Before the first tick the line is queued instead.
    pub fn execute(&mut self, text: &str) -> Result<String, crate::director::CommandError> {
        let Some(snapshot) = self.last_snapshot.clone() else {
            self.submit(text);
            return Ok("queued".into());
        };
        let t = self.time();
        let was = self.director.session.state;
        let out = self.director.command(text, &snapshot, t);
        self.record_outcome(t, text, &out, was);
        out.map(|r| r.detail)
    }

    fn record_outcome(
        &mut self,
        t: f64,
        text: &str,
        out: &Result<crate::director::Reply, crate::director::CommandError>,
        was: SessionState,
    ) {
        match out {
            Ok(reply) => {
                self.events.push(LogEvent { time: t, kind: EventKind::Ack, detail: format!("{text}: {}", reply.detail) });
                if let Some(Effect::LoadScript(path)) = &reply.effect {
                    match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|s| parse_script(&s)) {
                        Ok(lines) => {
                            self.pending.extend(lines.into_iter().map(|(dt, c)| (t + dt, c)));
                            self.pending.sort_by(|a, b| a.0.total_cmp(&b.0));
                        }
                        Err(e) => self.events.push(LogEvent {
                            time: t,
                            kind: EventKind::Error,
                            detail: format!("{path}: {e}"),
                        }),
                    }
                }
            }
            Err(e) => {
                let at = e.position().map(|p| format!(" (column {})", p + 1)).unwrap_or_default();
                self.events.push(LogEvent { time: t, kind: EventKind::Error, detail: format!("{text}: {e}{at}") });
            }
        }
        let now = self.director.session.state;
        if now != was {
            self.events.push(LogEvent { time: t, kind: EventKind::Transition, detail: format!("{was} -> {now}") });
        }
    }

    /// One tick: actors move, the tracker samples, commands due are handled,
    /// the navigator runs when scheduled, the controller closes the loop and
    /// the plant advances. Returns the record for this tick's time.
    pub fn step(&mut self) -> TickRecord {
        let dt = self.dt();
        let t = self.time();
        let i = self.tick;

        self.actors = self.scenario.actors.iter().map(|a| actor_state_at(a, t)).collect();
        let snapshot = self.tracker.snapshot(t, &self.truth, &self.actors);

        if let Some(tr) = self.director.tick(&snapshot, t, dt) {
            self.events.push(LogEvent { time: t, kind: EventKind::Transition, detail: format!("{} -> {}", tr.from, tr.to) });
        }
        while self.pending.first().is_some_and(|(time, _)| *time <= t + 1e-9) {
            let (_, text) = self.pending.remove(0);
            let was = self.director.session.state;
            let out = self.director.command(&text, &snapshot, t);
            self.record_outcome(t, &text, &out, was);
        }

        if nav_due(i, dt, self.config.nav_rate) {
            self.nav = match self.director.navigation(&snapshot, t, 1.0 / self.config.nav_rate) {
                Ok(nav) => nav,
                Err(e) => {
                    self.events.push(LogEvent { time: t, kind: EventKind::Error, detail: format!("navigation: {e}") });
                    None
                }
            };
        }
        if !self.director.session.state.airborne() {
            self.nav = None;
        }
        if let Some(nav) = &self.nav {
            self.truth.pose.tilt = nav.tilt.clamp(-MAX_TILT, MAX_TILT);
        }

        let measurement = Measurement { position: snapshot.drone.pose.position, course: snapshot.drone.pose.course };
        let control = match self.controller.step(&measurement, self.nav.as_ref()) {
            Ok(c) => c,
            Err(e) => {
                self.events.push(LogEvent { time: t, kind: EventKind::Error, detail: format!("estimator: {e}") });
                FlightControl::default()
            }
        };
        let estimate = self.controller.estimate.expect("controller has stepped");

        let record = self.record(t, &snapshot, &estimate, control);

        let (rng, normal) = &mut self.process;
        let mut noise = match normal {
            Some(n) => Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng)),
            None => Vec3::zeros(),
        };
        // gusts do not move a parked drone; the draw still happens so the
        // stream does not depend on the session state
        if !self.director.session.state.airborne() {
            noise = Vec3::zeros();
        }
        self.truth = step_plant(&self.truth, &control, &self.config.plant, dt, &noise);
        self.last_snapshot = Some(snapshot);
        self.tick += 1;
        record
    }

    fn record(
        &self,
        t: f64,
        snapshot: &TrackerSnapshot,
        estimate: &crate::controller::StateEstimate,
        control: FlightControl,
    ) -> TickRecord {
        let session = &self.director.session;
        let mut target = None;
        let mut subjects = Vec::new();
        if let Some(plan) = &session.active_plan {
            let truth_world = TrackerSnapshot {
                timestamp: t,
                drone: self.truth,
                actors: self.actors.clone(),
            };
            target = target_pose_at(plan, t, &truth_world).ok();
            let requested = interpolate_properties(plan, t).screen;
            for (id, req) in plan.subject_ids.iter().zip(requested) {
                let Some(actor) = truth_world.actor(id) else { continue };
                let aim = actor.aim_point();
                let p = project(&self.truth.pose, &aim, &plan.intrinsics);
                subjects.push(SubjectRecord {
                    id: id.clone(),
                    aim,
                    screen: p.point(),
                    requested: ScreenPoint::new(req.x, req.y),
                    out_of_frame: !p.in_frame(),
                });
            }
        }
        TickRecord {
            time: t,
            state: session.state,
            plan_id: session.plan_id,
            battery: session.battery,
            recording: session.recording,
            truth: self.truth,
            measured_position: snapshot.drone.pose.position,
            measured_course: snapshot.drone.pose.course,
            estimate: EstimateRecord {
                position: estimate.position(),
                velocity: estimate.velocity(),
                course: estimate.course(),
                min_eigenvalue: estimate.min_eigenvalue(),
            },
            nav: self.nav,
            target,
            control,
            subjects,
        }
    }
}

/// Runs a scenario with the default configuration.
pub fn run_scenario(scenario: &Scenario) -> RunLog {
    run_scenario_with(scenario, &SimConfig::default())
}

/// Runs every tick from 0 to the scenario duration inclusive.
pub fn run_scenario_with(scenario: &Scenario, config: &SimConfig) -> RunLog {
    let mut sim = Simulation::new(scenario.clone(), *config);
    let n = scenario.tick_count(sim.dt());
    let records = (0..n).map(|_| sim.step()).collect();
    RunLog { records, events: sim.drain_events() }
}
