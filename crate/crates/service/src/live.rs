//! The live simulation: one task owns the [`Simulation`], steps it in real
//! time and handles console lines in arrival order.

use std::time::Duration;

use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::time::{Instant, MissedTickBehavior};

use cinedrone::simulator::{Scenario, SimConfig, Simulation};

use crate::protocol::{ServerFrame, StateFrame};

/// State frames per second.
pub const FRAME_RATE: f64 = 25.0;

/// Outcome of one console line.
#[derive(Debug, Clone, PartialEq)]
pub enum CommandReply {
    Ack(String),
    Error { detail: String, position: Option<usize> },
}

impl From<CommandReply> for ServerFrame {
    fn from(r: CommandReply) -> Self {
        match r {
            CommandReply::Ack(detail) => ServerFrame::Ack { detail },
            CommandReply::Error { detail, position } => ServerFrame::Error { detail, position },
        }
    }
}

type Request = (String, oneshot::Sender<CommandReply>);

/// Handle to a running live simulation. Cheap to clone.
#[derive(Clone)]
pub struct LiveHandle {
    commands: mpsc::Sender<Request>,
    state: watch::Receiver<Option<StateFrame>>,
    events: broadcast::Sender<ServerFrame>,
}

impl LiveHandle {
    /// Sends a console line and waits for the director's answer.
    pub async fn command(&self, text: String) -> CommandReply {
        let (tx, rx) = oneshot::channel();
        if self.commands.send((text, tx)).await.is_err() {
            return CommandReply::Error { detail: "simulation stopped".into(), position: None };
        }
        rx.await.unwrap_or(CommandReply::Error { detail: "simulation stopped".into(), position: None })
    }

    pub fn state(&self) -> watch::Receiver<Option<StateFrame>> {
        self.state.clone()
    }

    pub fn events(&self) -> broadcast::Receiver<ServerFrame> {
        self.events.subscribe()
    }
}

/// Starts the simulation task on the current runtime.
pub fn spawn(scenario: Scenario, config: SimConfig) -> LiveHandle {
    let (cmd_tx, cmd_rx) = mpsc::channel(64);
    let (state_tx, state_rx) = watch::channel(None);
    let (event_tx, _) = broadcast::channel(256);
    tokio::spawn(run(Simulation::new(scenario, config), cmd_rx, state_tx, event_tx.clone()));
    LiveHandle { commands: cmd_tx, state: state_rx, events: event_tx }
}

async fn run(
    mut sim: Simulation,
    mut commands: mpsc::Receiver<Request>,
    state: watch::Sender<Option<StateFrame>>,
    events: broadcast::Sender<ServerFrame>,
) {
    let started = Instant::now();
    let mut ticker = tokio::time::interval(Duration::from_secs_f64(1.0 / FRAME_RATE));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let mut last = None;
    loop {
        tokio::select! {
            _ = ticker.tick() => {
                let wall = started.elapsed().as_secs_f64();
                while sim.time() <= wall {
                    last = Some(sim.step());
                }
                publish(&mut sim, &events);
                if let Some(record) = &last {
                    let frame = StateFrame::new(record, &sim.actors, sim.director.session.active_command.clone());
                    state.send_replace(Some(frame));
                }
            }
            request = commands.recv() => {
                let Some((text, reply)) = request else { break };
                let outcome = match sim.execute(&text) {
                    Ok(detail) => CommandReply::Ack(detail),
                    Err(e) => CommandReply::Error { detail: e.to_string(), position: e.position() },
                };
                publish(&mut sim, &events);
                let _ = reply.send(outcome);
            }
        }
    }
}

fn publish(sim: &mut Simulation, events: &broadcast::Sender<ServerFrame>) {
    for e in sim.drain_events() {
        tracing::debug!(time = e.time, detail = %e.detail, "event");
        // no subscribers is fine
        let _ = events.send(ServerFrame::from(&e));
    }
}
