//! Wire format of the live service: JSON text frames, one document each.

use serde::{Deserialize, Serialize};

use cinedrone::simulator::{EventKind, LogEvent, TickRecord};
use cinedrone::world::ActorState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneFrame {
    pub position: [f64; 3],
    pub course: f64,
    pub velocity: [f64; 3],
    /// Gimbal tilt, for the preview.
    pub tilt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorFrame {
    pub id: String,
    pub position: [f64; 3],
    pub facing: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenFrame {
    pub id: String,
    /// Where the subject appears; absent when behind the camera.
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub requested_x: f64,
    pub requested_y: f64,
    pub in_frame: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub time: f64,
    pub session_state: String,
    pub battery: f64,
    pub drone: DroneFrame,
    pub actors: Vec<ActorFrame>,
    /// Distance from the drone to where the navigator is taking it.
    pub nav_error_m: f64,
    pub screen_positions: Vec<ScreenFrame>,
    pub recording: bool,
    pub active_command: Option<String>,
}

impl StateFrame {
    pub fn new(record: &TickRecord, actors: &[ActorState], active_command: Option<String>) -> Self {
        let t = &record.truth;
        let goal = record.target.map(|p| p.position).or(record.nav.map(|n| n.position));
        Self {
            time: record.time,
            session_state: record.state.name().to_owned(),
            battery: record.battery,
            drone: DroneFrame {
                position: t.pose.position.into(),
                course: t.pose.course,
                velocity: t.velocity.into(),
                tilt: t.pose.tilt,
            },
            actors: actors
                .iter()
                .map(|a| ActorFrame { id: a.id.clone(), position: a.position.into(), facing: a.facing, height: a.height })
                .collect(),
            nav_error_m: goal.map_or(0.0, |g| (g - t.pose.position).norm()),
            screen_positions: record
                .subjects
                .iter()
                .map(|s| ScreenFrame {
                    id: s.id.clone(),
                    x: s.screen.map(|p| p.x),
                    y: s.screen.map(|p| p.y),
                    requested_x: s.requested.x,
                    requested_y: s.requested.y,
                    in_frame: !s.out_of_frame,
                })
                .collect(),
            recording: record.recording,
            active_command,
        }
    }
}

/// Everything the server sends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerFrame {
    State(StateFrame),
    Ack {
        detail: String,
    },
    Error {
        detail: String,
        /// Zero-based character offset of the offending word.
        #[serde(skip_serializing_if = "Option::is_none", default)]
        position: Option<usize>,
    },
    Event {
        time: f64,
        kind: String,
        detail: String,
    },
}

impl ServerFrame {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

impl From<&LogEvent> for ServerFrame {
    fn from(e: &LogEvent) -> Self {
        let kind = match e.kind {
            EventKind::Ack => "ack",
            EventKind::Error => "error",
            EventKind::Transition => "transition",
        };
        ServerFrame::Event { time: e.time, kind: kind.into(), detail: e.detail.clone() }
    }
}

/// Everything a client may send.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientFrame {
    Command { text: String },
}
