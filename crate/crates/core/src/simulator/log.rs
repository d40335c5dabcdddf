//! Per-tick run log and its CSV form.
//!
//! One row per tick. Floats are written in shortest round-trip form, so a
//! parsed log is bit-identical to the one written. Optional groups (setpoint,
//! target, subjects) are empty cells when absent. Columns:
//!
//! | column | meaning |
//! |---|---|
//! | `time` | s |
//! | `state`, `plan_id`, `battery`, `recording` | session |
//! | `true_x..true_z`, `true_vx..true_vz`, `true_course`, `true_course_rate`, `tilt` | ground truth, gimbal tilt |
//! | `meas_x..meas_z`, `meas_course` | tracker fix of the drone |
//! | `est_x..est_z`, `est_vx..est_vz`, `est_course`, `est_min_eig` | filter mean, smallest covariance eigenvalue |
//! | `nav_x..nav_z`, `nav_vx..nav_vz`, `nav_ax..nav_az`, `nav_course`, `nav_course_rate`, `nav_tilt` | latest navigator output |
//! | `target_x..target_z`, `target_course`, `target_tilt` | plan target pose at this tick |
//! | `pitch`, `roll`, `yaw_rate`, `climb_rate` | controls |
//! | `s{k}_id`, `s{k}_aim_x..s{k}_aim_z` | subject k of the active plan (k = 0, 1) and its true aim point |
//! | `s{k}_x`, `s{k}_y` | where it projects through the true camera; empty when behind |
//! | `s{k}_req_x`, `s{k}_req_y` | where the plan wants it now |
//! | `s{k}_out` | 1 when outside the frame or behind the camera |

use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

use crate::controller::FlightControl;
use crate::director::SessionState;
use crate::framing::ScreenPoint;
use crate::navigator::NavigationData;
use crate::world::{DroneState, Pose, Vec3};

/// Subjects per row.
pub const SUBJECT_SLOTS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub position: Vec3,
    pub velocity: Vec3,
    pub course: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub id: String,
    pub aim: Vec3,
    pub screen: Option<ScreenPoint>,
    pub requested: ScreenPoint,
    pub out_of_frame: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub time: f64,
    pub state: SessionState,
    pub plan_id: u32,
    pub battery: f64,
    pub recording: bool,
    pub truth: DroneState,
    pub measured_position: Vec3,
    pub measured_course: f64,
    pub estimate: EstimateRecord,
    pub nav: Option<NavigationData>,
    pub target: Option<Pose>,
    pub control: FlightControl,
    pub subjects: Vec<SubjectRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Ack,
    Error,
    Transition,
}

/// Something that happened between ticks: a command outcome or a state
/// change. Not part of the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEvent {
    pub time: f64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub records: Vec<TickRecord>,
    pub events: Vec<LogEvent>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("log has no rows")]
    Empty,
}

/// Column names in order.
pub fn header() -> Vec<String> {
    let mut h: Vec<String> = [
        "time", "state", "plan_id", "battery", "recording",
        "true_x", "true_y", "true_z", "true_vx", "true_vy", "true_vz", "true_course", "true_course_rate", "tilt",
        "meas_x", "meas_y", "meas_z", "meas_course",
        "est_x", "est_y", "est_z", "est_vx", "est_vy", "est_vz", "est_course", "est_min_eig",
        "nav_x", "nav_y", "nav_z", "nav_vx", "nav_vy", "nav_vz", "nav_ax", "nav_ay", "nav_az", "nav_course", "nav_course_rate", "nav_tilt",
        "target_x", "target_y", "target_z", "target_course", "target_tilt",
        "pitch", "roll", "yaw_rate", "climb_rate",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    for k in 0..SUBJECT_SLOTS {
        for col in ["id", "aim_x", "aim_y", "aim_z", "x", "y", "req_x", "req_y", "out"] {
            h.push(format!("s{k}_{col}"));
        }
    }
    h
}

fn push_all<T: Display>(row: &mut Vec<String>, values: impl IntoIterator<Item = T>) {
    row.extend(values.into_iter().map(|v| v.to_string()));
}

fn blanks(row: &mut Vec<String>, n: usize) {
    row.extend(std::iter::repeat_n(String::new(), n));
}

impl TickRecord {
    fn to_row(&self) -> Vec<String> {
        let mut r = Vec::with_capacity(60);
        r.push(self.time.to_string());
        r.push(self.state.name().to_owned());
        r.push(self.plan_id.to_string());
        r.push(self.battery.to_string());
        r.push(u8::from(self.recording).to_string());
        let t = &self.truth;
        push_all(&mut r, t.pose.position.iter().chain(t.velocity.iter()));
        push_all(&mut r, [t.pose.course, t.course_rate, t.pose.tilt]);
        push_all(&mut r, self.measured_position.iter().chain([&self.measured_course]));
        let e = &self.estimate;
        push_all(&mut r, e.position.iter().chain(e.velocity.iter()));
        push_all(&mut r, [e.course, e.min_eigenvalue]);
        match &self.nav {
            Some(n) => {
                push_all(&mut r, n.position.iter().chain(n.velocity.iter()).chain(n.acceleration.iter()));
                push_all(&mut r, [n.course, n.course_rate, n.tilt]);
            }
            None => blanks(&mut r, 12),
        }
        match &self.target {
            Some(p) => push_all(&mut r, p.position.iter().chain([&p.course, &p.tilt])),
            None => blanks(&mut r, 5),
        }
        let c = &self.control;
        push_all(&mut r, [c.pitch, c.roll, c.yaw_rate, c.climb_rate]);
        for k in 0..SUBJECT_SLOTS {
            match self.subjects.get(k) {
                Some(s) => {
                    r.push(s.id.clone());
                    push_all(&mut r, s.aim.iter());
                    match s.screen {
                        Some(p) => push_all(&mut r, [p.x, p.y]),
                        None => blanks(&mut r, 2),
                    }
                    push_all(&mut r, [s.requested.x, s.requested.y]);
                    r.push(u8::from(s.out_of_frame).to_string());
                }
                None => blanks(&mut r, 9),
            }
        }
        r
    }
}

impl RunLog {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header()).expect("in-memory write");
        for rec in &self.records {
            w.write_record(rec.to_row()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Reads the records back from [`RunLog::to_csv`] output.
    pub fn from_csv(text: &str) -> Result<Vec<TickRecord>, LogError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let expected = header();
        let found: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        if found != expected {
            return Err(LogError::Malformed { row: 0, message: "unexpected header".into() });
        }
        let mut out = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            out.push(parse_row(&row).map_err(|message| LogError::Malformed { row: i + 1, message })?);
        }
        if out.is_empty() {
            return Err(LogError::Empty);
        }
        Ok(out)
    }
}

struct Cells<'a> {
    row: &'a csv::StringRecord,
    at: usize,
}

impl Cells<'_> {
    fn next_str(&mut self) -> Result<&str, String> {
        let cell = self.row.get(self.at).ok_or_else(|| format!("missing column {}", self.at))?;
        self.at += 1;
        Ok(cell)
    }

    fn value<T: FromStr>(&mut self) -> Result<T, String> {
        let column = self.at;
        let cell = self.next_str()?;
        cell.parse().map_err(|_| format!("column {column}: cannot read `{cell}`"))
    }

    fn vec3(&mut self) -> Result<Vec3, String> {
        Ok(Vec3::new(self.value()?, self.value()?, self.value()?))
    }

    /// `n` cells that are either all empty (None) or all present.
    fn group(&mut self, n: usize) -> Result<bool, String> {
        let cells: Vec<&str> = (self.at..self.at + n).filter_map(|i| self.row.get(i)).collect();
        if cells.len() < n {
            return Err(format!("missing columns from {}", self.at));
        }
        if cells.iter().all(|c| c.is_empty()) {
            self.at += n;
            return Ok(false);
        }
        Ok(true)
    }
}

fn parse_row(row: &csv::StringRecord) -> Result<TickRecord, String> {
    let mut c = Cells { row, at: 0 };
    let time = c.value()?;
    let state_name = c.next_str()?;
    let state = SessionState::from_name(state_name).ok_or_else(|| format!("unknown state `{state_name}`"))?;
    let plan_id = c.value()?;
    let battery = c.value()?;
    let recording = c.value::<u8>()? == 1;
    let position = c.vec3()?;
    let velocity = c.vec3()?;
    let (course, course_rate, tilt) = (c.value()?, c.value()?, c.value()?);
    let truth = DroneState { pose: Pose { position, course, tilt }, velocity, course_rate };
    let measured_position = c.vec3()?;
    let measured_course = c.value()?;
    let estimate = EstimateRecord {
        position: c.vec3()?,
        velocity: c.vec3()?,
        course: c.value()?,
        min_eigenvalue: c.value()?,
    };
    let nav = if c.group(12)? {
        Some(NavigationData {
            position: c.vec3()?,
            velocity: c.vec3()?,
            acceleration: c.vec3()?,
            course: c.value()?,
            course_rate: c.value()?,
            tilt: c.value()?,
        })
    } else {
        None
    };
    let target = if c.group(5)? {
        Some(Pose { position: c.vec3()?, course: c.value()?, tilt: c.value()? })
    } else {
        None
    };
    let control = FlightControl { pitch: c.value()?, roll: c.value()?, yaw_rate: c.value()?, climb_rate: c.value()? };
    let mut subjects = Vec::new();
    for _ in 0..SUBJECT_SLOTS {
        if !c.group(9)? {
            continue;
        }
        let id = c.next_str()?.to_owned();
        let aim = c.vec3()?;
        let screen = if c.group(2)? { Some(ScreenPoint::new(c.value()?, c.value()?)) } else { None };
        let requested = ScreenPoint::new(c.value()?, c.value()?);
        let out_of_frame = c.value::<u8>()? == 1;
        subjects.push(SubjectRecord { id, aim, screen, requested, out_of_frame });
    }
    Ok(TickRecord {
        time,
        state,
        plan_id,
        battery,
        recording,
        truth,
        measured_position,
        measured_course,
        estimate,
        nav,
        target,
        control,
        subjects,
    })
}
