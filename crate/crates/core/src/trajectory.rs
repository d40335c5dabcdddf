//! Transitions between framings.
//!
//! A plan holds two property sets and a time window. Evaluating it blends the
//! properties, then places the camera against wherever the subjects are at
//! that moment, so moving actors drag the whole path with them.

use thiserror::Error;

use crate::framing::{
    place, resolve_spec, world_to_manifold, CameraIntrinsics, FramingError, FramingProperties,
};
use crate::psl::ShotSentence;
use crate::world::{wrap_angle, ActorState, Pose, TrackerSnapshot, Vec3};

/// Cruise speed used when a sentence gives neither duration nor speed.
pub const DEFAULT_SPEED: f64 = 0.5;
/// Shortest transition, seconds.
pub const MIN_DURATION: f64 = 1.0;
/// Poses sampled along a transition to estimate its length.
pub const PATH_SAMPLES: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("clamp bounds reversed: min {min} > max {max}")]
    ClampBounds { min: f64, max: f64 },
    #[error("actor `{0}` is not tracked")]
    MissingActor(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(&'static str),
    #[error(transparent)]
    Framing(#[from] FramingError),
}

/// Clamps `x` into `[min, max]`.
pub fn clamp(x: f64, min: f64, max: f64) -> Result<f64, TrajectoryError> {
    if min > max {
        return Err(TrajectoryError::ClampBounds { min, max });
    }
    Ok(if x < min {
        min
    } else if x > max {
        max
    } else {
        x
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionPlan {
    pub p_start: FramingProperties,
    pub p_end: FramingProperties,
    pub t0: f64,
    pub tf: f64,
    /// Subjects in sentence order; properties refer to them by index.
    pub subject_ids: Vec<String>,
    pub intrinsics: CameraIntrinsics,
}

impl TransitionPlan {
    /// Checks the time window, the property sets and their arity.
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if !(self.tf > self.t0) || !self.t0.is_finite() || !self.tf.is_finite() {
            return Err(TrajectoryError::InvalidPlan("tf must be after t0"));
        }
        self.p_start.validate()?;
        self.p_end.validate()?;
        let n = self.subject_ids.len();
        if self.p_start.subject_count() != n || self.p_end.subject_count() != n {
            return Err(TrajectoryError::InvalidPlan("property arity differs from subject count"));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    /// Looks the plan's subjects up in a snapshot, in plan order.
    pub fn subjects<'a>(&self, snapshot: &'a TrackerSnapshot) -> Result<Vec<&'a ActorState>, TrajectoryError> {
        lookup(&self.subject_ids, &snapshot.actors)
    }
}

fn lookup<'a>(ids: &[String], actors: &'a [ActorState]) -> Result<Vec<&'a ActorState>, TrajectoryError> {
    ids.iter()
        .map(|id| {
            actors
                .iter()
                .find(|a| &a.id == id)
                .ok_or_else(|| TrajectoryError::MissingActor(id.clone()))
        })
        .collect()
}

/// Blends two property sets with weight `s` on the end set. Profile and
/// vertical angle follow the shorter arc.
fn blend(start: &FramingProperties, end: &FramingProperties, s: f64) -> FramingProperties {
    let lerp = |a: f64, b: f64| a * (1.0 - s) + b * s;
    let arc = |a: f64, b: f64| wrap_angle(a + s * wrap_angle(b - a));
    FramingProperties {
        screen: start.screen.iter().zip(&end.screen).map(|(a, b)| a * (1.0 - s) + b * s).collect(),
        vertical: arc(start.vertical, end.vertical),
        profile: arc(start.profile, end.profile),
        size_distance: lerp(start.size_distance, end.size_distance),
    }
}

/// Property set at time `t`; the start set before `t0`, the end set after `tf`.
pub fn interpolate_properties(plan: &TransitionPlan, t: f64) -> FramingProperties {
    let span = plan.tf - plan.t0;
    let w_start = ((plan.tf - t) / span).clamp(0.0, 1.0);
    let w_end = ((t - plan.t0) / span).clamp(0.0, 1.0);
    if w_end <= 0.0 {
        return plan.p_start.clone();
    }
    if w_start <= 0.0 {
        return plan.p_end.clone();
    }
    blend(&plan.p_start, &plan.p_end, w_end)
}

/// Camera pose realizing the interpolated properties around the subjects'
/// current positions.
pub fn target_pose_at(plan: &TransitionPlan, t: f64, snapshot: &TrackerSnapshot) -> Result<Pose, TrajectoryError> {
    let subjects = plan.subjects(snapshot)?;
    let props = interpolate_properties(plan, t);
    Ok(place(&subjects, &props, &plan.intrinsics)?.pose)
}

/// Naive baseline: camera position blended in a straight line, course along
/// the shorter arc, tilt linearly. Ignores the subjects entirely, which is
/// why it loses them on transitions that swing around a pair.
pub fn linear_pose_between(start: &Pose, end: &Pose, s: f64) -> Pose {
    let s = s.clamp(0.0, 1.0);
    Pose::new(
        start.position + (end.position - start.position) * s,
        wrap_angle(start.course + s * wrap_angle(end.course - start.course)),
        start.tilt + s * (end.tilt - start.tilt),
    )
}

/// Length of the polyline through [`PATH_SAMPLES`] evenly spaced poses of the
/// transition, with actors frozen where they are now.
pub fn estimate_path_length(
    start: &FramingProperties,
    end: &FramingProperties,
    subjects: &[&ActorState],
    intrinsics: &CameraIntrinsics,
) -> Result<f64, TrajectoryError> {
    let mut length = 0.0;
    let mut previous: Option<Vec3> = None;
    for i in 0..PATH_SAMPLES {
        let s = i as f64 / (PATH_SAMPLES - 1) as f64;
        let p = place(subjects, &blend(start, end, s), intrinsics)?.pose.position;
        if let Some(q) = previous {
            length += (p - q).norm();
        }
        previous = Some(p);
    }
    Ok(length)
}

/// Plans a transition from the drone's current camera to `sentence`, using
/// the default intrinsics and cruise speed.
pub fn plan_transition(
    snapshot: &TrackerSnapshot,
    sentence: &ShotSentence,
    now: f64,
) -> Result<TransitionPlan, TrajectoryError> {
    plan_transition_with(snapshot, sentence, now, &CameraIntrinsics::default(), DEFAULT_SPEED)
}

/// Plans a transition from the drone's current camera to `sentence`.
///
/// The start properties describe the current camera relative to the new
/// subjects, so a change in subject count needs no special handling.
/// Duration: the sentence's own, else estimated path length over the
/// requested (or cruise) speed, never under [`MIN_DURATION`].
pub fn plan_transition_with(
    snapshot: &TrackerSnapshot,
    sentence: &ShotSentence,
    now: f64,
    intrinsics: &CameraIntrinsics,
    cruise_speed: f64,
) -> Result<TransitionPlan, TrajectoryError> {
    let subject_ids: Vec<String> = sentence.subjects.iter().map(|c| c.actor_id.clone()).collect();
    let subjects = lookup(&subject_ids, &snapshot.actors)?;
    let p_end = resolve_spec(sentence, &snapshot.actors, intrinsics)?;
    let mut p_start = world_to_manifold(&snapshot.drone.pose, &subjects, intrinsics)?;
    if let ([a0, b0], [a1, b1]) = (p_start.screen.as_slice(), p_end.screen.as_slice()) {
        // The pair would have to swap sides mid-flight, which no point of
        // the surface shows; start from the target composition instead.
        if (a0.x - b0.x) * (a1.x - b1.x) <= 0.0 {
            p_start.screen = vec![*a1, *b1];
        }
    }

    let duration = match sentence.duration() {
        Some(d) => d,
        None => {
            let speed = sentence.speed().unwrap_or(cruise_speed);
            estimate_path_length(&p_start, &p_end, &subjects, intrinsics)? / speed
        }
    }
    .max(MIN_DURATION);

    let plan = TransitionPlan {
        p_start,
        p_end,
        t0: now,
        tf: now + duration,
        subject_ids,
        intrinsics: *intrinsics,
    };
    plan.validate()?;
    Ok(plan)
}
