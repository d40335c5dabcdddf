//! Turns a transition plan into setpoints for the controller.
//!
//! Each step reads the tracker, evaluates the plan against the current actor
//! positions, applies arrive and obstacle-repulsion steering, and emits a
//! position, velocity, course (with its rate) and camera tilt.

use crate::framing::frame_view;
use crate::trajectory::{interpolate_properties, target_pose_at, TrajectoryError, TransitionPlan};
use crate::world::{wrap_angle, TrackerSnapshot, Vec3};

/// Radius of the vertical cylinder an actor occupies.
pub const ACTOR_RADIUS: f64 = 0.5;
/// Navigator rate, Hz.
pub const NAV_RATE: f64 = 30.0;
/// Weight of the newest finite-difference sample in the velocity estimate.
pub const VELOCITY_SMOOTHING: f64 = 0.5;
/// Alpha-beta gains of the tracker that follows the target pose.
pub const TARGET_ALPHA: f64 = 0.3;
pub const TARGET_BETA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringLimits {
    pub v_max: f64,
    pub a_max: f64,
    /// Distance at which arrival starts slowing down.
    pub slow_radius: f64,
    /// Range of obstacle repulsion, measured from the obstacle surface.
    pub obstacle_radius: f64,
    /// Repulsion at contact, m/s².
    pub obstacle_gain: f64,
    /// Nominal navigator period, s.
    pub period: f64,
}

impl Default for SteeringLimits {
    fn default() -> Self {
        Self {
            v_max: 1.5,
            a_max: 1.0,
            slow_radius: 1.0,
            obstacle_radius: 1.5,
            obstacle_gain: 2.0,
            period: 1.0 / NAV_RATE,
        }
    }
}

/// A vertical cylinder to keep away from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavigationData {
    /// Position setpoint.
    pub position: Vec3,
    /// Feed-forward velocity.
    pub velocity: Vec3,
    /// Steering acceleration that produced `velocity`, fed forward too.
    pub acceleration: Vec3,
    pub course: f64,
    /// Feed-forward course rate, rad/s.
    pub course_rate: f64,
    /// Gimbal tilt that completes the framing at the setpoint.
    pub tilt: f64,
}

impl NavigationData {
    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).chain(self.acceleration.iter()).all(|v| v.is_finite())
            && self.course.is_finite()
            && self.course_rate.is_finite()
            && self.tilt.is_finite()
    }
}

fn clamp_norm(v: Vec3, max: f64) -> Vec3 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

/// Arrive behaviour: full speed far away, slowing linearly inside
/// `slow_radius`, as a force bounded by `a_max`.
pub fn steer_arrive(current_pos: &Vec3, current_vel: &Vec3, target_pos: &Vec3, limits: &SteeringLimits) -> Vec3 {
    let offset = target_pos - current_pos;
    let dist = offset.norm();
    let desired = if dist > 1e-12 {
        offset / dist * limits.v_max * (dist / limits.slow_radius).clamp(0.0, 1.0)
    } else {
        Vec3::zeros()
    };
    clamp_norm((desired - current_vel) / limits.period, limits.a_max)
}

/// Horizontal push away from every obstacle whose surface is within
/// `obstacle_radius`, growing quadratically toward contact.
pub fn avoid_obstacles(current_pos: &Vec3, obstacles: &[Obstacle], limits: &SteeringLimits) -> Vec3 {
    let mut force = Vec3::zeros();
    for o in obstacles {
        let mut away = current_pos - o.center;
        away.z = 0.0;
        let centre_dist = away.norm();
        let d = (centre_dist - o.radius).max(0.0);
        if d >= limits.obstacle_radius || centre_dist < 1e-12 {
            continue;
        }
        let k = 1.0 - d / limits.obstacle_radius;
        force += away / centre_dist * limits.obstacle_gain * k * k;
    }
    force
}

/// Lateral companion to [`avoid_obstacles`]: while the drone closes in on an
/// obstacle, it is pushed sideways so a head-on approach turns into a pass
/// instead of a stall. The push grows linearly from the edge of the range to
/// `obstacle_gain` at contact and with the closing speed up to `v_max`, toward
/// the side the drone already leans (left of its travel when dead ahead).
pub fn sidestep_obstacles(
    current_pos: &Vec3,
    current_vel: &Vec3,
    obstacles: &[Obstacle],
    limits: &SteeringLimits,
) -> Vec3 {
    let mut force = Vec3::zeros();
    let heading = Vec3::new(current_vel.x, current_vel.y, 0.0);
    for o in obstacles {
        let mut toward = o.center - current_pos;
        toward.z = 0.0;
        let centre_dist = toward.norm();
        let d = (centre_dist - o.radius).max(0.0);
        if d >= limits.obstacle_radius || centre_dist < 1e-12 || heading.dot(&toward) <= 0.0 {
            continue;
        }
        let k = 1.0 - d / limits.obstacle_radius;
        let closing = (heading.dot(&toward) / centre_dist / limits.v_max).min(1.0);
        // unit vector perpendicular to the line of sight, away from the
        // obstacle's side of the travel direction
        let lateral = Vec3::new(-toward.y, toward.x, 0.0) / centre_dist;
        let side = if heading.cross(&toward).z > 0.0 { -1.0 } else { 1.0 };
        force += side * lateral * limits.obstacle_gain * k * closing;
    }
    force
}

/// What the navigator carries from one step to the next.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NavigatorState {
    last_fix: Option<(f64, Vec3)>,
    /// Smoothed finite-difference velocity of the drone.
    pub velocity_estimate: Vec3,
    /// Last emitted feed-forward velocity.
    pub commanded: Option<Vec3>,
    last_course: Option<(f64, f64)>,
    /// Smoothed rate of the emitted course.
    pub course_rate: f64,
    /// Plan start, time and filtered position of the target.
    last_target: Option<(f64, f64, Vec3)>,
    /// Filtered velocity of the target pose.
    pub target_velocity: Vec3,
}

/// One navigator cycle.
///
/// Steering integrates from the previously commanded velocity, so successive
/// outputs never differ by more than `a_max·dt`; on the first cycle it starts
/// from the measured velocity.
pub fn navigation_step(
    state: &NavigatorState,
    snapshot: &TrackerSnapshot,
    plan: &TransitionPlan,
    t: f64,
    dt: f64,
    limits: &SteeringLimits,
) -> Result<(NavigationData, NavigatorState), TrajectoryError> {
    // 1. tracker
    let here = snapshot.drone.pose.position;
    let mut next = *state;
    if let Some((t_prev, p_prev)) = state.last_fix {
        let elapsed = snapshot.timestamp - t_prev;
        if elapsed > 0.0 {
            let raw = (here - p_prev) / elapsed;
            next.velocity_estimate = state.velocity_estimate * (1.0 - VELOCITY_SMOOTHING) + raw * VELOCITY_SMOOTHING;
        }
    }
    next.last_fix = Some((snapshot.timestamp, here));

    // 2. target, and how fast it moves (zero on a fresh plan)
    let target = target_pose_at(plan, t, snapshot)?;
    next.last_target = Some((plan.t0, snapshot.timestamp, target.position));
    match state.last_target {
        Some((t0, t_prev, p_prev)) if t0 == plan.t0 && snapshot.timestamp > t_prev => {
            let elapsed = snapshot.timestamp - t_prev;
            let predicted = p_prev + state.target_velocity * elapsed;
            let residual = target.position - predicted;
            next.last_target = Some((plan.t0, snapshot.timestamp, predicted + residual * TARGET_ALPHA));
            next.target_velocity = clamp_norm(state.target_velocity + residual * (TARGET_BETA / elapsed), limits.v_max);
        }
        Some((t0, _, _)) if t0 == plan.t0 => next.last_target = state.last_target,
        _ => next.target_velocity = Vec3::zeros(),
    }

    // 3. steering
    let current_vel = state.commanded.unwrap_or(next.velocity_estimate);
    // Subjects are obstacles too, but only inside the standoff the shot asks
    // for; otherwise a close shot would be pushed off its own framing.
    let mut avoid = Vec3::zeros();
    for actor in &snapshot.actors {
        let o = [Obstacle { center: actor.position, radius: ACTOR_RADIUS }];
        let subject = plan.subject_ids.contains(&actor.id);
        let mut range = limits.obstacle_radius;
        if subject {
            let standoff = (target.position - actor.position).xy().norm() - ACTOR_RADIUS;
            range = range.min(standoff);
        }
        if range <= 0.0 {
            continue;
        }
        let l = SteeringLimits { obstacle_radius: range, ..*limits };
        avoid += avoid_obstacles(&here, &o, &l);
        if !subject {
            avoid += sidestep_obstacles(&here, &current_vel, &o, &l);
        }
    }
    // avoidance first; arrival gets whatever acceleration budget remains
    let avoid = clamp_norm(avoid, limits.a_max);
    // arrive in the target's frame, so a moving target is pursued without lag
    let arrive = clamp_norm(
        steer_arrive(&here, &(current_vel - next.target_velocity), &target.position, limits),
        limits.a_max - avoid.norm(),
    );
    let force = avoid + arrive;

    // 4. setpoint
    let velocity = clamp_norm(current_vel + force * dt, limits.v_max);
    let position = here + velocity * dt;
    let subjects = plan.subjects(snapshot)?;
    let aims: Vec<Vec3> = subjects.iter().map(|a| a.aim_point()).collect();
    let screens = interpolate_properties(plan, t).screen;
    let (course, tilt) = frame_view(&position, &aims, &screens, &plan.intrinsics);
    next.commanded = Some(velocity);
    if let Some((t_prev, c_prev)) = state.last_course {
        let elapsed = snapshot.timestamp - t_prev;
        if elapsed > 0.0 {
            let raw = wrap_angle(course - c_prev) / elapsed;
            next.course_rate = state.course_rate * (1.0 - VELOCITY_SMOOTHING) + raw * VELOCITY_SMOOTHING;
        }
    }
    next.last_course = Some((snapshot.timestamp, course));
    let acceleration = (velocity - current_vel) / dt;
    Ok((NavigationData { position, velocity, acceleration, course, course_rate: next.course_rate, tilt }, next))
}

/// Stateful wrapper around [`navigation_step`].
#[derive(Debug, Clone, Default)]
pub struct Navigator {
    pub limits: SteeringLimits,
    pub state: NavigatorState,
}

impl Navigator {
    pub fn new(limits: SteeringLimits) -> Self {
        Self { limits, state: NavigatorState::default() }
    }

    pub fn step(
        &mut self,
        snapshot: &TrackerSnapshot,
        plan: &TransitionPlan,
        t: f64,
        dt: f64,
    ) -> Result<NavigationData, TrajectoryError> {
        let (nav, next) = navigation_step(&self.state, snapshot, plan, t, dt, &self.limits)?;
        self.state = next;
        Ok(nav)
    }

    /// Forgets the commanded velocity, e.g. after the drone was flown by
    /// something else.
    pub fn reset_command(&mut self) {
        self.state.commanded = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::{project, CameraIntrinsics, FramingProperties, ScreenPoint};
    use crate::world::{ActorState, DroneState, Pose};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn limits() -> SteeringLimits {
        SteeringLimits::default()
    }

    #[test]
    fn arrive_examples() {
        let l = limits();
        let p = Vec3::new(1.0, 2.0, 1.0);
        assert_eq!(steer_arrive(&p, &Vec3::zeros(), &p, &l), Vec3::zeros());

        let f = steer_arrive(&Vec3::zeros(), &Vec3::zeros(), &Vec3::new(5.0, 0.0, 0.0), &l);
        assert_abs_diff_eq!(f, Vec3::new(l.a_max.min(1.5 / l.period), 0.0, 0.0), epsilon = 1e-12);

        // half the slow radius asks for half the speed; with a huge a_max the
        // force reveals the desired velocity directly
        let loose = SteeringLimits { a_max: 1e9, ..l };
        let f = steer_arrive(&Vec3::zeros(), &Vec3::zeros(), &Vec3::new(0.5, 0.0, 0.0), &loose);
        assert_abs_diff_eq!(f.x * l.period, l.v_max / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn obstacle_examples() {
        let l = limits();
        let o = [Obstacle { center: Vec3::zeros(), radius: 0.5 }];
        assert_eq!(avoid_obstacles(&Vec3::new(5.0, 0.0, 1.0), &o, &l), Vec3::zeros());
        assert_eq!(avoid_obstacles(&Vec3::new(0.5 + l.obstacle_radius, 0.0, 1.0), &o, &l), Vec3::zeros());
        let f = avoid_obstacles(&Vec3::new(0.0, -(0.5 + l.obstacle_radius / 2.0), 1.3), &o, &l);
        assert_abs_diff_eq!(f, Vec3::new(0.0, -l.obstacle_gain / 4.0, 0.0), epsilon = 1e-12);
    }

    fn plan(actors: &[ActorState], props: FramingProperties) -> TransitionPlan {
        TransitionPlan {
            p_start: props.clone(),
            p_end: props,
            t0: 0.0,
            tf: 1.0,
            subject_ids: actors.iter().map(|a| a.id.clone()).collect(),
            intrinsics: CameraIntrinsics::default(),
        }
    }

    fn snapshot(t: f64, at: Vec3, actors: &[ActorState]) -> TrackerSnapshot {
        TrackerSnapshot {
            timestamp: t,
            drone: DroneState::at_rest(Pose::level(at, 0.0)),
            actors: actors.to_vec(),
        }
    }

    #[test]
    fn fixed_point_at_final_pose() {
        let actors = [ActorState::new("A", Vec3::zeros(), 0.0, 1.8)];
        // 1.04 m is a medium shot, well inside the subject's repulsion range
        for size in [3.0, 1.04] {
            let props = FramingProperties {
                screen: vec![ScreenPoint::zeros()],
                vertical: 0.0,
                profile: 0.0,
                size_distance: size,
            };
            let p = plan(&actors, props);
            let goal = target_pose_at(&p, 5.0, &snapshot(0.0, Vec3::zeros(), &actors)).unwrap();
            let mut nav = Navigator::new(limits());
            let dt = 1.0 / NAV_RATE;
            for i in 0..10 {
                let out = nav.step(&snapshot(5.0 + i as f64 * dt, goal.position, &actors), &p, 5.0, dt).unwrap();
                assert_abs_diff_eq!(out.position, goal.position, epsilon = 1e-12);
                assert_eq!(out.velocity, Vec3::zeros());
                assert_abs_diff_eq!(out.course, goal.course, epsilon = 1e-9);
            }
        }
    }

    /// Kinematic follower: the drone lands exactly on each setpoint.
    fn fly(start: Vec3, actors: &[ActorState], p: &TransitionPlan, seconds: f64) -> Vec<NavigationData> {
        let dt = 1.0 / NAV_RATE;
        let mut nav = Navigator::new(limits());
        let mut at = start;
        let mut out = Vec::new();
        for i in 0..(seconds * NAV_RATE) as usize {
            let t = i as f64 * dt;
            let n = nav.step(&snapshot(t, at, actors), p, t, dt).unwrap();
            at = n.position;
            out.push(n);
        }
        out
    }

    #[test]
    fn detours_around_actor_in_the_way() {
        // camera flies from one side of B to the other with B in between
        let actors = [
            ActorState::new("A", Vec3::new(0.0, 6.0, 0.0), 0.0, 1.8),
            ActorState::new("B", Vec3::new(0.0, 0.0, 0.0), 0.0, 1.8),
        ];
        let props = FramingProperties {
            screen: vec![ScreenPoint::zeros()],
            vertical: 0.0,
            profile: std::f64::consts::PI,
            size_distance: 9.0,
        };
        let p = plan(&actors[..1], props);
        let track = fly(Vec3::new(0.0, 3.0, 1.35), &actors, &p, 20.0);
        let closest = track
            .iter()
            .map(|n| (n.position.xy() - actors[1].position.xy()).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(closest > 0.4, "closest approach {closest}");
        let end = track.last().unwrap().position;
        let goal = target_pose_at(&p, 20.0, &snapshot(0.0, end, &actors)).unwrap().position;
        assert!((end - goal).norm() < 0.3, "{:?} vs {:?}", end, goal);
    }

    #[test]
    fn converges_monotonically_after_transient() {
        let actors = [ActorState::new("A", Vec3::zeros(), 0.3, 1.8)];
        let props = FramingProperties {
            screen: vec![ScreenPoint::new(0.2, 0.0)],
            vertical: 0.3,
            profile: -1.0,
            size_distance: 2.5,
        };
        let p = plan(&actors, props);
        let track = fly(Vec3::new(2.0, 3.0, 1.0), &actors, &p, 25.0);
        let steps: Vec<f64> = track.windows(2).map(|w| (w[1].position - w[0].position).norm()).collect();
        let tail = &steps[steps.len() - 150..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(*tail.last().unwrap() < 1e-3);
    }

    proptest! {
        #[test]
        fn speed_and_acceleration_bounded(
            sx in -3.0..3.0f64, sy in -3.0..3.0f64, sz in 0.5..2.5f64,
            profile in -3.0..3.0f64, size in 0.5..4.0f64,
        ) {
            let actors = [ActorState::new("A", Vec3::zeros(), 0.0, 1.8)];
            prop_assume!(Vec3::new(sx, sy, 0.0).norm() > 0.6);
            let props = FramingProperties {
                screen: vec![ScreenPoint::zeros()], vertical: 0.2, profile, size_distance: size,
            };
            let p = plan(&actors, props);
            let track = fly(Vec3::new(sx, sy, sz), &actors, &p, 6.0);
            let l = limits();
            for w in track.windows(2) {
                prop_assert!(w[1].velocity.norm() <= l.v_max + 1e-12);
                prop_assert!((w[1].velocity - w[0].velocity).norm() <= l.a_max / NAV_RATE + 1e-12);
            }
            // the setpoint camera always faces its subject
            for n in &track {
                let pose = Pose::new(n.position, n.course, n.tilt);
                prop_assert!(project(&pose, &actors[0].aim_point(), &p.intrinsics).point().is_some());
            }
        }
    }
}
