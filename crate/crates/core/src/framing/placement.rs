use std::f64::consts::{FRAC_PI_2, PI};

use super::projection::clamped_screen;
use super::{
    CameraIntrinsics, FramingError, FramingProperties, ManifoldKind, ManifoldPoint, ScreenPoint, MAX_VERTICAL,
};
use crate::world::{forward, wrap_angle, ActorState, Pose, Vec3};

/// Keeps toric cameras off the arc end points, where they would sit inside a
/// subject.
const MIN_ARC_ANGLE: f64 = 1e-3;

/// A placed camera with its surface coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub pose: Pose,
    pub manifold: ManifoldPoint,
}

/// Course from a horizontal direction vector; 0 when the vector is vertical.
fn direction_course(d: &Vec3) -> f64 {
    if d.x.hypot(d.y) <= 1e-15 {
        0.0
    } else {
        wrap_angle((-d.x).atan2(d.y))
    }
}

/// Course and tilt that put `point` at `screen` as seen from `camera`.
///
/// Exact whenever the required tilt is within the gimbal range.
fn aim_view(camera: &Vec3, point: &Vec3, screen: &ScreenPoint, intrinsics: &CameraIntrinsics) -> (f64, f64) {
    let w = point - camera;
    let rho = w.x.hypot(w.y);
    let dz = w.z;
    let heading = direction_course(&w);
    let ty = screen.y * intrinsics.tan_half_vfov();
    let k = screen.x * intrinsics.tan_half_hfov() / (1.0 + ty * ty).sqrt();
    let delta = if rho <= 1e-12 || k == 0.0 {
        0.0
    } else {
        let s2 = k * k * (rho * rho + dz * dz) / (rho * rho * (1.0 + k * k));
        k.signum() * s2.sqrt().min(1.0).asin()
    };
    let along = rho * delta.cos();
    let elevation = dz.atan2(along);
    (heading + delta, ty.atan() - elevation)
}

/// Horizontal screen errors count this much more than vertical ones when the
/// two subjects cannot both be framed exactly.
const X_WEIGHT: f64 = 10.0;

/// Weighted residuals of the subjects' screen positions for a candidate
/// orientation; points behind the image plane get a large penalty.
fn view_residuals(
    camera: &Vec3,
    course: f64,
    tilt: f64,
    points: &[Vec3],
    screens: &[ScreenPoint],
    intrinsics: &CameraIntrinsics,
) -> Vec<f64> {
    let pose = Pose { position: *camera, course, tilt };
    let (f, r, u) = (pose.view_forward(), pose.view_right(), pose.view_up());
    let mut out = Vec::with_capacity(points.len() * 2);
    for (p, s) in points.iter().zip(screens) {
        let w = p - camera;
        let depth = w.dot(&f).max(1e-6 * w.norm());
        out.push(X_WEIGHT * (w.dot(&r) / depth / intrinsics.tan_half_hfov() - s.x));
        out.push(w.dot(&u) / depth / intrinsics.tan_half_vfov() - s.y);
    }
    out
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Course and tilt best realizing the requested screen positions of the
/// given aim points from a fixed camera position.
///
/// One subject is solved in closed form. For two subjects a damped
/// Gauss-Newton least-squares fit over (course, tilt) balances all four
/// coordinates; it is then refined to match both horizontal positions
/// exactly, unless that costs more than [`Y_SLACK`] of extra vertical drift.
pub fn frame_view(
    camera: &Vec3,
    aim_points: &[Vec3],
    screens: &[ScreenPoint],
    intrinsics: &CameraIntrinsics,
) -> (f64, f64) {
    let (c, t) = least_squares_view(camera, aim_points, screens, intrinsics);
    if aim_points.len() == 2 {
        if let Some((ec, et)) = exact_x_view(camera, c, t, aim_points, screens, intrinsics) {
            let drift = |c: f64, t: f64| {
                screen_coords(camera, c, t, aim_points, intrinsics).map_or(f64::INFINITY, |s| {
                    s.iter().zip(screens).map(|(p, w)| (p.y - w.y).abs()).fold(0.0, f64::max)
                })
            };
            if drift(ec, et) <= drift(c, t) + Y_SLACK {
                return (wrap_angle(ec), et);
            }
        }
    }
    (c, t)
}

/// Extra vertical drift [`frame_view`] accepts in exchange for exact
/// horizontal positions. Off the framing surface exactness would otherwise
/// be bought with large gimbal swings.
pub const Y_SLACK: f64 = 0.1;

fn least_squares_view(
    camera: &Vec3,
    aim_points: &[Vec3],
    screens: &[ScreenPoint],
    intrinsics: &CameraIntrinsics,
) -> (f64, f64) {
    if aim_points.len() == 1 {
        let (c, t) = aim_view(camera, &aim_points[0], &screens[0], intrinsics);
        return (wrap_angle(c), t);
    }
    let n = aim_points.len() as f64;
    let centroid = aim_points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n;
    let mean_screen = screens.iter().fold(ScreenPoint::zeros(), |acc, s| acc + s) / n;
    let (mut c, mut t) = aim_view(camera, &centroid, &mean_screen, intrinsics);
    let mut res = view_residuals(camera, c, t, aim_points, screens, intrinsics);
    let mut cost = sum_sq(&res);
    let mut damping = 1e-9;
    for _ in 0..40 {
        if cost < 1e-26 {
            break;
        }
        let h = 1e-7;
        let rc = view_residuals(camera, c + h, t, aim_points, screens, intrinsics);
        let rt = view_residuals(camera, c, t + h, aim_points, screens, intrinsics);
        let jc: Vec<f64> = rc.iter().zip(&res).map(|(a, b)| (a - b) / h).collect();
        let jt: Vec<f64> = rt.iter().zip(&res).map(|(a, b)| (a - b) / h).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (a11, a12, a22) = (dot(&jc, &jc), dot(&jc, &jt), dot(&jt, &jt));
        let (g1, g2) = (dot(&jc, &res), dot(&jt, &res));
        let mut improved = false;
        for _ in 0..20 {
            let (m11, m22) = (a11 * (1.0 + damping) + 1e-15, a22 * (1.0 + damping) + 1e-15);
            let det = m11 * m22 - a12 * a12;
            if det.abs() < 1e-30 {
                damping *= 10.0;
                continue;
            }
            let dc = -(m22 * g1 - a12 * g2) / det;
            let dt = -(m11 * g2 - a12 * g1) / det;
            let cand = view_residuals(camera, c + dc, t + dt, aim_points, screens, intrinsics);
            let cand_cost = sum_sq(&cand);
            if cand_cost < cost {
                c += dc;
                t += dt;
                res = cand;
                cost = cand_cost;
                damping = (damping / 10.0).max(1e-12);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (wrap_angle(c), t)
}

/// Screen coordinates of each point for a candidate orientation, or `None`
/// when one lies behind the camera.
fn screen_coords(
    camera: &Vec3,
    course: f64,
    tilt: f64,
    points: &[Vec3],
    intrinsics: &CameraIntrinsics,
) -> Option<Vec<ScreenPoint>> {
    let pose = Pose { position: *camera, course, tilt };
    let (f, r, u) = (pose.view_forward(), pose.view_right(), pose.view_up());
    points
        .iter()
        .map(|p| {
            let w = p - camera;
            let depth = w.dot(&f);
            (depth > 1e-9).then(|| {
                ScreenPoint::new(
                    w.dot(&r) / depth / intrinsics.tan_half_hfov(),
                    w.dot(&u) / depth / intrinsics.tan_half_vfov(),
                )
            })
        })
        .collect()
}

/// How far from the frame centre a subject may drift vertically so that its
/// horizontal position can be matched exactly.
pub const Y_LIMIT: f64 = 0.8;

/// Newton refinement that matches both horizontal positions exactly, leaving
/// the vertical ones free. Gives up when it would need more tilt than the
/// gimbal has or would push a subject out of frame.
fn exact_x_view(
    camera: &Vec3,
    course: f64,
    tilt: f64,
    points: &[Vec3],
    screens: &[ScreenPoint],
    intrinsics: &CameraIntrinsics,
) -> Option<(f64, f64)> {
    let residual = |c: f64, t: f64| {
        screen_coords(camera, c, t, points, intrinsics)
            .map(|s| [s[0].x - screens[0].x, s[1].x - screens[1].x])
    };
    let (mut c, mut t) = (course, tilt);
    let mut r = residual(c, t)?;
    for _ in 0..30 {
        if r[0].abs().max(r[1].abs()) < 1e-12 {
            break;
        }
        let h = 1e-7;
        let rc = residual(c + h, t)?;
        let rt = residual(c, t + h)?;
        let (j11, j21) = ((rc[0] - r[0]) / h, (rc[1] - r[1]) / h);
        let (j12, j22) = ((rt[0] - r[0]) / h, (rt[1] - r[1]) / h);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-12 {
            return None;
        }
        let dc = -(j22 * r[0] - j12 * r[1]) / det;
        let dt = -(j11 * r[1] - j21 * r[0]) / det;
        // full steps only near the solution; halve until the residual drops
        let mut step = 1.0;
        let before = r[0].abs().max(r[1].abs());
        loop {
            if let Some(nr) = residual(c + step * dc, t + step * dt) {
                if nr[0].abs().max(nr[1].abs()) < before {
                    c += step * dc;
                    t += step * dt;
                    r = nr;
                    break;
                }
            }
            step /= 2.0;
            if step < 1e-4 {
                return None;
            }
        }
    }
    if r[0].abs().max(r[1].abs()) > 1e-9 || t.abs() > crate::world::MAX_TILT {
        return None;
    }
    let s = screen_coords(camera, c, t, points, intrinsics)?;
    s.iter().all(|p| p.y.abs() <= Y_LIMIT).then_some((c, t))
}

/// Camera on the sphere of radius `size_distance` around the subject's aim point.
///
/// The camera position depends only on profile, vertical angle and size; the
/// screen position is realized by turning the view.
pub fn sphere_place(
    actor: &ActorState,
    props: &FramingProperties,
    intrinsics: &CameraIntrinsics,
) -> Result<Pose, FramingError> {
    sphere_placement(actor, props, intrinsics).map(|p| p.pose)
}

fn sphere_placement(
    actor: &ActorState,
    props: &FramingProperties,
    intrinsics: &CameraIntrinsics,
) -> Result<Placement, FramingError> {
    if props.screen.len() != 1 {
        return Err(FramingError::Arity { expected: 1, got: props.screen.len() });
    }
    let aim = actor.aim_point();
    let azimuth = wrap_angle(actor.facing + props.profile);
    let (sv, cv) = props.vertical.sin_cos();
    let offset = props.size_distance * (cv * forward(azimuth) + Vec3::new(0.0, 0.0, sv));
    let position = aim + offset;
    let (course, tilt) = frame_view(&position, &[aim], &props.screen, intrinsics);
    Ok(Placement {
        pose: Pose::new(position, course, tilt),
        manifold: ManifoldPoint {
            kind: ManifoldKind::Sphere,
            u: azimuth,
            v: props.vertical,
            scale: props.size_distance,
        },
    })
}

/// Angle the two aim points must subtend at the camera for them to appear at
/// the given horizontal screen positions.
pub fn toric_alpha(screen_a_x: f64, screen_b_x: f64, intrinsics: &CameraIntrinsics) -> Result<f64, FramingError> {
    if screen_a_x == screen_b_x {
        return Err(FramingError::DegenerateToric);
    }
    let th = intrinsics.tan_half_hfov();
    Ok(((screen_a_x * th).atan() - (screen_b_x * th).atan()).abs())
}

/// Range from the first subject to a camera at arc angle `theta` on the
/// toric arc with chord `chord` and subtended angle `alpha`.
fn range_to_first(theta: f64, chord: f64, alpha: f64) -> f64 {
    chord * (alpha + theta).sin() / alpha.sin()
}

/// Arc angle (at the first subject, between the second subject and the
/// camera) for a requested size distance.
///
/// Distances up to the arc's farthest point place the camera behind the first
/// subject; larger ones continue monotonically past that point toward the
/// second subject, so the mapping is invertible over the whole arc.
pub fn arc_angle_for_size(size_distance: f64, chord: f64, alpha: f64) -> f64 {
    let upper = PI - alpha - MIN_ARC_ANGLE;
    let peak_theta = (FRAC_PI_2 - alpha).max(0.0);
    let peak = range_to_first(peak_theta, chord, alpha);
    let theta = if size_distance <= peak {
        let k = (size_distance * alpha.sin() / chord).clamp(0.0, 1.0);
        PI - alpha - k.asin()
    } else if peak_theta == 0.0 {
        MIN_ARC_ANGLE
    } else {
        let mirrored = 2.0 * peak - size_distance;
        let k = (mirrored * alpha.sin() / chord).clamp(alpha.sin(), 1.0);
        k.asin() - alpha
    };
    theta.clamp(MIN_ARC_ANGLE, upper.max(MIN_ARC_ANGLE))
}

/// Inverse of [`arc_angle_for_size`].
pub fn size_for_arc_angle(theta: f64, chord: f64, alpha: f64) -> f64 {
    let peak_theta = (FRAC_PI_2 - alpha).max(0.0);
    if theta >= peak_theta {
        range_to_first(theta, chord, alpha)
    } else {
        2.0 * range_to_first(peak_theta, chord, alpha) - range_to_first(theta, chord, alpha)
    }
}

struct PairFrame {
    first: Vec3,
    second: Vec3,
    chord: f64,
    axis: Vec3,
    up: Vec3,
    /// Horizontal normal on the side where the first subject appears left.
    side: Vec3,
}

fn pair_frame(first: &ActorState, second: &ActorState) -> Result<PairFrame, FramingError> {
    let (a, b) = (first.aim_point(), second.aim_point());
    let d = b - a;
    let chord = d.norm();
    if chord < 1e-9 {
        return Err(FramingError::CoincidentActors);
    }
    let axis = d / chord;
    let z = Vec3::z();
    let up = z - z.dot(&axis) * axis;
    if up.norm() < 1e-9 {
        return Err(FramingError::CoincidentActors);
    }
    let up = up.normalize();
    Ok(PairFrame { first: a, second: b, chord, axis, up, side: axis.cross(&up) })
}

/// Camera on the toric surface of the two subjects.
///
/// The subtended angle comes from the requested screen x positions; the side
/// of the subject axis is the one where the first subject appears at its
/// requested side of the frame; the vertical angle rotates the generating arc
/// about the axis; the size distance picks the point on the arc by its range
/// to the first subject.
pub fn toric_place(
    first: &ActorState,
    second: &ActorState,
    props: &FramingProperties,
    intrinsics: &CameraIntrinsics,
) -> Result<Pose, FramingError> {
    toric_placement(first, second, props, intrinsics).map(|p| p.pose)
}

fn toric_placement(
    first: &ActorState,
    second: &ActorState,
    props: &FramingProperties,
    intrinsics: &CameraIntrinsics,
) -> Result<Placement, FramingError> {
    if props.screen.len() != 2 {
        return Err(FramingError::Arity { expected: 2, got: props.screen.len() });
    }
    let (xa, xb) = (props.screen[0].x, props.screen[1].x);
    let alpha = toric_alpha(xa, xb, intrinsics)?;
    let frame = pair_frame(first, second)?;
    let side = if xa < xb { frame.side } else { -frame.side };
    let theta = arc_angle_for_size(props.size_distance, frame.chord, alpha);
    let range = range_to_first(theta, frame.chord, alpha);
    let aims = [frame.first, frame.second];
    let position_at = |phi: f64| {
        let (sp, cp) = phi.sin_cos();
        let normal = cp * side + sp * frame.up;
        frame.first + range * (theta.cos() * frame.axis + theta.sin() * normal)
    };

    // Without roll, a camera raised off the subjects' plane can only hold
    // both horizontal positions near the arc's apex. Elsewhere the vertical
    // angle gives way, step by step, until the composition is exact.
    let mut fallback = None;
    for step in 0..=VERTICAL_STEPS {
        let phi = props.vertical * (1.0 - step as f64 / VERTICAL_STEPS as f64);
        let position = position_at(phi);
        let (c, t) = least_squares_view(&position, &aims, &props.screen, intrinsics);
        let placement = |course: f64, tilt: f64| Placement {
            pose: Pose::new(position, wrap_angle(course), tilt),
            manifold: ManifoldPoint {
                kind: ManifoldKind::Toric,
                u: theta,
                v: phi,
                scale: alpha,
            },
        };
        if let Some((ec, et)) = exact_x_view(&position, c, t, &aims, &props.screen, intrinsics) {
            return Ok(placement(ec, et));
        }
        fallback = Some(placement(c, t));
    }
    Ok(fallback.expect("at least one vertical step"))
}

/// Number of equal steps in which the vertical angle of a two-subject shot
/// is relaxed toward eye level.
const VERTICAL_STEPS: usize = 12;

/// Places the camera for one or two subjects (in subject order).
pub fn place(
    subjects: &[&ActorState],
    props: &FramingProperties,
    intrinsics: &CameraIntrinsics,
) -> Result<Placement, FramingError> {
    match subjects {
        [one] => sphere_placement(one, props, intrinsics),
        [a, b] => toric_placement(a, b, props, intrinsics),
        _ => Err(FramingError::Arity { expected: props.screen.len(), got: subjects.len() }),
    }
}

/// Framing properties describing where an existing camera sits relative to
/// one or two subjects; re-placing from the result reproduces the camera
/// position.
pub fn world_to_manifold(
    camera: &Pose,
    subjects: &[&ActorState],
    intrinsics: &CameraIntrinsics,
) -> Result<FramingProperties, FramingError> {
    match subjects {
        [one] => {
            let aim = one.aim_point();
            let w = camera.position - aim;
            let range = w.norm();
            if range < 1e-9 {
                return Err(FramingError::CameraAtAimPoint);
            }
            Ok(FramingProperties {
                screen: vec![clamped_screen(camera, &aim, intrinsics)],
                vertical: (w.z / range).clamp(-1.0, 1.0).asin().clamp(-MAX_VERTICAL, MAX_VERTICAL),
                profile: wrap_angle(direction_course(&w) - one.facing),
                size_distance: range,
            })
        }
        [first, second] => {
            let frame = pair_frame(first, second)?;
            let to_first = frame.first - camera.position;
            let to_second = frame.second - camera.position;
            if to_first.norm() < 1e-9 || to_second.norm() < 1e-9 {
                return Err(FramingError::CameraAtAimPoint);
            }
            let w = camera.position - frame.first;
            let perp = w - w.dot(&frame.axis) * frame.axis;
            let lateral = perp.dot(&frame.side);
            let first_left = lateral >= 0.0;
            let vertical = perp
                .dot(&frame.up)
                .atan2(lateral.abs())
                .clamp(-MAX_VERTICAL, MAX_VERTICAL);
            let theta = (w.dot(&frame.axis) / w.norm()).clamp(-1.0, 1.0).acos();
            let alpha = to_first.angle(&to_second);

            let th = intrinsics.tan_half_hfov();
            let seen_a = clamped_screen(camera, &frame.first, intrinsics);
            let seen_b = clamped_screen(camera, &frame.second, intrinsics);
            let mid = ((seen_a.x * th).atan() + (seen_b.x * th).atan()) / 2.0;
            let half = if first_left { alpha / 2.0 } else { -alpha / 2.0 };
            let xa = ((mid - half).tan() / th).clamp(-1.0, 1.0);
            let xb = ((mid + half).tan() / th).clamp(-1.0, 1.0);

            Ok(FramingProperties {
                screen: vec![ScreenPoint::new(xa, seen_a.y), ScreenPoint::new(xb, seen_b.y)],
                vertical,
                profile: wrap_angle(direction_course(&w) - first.facing),
                size_distance: size_for_arc_angle(theta, frame.chord, alpha),
            })
        }
        _ => Err(FramingError::Arity { expected: 1, got: subjects.len() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::{project, resolve_spec, size_to_distance, Projection};
    use crate::psl::{parse, ShotSize};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::default()
    }

    fn single(profile_deg: f64, vertical_deg: f64, sx: f64, sy: f64, size: f64) -> FramingProperties {
        FramingProperties {
            screen: vec![ScreenPoint::new(sx, sy)],
            vertical: vertical_deg.to_radians(),
            profile: profile_deg.to_radians(),
            size_distance: size,
        }
    }

    fn screen_of(pose: &Pose, p: &Vec3) -> ScreenPoint {
        project(pose, p, &intr()).point().expect("in front")
    }

    // Circumradius from side lengths, independent of any angle computation.
    fn circumradius(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
        let (ab, bc, ca) = ((b - a).norm(), (c - b).norm(), (a - c).norm());
        let area = (b - a).cross(&(c - a)).norm() / 2.0;
        ab * bc * ca / (4.0 * area)
    }

    #[test]
    fn sphere_front_medium_shot() {
        let actor = ActorState::new("A", Vec3::zeros(), 0.0, 1.8);
        let d = size_to_distance(ShotSize::MediumShot, &intr());
        let pose = sphere_place(&actor, &single(0.0, 0.0, 0.0, 0.0, d), &intr()).unwrap();
        assert_abs_diff_eq!(pose.position.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pose.position.y, 1.0392, epsilon = 1e-4);
        assert_abs_diff_eq!(pose.position.z, 1.35, epsilon = 1e-12);
        assert_abs_diff_eq!(pose.course.abs(), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(pose.tilt, 0.0, epsilon = 1e-12);
        let s = screen_of(&pose, &actor.aim_point());
        assert!(s.norm() < 1e-9);

        // a frame-height segment through the aim point spans the image exactly
        let half = 0.5 * crate::framing::frame_height(ShotSize::MediumShot);
        let top = screen_of(&pose, &(actor.aim_point() + Vec3::new(0.0, 0.0, half)));
        let bottom = screen_of(&pose, &(actor.aim_point() - Vec3::new(0.0, 0.0, half)));
        assert_abs_diff_eq!(top.y, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(bottom.y, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn sphere_high_angle() {
        let actor = ActorState::new("A", Vec3::zeros(), 0.0, 1.8);
        let d = size_to_distance(ShotSize::MediumShot, &intr());
        let pose = sphere_place(&actor, &single(0.0, 30.0, 0.0, 0.0, d), &intr()).unwrap();
        assert_abs_diff_eq!(pose.position.z, 1.35 + d * 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pose.position.z, 1.8696, epsilon = 1e-4);
        assert_abs_diff_eq!(pose.position.xy().norm(), 0.9000, epsilon = 1e-4);
        assert!(screen_of(&pose, &actor.aim_point()).norm() < 1e-9);
        assert_abs_diff_eq!(pose.tilt, 30f64.to_radians(), epsilon = 1e-12);
    }

    #[test]
    fn screen_offset_turns_without_moving() {
        let actor = ActorState::new("A", Vec3::new(0.5, -1.0, 0.0), 0.3, 1.7);
        let center = sphere_place(&actor, &single(20.0, 0.0, 0.0, 0.0, 1.5), &intr()).unwrap();
        let left = sphere_place(&actor, &single(20.0, 0.0, -0.3, 0.0, 1.5), &intr()).unwrap();
        assert_eq!(center.position, left.position);
        let turn = wrap_angle(left.course - center.course).abs();
        assert_abs_diff_eq!(turn, (0.3 * intr().tan_half_hfov()).atan(), epsilon = 1e-12);
        let s = screen_of(&left, &actor.aim_point());
        assert_abs_diff_eq!(s.x, -0.3, epsilon = 1e-12);
    }

    #[test]
    fn alpha_examples() {
        let a = toric_alpha(0.3, -0.3, &intr()).unwrap();
        assert_abs_diff_eq!(a, 2.0 * (0.3 * 1.026_400_8f64).atan(), epsilon = 1e-6);
        assert_abs_diff_eq!(a.to_degrees(), 34.23, epsilon = 0.01);
        assert_eq!(toric_alpha(0.2, 0.2, &intr()), Err(FramingError::DegenerateToric));
        assert!(toric_alpha(0.6, -0.6, &intr()).unwrap() > a);
    }

    fn pair(a: Vec3, b: Vec3) -> (ActorState, ActorState) {
        // feet placed so the aim points land exactly on `a` and `b`
        let lift = Vec3::new(0.0, 0.0, 0.75 * 1.8);
        (ActorState::new("A", a - lift, 0.0, 1.8), ActorState::new("B", b - lift, PI, 1.8))
    }

    fn two(xa: f64, xb: f64, vertical_deg: f64, size: f64) -> FramingProperties {
        FramingProperties {
            screen: vec![ScreenPoint::new(xa, 0.0), ScreenPoint::new(xb, 0.0)],
            vertical: vertical_deg.to_radians(),
            profile: 0.0,
            size_distance: size,
        }
    }

    #[test]
    fn toric_unit_pair() {
        let (a, b) = pair(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let d = size_to_distance(ShotSize::MediumShot, &intr());
        let pose = toric_place(&a, &b, &two(-0.3, 0.3, 0.0, d), &intr()).unwrap();
        let r = circumradius(&a.aim_point(), &b.aim_point(), &pose.position);
        let alpha = toric_alpha(-0.3, 0.3, &intr()).unwrap();
        assert_abs_diff_eq!(r, 2.0 / (2.0 * alpha.sin()), epsilon = 1e-9);
        assert_abs_diff_eq!(r, 1.7779, epsilon = 5e-4);
        assert_abs_diff_eq!(pose.position.z, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((pose.position - a.aim_point()).norm(), d, epsilon = 1e-9);
        let sa = screen_of(&pose, &a.aim_point());
        let sb = screen_of(&pose, &b.aim_point());
        assert!((sa.x + 0.3).abs() < 0.02 && (sb.x - 0.3).abs() < 0.02, "{sa:?} {sb:?}");
        assert!(sa.y.abs() < 0.02 && sb.y.abs() < 0.02);
    }

    #[test]
    fn reverse_over_the_shoulder_mirrors_along_the_axis() {
        let scene = vec![
            ActorState::new("A", Vec3::new(-1.0, 0.0, 0.0), -PI / 2.0, 1.8),
            ActorState::new("B", Vec3::new(1.0, 0.0, 0.0), PI / 2.0, 1.8),
        ];
        let (a, b) = (&scene[0], &scene[1]);
        let first = resolve_spec(&parse("MS on A screenleft and B screenright").unwrap(), &scene, &intr()).unwrap();
        let second = resolve_spec(&parse("MS on B screenright and A screenleft").unwrap(), &scene, &intr()).unwrap();
        let p1 = toric_place(a, b, &first, &intr()).unwrap();
        let p2 = toric_place(b, a, &second, &intr()).unwrap();
        let mid = (a.aim_point() + b.aim_point()) / 2.0;
        let along = |p: &Pose| (p.position - mid).dot(&(a.aim_point() - mid));
        assert!(along(&p1) > 0.0 && along(&p2) < 0.0, "camera moves from A's end to B's end");
        // same side of the line of action: A stays screen left
        let side = |p: &Pose| (a.aim_point() - p.position).cross(&(b.aim_point() - p.position)).z;
        assert!(side(&p1) < 0.0 && side(&p2) < 0.0);
        for p in [&p1, &p2] {
            assert!(screen_of(p, &a.aim_point()).x < screen_of(p, &b.aim_point()).x);
        }
    }

    #[test]
    fn world_to_manifold_examples() {
        let actor = ActorState::new("A", Vec3::new(1.0, 1.0, 0.0), 0.5, 1.8);
        let behind = actor.aim_point() - 2.0 * forward(actor.facing);
        let course = crate::world::heading_between(&behind, &actor.aim_point()).unwrap();
        let props = world_to_manifold(&Pose::level(behind, course), &[&actor], &intr()).unwrap();
        assert_abs_diff_eq!(props.profile.abs(), PI, epsilon = 1e-9);
        assert_abs_diff_eq!(props.size_distance, 2.0, epsilon = 1e-12);

        let at_aim = Pose::level(actor.aim_point(), 0.0);
        assert_eq!(
            world_to_manifold(&at_aim, &[&actor], &intr()),
            Err(FramingError::CameraAtAimPoint)
        );
    }

    #[test]
    fn arc_angle_mapping_inverts() {
        for &(chord, alpha) in &[(2.0, 0.6), (3.5, 1.2), (1.0, 1.7), (5.0, 0.2)] {
            for i in 1..200 {
                let theta = MIN_ARC_ANGLE + (PI - alpha - 2.0 * MIN_ARC_ANGLE) * i as f64 / 200.0;
                let d = size_for_arc_angle(theta, chord, alpha);
                assert_abs_diff_eq!(arc_angle_for_size(d, chord, alpha), theta, epsilon = 1e-7);
            }
        }
    }

    fn realizable_single() -> impl Strategy<Value = (ActorState, FramingProperties)> {
        (
            (-3.0..3.0f64, -3.0..3.0f64, -PI..PI, 1.4..2.0f64),
            (-PI..PI, -0.5..0.5f64, -1.0..1.0f64, -0.4..0.4f64, 0.3..5.0f64),
        )
            .prop_map(|((x, y, facing, h), (profile, vertical, sx, sy, d))| {
                (
                    ActorState::new("A", Vec3::new(x, y, 0.0), facing, h),
                    FramingProperties {
                        screen: vec![ScreenPoint::new(sx, sy)],
                        vertical,
                        profile,
                        size_distance: d,
                    },
                )
            })
    }

    proptest! {
        #[test]
        fn sphere_contracts((actor, props) in realizable_single()) {
            let aim = actor.aim_point();
            let (sv, cv) = props.vertical.sin_cos();
            let at = aim + props.size_distance * (cv * forward(actor.facing + props.profile) + Vec3::new(0.0, 0.0, sv));
            prop_assume!(frame_view(&at, &[aim], &props.screen, &intr()).1.abs() <= crate::world::MAX_TILT);
            let pose = sphere_place(&actor, &props, &intr()).unwrap();
            prop_assert!(((pose.position - aim).norm() - props.size_distance).abs() < 1e-9);
            let s = screen_of(&pose, &aim);
            prop_assert!((s - props.screen[0]).norm() < 1e-6, "{:?} vs {:?}", s, props.screen[0]);

            let centred = FramingProperties { screen: vec![ScreenPoint::zeros()], ..props.clone() };
            let other = sphere_place(&actor, &centred, &intr()).unwrap();
            prop_assert!((other.position - pose.position).norm() < 1e-12);

            let back = world_to_manifold(&pose, &[&actor], &intr()).unwrap();
            prop_assert!((back.size_distance - props.size_distance).abs() < 1e-6);
            prop_assert!((back.vertical - props.vertical).abs() < 1e-6);
            prop_assert!(wrap_angle(back.profile - props.profile).abs() < 1e-6);
            prop_assert!((back.screen[0] - props.screen[0]).norm() < 1e-6);
        }

        #[test]
        fn sphere_replace_from_random_camera(
            x in -4.0..4.0f64, y in -4.0..4.0f64, z in 0.3..3.0f64,
            course in -PI..PI, tilt in -0.3..0.3f64,
        ) {
            let actor = ActorState::new("A", Vec3::new(0.2, -0.1, 0.0), 0.4, 1.8);
            let cam = Pose::new(Vec3::new(x, y, z), course, tilt);
            prop_assume!((cam.position - actor.aim_point()).norm() > 0.2);
            let w = cam.position - actor.aim_point();
            prop_assume!((w.z / w.norm()).asin().abs() < MAX_VERTICAL);
            let props = world_to_manifold(&cam, &[&actor], &intr()).unwrap();
            let again = sphere_place(&actor, &props, &intr()).unwrap();
            prop_assert!((again.position - cam.position).norm() < 1e-6);
        }

        #[test]
        fn toric_contracts(
            ax in -3.0..3.0f64, ay in -3.0..3.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64,
            ha in 1.5..2.0f64, hb in 1.5..2.0f64,
            xa in -0.8..0.8f64, gap in 0.1..0.8f64, flip in proptest::bool::ANY,
            vertical in -0.5..0.5f64, d in 0.5..5.0f64,
        ) {
            let a = ActorState::new("A", Vec3::new(ax, ay, 0.0), 0.0, ha);
            let b = ActorState::new("B", Vec3::new(bx, by, 0.0), 0.0, hb);
            prop_assume!((a.position - b.position).norm() > 1.0);
            let xb = if flip { (xa - gap).max(-0.9) } else { (xa + gap).min(0.9) };
            prop_assume!((xa - xb).abs() > 0.05);
            let props = FramingProperties {
                screen: vec![ScreenPoint::new(xa, 0.0), ScreenPoint::new(xb, 0.0)],
                vertical, profile: 0.0, size_distance: d,
            };
            let pose = toric_place(&a, &b, &props, &intr()).unwrap();
            let alpha = toric_alpha(xa, xb, &intr()).unwrap();
            let seen = (a.aim_point() - pose.position).angle(&(b.aim_point() - pose.position));
            prop_assert!((seen - alpha).abs() < 1e-6);
            for (actor, target) in [(&a, &props.screen[0]), (&b, &props.screen[1])] {
                let s = project(&pose, &actor.aim_point(), &intr());
                let Projection::Front(s) = s else { return Err(TestCaseError::fail("behind")) };
                prop_assert!((s.x - target.x).abs() < 0.02, "x {} vs {}", s.x, target.x);
            }
            let back = world_to_manifold(&pose, &[&a, &b], &intr()).unwrap();
            let again = toric_place(&a, &b, &back, &intr()).unwrap();
            prop_assert!((again.position - pose.position).norm() < 1e-6);
        }
    }
}
