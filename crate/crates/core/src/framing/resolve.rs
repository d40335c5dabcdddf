use super::{CameraIntrinsics, FramingError, FramingProperties, ScreenPoint};
use crate::psl::{ModifierCategory, Profile, ScreenPosition, ShotSentence, ShotSize, VerticalAngle};
use crate::world::ActorState;

/// Image height, in meters at the subject, that each shot size frames.
pub fn frame_height(size: ShotSize) -> f64 {
    match size {
        ShotSize::CloseUp => 0.5,
        ShotSize::MediumCloseUp => 0.8,
        ShotSize::MediumShot => 1.2,
        ShotSize::MediumLongShot => 1.8,
        ShotSize::FullShot => 2.4,
        ShotSize::LongShot => 4.8,
    }
}

/// Camera range at which the shot size fills the vertical field of view.
pub fn size_to_distance(size: ShotSize, intrinsics: &CameraIntrinsics) -> f64 {
    frame_height(size) / (2.0 * intrinsics.tan_half_vfov())
}

pub fn profile_angle(profile: Profile) -> f64 {
    let degrees: f64 = match profile {
        Profile::Front => 0.0,
        Profile::ThreeQuarterLeft => 45.0,
        Profile::Left => 90.0,
        Profile::ThreeQuarterBackLeft => 135.0,
        Profile::Back => 180.0,
        Profile::ThreeQuarterBackRight => -135.0,
        Profile::Right => -90.0,
        Profile::ThreeQuarterRight => -45.0,
    };
    degrees.to_radians()
}

pub fn vertical_angle(vertical: VerticalAngle) -> f64 {
    match vertical {
        VerticalAngle::High => 30f64.to_radians(),
        VerticalAngle::Eye => 0.0,
        VerticalAngle::Low => -30f64.to_radians(),
    }
}

pub fn screen_x(screen: ScreenPosition) -> f64 {
    match screen {
        ScreenPosition::Left => -0.3,
        ScreenPosition::Center => 0.0,
        ScreenPosition::Right => 0.3,
    }
}

/// A constraint from the sentence that lost a conflict and was replaced by
/// its default.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscardedConstraint {
    pub actor_id: String,
    pub category: ModifierCategory,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub properties: FramingProperties,
    pub discarded: Vec<DiscardedConstraint>,
}

/// Assigns exact values to every framing property of a sentence.
pub fn resolve_spec(
    sentence: &ShotSentence,
    scene: &[ActorState],
    intrinsics: &CameraIntrinsics,
) -> Result<FramingProperties, FramingError> {
    resolve_spec_detailed(sentence, scene, intrinsics).map(|r| r.properties)
}

/// Like [`resolve_spec`], also reporting which constraints were discarded.
///
/// Constraints are applied in sentence order; a later one that contradicts an
/// earlier one is dropped and its default substituted. Defaults: front
/// profile, eye-level, centred single subject, pairs at (screenleft,
/// screenright). In a two-subject shot the horizontal position on the toric
/// surface is fixed by the size (which precedes every modifier), so profile
/// modifiers there are discarded.
pub fn resolve_spec_detailed(
    sentence: &ShotSentence,
    scene: &[ActorState],
    intrinsics: &CameraIntrinsics,
) -> Result<Resolution, FramingError> {
    for (i, clause) in sentence.subjects.iter().enumerate() {
        if !scene.iter().any(|a| a.id == clause.actor_id) {
            return Err(FramingError::UnknownActor(clause.actor_id.clone()));
        }
        if sentence.subjects[..i].iter().any(|c| c.actor_id == clause.actor_id) {
            return Err(FramingError::DuplicateSubject(clause.actor_id.clone()));
        }
    }

    let size_distance = size_to_distance(sentence.size, intrinsics);
    let mut discarded = Vec::new();

    let properties = match sentence.subjects.as_slice() {
        [only] => FramingProperties {
            screen: vec![ScreenPoint::new(only.screen.map_or(0.0, screen_x), 0.0)],
            vertical: only.vertical.map_or(0.0, vertical_angle),
            profile: only.profile.map_or(0.0, profile_angle),
            size_distance,
        },
        [first, second] => {
            for clause in [first, second] {
                if clause.profile.is_some() {
                    discarded.push(DiscardedConstraint {
                        actor_id: clause.actor_id.clone(),
                        category: ModifierCategory::Profile,
                        reason: "toric position already fixed by the shot size",
                    });
                }
            }

            let vertical = match (first.vertical, second.vertical) {
                (Some(a), Some(b)) => {
                    if a != b {
                        discarded.push(DiscardedConstraint {
                            actor_id: second.actor_id.clone(),
                            category: ModifierCategory::Vertical,
                            reason: "vertical angle already set by the first subject",
                        });
                    }
                    vertical_angle(a)
                }
                (a, b) => a.or(b).map_or(0.0, vertical_angle),
            };

            let first_x = first.screen.map(screen_x);
            let mut second_x = second.screen.map(screen_x);
            if first_x.is_some() && first_x == second_x {
                discarded.push(DiscardedConstraint {
                    actor_id: second.actor_id.clone(),
                    category: ModifierCategory::Screen,
                    reason: "screen position already taken by the first subject",
                });
                second_x = None;
            }
            let (xa, xb) = match (first_x, second_x) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) => (a, pick_free(a, [0.3, -0.3])),
                (None, Some(b)) => (pick_free(b, [-0.3, 0.3]), b),
                (None, None) => (-0.3, 0.3),
            };

            FramingProperties {
                screen: vec![ScreenPoint::new(xa, 0.0), ScreenPoint::new(xb, 0.0)],
                vertical,
                profile: 0.0,
                size_distance,
            }
        }
        _ => return Err(FramingError::Arity { expected: 2, got: sentence.subjects.len() }),
    };

    Ok(Resolution { properties, discarded })
}

fn pick_free(taken: f64, candidates: [f64; 2]) -> f64 {
    if candidates[0] != taken {
        candidates[0]
    } else {
        candidates[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psl::parse;
    use crate::world::Vec3;
    use approx::assert_abs_diff_eq;

    fn scene() -> Vec<ActorState> {
        vec![
            ActorState::new("A", Vec3::zeros(), 0.0, 1.8),
            ActorState::new("B", Vec3::new(2.0, 0.0, 0.0), 0.0, 1.8),
        ]
    }

    fn resolve(text: &str) -> Resolution {
        resolve_spec_detailed(&parse(text).unwrap(), &scene(), &CameraIntrinsics::default()).unwrap()
    }

    #[test]
    fn defaults_fill_unspecified() {
        let p = resolve("MS on A front").properties;
        assert_eq!(p.profile, 0.0);
        assert_eq!(p.vertical, 0.0);
        assert_eq!(p.screen, vec![ScreenPoint::new(0.0, 0.0)]);
        assert_abs_diff_eq!(p.size_distance, 1.2 / (2.0 * 30f64.to_radians().tan()), epsilon = 1e-12);
    }

    #[test]
    fn three_quarter_left() {
        let p = resolve("MS on A 34left screencenter").properties;
        assert_abs_diff_eq!(p.profile, 45f64.to_radians(), epsilon = 1e-12);
        assert_eq!(p.screen[0], ScreenPoint::new(0.0, 0.0));
    }

    #[test]
    fn screen_conflict_discards_later() {
        let r = resolve("MS on A screenleft and B screenleft");
        assert_eq!(r.properties.screen[0].x, -0.3);
        assert_eq!(r.properties.screen[1].x, 0.3);
        assert_eq!(r.discarded.len(), 1);
        assert_eq!(r.discarded[0].actor_id, "B");

        let r = resolve("MS on A screenright and B screenright");
        assert_eq!((r.properties.screen[0].x, r.properties.screen[1].x), (0.3, -0.3));

        let r = resolve("MS on A and B screenleft");
        assert_eq!((r.properties.screen[0].x, r.properties.screen[1].x), (0.3, -0.3));
        assert!(r.discarded.is_empty());
    }

    #[test]
    fn two_subject_profiles_and_verticals() {
        let r = resolve("MS on A 34left high and B low");
        assert_eq!(r.properties.profile, 0.0);
        assert_abs_diff_eq!(r.properties.vertical, 30f64.to_radians());
        let cats: Vec<_> = r.discarded.iter().map(|d| d.category).collect();
        assert_eq!(cats, vec![ModifierCategory::Profile, ModifierCategory::Vertical]);

        let r = resolve("MS on A and B low");
        assert_abs_diff_eq!(r.properties.vertical, -30f64.to_radians());
    }

    #[test]
    fn unknown_and_repeated_actors() {
        let intr = CameraIntrinsics::default();
        let err = resolve_spec(&parse("MS on Q front").unwrap(), &scene(), &intr).unwrap_err();
        assert_eq!(err, FramingError::UnknownActor("Q".into()));
        let err = resolve_spec(&parse("MS on A and A").unwrap(), &scene(), &intr).unwrap_err();
        assert_eq!(err, FramingError::DuplicateSubject("A".into()));
    }

    #[test]
    fn size_distances() {
        let intr = CameraIntrinsics { vfov: 60f64.to_radians(), aspect: 16.0 / 9.0 };
        assert_abs_diff_eq!(size_to_distance(ShotSize::MediumShot, &intr), 1.0392, epsilon = 1e-4);
        assert_abs_diff_eq!(size_to_distance(ShotSize::FullShot, &intr), 2.0785, epsilon = 1e-4);
        // doubling tan(vfov/2) halves every distance
        let wide = CameraIntrinsics { vfov: 2.0 * (2.0 * 30f64.to_radians().tan()).atan(), ..intr };
        for size in ShotSize::ALL {
            assert_abs_diff_eq!(
                size_to_distance(size, &wide),
                size_to_distance(size, &intr) / 2.0,
                epsilon = 1e-12
            );
        }
    }
}
