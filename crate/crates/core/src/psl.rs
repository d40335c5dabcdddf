//! Prose Storyboard Language shot sentences.
//!
//! Grammar (keywords case-insensitive, actor ids case-sensitive):
//!
//! ```text
//! sentence := SIZE "on" subject ("and" subject)? tail?
//! subject  := ID modifier*
//! modifier := PROFILE | VERTICAL | SCREEN
//! tail     := "in" NUMBER "s" | "at" NUMBER "m/s"
//! ```
//!
//! Number and unit may be written with or without a space (`in 5s`,
//! `in 5 s`, `at 0.5m/s`).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotSize {
    CloseUp,
    MediumCloseUp,
    MediumShot,
    MediumLongShot,
    FullShot,
    LongShot,
}

impl ShotSize {
    pub const ALL: [ShotSize; 6] = [
        ShotSize::CloseUp,
        ShotSize::MediumCloseUp,
        ShotSize::MediumShot,
        ShotSize::MediumLongShot,
        ShotSize::FullShot,
        ShotSize::LongShot,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ShotSize::CloseUp => "CU",
            ShotSize::MediumCloseUp => "MCU",
            ShotSize::MediumShot => "MS",
            ShotSize::MediumLongShot => "MLS",
            ShotSize::FullShot => "FS",
            ShotSize::LongShot => "LS",
        }
    }

    fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.keyword().eq_ignore_ascii_case(word))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    Front,
    ThreeQuarterLeft,
    Left,
    ThreeQuarterBackLeft,
    Back,
    ThreeQuarterBackRight,
    Right,
    ThreeQuarterRight,
}

impl Profile {
    pub const ALL: [Profile; 8] = [
        Profile::Front,
        Profile::ThreeQuarterLeft,
        Profile::Left,
        Profile::ThreeQuarterBackLeft,
        Profile::Back,
        Profile::ThreeQuarterBackRight,
        Profile::Right,
        Profile::ThreeQuarterRight,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Profile::Front => "front",
            Profile::ThreeQuarterLeft => "34left",
            Profile::Left => "left",
            Profile::ThreeQuarterBackLeft => "34backleft",
            Profile::Back => "back",
            Profile::ThreeQuarterBackRight => "34backright",
            Profile::Right => "right",
            Profile::ThreeQuarterRight => "34right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerticalAngle {
    High,
    Eye,
    Low,
}

impl VerticalAngle {
    pub const ALL: [VerticalAngle; 3] = [VerticalAngle::High, VerticalAngle::Eye, VerticalAngle::Low];

    pub fn keyword(self) -> &'static str {
        match self {
            VerticalAngle::High => "high",
            VerticalAngle::Eye => "eye",
            VerticalAngle::Low => "low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScreenPosition {
    Left,
    Center,
    Right,
}

impl ScreenPosition {
    pub const ALL: [ScreenPosition; 3] = [ScreenPosition::Left, ScreenPosition::Center, ScreenPosition::Right];

    pub fn keyword(self) -> &'static str {
        match self {
            ScreenPosition::Left => "screenleft",
            ScreenPosition::Center => "screencenter",
            ScreenPosition::Right => "screenright",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectClause {
    pub actor_id: String,
    pub profile: Option<Profile>,
    pub vertical: Option<VerticalAngle>,
    pub screen: Option<ScreenPosition>,
}

impl SubjectClause {
    pub fn new(actor_id: impl Into<String>) -> Self {
        Self {
            actor_id: actor_id.into(),
            profile: None,
            vertical: None,
            screen: None,
        }
    }

    pub fn profile(mut self, p: Profile) -> Self {
        self.profile = Some(p);
        self
    }

    pub fn vertical(mut self, v: VerticalAngle) -> Self {
        self.vertical = Some(v);
        self
    }

    pub fn screen(mut self, s: ScreenPosition) -> Self {
        self.screen = Some(s);
        self
    }
}

/// Optional pacing of the transition into a shot. A sentence carries at most
/// one of the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pace {
    /// Seconds.
    Duration(f64),
    /// Average drone speed, m/s.
    Speed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotSentence {
    pub size: ShotSize,
    pub subjects: Vec<SubjectClause>,
    pub pace: Option<Pace>,
}

impl ShotSentence {
    pub fn duration(&self) -> Option<f64> {
        match self.pace {
            Some(Pace::Duration(d)) => Some(d),
            _ => None,
        }
    }

    pub fn speed(&self) -> Option<f64> {
        match self.pace {
            Some(Pace::Speed(s)) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModifierCategory {
    Profile,
    Vertical,
    Screen,
}

impl fmt::Display for ModifierCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModifierCategory::Profile => "profile",
            ModifierCategory::Vertical => "vertical angle",
            ModifierCategory::Screen => "screen position",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PslErrorKind {
    #[error("empty shot sentence")]
    Empty,
    #[error("expected a shot size (CU, MCU, MS, MLS, FS, LS), found `{0}`")]
    ExpectedSize(String),
    #[error("expected `on`")]
    ExpectedOn,
    #[error("expected an actor id")]
    ExpectedActor,
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("duplicate {0} modifier")]
    DuplicateModifier(ModifierCategory),
    #[error("at most two subjects per shot")]
    TooManySubjects,
    #[error("unsupported PSL feature `{0}`: camera movements arise from successive shots")]
    Unsupported(String),
    #[error("expected a positive number")]
    InvalidNumber,
    #[error("expected unit `{0}`")]
    ExpectedUnit(&'static str),
    #[error("unexpected trailing input `{0}`")]
    TrailingInput(String),
}

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} (at {position})")]
pub struct PslError {
    pub kind: PslErrorKind,
    pub position: usize,
}

const MOVEMENT_VERBS: [&str; 8] = ["pan", "dolly", "crane", "track", "zoom", "tilt", "truck", "pedestal"];
const RESERVED: [&str; 4] = ["on", "and", "in", "at"];

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    offset: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token { text: &text[s..i], offset: s });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &text[s..], offset: s });
    }
    tokens
}

enum Modifier {
    Profile(Profile),
    Vertical(VerticalAngle),
    Screen(ScreenPosition),
}

fn modifier(word: &str) -> Option<Modifier> {
    let eq = |k: &str| k.eq_ignore_ascii_case(word);
    if let Some(p) = Profile::ALL.into_iter().find(|p| eq(p.keyword())) {
        return Some(Modifier::Profile(p));
    }
    if let Some(v) = VerticalAngle::ALL.into_iter().find(|v| eq(v.keyword())) {
        return Some(Modifier::Vertical(v));
    }
    ScreenPosition::ALL
        .into_iter()
        .find(|s| eq(s.keyword()))
        .map(Modifier::Screen)
}

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(word))
        || ShotSize::from_keyword(word).is_some()
        || modifier(word).is_some()
        || is_movement(word)
}

fn is_movement(word: &str) -> bool {
    MOVEMENT_VERBS.iter().any(|m| m.eq_ignore_ascii_case(word))
}

fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-')
        && !is_reserved(word)
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    cursor: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.cursor).copied()
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.peek();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn fail<T>(&self, kind: PslErrorKind, position: usize) -> Result<T, PslError> {
        Err(PslError { kind, position })
    }

    fn peek_is(&self, keyword: &str) -> bool {
        self.peek().is_some_and(|t| t.text.eq_ignore_ascii_case(keyword))
    }

    fn sentence(&mut self) -> Result<ShotSentence, PslError> {
        let Some(first) = self.next() else {
            return self.fail(PslErrorKind::Empty, 0);
        };
        let Some(size) = ShotSize::from_keyword(first.text) else {
            if is_movement(first.text) {
                return self.fail(PslErrorKind::Unsupported(first.text.to_owned()), first.offset);
            }
            return self.fail(PslErrorKind::ExpectedSize(first.text.to_owned()), first.offset);
        };
        if !self.peek_is("on") {
            return self.fail(PslErrorKind::ExpectedOn, self.here());
        }
        self.next();

        let mut subjects = vec![self.subject()?];
        while self.peek_is("and") {
            let and = self.next().expect("peeked");
            if subjects.len() == 2 {
                return self.fail(PslErrorKind::TooManySubjects, and.offset);
            }
            subjects.push(self.subject()?);
        }

        let pace = self.tail()?;
        if let Some(t) = self.peek() {
            return self.fail(PslErrorKind::TrailingInput(t.text.to_owned()), t.offset);
        }
        Ok(ShotSentence { size, subjects, pace })
    }

    fn subject(&mut self) -> Result<SubjectClause, PslError> {
        let pos = self.here();
        let Some(tok) = self.next() else {
            return self.fail(PslErrorKind::ExpectedActor, pos);
        };
        if is_movement(tok.text) {
            return self.fail(PslErrorKind::Unsupported(tok.text.to_owned()), tok.offset);
        }
        if !is_identifier(tok.text) {
            return self.fail(PslErrorKind::ExpectedActor, tok.offset);
        }
        let mut clause = SubjectClause::new(tok.text);
        while let Some(t) = self.peek() {
            if ["and", "in", "at"].iter().any(|k| t.text.eq_ignore_ascii_case(k)) {
                break;
            }
            let (category, duplicate) = match modifier(t.text) {
                Some(Modifier::Profile(p)) => (ModifierCategory::Profile, clause.profile.replace(p).is_some()),
                Some(Modifier::Vertical(v)) => (ModifierCategory::Vertical, clause.vertical.replace(v).is_some()),
                Some(Modifier::Screen(s)) => (ModifierCategory::Screen, clause.screen.replace(s).is_some()),
                None if is_movement(t.text) => {
                    return self.fail(PslErrorKind::Unsupported(t.text.to_owned()), t.offset)
                }
                None if ShotSize::from_keyword(t.text).is_some() || t.text.eq_ignore_ascii_case("on") => {
                    return self.fail(PslErrorKind::TrailingInput(t.text.to_owned()), t.offset)
                }
                None => return self.fail(PslErrorKind::UnknownKeyword(t.text.to_owned()), t.offset),
            };
            if duplicate {
                return self.fail(PslErrorKind::DuplicateModifier(category), t.offset);
            }
            self.next();
        }
        Ok(clause)
    }

    fn tail(&mut self) -> Result<Option<Pace>, PslError> {
        let (unit, make): (&'static str, fn(f64) -> Pace) = if self.peek_is("in") {
            ("s", Pace::Duration)
        } else if self.peek_is("at") {
            ("m/s", Pace::Speed)
        } else {
            return Ok(None);
        };
        self.next();
        let pos = self.here();
        let Some(tok) = self.next() else {
            return self.fail(PslErrorKind::InvalidNumber, pos);
        };
        let split = tok
            .text
            .find(|c: char| !(c.is_ascii_digit() || c == '.'))
            .unwrap_or(tok.text.len());
        let (digits, suffix) = tok.text.split_at(split);
        let value: f64 = match digits.parse() {
            Ok(v) if v > 0.0 && f64::is_finite(v) => v,
            _ => return self.fail(PslErrorKind::InvalidNumber, tok.offset),
        };
        if suffix.is_empty() {
            let upos = self.here();
            match self.next() {
                Some(u) if u.text.eq_ignore_ascii_case(unit) => {}
                _ => return self.fail(PslErrorKind::ExpectedUnit(unit), upos),
            }
        } else if !suffix.eq_ignore_ascii_case(unit) {
            return self.fail(PslErrorKind::ExpectedUnit(unit), tok.offset + split);
        }
        Ok(Some(make(value)))
    }
}

/// Parses one shot sentence.
pub fn parse(text: &str) -> Result<ShotSentence, PslError> {
    let mut parser = Parser {
        tokens: tokenize(text),
        cursor: 0,
        end: text.len(),
    };
    parser.sentence()
}

/// Canonical text form; `parse(&format(s)) == s` for every valid sentence.
pub fn format(sentence: &ShotSentence) -> String {
    sentence.to_string()
}

impl fmt::Display for ShotSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on", self.size.keyword())?;
        for (i, s) in self.subjects.iter().enumerate() {
            if i > 0 {
                f.write_str(" and")?;
            }
            write!(f, " {}", s.actor_id)?;
            if let Some(p) = s.profile {
                write!(f, " {}", p.keyword())?;
            }
            if let Some(v) = s.vertical {
                write!(f, " {}", v.keyword())?;
            }
            if let Some(sc) = s.screen {
                write!(f, " {}", sc.keyword())?;
            }
        }
        match self.pace {
            Some(Pace::Duration(d)) => write!(f, " in {d}s"),
            Some(Pace::Speed(v)) => write!(f, " at {v}m/s"),
            None => Ok(()),
        }
    }
}

impl std::str::FromStr for ShotSentence {
    type Err = PslError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_sentences() {
        let s = parse("MS on A 34left screencenter").unwrap();
        assert_eq!(s.size, ShotSize::MediumShot);
        assert_eq!(
            s.subjects,
            vec![SubjectClause::new("A")
                .profile(Profile::ThreeQuarterLeft)
                .screen(ScreenPosition::Center)]
        );

        let s = parse("MS on A screenleft and B screenright").unwrap();
        assert_eq!(
            s.subjects,
            vec![
                SubjectClause::new("A").screen(ScreenPosition::Left),
                SubjectClause::new("B").screen(ScreenPosition::Right),
            ]
        );
        assert_eq!(s.pace, None);
    }

    #[test]
    fn duplicate_category() {
        let err = parse("MS on A front front").unwrap_err();
        assert_eq!(err.kind, PslErrorKind::DuplicateModifier(ModifierCategory::Profile));
        assert_eq!(err.position, 14);
        let err = parse("MS on A high low").unwrap_err();
        assert_eq!(err.kind, PslErrorKind::DuplicateModifier(ModifierCategory::Vertical));
    }

    #[test]
    fn format_examples() {
        assert_eq!(format(&parse("MS on A front").unwrap()), "MS on A front");
        let s = ShotSentence {
            size: ShotSize::MediumShot,
            subjects: vec![
                SubjectClause::new("B").screen(ScreenPosition::Right),
                SubjectClause::new("A").screen(ScreenPosition::Left),
            ],
            pace: None,
        };
        assert_eq!(format(&s), "MS on B screenright and A screenleft");

        let timed = ShotSentence {
            pace: Some(Pace::Duration(5.0)),
            ..parse("MS on A front").unwrap()
        };
        let text = format(&timed);
        assert!(text.ends_with(" in 5s"), "{text}");
        assert_eq!(parse(&text).unwrap(), timed);
    }

    #[test]
    fn tail_spellings() {
        assert_eq!(parse("ms ON A in 5s").unwrap().duration(), Some(5.0));
        assert_eq!(parse("MS on A in 5 s").unwrap().duration(), Some(5.0));
        assert_eq!(parse("MS on A at 0.5m/s").unwrap().speed(), Some(0.5));
        assert_eq!(parse("MS on A at 0.5 M/S").unwrap().speed(), Some(0.5));
        assert_eq!(parse("MS on A in 0s").unwrap_err().kind, PslErrorKind::InvalidNumber);
        assert_eq!(parse("MS on A in 5m/s").unwrap_err().kind, PslErrorKind::ExpectedUnit("s"));
        let err = parse("MS on A in 5s at 1m/s").unwrap_err();
        assert_eq!(err.kind, PslErrorKind::TrailingInput("at".into()));
    }

    #[test]
    fn keywords_case_insensitive_ids_case_sensitive() {
        let s = parse("fs ON bob FRONT ScreenLeft").unwrap();
        assert_eq!(s.size, ShotSize::FullShot);
        assert_eq!(s.subjects[0].actor_id, "bob");
        assert_ne!(parse("MS on Bob").unwrap(), parse("MS on bob").unwrap());
    }

    #[test]
    fn error_positions() {
        let err = parse("MS on A frnt").unwrap_err();
        assert_eq!(err.kind, PslErrorKind::UnknownKeyword("frnt".into()));
        assert_eq!(err.position, 8);

        let err = parse("MS on A and B and C").unwrap_err();
        assert_eq!(err.kind, PslErrorKind::TooManySubjects);
        assert_eq!(err.position, 14);

        assert_eq!(parse("   ").unwrap_err().kind, PslErrorKind::Empty);
        assert_eq!(parse("XL on A").unwrap_err().kind, PslErrorKind::ExpectedSize("XL".into()));
        assert_eq!(parse("MS A").unwrap_err().kind, PslErrorKind::ExpectedOn);
        assert_eq!(parse("MS on").unwrap_err().kind, PslErrorKind::ExpectedActor);
        assert_eq!(parse("MS on front").unwrap_err().kind, PslErrorKind::ExpectedActor);
    }

    #[test]
    fn movement_clauses_rejected() {
        let err = parse("MS on A pan left").unwrap_err();
        assert_eq!(err.kind, PslErrorKind::Unsupported("pan".into()));
        assert!(matches!(parse("dolly on A").unwrap_err().kind, PslErrorKind::Unsupported(_)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use proptest::sample::select;

        fn clause() -> impl Strategy<Value = SubjectClause> {
            (
                "[A-Za-z_][A-Za-z0-9_-]{0,6}".prop_filter("not a keyword", |id| !is_reserved(id)),
                proptest::option::of(select(Profile::ALL.to_vec())),
                proptest::option::of(select(vec![VerticalAngle::High, VerticalAngle::Eye, VerticalAngle::Low])),
                proptest::option::of(select(vec![
                    ScreenPosition::Left,
                    ScreenPosition::Center,
                    ScreenPosition::Right,
                ])),
            )
                .prop_map(|(id, profile, vertical, screen)| SubjectClause {
                    actor_id: id,
                    profile,
                    vertical,
                    screen,
                })
        }

        fn sentence() -> impl Strategy<Value = ShotSentence> {
            let pace = prop_oneof![
                Just(None),
                (0.001..100.0f64).prop_map(|d| Some(Pace::Duration(d))),
                (0.001..10.0f64).prop_map(|v| Some(Pace::Speed(v))),
            ];
            (select(ShotSize::ALL.to_vec()), proptest::collection::vec(clause(), 1..=2), pace)
                .prop_map(|(size, subjects, pace)| ShotSentence { size, subjects, pace })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]

            #[test]
            fn format_then_parse_is_identity(s in sentence()) {
                prop_assert_eq!(parse(&format(&s)).unwrap(), s);
            }

            #[test]
            fn arbitrary_text_never_panics(text in "\\PC{0,40}") {
                let _ = parse(&text);
            }

            #[test]
            fn near_miss_text_never_panics(
                words in proptest::collection::vec(
                    select(vec!["MS", "on", "A", "and", "B", "front", "high", "screenleft", "in", "5s", "at", "m/s", "0.", "."]),
                    0..10,
                )
            ) {
                if let Err(e) = parse(&words.join(" ")) {
                    prop_assert!(e.position <= words.join(" ").len());
                }
            }
        }
    }
}
