//! Telemetry data model and the line-delimited JSON frame log reader.

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ConfigError;

/// Per-round rules of the game the telemetry was recorded from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundConfig {
    pub initial_hp: u32,
    pub round_duration_s: f64,
    pub fps: f64,
    /// Only used to validate positions; no cue depends on it.
    pub stage_width: f64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        Self {
            initial_hp: 200,
            round_duration_s: 60.0,
            fps: 60.0,
            stage_width: 960.0,
        }
    }
}

impl RoundConfig {
    pub fn new(
        initial_hp: u32,
        round_duration_s: f64,
        fps: f64,
        stage_width: f64,
    ) -> Result<Self, ConfigError> {
        let config = Self {
            initial_hp,
            round_duration_s,
            fps,
            stage_width,
        };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.initial_hp == 0 {
            return Err(ConfigError::new("initial_hp must be positive"));
        }
        for (name, value) in [
            ("round_duration_s", self.round_duration_s),
            ("fps", self.fps),
            ("stage_width", self.stage_width),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::new(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    P1,
    P2,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::P1 => Side::P2,
            Side::P2 => Side::P1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::P1 => "p1",
            Side::P2 => "p2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub hp: i32,
    #[serde(rename = "x")]
    pub x_pos: f64,
    #[serde(rename = "action")]
    pub action_id: String,
    #[serde(rename = "attack")]
    pub is_attack: bool,
}

impl PlayerState {
    pub fn new(hp: i32, x_pos: f64, action_id: impl Into<String>, is_attack: bool) -> Self {
        Self {
            hp,
            x_pos,
            action_id: action_id.into(),
            is_attack,
        }
    }
}

/// One frame of telemetry. Field order here is the canonical field order of a log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSnapshot {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    #[serde(rename = "round")]
    pub round_index: u32,
    #[serde(rename = "t")]
    pub round_time_s: f64,
    pub p1: PlayerState,
    pub p2: PlayerState,
}

impl FrameSnapshot {
    pub fn player(&self, side: Side) -> &PlayerState {
        match side {
            Side::P1 => &self.p1,
            Side::P2 => &self.p2,
        }
    }

    /// Serializes to one log line, without the trailing newline.
    pub fn to_log_line(&self) -> String {
        serde_json::to_string(self).expect("frame snapshots always serialize")
    }
}

/// A single broken invariant of a frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeHp { side: Side, hp: i32 },
    HpExceedsInitial { side: Side, hp: i32, initial_hp: u32 },
    PositionOutOfStage { side: Side, x: f64, stage_width: f64 },
    RoundTimeOutOfRange { t: f64, round_duration_s: f64 },
    NonFinite { field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeHp { side, hp } => write!(f, "{side}: hp {hp} is negative"),
            Violation::HpExceedsInitial {
                side,
                hp,
                initial_hp,
            } => write!(f, "{side}: hp {hp} exceeds initial_hp {initial_hp}"),
            Violation::PositionOutOfStage { side, x, stage_width } => {
                write!(f, "{side}: x {x} outside stage [0, {stage_width}]")
            }
            Violation::RoundTimeOutOfRange {
                t,
                round_duration_s,
            } => write!(f, "round time {t} outside [0, {round_duration_s}]"),
            Violation::NonFinite { field } => write!(f, "{field} is not finite"),
        }
    }
}

/// Returns every violated invariant of `frame`; an empty list means the frame is valid.
pub fn validate_frame(frame: &FrameSnapshot, config: &RoundConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let t = frame.round_time_s;
    if !t.is_finite() {
        out.push(Violation::NonFinite { field: "t" });
    } else if t < 0.0 || t > config.round_duration_s {
        out.push(Violation::RoundTimeOutOfRange {
            t,
            round_duration_s: config.round_duration_s,
        });
    }
    for side in [Side::P1, Side::P2] {
        let p = frame.player(side);
        if p.hp < 0 {
            out.push(Violation::NegativeHp { side, hp: p.hp });
        } else if p.hp as u32 > config.initial_hp {
            out.push(Violation::HpExceedsInitial {
                side,
                hp: p.hp,
                initial_hp: config.initial_hp,
            });
        }
        if !p.x_pos.is_finite() {
            out.push(Violation::NonFinite {
                field: match side {
                    Side::P1 => "p1.x",
                    Side::P2 => "p2.x",
                },
            });
        } else if p.x_pos < 0.0 || p.x_pos > config.stage_width {
            out.push(Violation::PositionOutOfStage {
                side,
                x: p.x_pos,
                stage_width: config.stage_width,
            });
        }
    }
    out
}

/// Item of a parsed frame stream.
#[derive(Debug, Clone, PartialEq)]
pub enum LogEvent {
    /// Emitted before the first frame of every round, including the first one.
    RoundStart { round_index: u32 },
    Frame(FrameSnapshot),
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: read failed: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: out of sequence: {message}")]
    Sequencing { line: usize, message: String },
    #[error("line {line}: invalid frame: {}", join_violations(.violations))]
    Validation {
        line: usize,
        violations: Vec<Violation>,
    },
}

impl LogError {
    pub fn line(&self) -> usize {
        match self {
            LogError::Io { line, .. }
            | LogError::Parse { line, .. }
            | LogError::Sequencing { line, .. }
            | LogError::Validation { line, .. } => *line,
        }
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Lazy reader over a frame log. Blank lines are skipped. The stream ends after the
/// first error.
pub struct FrameLog<R> {
    reader: R,
    config: RoundConfig,
    line_no: usize,
    buf: String,
    last_frame: Option<u64>,
    round: Option<(u32, f64)>,
    pending: Option<FrameSnapshot>,
    failed: bool,
}

pub fn parse_frame_log<R: BufRead>(reader: R, config: RoundConfig) -> FrameLog<R> {
    FrameLog {
        reader,
        config,
        line_no: 0,
        buf: String::new(),
        last_frame: None,
        round: None,
        pending: None,
        failed: false,
    }
}

impl<R: BufRead> FrameLog<R> {
    fn next_record(&mut self) -> Option<Result<FrameSnapshot, LogError>> {
        loop {
            self.buf.clear();
            self.line_no += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(source) => {
                    return Some(Err(LogError::Io {
                        line: self.line_no,
                        source,
                    }))
                }
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str::<FrameSnapshot>(text).map_err(|e| LogError::Parse {
                    line: self.line_no,
                    message: e.to_string(),
                }),
            );
        }
    }

    fn admit(&mut self, frame: FrameSnapshot) -> Result<LogEvent, LogError> {
        let line = self.line_no;
        let violations = validate_frame(&frame, &self.config);
        if !violations.is_empty() {
            return Err(LogError::Validation { line, violations });
        }
        if let Some(last) = self.last_frame {
            if frame.frame_index <= last {
                return Err(LogError::Sequencing {
                    line,
                    message: format!("frame {} does not follow frame {last}", frame.frame_index),
                });
            }
        }
        let starts_round = match self.round {
            None => true,
            Some((round, last_t)) => {
                if frame.round_index < round {
                    return Err(LogError::Sequencing {
                        line,
                        message: format!("round {} after round {round}", frame.round_index),
                    });
                }
                if frame.round_index == round && frame.round_time_s < last_t {
                    return Err(LogError::Sequencing {
                        line,
                        message: format!(
                            "round time went back from {last_t} to {} within round {round}",
                            frame.round_time_s
                        ),
                    });
                }
                frame.round_index > round
            }
        };
        self.last_frame = Some(frame.frame_index);
        self.round = Some((frame.round_index, frame.round_time_s));
        if starts_round {
            let round_index = frame.round_index;
            self.pending = Some(frame);
            Ok(LogEvent::RoundStart { round_index })
        } else {
            Ok(LogEvent::Frame(frame))
        }
    }
}

impl<R: BufRead> Iterator for FrameLog<R> {
    type Item = Result<LogEvent, LogError>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(frame) = self.pending.take() {
            return Some(Ok(LogEvent::Frame(frame)));
        }
        if self.failed {
            return None;
        }
        let result = match self.next_record()? {
            Ok(frame) => self.admit(frame),
            Err(e) => Err(e),
        };
        if result.is_err() {
            self.failed = true;
        }
        Some(result)
    }
}

/// Reads a whole log into memory, dropping round markers.
pub fn read_frames<R: BufRead>(
    reader: R,
    config: RoundConfig,
) -> Result<Vec<FrameSnapshot>, LogError> {
    parse_frame_log(reader, config)
        .filter_map(|event| match event {
            Ok(LogEvent::Frame(f)) => Some(Ok(f)),
            Ok(LogEvent::RoundStart { .. }) => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

/// Writes frames as a log, one line each.
pub fn write_frames<W: std::io::Write>(
    mut out: W,
    frames: &[FrameSnapshot],
) -> std::io::Result<()> {
    for frame in frames {
        writeln!(out, "{}", frame.to_log_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(index: u64, round: u32, t: f64) -> FrameSnapshot {
        FrameSnapshot {
            frame_index: index,
            round_index: round,
            round_time_s: t,
            p1: PlayerState::new(200, 300.0, "STAND", false),
            p2: PlayerState::new(200, 600.0, "STAND", false),
        }
    }

    fn parse_all(input: &str) -> Vec<Result<LogEvent, LogError>> {
        parse_frame_log(input.as_bytes(), RoundConfig::default()).collect()
    }

    #[test]
    fn empty_input_is_empty_stream() {
        assert!(parse_all("").is_empty());
        assert!(parse_all("\n  \n").is_empty());
    }

    #[test]
    fn single_line_round_trips() {
        let line = r#"{"frame":0,"round":0,"t":0.0,"p1":{"hp":200,"x":100.0,"action":"STAND","attack":false},"p2":{"hp":200,"x":800.0,"action":"STAND","attack":false}}"#;
        let events: Vec<_> = parse_all(line).into_iter().map(Result::unwrap).collect();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0], LogEvent::RoundStart { round_index: 0 });
        let LogEvent::Frame(f) = &events[1] else {
            panic!("expected frame")
        };
        assert_eq!(f.round_time_s, 0.0);
        assert_eq!(f.p1.hp, 200);
        assert_eq!(f.to_log_line(), line);
    }

    #[test]
    fn backwards_frame_index_is_sequencing_error_on_line_two() {
        let log = [frame(5, 0, 0.0), frame(4, 0, 0.1), frame(6, 0, 0.2)]
            .iter()
            .map(FrameSnapshot::to_log_line)
            .collect::<Vec<_>>()
            .join("\n");
        let events = parse_all(&log);
        let err = events.into_iter().find_map(Result::err).unwrap();
        assert!(matches!(err, LogError::Sequencing { line: 2, .. }), "{err}");
    }

    #[test]
    fn stream_stops_after_error() {
        let log = "not json\n".to_string() + &frame(0, 0, 0.0).to_log_line();
        let events = parse_all(&log);
        assert_eq!(events.len(), 1);
        assert!(matches!(events[0], Err(LogError::Parse { line: 1, .. })));
    }

    #[test]
    fn round_start_emitted_on_round_increment() {
        let log = [frame(0, 0, 0.0), frame(1, 0, 5.0), frame(2, 1, 0.0)]
            .iter()
            .map(FrameSnapshot::to_log_line)
            .collect::<Vec<_>>()
            .join("\n");
        let starts: Vec<u32> = parse_all(&log)
            .into_iter()
            .filter_map(|e| match e.unwrap() {
                LogEvent::RoundStart { round_index } => Some(round_index),
                _ => None,
            })
            .collect();
        assert_eq!(starts, vec![0, 1]);
    }

    #[test]
    fn time_going_back_within_round_is_rejected() {
        let log = [frame(0, 0, 5.0), frame(1, 0, 4.0)]
            .iter()
            .map(FrameSnapshot::to_log_line)
            .collect::<Vec<_>>()
            .join("\n");
        let err = parse_all(&log).into_iter().find_map(Result::err).unwrap();
        assert!(matches!(err, LogError::Sequencing { line: 2, .. }));
    }

    #[test]
    fn out_of_range_field_is_validation_error() {
        let mut f = frame(0, 0, 0.0);
        f.p2.hp = 201;
        let err = parse_all(&f.to_log_line()).into_iter().find_map(Result::err).unwrap();
        assert!(matches!(err, LogError::Validation { line: 1, .. }));
    }

    #[test]
    fn hp_above_initial_is_reported() {
        let mut f = frame(0, 0, 0.0);
        f.p1.hp = 250;
        let v = validate_frame(&f, &RoundConfig::default());
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("hp 250 exceeds initial_hp 200"));
    }

    #[test]
    fn late_round_time_is_reported() {
        let f = frame(0, 0, 61.0);
        let v = validate_frame(&f, &RoundConfig::default());
        assert!(matches!(v[..], [Violation::RoundTimeOutOfRange { .. }]));
    }

    #[test]
    fn all_violations_are_collected() {
        let mut f = frame(0, 0, -1.0);
        f.p1.hp = -3;
        f.p2.hp = 999;
        f.p1.x_pos = 2000.0;
        f.p2.x_pos = f64::NAN;
        assert_eq!(validate_frame(&f, &RoundConfig::default()).len(), 5);
    }

    #[test]
    fn in_range_frame_is_ok() {
        assert!(validate_frame(&frame(0, 0, 60.0), &RoundConfig::default()).is_empty());
    }

    #[test]
    fn zero_config_values_rejected() {
        assert!(RoundConfig::new(0, 60.0, 60.0, 960.0).is_err());
        assert!(RoundConfig::new(200, 0.0, 60.0, 960.0).is_err());
        assert!(RoundConfig::new(200, 60.0, 60.0, 960.0).is_ok());
    }

    fn valid_frame() -> impl Strategy<Value = FrameSnapshot> {
        let player = (0i32..=200, 0.0f64..=960.0, "[A-Z_]{1,16}", any::<bool>())
            .prop_map(|(hp, x, a, atk)| PlayerState::new(hp, x, a, atk));
        (0u64..1_000_000, 0u32..5, 0.0f64..=60.0, player.clone(), player).prop_map(
            |(frame_index, round_index, round_time_s, p1, p2)| FrameSnapshot {
                frame_index,
                round_index,
                round_time_s,
                p1,
                p2,
            },
        )
    }

    proptest! {
        #[test]
        fn valid_lines_round_trip_bytewise(f in valid_frame()) {
            let line = f.to_log_line();
            let events: Vec<_> = parse_all(&line);
            prop_assert_eq!(events.len(), 2);
            match &events[1] {
                Ok(LogEvent::Frame(parsed)) => {
                    prop_assert_eq!(parsed, &f);
                    prop_assert_eq!(parsed.to_log_line(), line);
                }
                other => prop_assert!(false, "unexpected {:?}", other),
            }
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            for event in parse_frame_log(&bytes[..], RoundConfig::default()) {
                let _ = event;
            }
        }
    }
}
