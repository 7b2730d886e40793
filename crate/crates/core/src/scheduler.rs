//! The commentary loop: evaluate each frame, and while no utterance is playing,
//! turn detected events into a directive carrying text, pitch and volume.
//!
//! Offline, playback length is modelled with [`estimate_duration`]. Live, the gate
//! stays closed until the dispatcher reports the utterance finished. Both run through
//! [`Commentator`].

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commentary::{
    detect_events, render, EventThresholds, GameEvent, GameEventKind, PlayerNames, SkillNames,
    TemplateLibrary, TemplateSelector,
};
use crate::game::{parse_frame_log, FrameSnapshot, LogError, LogEvent, RoundConfig};
use crate::highlight::{CueError, CueEvaluator, CueWeights, RankActTable, RoundTracker};
use crate::phonetics::{adjust, DesignId, PhoneticConfig, PhoneticParams};
use crate::{par, ConfigError};

const WORDS_PER_SECOND: f64 = 2.5;
const PADDING_S: f64 = 0.3;
const MIN_DURATION_S: f64 = 1.0;

/// Modelled playback time of an utterance.
pub fn estimate_duration(text: &str) -> f64 {
    let words = text.split_whitespace().count() as f64;
    (words / WORDS_PER_SECOND + PADDING_S).max(MIN_DURATION_S)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtteranceState {
    Idle,
    Speaking { until_round_time_s: f64 },
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub round: RoundConfig,
    pub rank_table: RankActTable,
    pub weights: CueWeights,
    pub phonetics: PhoneticConfig,
    pub thresholds: EventThresholds,
    pub design: DesignId,
    pub seed: u64,
    /// Idle time after which a Neutral line is spoken anyway.
    pub neutral_cadence_s: f64,
    pub names: PlayerNames,
    pub skills: SkillNames,
    pub templates: Arc<TemplateLibrary>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            round: RoundConfig::default(),
            rank_table: RankActTable::default(),
            weights: CueWeights::default(),
            phonetics: PhoneticConfig::default(),
            thresholds: EventThresholds::default(),
            design: DesignId::D1,
            seed: 0,
            neutral_cadence_s: 6.0,
            names: PlayerNames::default(),
            skills: SkillNames::default(),
            templates: Arc::new(TemplateLibrary::bundled()),
        }
    }
}

impl EngineConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        self.round.check()?;
        self.weights.check()?;
        self.phonetics.check()?;
        if self.neutral_cadence_s.is_nan() || self.neutral_cadence_s <= 0.0 {
            return Err(ConfigError::new("neutral cadence must be positive"));
        }
        Ok(())
    }

    pub fn with_design(&self, design: DesignId) -> Self {
        Self {
            design,
            ..self.clone()
        }
    }
}

/// One scheduled utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentaryDirective {
    pub frame_index: u64,
    pub round_index: u32,
    pub round_time_s: f64,
    pub text: String,
    pub phonetics: PhoneticParams,
    pub highlight: f64,
    pub design: DesignId,
}

impl CommentaryDirective {
    pub fn check(&self, ranges: &PhoneticConfig) -> Result<(), ConfigError> {
        if self.text.trim().is_empty() {
            return Err(ConfigError::new("directive text is empty"));
        }
        let p = &self.phonetics;
        if !(ranges.pitch.min..=ranges.pitch.max).contains(&p.pitch) {
            return Err(ConfigError::new(format!("pitch {} out of range", p.pitch)));
        }
        if !(ranges.volume_clamp.min..=ranges.volume_clamp.max).contains(&p.volume_gain_db) {
            return Err(ConfigError::new(format!(
                "volume {} out of range",
                p.volume_gain_db
            )));
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("directives always serialize")
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Cue(#[from] CueError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateMode {
    /// Speaking ends at the modelled duration.
    Offline,
    /// Speaking ends when [`Commentator::playback_finished`] is called.
    Live,
}

/// Per-stream state of the commentary loop.
#[derive(Debug, Clone)]
pub struct Commentator {
    config: EngineConfig,
    evaluator: CueEvaluator,
    mode: GateMode,
    tracker: RoundTracker,
    selector: TemplateSelector,
    state: UtteranceState,
    prev: Option<FrameSnapshot>,
    quiet_since: f64,
    last_t: f64,
    // Playback time left over from the previous round, applied at the next frame.
    carry: Option<f64>,
    round_fresh: bool,
}

impl Commentator {
    pub fn new(config: EngineConfig, mode: GateMode) -> Result<Self, ConfigError> {
        config.check()?;
        let evaluator = CueEvaluator::new(config.round, config.rank_table.clone(), config.weights);
        let selector = TemplateSelector::new(config.seed);
        Ok(Self {
            config,
            evaluator,
            mode,
            tracker: RoundTracker::new(),
            selector,
            state: UtteranceState::Idle,
            prev: None,
            quiet_since: 0.0,
            last_t: 0.0,
            carry: None,
            round_fresh: true,
        })
    }

    pub fn state(&self) -> UtteranceState {
        self.state
    }

    /// Overrides the gate state, e.g. to resume from a known point.
    pub fn set_state(&mut self, state: UtteranceState) {
        self.state = state;
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Live-mode signal that the current utterance finished or was dropped.
    pub fn playback_finished(&mut self) {
        if let UtteranceState::Speaking { .. } = self.state {
            self.state = UtteranceState::Idle;
            self.quiet_since = self.last_t;
        }
        self.carry = None;
    }

    pub fn handle(&mut self, event: &LogEvent) -> Result<Option<CommentaryDirective>, CueError> {
        match event {
            LogEvent::RoundStart { .. } => {
                self.start_round();
                Ok(None)
            }
            LogEvent::Frame(frame) => self.tick(frame),
        }
    }

    fn start_round(&mut self) {
        self.tracker = RoundTracker::new();
        self.prev = None;
        self.round_fresh = true;
        if let UtteranceState::Speaking { until_round_time_s } = self.state {
            self.carry = Some((until_round_time_s - self.last_t).max(0.0));
        }
    }

    /// One step of the loop for the next frame of the stream.
    pub fn tick(&mut self, frame: &FrameSnapshot) -> Result<Option<CommentaryDirective>, CueError> {
        let t = frame.round_time_s;
        if self.round_fresh {
            self.round_fresh = false;
            self.quiet_since = t;
            if let Some(remaining) = self.carry.take() {
                self.state = UtteranceState::Speaking {
                    until_round_time_s: t + remaining,
                };
            }
        }
        self.last_t = t;

        let (cues, tracker) = self.evaluator.evaluate(frame, self.tracker)?;
        self.tracker = tracker;

        if let UtteranceState::Speaking { until_round_time_s } = self.state {
            if self.mode == GateMode::Offline && t >= until_round_time_s {
                self.state = UtteranceState::Idle;
                self.quiet_since = until_round_time_s;
            }
        }

        // A gap in the frame stream resynchronises detection rather than failing.
        let events = match &self.prev {
            Some(prev) => detect_events(
                prev,
                frame,
                &cues,
                &self.config.rank_table,
                &self.config.thresholds,
                &self.config.round,
                &self.config.skills,
            )
            .ok(),
            None => None,
        };
        self.prev = Some(frame.clone());

        if self.state != UtteranceState::Idle {
            return Ok(None);
        }
        let notable = events
            .as_deref()
            .is_some_and(|evs| evs.iter().any(|e| e.kind != GameEventKind::Neutral));
        let cadence_due = t - self.quiet_since >= self.config.neutral_cadence_s;
        if !(notable || cadence_due) {
            return Ok(None);
        }
        let events = match events {
            Some(evs) if notable => evs,
            _ => vec![GameEvent::neutral()],
        };
        Ok(self.emit(frame, &events, cues.highlight))
    }

    fn emit(
        &mut self,
        frame: &FrameSnapshot,
        events: &[GameEvent],
        highlight: f64,
    ) -> Option<CommentaryDirective> {
        let library = Arc::clone(&self.config.templates);
        let template = self.selector.select(events, highlight, &library);
        let text = match render(template, &self.config.names, template.context_event(events)) {
            Ok(text) => text,
            Err(e) => {
                log::warn!("skipping template {}: {e}", template.id);
                return None;
            }
        };
        let phonetics = adjust(highlight, self.config.design, &self.config.phonetics);
        let t = frame.round_time_s;
        self.state = UtteranceState::Speaking {
            until_round_time_s: match self.mode {
                GateMode::Offline => t + estimate_duration(&text),
                GateMode::Live => f64::INFINITY,
            },
        };
        Some(CommentaryDirective {
            frame_index: frame.frame_index,
            round_index: frame.round_index,
            round_time_s: t,
            text,
            phonetics,
            highlight,
            design: self.config.design,
        })
    }
}

/// Runs the offline loop over already-parsed stream events.
pub fn run_events(
    events: &[LogEvent],
    config: &EngineConfig,
) -> Result<Vec<CommentaryDirective>, PipelineError> {
    let mut commentator = Commentator::new(config.clone(), GateMode::Offline)?;
    let mut script = Vec::new();
    for event in events {
        script.extend(commentator.handle(event)?);
    }
    Ok(script)
}

/// Parses a frame log and produces the commentary script for it.
pub fn run_pipeline<R: BufRead>(
    log: R,
    config: &EngineConfig,
) -> Result<Vec<CommentaryDirective>, PipelineError> {
    let mut commentator = Commentator::new(config.clone(), GateMode::Offline)?;
    let mut script = Vec::new();
    for event in parse_frame_log(log, config.round) {
        script.extend(commentator.handle(&event?)?);
    }
    Ok(script)
}

/// Scripts for many independent streams, in parallel when the `parallel` feature is on.
pub fn annotate_many(
    streams: &[Vec<LogEvent>],
    config: &EngineConfig,
) -> Vec<Result<Vec<CommentaryDirective>, PipelineError>> {
    par::map(streams, |events| run_events(events, config))
}

/// Single-threaded twin of [`annotate_many`].
pub fn annotate_many_sequential(
    streams: &[Vec<LogEvent>],
    config: &EngineConfig,
) -> Vec<Result<Vec<CommentaryDirective>, PipelineError>> {
    par::map_sequential(streams, |events| run_events(events, config))
}

pub fn write_script<W: Write>(mut out: W, script: &[CommentaryDirective]) -> std::io::Result<()> {
    for d in script {
        writeln!(out, "{}", d.to_json_line())?;
    }
    Ok(())
}

pub fn read_script<R: BufRead>(input: R) -> Result<Vec<CommentaryDirective>, LogError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|source| LogError::Io { line: i + 1, source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| LogError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PlayerState;

    fn frame(index: u64, t: f64, hp: (i32, i32)) -> FrameSnapshot {
        FrameSnapshot {
            frame_index: index,
            round_index: 0,
            round_time_s: t,
            p1: PlayerState::new(hp.0, 100.0, "STAND", false),
            p2: PlayerState::new(hp.1, 800.0, "STAND", false),
        }
    }

    #[test]
    fn duration_model() {
        assert_eq!(estimate_duration("Go!"), 1.0);
        let ten = "one two three four five six seven eight nine ten";
        assert!((estimate_duration(ten) - 4.3).abs() < 1e-12);
        let twenty_five = vec!["word"; 25].join(" ");
        assert!((estimate_duration(&twenty_five) - 10.3).abs() < 1e-12);
    }

    #[test]
    fn closed_gate_ignores_events() {
        let mut c = Commentator::new(EngineConfig::default(), GateMode::Offline).unwrap();
        c.handle(&LogEvent::RoundStart { round_index: 0 }).unwrap();
        c.tick(&frame(0, 9.9, (200, 200))).unwrap();
        let speaking = UtteranceState::Speaking {
            until_round_time_s: 12.0,
        };
        c.set_state(speaking);
        let out = c.tick(&frame(1, 10.0, (200, 150))).unwrap();
        assert!(out.is_none());
        assert_eq!(c.state(), speaking);
    }

    #[test]
    fn idle_hit_emits_once() {
        let mut c = Commentator::new(EngineConfig::default(), GateMode::Offline).unwrap();
        c.handle(&LogEvent::RoundStart { round_index: 0 }).unwrap();
        assert!(c.tick(&frame(0, 1.0, (200, 200))).unwrap().is_none());
        let d = c.tick(&frame(1, 1.1, (200, 190))).unwrap().expect("directive");
        assert_eq!(d.frame_index, 1);
        let UtteranceState::Speaking { until_round_time_s } = c.state() else {
            panic!("not speaking")
        };
        assert!((until_round_time_s - (1.1 + estimate_duration(&d.text))).abs() < 1e-12);
        assert!(c.tick(&frame(2, 1.2, (200, 180))).unwrap().is_none());
    }

    #[test]
    fn neutral_cadence_fills_silence() {
        let mut c = Commentator::new(EngineConfig::default(), GateMode::Offline).unwrap();
        c.handle(&LogEvent::RoundStart { round_index: 0 }).unwrap();
        let mut emitted = Vec::new();
        for i in 0..=420u64 {
            let t = i as f64 / 60.0;
            if let Some(d) = c.tick(&frame(i, t, (200, 200))).unwrap() {
                emitted.push(d);
            }
        }
        assert_eq!(emitted.len(), 1);
        assert!((emitted[0].round_time_s - 6.0).abs() < 1.0 / 60.0);
    }

    #[test]
    fn live_gate_waits_for_signal() {
        let mut c = Commentator::new(EngineConfig::default(), GateMode::Live).unwrap();
        c.handle(&LogEvent::RoundStart { round_index: 0 }).unwrap();
        c.tick(&frame(0, 1.0, (200, 200))).unwrap();
        assert!(c.tick(&frame(1, 1.1, (200, 190))).unwrap().is_some());
        assert!(c.tick(&frame(2, 40.0, (200, 150))).unwrap().is_none());
        c.playback_finished();
        assert_eq!(c.state(), UtteranceState::Idle);
        assert!(c.tick(&frame(3, 40.1, (200, 100))).unwrap().is_some());
    }

    #[test]
    fn unfinished_utterance_carries_into_next_round() {
        let mut c = Commentator::new(EngineConfig::default(), GateMode::Offline).unwrap();
        c.handle(&LogEvent::RoundStart { round_index: 0 }).unwrap();
        c.tick(&frame(0, 59.0, (200, 200))).unwrap();
        let d = c.tick(&frame(1, 59.5, (200, 100))).unwrap().unwrap();
        let remaining = 59.5 + estimate_duration(&d.text) - 59.5;
        c.handle(&LogEvent::RoundStart { round_index: 1 }).unwrap();
        let mut f = frame(2, 0.0, (200, 200));
        f.round_index = 1;
        c.tick(&f).unwrap();
        assert_eq!(
            c.state(),
            UtteranceState::Speaking {
                until_round_time_s: remaining
            }
        );
    }

    #[test]
    fn empty_log_empty_script() {
        assert!(run_pipeline("".as_bytes(), &EngineConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn script_lines_round_trip() {
        let d = CommentaryDirective {
            frame_index: 3,
            round_index: 0,
            round_time_s: 1.5,
            text: "Hi.".into(),
            phonetics: PhoneticParams {
                pitch: 1.25,
                volume_gain_db: -0.5,
            },
            highlight: 0.4,
            design: DesignId::D3,
        };
        let mut buf = Vec::new();
        write_script(&mut buf, std::slice::from_ref(&d)).unwrap();
        assert_eq!(read_script(&buf[..]).unwrap(), vec![d]);
    }
}
