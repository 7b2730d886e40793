//! Highlight cues for a single frame and their weighted fusion.
//!
//! * `score` grows with elapsed round time and with the HP both players have lost.
//! * `action` rewards attacks, with a boost for the ranked signature moves.
//! * `distance` rewards close-range fighting relative to the widest gap seen so far
//!   in the round.
//!
//! All arithmetic is `f64`. The only state is the per-round [`RoundTracker`], which
//! callers thread through explicitly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{FrameSnapshot, PlayerState, RoundConfig};
use crate::{par, ConfigError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CueError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{cue} cue {value} is outside [0, 1]")]
    Domain { cue: &'static str, value: f64 },
}

/// Signature moves ranked by damage; rank 1 is the strongest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankActTable {
    entries: Vec<(String, u32)>,
}

impl Default for RankActTable {
    fn default() -> Self {
        Self {
            entries: vec![
                ("STAND_D_DF_FC".to_owned(), 1),
                ("STAND_F_D_DFB".to_owned(), 2),
                ("STAND_D_DB_BB".to_owned(), 3),
                ("STAND_D_DF_FB".to_owned(), 4),
            ],
        }
    }
}

impl RankActTable {
    /// Ranks must be unique and contiguous from 1; action ids must be unique.
    pub fn new(entries: Vec<(String, u32)>) -> Result<Self, ConfigError> {
        let mut ranks: Vec<u32> = entries.iter().map(|(_, r)| *r).collect();
        ranks.sort_unstable();
        if ranks.iter().enumerate().any(|(i, &r)| r as usize != i + 1) {
            return Err(ConfigError::new(format!(
                "rank table ranks must be 1..={} without gaps, got {ranks:?}",
                entries.len()
            )));
        }
        for (i, (id, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(other, _)| other == id) {
                return Err(ConfigError::new(format!("duplicate rank table action {id}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn rank_of(&self, action_id: &str) -> Option<u32> {
        self.entries
            .iter()
            .find(|(id, _)| id == action_id)
            .map(|(_, rank)| *rank)
    }

    pub fn contains(&self, action_id: &str) -> bool {
        self.rank_of(action_id).is_some()
    }

    pub fn entries(&self) -> &[(String, u32)] {
        &self.entries
    }
}

/// Fusion weights for the three cues. They sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueWeights {
    pub score: f64,
    pub action: f64,
    pub distance: f64,
}

impl Default for CueWeights {
    fn default() -> Self {
        Self::EQUAL
    }
}

impl CueWeights {
    pub const EQUAL: CueWeights = CueWeights {
        score: 1.0 / 3.0,
        action: 1.0 / 3.0,
        distance: 1.0 / 3.0,
    };

    pub fn new(score: f64, action: f64, distance: f64) -> Result<Self, ConfigError> {
        let w = Self {
            score,
            action,
            distance,
        };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("score", self.score),
            ("action", self.action),
            ("distance", self.distance),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::new(format!("weight {name}={v} outside [0, 1]")));
            }
        }
        let sum = self.score + self.action + self.distance;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::new(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighlightCues {
    pub score: f64,
    pub action: f64,
    pub distance: f64,
    pub highlight: f64,
}

/// Widest horizontal gap between the players seen so far in the current round.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RoundTracker {
    pub max_abs_dx: f64,
}

impl RoundTracker {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Fraction of the combined starting HP that both players have lost.
pub fn rhp(hp1: i32, hp2: i32, initial_hp: u32) -> Result<f64, CueError> {
    if initial_hp == 0 {
        return Err(ConfigError::new("initial_hp must be positive").into());
    }
    let initial = f64::from(initial_hp);
    Ok((initial - 0.5 * (f64::from(hp1) + f64::from(hp2))) / initial)
}

/// Elapsed-time fraction of the round multiplied by [`rhp`].
pub fn score_cue(round_time_s: f64, duration_s: f64, rhp_value: f64) -> Result<f64, CueError> {
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(ConfigError::new("round duration must be positive").into());
    }
    Ok(round_time_s / duration_s * rhp_value)
}

/// `1/2 + 2^-rank` for a ranked move, `1/2` for any other attack, 0 otherwise.
///
/// A ranked move scores its rank even when the attack flag is unset.
pub fn action_cue(action_id: &str, is_attack: bool, table: &RankActTable) -> f64 {
    match table.rank_of(action_id) {
        Some(rank) => 0.5 + 0.5f64.powi(rank as i32),
        None if is_attack => 0.5,
        None => 0.0,
    }
}

/// Closeness of the players relative to the widest gap so far in the round.
///
/// Coincident players with no earlier separation count as maximally close.
pub fn distance_cue(x1: f64, x2: f64, tracker: RoundTracker) -> (f64, RoundTracker) {
    let dx = (x1 - x2).abs();
    let updated = RoundTracker {
        max_abs_dx: tracker.max_abs_dx.max(dx),
    };
    let value = if updated.max_abs_dx == 0.0 {
        1.0
    } else {
        1.0 - dx / updated.max_abs_dx
    };
    (value, updated)
}

/// Weighted sum of the three cues.
pub fn highlight(score: f64, action: f64, distance: f64, w: &CueWeights) -> Result<f64, CueError> {
    for (cue, value) in [("score", score), ("action", action), ("distance", distance)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(CueError::Domain { cue, value });
        }
    }
    let h = w.score * score + w.action * action + w.distance * distance;
    Ok(h.clamp(0.0, 1.0))
}

fn player_action(p: &PlayerState, table: &RankActTable) -> f64 {
    action_cue(&p.action_id, p.is_attack, table)
}

/// All cues for one validated frame. When both players attack, the stronger action wins.
pub fn evaluate_frame(
    frame: &FrameSnapshot,
    config: &RoundConfig,
    table: &RankActTable,
    weights: &CueWeights,
    tracker: RoundTracker,
) -> Result<(HighlightCues, RoundTracker), CueError> {
    let rhp_value = rhp(frame.p1.hp, frame.p2.hp, config.initial_hp)?;
    let score = score_cue(frame.round_time_s, config.round_duration_s, rhp_value)?;
    let action = player_action(&frame.p1, table).max(player_action(&frame.p2, table));
    let (distance, tracker) = distance_cue(frame.p1.x_pos, frame.p2.x_pos, tracker);
    let highlight = highlight(score, action, distance, weights)?;
    Ok((
        HighlightCues {
            score,
            action,
            distance,
            highlight,
        },
        tracker,
    ))
}

/// Evaluator bundling the immutable inputs of [`evaluate_frame`].
#[derive(Debug, Clone, Default)]
pub struct CueEvaluator {
    pub config: RoundConfig,
    pub table: RankActTable,
    pub weights: CueWeights,
}

impl CueEvaluator {
    pub fn new(config: RoundConfig, table: RankActTable, weights: CueWeights) -> Self {
        Self {
            config,
            table,
            weights,
        }
    }

    pub fn evaluate(
        &self,
        frame: &FrameSnapshot,
        tracker: RoundTracker,
    ) -> Result<(HighlightCues, RoundTracker), CueError> {
        evaluate_frame(frame, &self.config, &self.table, &self.weights, tracker)
    }

    /// Evaluates a sequence of frames from a single round, starting from a fresh tracker.
    pub fn evaluate_round(&self, frames: &[FrameSnapshot]) -> Result<Vec<HighlightCues>, CueError> {
        let mut tracker = RoundTracker::new();
        frames
            .iter()
            .map(|frame| {
                let (cues, next) = self.evaluate(frame, tracker)?;
                tracker = next;
                Ok(cues)
            })
            .collect()
    }

    /// Evaluates an ordered multi-round frame sequence. Rounds are independent and are
    /// processed in parallel when the `parallel` feature is enabled.
    pub fn evaluate_batch(&self, frames: &[FrameSnapshot]) -> Result<Vec<HighlightCues>, CueError> {
        let rounds = split_rounds(frames);
        join_rounds(par::map(&rounds, |round| self.evaluate_round(round)))
    }

    /// Single-threaded twin of [`CueEvaluator::evaluate_batch`].
    pub fn evaluate_batch_sequential(
        &self,
        frames: &[FrameSnapshot],
    ) -> Result<Vec<HighlightCues>, CueError> {
        let rounds = split_rounds(frames);
        join_rounds(par::map_sequential(&rounds, |round| self.evaluate_round(round)))
    }
}

fn join_rounds(
    rounds: Vec<Result<Vec<HighlightCues>, CueError>>,
) -> Result<Vec<HighlightCues>, CueError> {
    let mut out = Vec::new();
    for round in rounds {
        out.extend(round?);
    }
    Ok(out)
}

/// Splits an ordered frame sequence wherever the round index changes.
pub fn split_rounds(frames: &[FrameSnapshot]) -> Vec<&[FrameSnapshot]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..frames.len() {
        if frames[i].round_index != frames[i - 1].round_index {
            out.push(&frames[start..i]);
            start = i;
        }
    }
    if start < frames.len() {
        out.push(&frames[start..]);
    }
    out
}
