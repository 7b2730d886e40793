use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{FrameSnapshot, PlayerState, RoundConfig, Side};
use crate::highlight::{HighlightCues, RankActTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GameEventKind {
    AttackStarted,
    RankedAttackStarted,
    HitLanded,
    BigHpDrop,
    RoundNearEnd,
    CloseQuarters,
    Neutral,
}

impl GameEventKind {
    pub const ALL: [GameEventKind; 7] = [
        GameEventKind::AttackStarted,
        GameEventKind::RankedAttackStarted,
        GameEventKind::HitLanded,
        GameEventKind::BigHpDrop,
        GameEventKind::RoundNearEnd,
        GameEventKind::CloseQuarters,
        GameEventKind::Neutral,
    ];

    /// Lower sorts first in a detected event list.
    pub fn priority(self) -> u8 {
        match self {
            GameEventKind::RankedAttackStarted => 0,
            GameEventKind::BigHpDrop => 1,
            GameEventKind::HitLanded => 2,
            GameEventKind::AttackStarted => 3,
            GameEventKind::CloseQuarters => 4,
            GameEventKind::RoundNearEnd => 5,
            GameEventKind::Neutral => 6,
        }
    }

    /// Whether events of this kind name an attacker and a skill.
    pub fn has_attacker(self) -> bool {
        matches!(
            self,
            GameEventKind::AttackStarted
                | GameEventKind::RankedAttackStarted
                | GameEventKind::HitLanded
                | GameEventKind::BigHpDrop
        )
    }
}

impl fmt::Display for GameEventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub kind: GameEventKind,
    pub attacker: Option<Side>,
    pub skill_name: Option<String>,
}

impl GameEvent {
    pub fn neutral() -> Self {
        Self::plain(GameEventKind::Neutral)
    }

    fn plain(kind: GameEventKind) -> Self {
        Self {
            kind,
            attacker: None,
            skill_name: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventThresholds {
    /// Minimum single-frame HP loss for a big drop.
    pub big_hp_drop: u32,
    /// Fraction of the round after which the round counts as nearly over.
    pub round_near_end: f64,
    /// Minimum distance cue for close quarters.
    pub close_quarters: f64,
}

impl Default for EventThresholds {
    fn default() -> Self {
        Self {
            big_hp_drop: 30,
            round_near_end: 0.8,
            close_quarters: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("frames {prev} (round {prev_round}) and {curr} (round {curr_round}) are not consecutive")]
pub struct SequencingError {
    pub prev: u64,
    pub prev_round: u32,
    pub curr: u64,
    pub curr_round: u32,
}

/// Display names for action ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillNames {
    names: HashMap<String, String>,
}

impl Default for SkillNames {
    fn default() -> Self {
        let names = [
            ("STAND_D_DF_FC", "Special Skill"),
            ("STAND_F_D_DFB", "Strong Upper"),
            ("STAND_D_DB_BB", "Sliding Kick"),
            ("STAND_D_DF_FB", "Shoot Strong Projectile Forward"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_owned(), b.to_owned()))
        .collect();
        Self { names }
    }
}

impl SkillNames {
    pub fn insert(&mut self, action_id: impl Into<String>, name: impl Into<String>) {
        self.names.insert(action_id.into(), name.into());
    }

    /// Falls back to a title-cased rendering of the id, e.g. `CROUCH_FB` -> `Crouch Fb`.
    pub fn display(&self, action_id: &str) -> String {
        if let Some(name) = self.names.get(action_id) {
            return name.clone();
        }
        action_id
            .split('_')
            .filter(|w| !w.is_empty())
            .map(|w| {
                let lower = w.to_ascii_lowercase();
                let mut chars = lower.chars();
                match chars.next() {
                    Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
                    None => String::new(),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn attacking(p: &PlayerState, table: &RankActTable) -> bool {
    p.is_attack || table.contains(&p.action_id)
}

/// Events between two consecutive frames of one round, sorted by
/// [`GameEventKind::priority`]. `[Neutral]` when nothing else fires.
pub fn detect_events(
    prev: &FrameSnapshot,
    curr: &FrameSnapshot,
    cues: &HighlightCues,
    table: &RankActTable,
    thresholds: &EventThresholds,
    round: &RoundConfig,
    skills: &SkillNames,
) -> Result<Vec<GameEvent>, SequencingError> {
    if curr.round_index != prev.round_index || curr.frame_index != prev.frame_index + 1 {
        return Err(SequencingError {
            prev: prev.frame_index,
            prev_round: prev.round_index,
            curr: curr.frame_index,
            curr_round: curr.round_index,
        });
    }

    let mut events = Vec::new();
    for side in [Side::P1, Side::P2] {
        let (before, now) = (prev.player(side), curr.player(side));
        if attacking(now, table) && (!attacking(before, table) || before.action_id != now.action_id)
        {
            let kind = if table.contains(&now.action_id) {
                GameEventKind::RankedAttackStarted
            } else {
                GameEventKind::AttackStarted
            };
            events.push(GameEvent {
                kind,
                attacker: Some(side),
                skill_name: Some(skills.display(&now.action_id)),
            });
        }
    }
    for victim in [Side::P1, Side::P2] {
        let drop = prev.player(victim).hp - curr.player(victim).hp;
        if drop <= 0 {
            continue;
        }
        let attacker = victim.opponent();
        let hit = GameEvent {
            kind: GameEventKind::HitLanded,
            attacker: Some(attacker),
            skill_name: Some(skills.display(&curr.player(attacker).action_id)),
        };
        if drop as u32 >= thresholds.big_hp_drop {
            events.push(GameEvent {
                kind: GameEventKind::BigHpDrop,
                ..hit.clone()
            });
        }
        events.push(hit);
    }
    if curr.round_time_s / round.round_duration_s >= thresholds.round_near_end {
        events.push(GameEvent::plain(GameEventKind::RoundNearEnd));
    }
    if cues.distance >= thresholds.close_quarters {
        events.push(GameEvent::plain(GameEventKind::CloseQuarters));
    }
    if events.is_empty() {
        events.push(GameEvent::neutral());
    }
    events.sort_by_key(|e| e.kind.priority());
    Ok(events)
}
