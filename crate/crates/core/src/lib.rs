//! Real-time fighting-game commentary engine.
//!
//! Frame telemetry is scored with three highlight cues (score transition, action,
//! distance), the fused highlight value drives the pitch or loudness of templated
//! commentary, and the resulting utterances are gated one at a time and sent to a
//! text-to-speech REST endpoint.

use thiserror::Error;

pub mod commentary;
pub mod game;
pub mod highlight;
pub mod par;
pub mod phonetics;
pub mod scheduler;
pub mod study;
pub mod synth;
pub mod tts;

pub use game::{FrameSnapshot, LogEvent, PlayerState, RoundConfig, Side};
pub use highlight::{CueWeights, HighlightCues, RankActTable, RoundTracker};
pub use phonetics::{DesignId, PhoneticConfig, PhoneticParams, PhoneticRange};
pub use scheduler::{CommentaryDirective, EngineConfig};

/// Rejected configuration value.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self(message.into())
    }
}
