//! Maps a highlight value onto TTS pitch and volume through one of five designs.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::ConfigError;

/// Interval of a synthesis parameter plus its neutral value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhoneticRange {
    pub min: f64,
    pub max: f64,
    pub default: f64,
}

impl PhoneticRange {
    pub fn new(min: f64, max: f64, default: f64) -> Result<Self, ConfigError> {
        let r = Self { min, max, default };
        r.check()?;
        Ok(r)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.min.is_nan() || self.max.is_nan() || self.min >= self.max {
            return Err(ConfigError::new(format!(
                "range min {} must be below max {}",
                self.min, self.max
            )));
        }
        if !(self.min..=self.max).contains(&self.default) {
            return Err(ConfigError::new(format!(
                "default {} outside [{}, {}]",
                self.default, self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

/// Semitones relative to the voice's natural pitch.
pub const PITCH_RANGE: PhoneticRange = PhoneticRange {
    min: -6.0,
    max: 14.0,
    default: 0.0,
};

/// Hard limit on volume gain in dB.
pub const VOLUME_CLAMP: PhoneticRange = PhoneticRange {
    min: -6.0,
    max: 6.0,
    default: 0.0,
};

/// Span the highlight value is mapped over for volume gain in dB. Narrower than
/// [`VOLUME_CLAMP`]; this span reproduces the reference volume values.
pub const VOLUME_MAP: PhoneticRange = PhoneticRange {
    min: -4.0,
    max: 4.0,
    default: 0.0,
};

/// Ranges used by [`adjust`]. Pitch maps and clamps over the same interval; volume
/// maps over `volume_map` and is then clamped to `volume_clamp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhoneticConfig {
    pub pitch: PhoneticRange,
    pub volume_map: PhoneticRange,
    pub volume_clamp: PhoneticRange,
}

impl Default for PhoneticConfig {
    fn default() -> Self {
        Self {
            pitch: PITCH_RANGE,
            volume_map: VOLUME_MAP,
            volume_clamp: VOLUME_CLAMP,
        }
    }
}

impl PhoneticConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        self.pitch.check()?;
        self.volume_map.check()?;
        self.volume_clamp.check()?;
        if self.volume_map.default != self.volume_clamp.default {
            return Err(ConfigError::new("volume map and clamp defaults differ"));
        }
        Ok(())
    }
}

/// How a channel responds to the highlight value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelPolicy {
    Default,
    Highlight,
    InverseHighlight,
}

/// The five adjustment designs: baseline, volume up, volume down, pitch up, pitch down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum DesignId {
    D1,
    D2,
    D3,
    D4,
    D5,
}

impl DesignId {
    pub const ALL: [DesignId; 5] = [
        DesignId::D1,
        DesignId::D2,
        DesignId::D3,
        DesignId::D4,
        DesignId::D5,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    /// `(volume, pitch)` policies.
    pub fn policy(self) -> (ChannelPolicy, ChannelPolicy) {
        use ChannelPolicy::*;
        match self {
            DesignId::D1 => (Default, Default),
            DesignId::D2 => (Highlight, Default),
            DesignId::D3 => (InverseHighlight, Default),
            DesignId::D4 => (Default, Highlight),
            DesignId::D5 => (Default, InverseHighlight),
        }
    }
}

impl TryFrom<u8> for DesignId {
    type Error = ConfigError;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            1..=5 => Ok(Self::ALL[n as usize - 1]),
            _ => Err(ConfigError::new(format!("design must be 1..=5, got {n}"))),
        }
    }
}

impl From<DesignId> for u8 {
    fn from(d: DesignId) -> u8 {
        d.number()
    }
}

impl fmt::Display for DesignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhoneticParams {
    pub pitch: f64,
    pub volume_gain_db: f64,
}

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

fn clamp_unit(h: f64) -> f64 {
    if !(0.0..=1.0).contains(&h) && !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("highlight value {h} outside [0, 1]; clamping");
    }
    if h.is_nan() {
        0.0
    } else {
        h.clamp(0.0, 1.0)
    }
}

/// Affine interpolation of `h` (clamped to [0, 1]) over `[r.min, r.max]`.
pub fn map_to_range(h: f64, r: &PhoneticRange) -> f64 {
    r.min + (r.max - r.min) * clamp_unit(h)
}

fn channel(policy: ChannelPolicy, h: f64, map: &PhoneticRange, clamp: &PhoneticRange) -> f64 {
    let v = match policy {
        ChannelPolicy::Default => return map.default,
        ChannelPolicy::Highlight => map_to_range(h, map),
        ChannelPolicy::InverseHighlight => map_to_range(1.0 - clamp_unit(h), map),
    };
    clamp.clamp(v)
}

/// Resolves pitch and volume for one utterance.
pub fn adjust(h: f64, design: DesignId, config: &PhoneticConfig) -> PhoneticParams {
    let (volume, pitch) = design.policy();
    PhoneticParams {
        pitch: channel(pitch, h, &config.pitch, &config.pitch),
        volume_gain_db: channel(volume, h, &config.volume_map, &config.volume_clamp),
    }
}
