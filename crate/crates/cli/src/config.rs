//! Optional TOML run configuration. Every key is optional; command-line flags win.

use std::path::{Path, PathBuf};

use hypecast_core::commentary::{EventThresholds, PlayerNames};
use hypecast_core::{CueWeights, DesignId, EngineConfig, PhoneticConfig, PhoneticRange, RoundConfig};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub design: Option<u8>,
    pub seed: Option<u64>,
    pub templates: Option<PathBuf>,
    pub neutral_cadence_s: Option<f64>,
    #[serde(default)]
    pub round: RoundSection,
    #[serde(default)]
    pub pitch: PitchSection,
    #[serde(default)]
    pub volume: VolumeSection,
    pub weights: Option<WeightsSection>,
    #[serde(default)]
    pub thresholds: ThresholdSection,
    #[serde(default)]
    pub names: NamesSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundSection {
    pub initial_hp: Option<u32>,
    pub duration_s: Option<f64>,
    pub fps: Option<f64>,
    pub stage_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PitchSection {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub default: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeSection {
    pub map_min: Option<f64>,
    pub map_max: Option<f64>,
    pub clamp_min: Option<f64>,
    pub clamp_max: Option<f64>,
    pub default: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub score: f64,
    pub action: f64,
    pub distance: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub big_hp_drop: Option<u32>,
    pub round_near_end: Option<f64>,
    pub close_quarters: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamesSection {
    pub p1: Option<String>,
    pub p2: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    pub fn round(&self) -> RoundConfig {
        let d = RoundConfig::default();
        RoundConfig {
            initial_hp: self.round.initial_hp.unwrap_or(d.initial_hp),
            round_duration_s: self.round.duration_s.unwrap_or(d.round_duration_s),
            fps: self.round.fps.unwrap_or(d.fps),
            stage_width: self.round.stage_width.unwrap_or(d.stage_width),
        }
    }

    pub fn phonetics(&self) -> PhoneticConfig {
        let d = PhoneticConfig::default();
        let p = &self.pitch;
        let v = &self.volume;
        let default_db = v.default.unwrap_or(d.volume_map.default);
        PhoneticConfig {
            pitch: PhoneticRange {
                min: p.min.unwrap_or(d.pitch.min),
                max: p.max.unwrap_or(d.pitch.max),
                default: p.default.unwrap_or(d.pitch.default),
            },
            volume_map: PhoneticRange {
                min: v.map_min.unwrap_or(d.volume_map.min),
                max: v.map_max.unwrap_or(d.volume_map.max),
                default: default_db,
            },
            volume_clamp: PhoneticRange {
                min: v.clamp_min.unwrap_or(d.volume_clamp.min),
                max: v.clamp_max.unwrap_or(d.volume_clamp.max),
                default: default_db,
            },
        }
    }

    /// Engine settings from the file alone; the caller applies flag overrides.
    pub fn engine(&self) -> Result<EngineConfig, String> {
        let base = EngineConfig::default();
        let t = &self.thresholds;
        let design = match self.design {
            Some(n) => DesignId::try_from(n).map_err(|e| e.to_string())?,
            None => base.design,
        };
        let weights = match &self.weights {
            Some(w) => CueWeights::new(w.score, w.action, w.distance).map_err(|e| e.to_string())?,
            None => base.weights,
        };
        let names = PlayerNames {
            p1: self.names.p1.clone().unwrap_or(base.names.p1.clone()),
            p2: self.names.p2.clone().unwrap_or(base.names.p2.clone()),
        };
        Ok(EngineConfig {
            round: self.round(),
            weights,
            phonetics: self.phonetics(),
            thresholds: EventThresholds {
                big_hp_drop: t.big_hp_drop.unwrap_or(base.thresholds.big_hp_drop),
                round_near_end: t.round_near_end.unwrap_or(base.thresholds.round_near_end),
                close_quarters: t.close_quarters.unwrap_or(base.thresholds.close_quarters),
            },
            design,
            seed: self.seed.unwrap_or(base.seed),
            neutral_cadence_s: self.neutral_cadence_s.unwrap_or(base.neutral_cadence_s),
            names,
            ..base
        })
    }
}
