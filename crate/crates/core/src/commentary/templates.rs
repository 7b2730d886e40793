use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::events::{GameEvent, GameEventKind};
use crate::game::Side;

const BUNDLED: &str = include_str!("../../assets/templates.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placeholder {
    P1,
    P2,
    Attacker,
    Defender,
    Skill,
}

impl Placeholder {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "P1" => Placeholder::P1,
            "P2" => Placeholder::P2,
            "ATTACKER" => Placeholder::Attacker,
            "DEFENDER" => Placeholder::Defender,
            "SKILL" => Placeholder::Skill,
            _ => return None,
        })
    }

    fn needs_event(self) -> bool {
        matches!(
            self,
            Placeholder::Attacker | Placeholder::Defender | Placeholder::Skill
        )
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placeholder::P1 => "{P1}",
            Placeholder::P2 => "{P2}",
            Placeholder::Attacker => "{ATTACKER}",
            Placeholder::Defender => "{DEFENDER}",
            Placeholder::Skill => "{SKILL}",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(Placeholder),
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template library is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("template {id}: {message}")]
    Invalid { id: u32, message: String },
    #[error("duplicate template id {0}")]
    DuplicateId(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot resolve placeholder {0}")]
pub struct RenderError(pub Placeholder);

/// Closed-open interval `[lo, hi)` of highlight values; `hi == 1` also admits 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct HighlightBand {
    pub lo: f64,
    pub hi: f64,
}

impl HighlightBand {
    pub const LOW: HighlightBand = HighlightBand {
        lo: 0.0,
        hi: 1.0 / 3.0,
    };
    pub const MID: HighlightBand = HighlightBand {
        lo: 1.0 / 3.0,
        hi: 2.0 / 3.0,
    };
    pub const HIGH: HighlightBand = HighlightBand {
        lo: 2.0 / 3.0,
        hi: 1.0,
    };
    pub const ANY: HighlightBand = HighlightBand { lo: 0.0, hi: 1.0 };

    pub fn contains(&self, h: f64) -> bool {
        (self.lo <= h && h < self.hi) || (h == 1.0 && self.hi == 1.0)
    }

    fn is_valid(&self) -> bool {
        0.0 <= self.lo && self.lo < self.hi && self.hi <= 1.0
    }
}

impl From<[f64; 2]> for HighlightBand {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<HighlightBand> for [f64; 2] {
    fn from(b: HighlightBand) -> Self {
        [b.lo, b.hi]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub id: u32,
    pub pattern: String,
    pub tags: BTreeSet<GameEventKind>,
    pub band: HighlightBand,
}

impl Template {
    pub fn new(
        id: u32,
        pattern: impl Into<String>,
        tags: impl IntoIterator<Item = GameEventKind>,
        band: HighlightBand,
    ) -> Result<Self, TemplateError> {
        let t = Self {
            id,
            pattern: pattern.into(),
            tags: tags.into_iter().collect(),
            band,
        };
        t.check()?;
        Ok(t)
    }

    fn invalid(&self, message: impl Into<String>) -> TemplateError {
        TemplateError::Invalid {
            id: self.id,
            message: message.into(),
        }
    }

    fn segments(&self) -> Result<Vec<Segment>, TemplateError> {
        let mut out = Vec::new();
        let mut rest = self.pattern.as_str();
        while !rest.is_empty() {
            match rest.find(['{', '}']) {
                None => {
                    out.push(Segment::Text(rest.to_owned()));
                    break;
                }
                Some(i) => {
                    if i > 0 {
                        out.push(Segment::Text(rest[..i].to_owned()));
                    }
                    if rest.as_bytes()[i] == b'}' {
                        return Err(self.invalid("unmatched '}'"));
                    }
                    let close = rest[i..]
                        .find('}')
                        .ok_or_else(|| self.invalid("unclosed '{'"))?;
                    let name = &rest[i + 1..i + close];
                    let slot = Placeholder::parse(name)
                        .ok_or_else(|| self.invalid(format!("unknown placeholder {{{name}}}")))?;
                    out.push(Segment::Slot(slot));
                    rest = &rest[i + close + 1..];
                }
            }
        }
        Ok(out)
    }

    pub fn placeholders(&self) -> Vec<Placeholder> {
        self.segments()
            .map(|segs| {
                segs.into_iter()
                    .filter_map(|s| match s {
                        Segment::Slot(p) => Some(p),
                        Segment::Text(_) => None,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Checks placeholders, band and tags. Attacker-side placeholders are only allowed
    /// when every tag names an attacker.
    pub fn check(&self) -> Result<(), TemplateError> {
        if self.pattern.trim().is_empty() {
            return Err(self.invalid("empty pattern"));
        }
        if self.tags.is_empty() {
            return Err(self.invalid("no event tags"));
        }
        if !self.band.is_valid() {
            return Err(self.invalid(format!(
                "band [{}, {}] is not a non-empty subinterval of [0, 1]",
                self.band.lo, self.band.hi
            )));
        }
        let needs_event = self
            .segments()?
            .iter()
            .any(|s| matches!(s, Segment::Slot(p) if p.needs_event()));
        if needs_event && !self.tags.iter().all(|k| k.has_attacker()) {
            return Err(self.invalid("attacker placeholders on a tag without an attacker"));
        }
        Ok(())
    }

    pub fn matches_any(&self, events: &[GameEvent]) -> bool {
        events.iter().any(|e| self.tags.contains(&e.kind))
    }

    /// The highest-priority event this template is tagged for, else the first event.
    pub fn context_event<'a>(&self, events: &'a [GameEvent]) -> Option<&'a GameEvent> {
        events
            .iter()
            .find(|e| self.tags.contains(&e.kind))
            .or_else(|| events.first())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerNames {
    pub p1: String,
    pub p2: String,
}

impl Default for PlayerNames {
    fn default() -> Self {
        Self {
            p1: "Zen".to_owned(),
            p2: "Garnet".to_owned(),
        }
    }
}

impl PlayerNames {
    pub fn of(&self, side: Side) -> &str {
        match side {
            Side::P1 => &self.p1,
            Side::P2 => &self.p2,
        }
    }
}

/// Substitutes every placeholder of `template`.
pub fn render(
    template: &Template,
    names: &PlayerNames,
    event: Option<&GameEvent>,
) -> Result<String, RenderError> {
    let segments = template
        .segments()
        .expect("templates are validated on construction");
    let attacker = event.and_then(|e| e.attacker);
    let mut out = String::with_capacity(template.pattern.len() + 16);
    for segment in &segments {
        match segment {
            Segment::Text(t) => out.push_str(t),
            Segment::Slot(p) => {
                let value = match p {
                    Placeholder::P1 => Some(names.p1.as_str()),
                    Placeholder::P2 => Some(names.p2.as_str()),
                    Placeholder::Attacker => attacker.map(|s| names.of(s)),
                    Placeholder::Defender => attacker.map(|s| names.of(s.opponent())),
                    Placeholder::Skill => event.and_then(|e| e.skill_name.as_deref()),
                };
                out.push_str(value.ok_or(RenderError(*p))?);
            }
        }
    }
    Ok(out)
}

/// Immutable, non-empty collection of validated templates with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateLibrary {
    templates: Vec<Template>,
}

impl TemplateLibrary {
    pub fn new(templates: Vec<Template>) -> Result<Self, TemplateError> {
        if templates.is_empty() {
            return Err(TemplateError::Empty);
        }
        let mut ids = BTreeSet::new();
        for t in &templates {
            t.check()?;
            if !ids.insert(t.id) {
                return Err(TemplateError::DuplicateId(t.id));
            }
        }
        Ok(Self { templates })
    }

    /// One JSON object per line: `{"id":..,"pattern":..,"tags":[..],"band":[lo,hi]}`.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, TemplateError> {
        let mut templates = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let t: Template = serde_json::from_str(&line).map_err(|e| TemplateError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            templates.push(t);
        }
        Self::new(templates)
    }

    /// The library shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_jsonl(BUNDLED.as_bytes()).expect("bundled template library is valid")
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Candidate templates for the given events and highlight value, following the
    /// fallback chain: tag and band match, tag match, Neutral in band, any Neutral,
    /// whole library.
    pub fn candidates(&self, events: &[GameEvent], h: f64) -> Vec<&Template> {
        let neutral = |t: &&Template| t.tags.contains(&GameEventKind::Neutral);
        let filters: [&dyn Fn(&&Template) -> bool; 4] = [
            &|t| t.matches_any(events) && t.band.contains(h),
            &|t| t.matches_any(events),
            &|t| neutral(t) && t.band.contains(h),
            &neutral,
        ];
        for filter in filters {
            let found: Vec<&Template> = self.templates.iter().filter(filter).collect();
            if !found.is_empty() {
                return found;
            }
        }
        self.templates.iter().collect()
    }
}

/// Seeded template chooser that avoids repeating the previous pick.
#[derive(Debug, Clone)]
pub struct TemplateSelector {
    rng: ChaCha8Rng,
    previous: Option<u32>,
}

impl TemplateSelector {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            previous: None,
        }
    }

    pub fn previous(&self) -> Option<u32> {
        self.previous
    }

    pub fn set_previous(&mut self, id: Option<u32>) {
        self.previous = id;
    }

    pub fn select<'a>(
        &mut self,
        events: &[GameEvent],
        h: f64,
        library: &'a TemplateLibrary,
    ) -> &'a Template {
        let mut candidates = library.candidates(events, h);
        if candidates.len() >= 2 {
            if let Some(prev) = self.previous {
                candidates.retain(|t| t.id != prev);
            }
        }
        // u32 keeps the sampled index identical on 32- and 64-bit targets.
        let pick = candidates[self.rng.gen_range(0..candidates.len() as u32) as usize];
        self.previous = Some(pick.id);
        pick
    }
}

/// Free-function form of [`TemplateSelector::select`].
pub fn select_template<'a>(
    events: &[GameEvent],
    h: f64,
    library: &'a TemplateLibrary,
    selector: &mut TemplateSelector,
) -> &'a Template {
    selector.select(events, h, library)
}
