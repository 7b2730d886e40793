//! Event detection between frames and templated commentary text.

mod events;
mod templates;

pub use events::{
    detect_events, EventThresholds, GameEvent, GameEventKind, SequencingError, SkillNames,
};
pub use templates::{
    render, select_template, HighlightBand, Placeholder, PlayerNames, RenderError, Template,
    TemplateError, TemplateLibrary, TemplateSelector,
};
