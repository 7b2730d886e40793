//! Text-to-speech wire client, its mock server and the live dispatcher.

mod client;
mod dispatch;
mod mock;
mod request;

pub use client::{SynthesisResult, TtsClient, TtsError, AUTH_TOKEN_ENV, DEFAULT_TIMEOUT, ENDPOINT_ENV};
pub use dispatch::{run_live, Completion, DispatchOptions, Dispatcher, LiveReport};
pub use mock::{MockBehavior, MockResponse, MockServer, RecordedRequest, DEFAULT_AUDIO, SYNTHESIZE_PATH};
pub use request::{
    build_request, validate_request_body, AudioEncoding, RequestSummary, VoiceConfig,
    REQUEST_LEAVES,
};
