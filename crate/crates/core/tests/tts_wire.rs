mod common;

use std::time::{Duration, Instant};

use hypecast_core::game::RoundConfig;
use hypecast_core::phonetics::{adjust, PhoneticConfig};
use hypecast_core::scheduler::{run_events, Commentator, GateMode};
use hypecast_core::synth::{generate_trace, to_events};
use hypecast_core::tts::{
    build_request, run_live, validate_request_body, Completion, DispatchOptions, Dispatcher,
    MockBehavior, MockResponse, MockServer, TtsClient, TtsError, VoiceConfig, DEFAULT_AUDIO,
};
use hypecast_core::{CommentaryDirective, DesignId, EngineConfig};
use proptest::prelude::*;

fn directive() -> CommentaryDirective {
    CommentaryDirective {
        frame_index: 3599,
        round_index: 0,
        round_time_s: 59.99,
        text: "Garnet is so powerful releasing Heavy Kick that Zen should be very careful!".into(),
        phonetics: adjust(0.6239, DesignId::D4, &PhoneticConfig::default()),
        highlight: 0.6239,
        design: DesignId::D4,
    }
}

fn client(server: &MockServer) -> TtsClient {
    TtsClient::new(server.url(), Some("secret".into()), VoiceConfig::default())
}

#[test]
fn golden_body_is_stable() {
    let path = format!("{}/tests/fixtures/golden_request.json", env!("CARGO_MANIFEST_DIR"));
    let body = build_request(&directive(), &VoiceConfig::default());
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &body).unwrap();
    }
    let golden = std::fs::read(&path).expect("golden file present");
    assert_eq!(String::from_utf8(body.clone()).unwrap(), String::from_utf8(golden).unwrap());
    assert_eq!(body, build_request(&directive(), &VoiceConfig::default()));
}

#[test]
fn echo_returns_canned_audio() {
    let server = MockServer::start(0, MockBehavior::default()).unwrap();
    let body = build_request(&directive(), &VoiceConfig::default());
    let result = client(&server).synthesize(&body).unwrap();
    assert_eq!(result.audio_bytes, DEFAULT_AUDIO.as_bytes());
    assert_eq!(result.content_type, "audio/mpeg");
    let recorded = server.requests();
    assert_eq!(recorded.len(), 1);
    assert_eq!(recorded[0].body, body);
    assert_eq!(recorded[0].authorization.as_deref(), Some("Bearer secret"));
}

#[test]
fn server_error_is_transport_error() {
    let behavior = MockBehavior {
        requests: vec![MockResponse::status(500)],
        ..MockBehavior::default()
    };
    let server = MockServer::start(0, behavior).unwrap();
    let body = build_request(&directive(), &VoiceConfig::default());
    let err = client(&server).synthesize(&body).unwrap_err();
    assert!(matches!(err, TtsError::Status { status: 500, .. }), "{err}");
    // The next request falls through to the default behavior.
    assert!(client(&server).synthesize(&body).is_ok());
}

#[test]
fn malformed_reply_is_decode_error() {
    let behavior = MockBehavior {
        default: MockResponse {
            malformed: true,
            ..MockResponse::default()
        },
        ..MockBehavior::default()
    };
    let server = MockServer::start(0, behavior).unwrap();
    let err = client(&server).synthesize(b"{}").unwrap_err();
    assert!(matches!(err, TtsError::Decode(_)), "{err}");
}

#[test]
fn slow_reply_times_out() {
    let behavior = MockBehavior {
        default: MockResponse {
            delay_ms: 1_500,
            ..MockResponse::default()
        },
        ..MockBehavior::default()
    };
    let server = MockServer::start(0, behavior).unwrap();
    let client = TtsClient::with_timeout(
        server.url(),
        None,
        VoiceConfig::default(),
        Duration::from_millis(200),
    );
    let started = Instant::now();
    let err = client.synthesize(b"{}").unwrap_err();
    assert!(matches!(err, TtsError::Timeout(_)), "{err}");
    assert!(started.elapsed() < Duration::from_millis(1_400));
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let client = TtsClient::new(
        format!("http://127.0.0.1:{port}/v1/text:synthesize"),
        None,
        VoiceConfig::default(),
    );
    assert!(matches!(client.synthesize(b"{}"), Err(TtsError::Transport(_))));
}

#[test]
fn twenty_directive_script_captured_and_valid() {
    let events = to_events(&generate_trace(240.0, 21, &RoundConfig::default()));
    let config = EngineConfig {
        design: DesignId::D2,
        ..EngineConfig::default()
    };
    let script = run_events(&events, &config).unwrap();
    assert!(script.len() >= 20, "only {} directives", script.len());
    let script = &script[..20];

    let server = MockServer::start(0, MockBehavior::default()).unwrap();
    let client = client(&server);
    let dir = std::env::temp_dir().join(format!("hypecast-audio-{}", std::process::id()));
    for (i, d) in script.iter().enumerate() {
        let result = client.synthesize(&build_request(d, client.voice())).unwrap();
        let path = result.persist(&dir, &format!("{i:04}"), "mp3").unwrap();
        assert_eq!(std::fs::read(path).unwrap(), DEFAULT_AUDIO.as_bytes());
    }
    let _ = std::fs::remove_dir_all(&dir);

    let recorded = server.requests();
    assert_eq!(recorded.len(), 20);
    for (req, d) in recorded.iter().zip(script) {
        let summary = validate_request_body(&req.body).unwrap();
        assert_eq!(summary.text, d.text);
        assert!((-6.0..=14.0).contains(&summary.pitch));
        assert!((-6.0..=6.0).contains(&summary.volume_gain_db));
        assert!((summary.volume_gain_db - d.phonetics.volume_gain_db).abs() <= 5e-5);
    }
}

fn live_run(behavior: MockBehavior, seconds: f64, seed: u64) -> (usize, usize, usize) {
    let server = MockServer::start(0, behavior).unwrap();
    let client = TtsClient::with_timeout(
        server.url(),
        None,
        VoiceConfig::default(),
        Duration::from_millis(300),
    );
    let mut dispatcher = Dispatcher::spawn(client, DispatchOptions::default());
    let events = to_events(&generate_trace(seconds, seed, &RoundConfig::default()));
    let mut commentator = Commentator::new(EngineConfig::default(), GateMode::Live).unwrap();
    let report = run_live(
        &events,
        &mut commentator,
        &mut dispatcher,
        Some(Duration::from_micros(200)),
        Duration::from_secs(5),
    )
    .unwrap();
    for (i, c) in report.completions.iter().enumerate() {
        assert_eq!(c.index(), i);
    }
    (report.directives.len(), report.completions.len(), report.dropped())
}

#[test]
fn live_mode_survives_failures() {
    let behavior = MockBehavior {
        requests: vec![
            MockResponse::status(500),
            MockResponse {
                malformed: true,
                ..MockResponse::default()
            },
            MockResponse::status(503),
        ],
        ..MockBehavior::default()
    };
    let (directives, completions, dropped) = live_run(behavior, 30.0, 3);
    assert!(directives > 3, "scheduler stalled after {directives} directives");
    assert_eq!(completions, directives);
    assert_eq!(dropped, 3);
}

#[test]
fn live_completion_reports_audio() {
    let server = MockServer::start(0, MockBehavior::default()).unwrap();
    let dir = std::env::temp_dir().join(format!("hypecast-live-{}", std::process::id()));
    let mut dispatcher = Dispatcher::spawn(
        client(&server),
        DispatchOptions {
            audio_dir: Some(dir.clone()),
            playback_scale: 0.0,
        },
    );
    dispatcher.submit(0, directive());
    match dispatcher.wait_completion(Duration::from_secs(5)).unwrap() {
        Completion::Played { audio_path, .. } => {
            assert_eq!(std::fs::read(audio_path.unwrap()).unwrap(), DEFAULT_AUDIO.as_bytes())
        }
        other => panic!("{other:?}"),
    }
    let _ = std::fs::remove_dir_all(dir);
}

fn arb_response() -> impl Strategy<Value = MockResponse> {
    prop_oneof![
        3 => Just(MockResponse::default()),
        1 => prop_oneof![Just(400u16), Just(429), Just(500), Just(503)].prop_map(MockResponse::status),
        1 => Just(MockResponse { malformed: true, ..MockResponse::default() }),
        1 => Just(MockResponse { delay_ms: 500, ..MockResponse::default() }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn dropped_utterances_never_deadlock(
        script in proptest::collection::vec(arb_response(), 0..8),
        seed in 0u64..1000,
    ) {
        let failures = script.iter().filter(|r| r.status != 200 || r.malformed || r.delay_ms > 0).count();
        let behavior = MockBehavior { requests: script, ..MockBehavior::default() };
        let started = Instant::now();
        let (directives, completions, dropped) = live_run(behavior, 8.0, seed);
        prop_assert!(started.elapsed() < Duration::from_secs(30));
        prop_assert_eq!(completions, directives);
        prop_assert!(dropped <= failures);
        prop_assert!(directives >= 1);
    }
}
