mod config;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use hypecast_core::commentary::TemplateLibrary;
use hypecast_core::game::{parse_frame_log, write_frames};
use hypecast_core::highlight::CueEvaluator;
use hypecast_core::scheduler::{read_script, run_pipeline, write_script};
use hypecast_core::study::{chi_square_gof, standardized_residuals, PreferenceCounts};
use hypecast_core::synth::generate_trace;
use hypecast_core::tts::{
    build_request, MockBehavior, MockServer, TtsClient, VoiceConfig, AUTH_TOKEN_ENV, ENDPOINT_ENV,
};
use hypecast_core::{DesignId, LogEvent, RoundTracker};

use config::FileConfig;
use serde::Serialize;

const DEMO_LOG: &str = include_str!("../assets/demo_log.jsonl");

#[derive(Parser)]
#[command(name = "hypecast", version, about = "Fighting-game commentary with highlight-driven prosody")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Produce a commentary script (JSONL directives) from a frame log.
    Annotate(AnnotateArgs),
    /// Print the highlight cues of every frame as JSONL.
    Cues(CuesArgs),
    /// Write a synthetic frame log.
    GenTrace(GenTraceArgs),
    /// Send a script to a synthesize endpoint and store the returned audio.
    Synthesize(SynthesizeArgs),
    /// Run a local mock synthesize endpoint until interrupted.
    ServeMockTts(ServeArgs),
    /// Chi-square goodness of fit over preference counts.
    StudyEval(StudyArgs),
}

#[derive(Args)]
struct LogSource {
    /// Frame log path; `-` reads standard input.
    #[arg(long, value_name = "PATH", required_unless_present = "demo", conflicts_with = "demo")]
    log: Option<PathBuf>,
    /// Use the bundled demo log.
    #[arg(long)]
    demo: bool,
}

#[derive(Args)]
struct AnnotateArgs {
    #[command(flatten)]
    source: LogSource,
    /// Prosody design 1..5 (1 baseline, 2 volume up, 3 volume down, 4 pitch up, 5 pitch down).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    design: Option<u8>,
    /// Seed for template selection.
    #[arg(long)]
    seed: Option<u64>,
    /// Output script path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Template library (JSONL); the bundled library when omitted.
    #[arg(long, value_name = "PATH")]
    templates: Option<PathBuf>,
    /// TOML config with pitch, volume, weights, thresholds and names.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Display name of player 1.
    #[arg(long)]
    p1_name: Option<String>,
    /// Display name of player 2.
    #[arg(long)]
    p2_name: Option<String>,
}

#[derive(Args)]
struct CuesArgs {
    #[command(flatten)]
    source: LogSource,
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenTraceArgs {
    /// Length of play in seconds, spread over as many rounds as needed.
    #[arg(long)]
    duration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Script produced by `annotate`.
    #[arg(long, value_name = "PATH")]
    script: PathBuf,
    /// Synthesize URL; falls back to $TTS_ENDPOINT. The bearer token is read from $TTS_AUTH_TOKEN.
    #[arg(long)]
    endpoint: Option<String>,
    /// Directory for the returned audio files.
    #[arg(long, value_name = "PATH")]
    audio_dir: PathBuf,
    #[arg(long, default_value = "en-US-Wavenet-D")]
    voice: String,
    #[arg(long, default_value = "en-US")]
    language: String,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
}

#[derive(Args)]
struct ServeArgs {
    /// Port on 127.0.0.1; 0 picks a free one.
    #[arg(long, default_value_t = 8089)]
    port: u16,
    /// JSON file scripting status codes, delays and malformed replies.
    #[arg(long, value_name = "PATH")]
    behavior: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// Comma-separated vote counts, one per design.
    #[arg(long, value_delimiter = ',', required = true)]
    counts: Vec<u64>,
    /// Number of participants.
    #[arg(long)]
    n: u64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Annotate(a) => annotate(a),
        Command::Cues(a) => cues(a),
        Command::GenTrace(a) => gen_trace(a),
        Command::Synthesize(a) => synthesize(a),
        Command::ServeMockTts(a) => serve(a),
        Command::StudyEval(a) => study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("hypecast: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("hypecast: {msg}");
            ExitCode::from(2)
        }
    }
}

fn open_log(source: &LogSource) -> Result<Box<dyn BufRead>, Failure> {
    match source.log.as_deref() {
        None => Ok(Box::new(DEMO_LOG.as_bytes())),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) => File::open(p)
            .map(|f| Box::new(BufReader::new(f)) as Box<dyn BufRead>)
            .map_err(|e| usage(format!("cannot open log {}: {e}", p.display()))),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| runtime(format!("cannot create {}: {e}", p.display()))),
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    match path {
        Some(p) => FileConfig::load(p).map_err(Failure::Usage),
        None => Ok(FileConfig::default()),
    }
}

fn annotate(a: AnnotateArgs) -> CmdResult {
    let file = load_config(a.config.as_deref())?;
    let mut engine = file.engine().map_err(Failure::Usage)?;
    if let Some(n) = a.design {
        engine.design = DesignId::try_from(n).map_err(usage)?;
    }
    if let Some(seed) = a.seed {
        engine.seed = seed;
    }
    if let Some(name) = a.p1_name {
        engine.names.p1 = name;
    }
    if let Some(name) = a.p2_name {
        engine.names.p2 = name;
    }
    if let Some(path) = a.templates.as_ref().or(file.templates.as_ref()) {
        let f = File::open(path)
            .map_err(|e| usage(format!("cannot open templates {}: {e}", path.display())))?;
        let lib = TemplateLibrary::from_jsonl(BufReader::new(f))
            .map_err(|e| usage(format!("templates {}: {e}", path.display())))?;
        engine.templates = Arc::new(lib);
    }
    engine.check().map_err(usage)?;
    let log = open_log(&a.source)?;
    let out = open_out(a.out.as_deref())?;
    let script = run_pipeline(log, &engine).map_err(runtime)?;
    write_out(out, |w| write_script(w, &script))?;
    log::info!("{} directives", script.len());
    Ok(())
}

fn write_out(
    mut out: Box<dyn Write>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> CmdResult {
    f(&mut out).and_then(|()| out.flush()).map_err(runtime)
}

#[derive(Serialize)]
struct CueRecord {
    frame: u64,
    score: f64,
    action: f64,
    distance: f64,
    highlight: f64,
}

fn cues(a: CuesArgs) -> CmdResult {
    let file = load_config(a.config.as_deref())?;
    let engine = file.engine().map_err(Failure::Usage)?;
    engine.check().map_err(usage)?;
    let evaluator = CueEvaluator::new(engine.round, engine.rank_table, engine.weights);
    let log = open_log(&a.source)?;
    let mut out = open_out(a.out.as_deref())?;
    let mut tracker = RoundTracker::new();
    for event in parse_frame_log(log, engine.round) {
        match event.map_err(runtime)? {
            LogEvent::RoundStart { .. } => tracker = RoundTracker::new(),
            LogEvent::Frame(frame) => {
                let (c, next) = evaluator.evaluate(&frame, tracker).map_err(runtime)?;
                tracker = next;
                let record = CueRecord {
                    frame: frame.frame_index,
                    score: c.score,
                    action: c.action,
                    distance: c.distance,
                    highlight: c.highlight,
                };
                serde_json::to_writer(&mut out, &record).map_err(runtime)?;
                writeln!(out).map_err(runtime)?;
            }
        }
    }
    out.flush().map_err(runtime)
}

fn gen_trace(a: GenTraceArgs) -> CmdResult {
    if !(a.duration >= 0.0 && a.duration.is_finite()) {
        return Err(usage(format!("duration must be a non-negative number, got {}", a.duration)));
    }
    let frames = generate_trace(a.duration, a.seed, &Default::default());
    let out = open_out(a.out.as_deref())?;
    write_out(out, |w| write_frames(w, &frames))
}

fn synthesize(a: SynthesizeArgs) -> CmdResult {
    let endpoint = a
        .endpoint
        .or_else(|| std::env::var(ENDPOINT_ENV).ok())
        .ok_or_else(|| usage(format!("no endpoint: pass --endpoint or set {ENDPOINT_ENV}")))?;
    let f = File::open(&a.script)
        .map_err(|e| usage(format!("cannot open script {}: {e}", a.script.display())))?;
    let script = read_script(BufReader::new(f)).map_err(runtime)?;
    let voice = VoiceConfig {
        language_code: a.language,
        voice_name: a.voice,
        ..VoiceConfig::default()
    };
    let client = TtsClient::with_timeout(
        endpoint,
        std::env::var(AUTH_TOKEN_ENV).ok(),
        voice,
        std::time::Duration::from_millis(a.timeout_ms),
    );
    let ext = client.voice().audio_encoding.extension();
    let mut failed = 0usize;
    for (i, d) in script.iter().enumerate() {
        let body = build_request(d, client.voice());
        match client.synthesize(&body) {
            Ok(result) => {
                let stem = format!("{i:04}_f{}", d.frame_index);
                let path = result.persist(&a.audio_dir, &stem, ext).map_err(runtime)?;
                println!("{}\t{:.1}ms", path.display(), result.request_latency_ms);
            }
            Err(e) => {
                log::warn!("directive {i} dropped: {e}");
                failed += 1;
            }
        }
    }
    eprintln!("{} of {} utterances synthesized", script.len() - failed, script.len());
    if failed > 0 && failed == script.len() {
        return Err(runtime("every synthesize request failed"));
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CmdResult {
    let behavior = match &a.behavior {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read behavior {}: {e}", p.display())))?;
            MockBehavior::from_json(&text).map_err(|e| usage(format!("behavior {}: {e}", p.display())))?
        }
        None => MockBehavior::default(),
    };
    let server = MockServer::start(a.port, behavior).map_err(runtime)?;
    println!("listening on {}", server.url());
    io::stdout().flush().map_err(runtime)?;
    server.join();
    Ok(())
}

fn study(a: StudyArgs) -> CmdResult {
    let counts = PreferenceCounts::new(a.counts, a.n).map_err(usage)?;
    let chi = chi_square_gof(&counts);
    println!("chi2 {:.3}", chi.statistic);
    println!("df {}", chi.df);
    println!("p {:.4}", chi.p_value);
    let residuals: Vec<String> = standardized_residuals(&counts)
        .iter()
        .map(|r| format!("{r:.3}"))
        .collect();
    println!("residuals {}", residuals.join(" "));
    Ok(())
}
