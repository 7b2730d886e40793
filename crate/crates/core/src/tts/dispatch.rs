//! Live mode: one utterance in flight on a worker thread, completion reported back
//! to the scheduler through a channel it drains at each tick.

use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread::JoinHandle;
use std::time::Duration;

use super::client::{SynthesisResult, TtsClient, TtsError};
use super::request::build_request;
use crate::game::LogEvent;
use crate::highlight::CueError;
use crate::scheduler::{estimate_duration, CommentaryDirective, Commentator};

#[derive(Debug)]
pub enum Completion {
    Played {
        index: usize,
        result: SynthesisResult,
        audio_path: Option<PathBuf>,
    },
    /// The utterance was dropped; the scheduler proceeds as if it had finished.
    Dropped { index: usize, error: TtsError },
}

impl Completion {
    pub fn index(&self) -> usize {
        match self {
            Completion::Played { index, .. } | Completion::Dropped { index, .. } => *index,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DispatchOptions {
    pub audio_dir: Option<PathBuf>,
    /// Modelled playback time is `estimate_duration(text) * playback_scale`; 0 reports
    /// completion as soon as synthesis returns.
    pub playback_scale: f64,
}

impl Default for DispatchOptions {
    fn default() -> Self {
        Self {
            audio_dir: None,
            playback_scale: 0.0,
        }
    }
}

struct Job {
    index: usize,
    directive: CommentaryDirective,
}

pub struct Dispatcher {
    jobs: Option<Sender<Job>>,
    done: Receiver<Completion>,
    worker: Option<JoinHandle<()>>,
    in_flight: Option<usize>,
}

impl Dispatcher {
    pub fn spawn(client: TtsClient, options: DispatchOptions) -> Self {
        let (jobs, job_rx) = mpsc::channel::<Job>();
        let (done_tx, done) = mpsc::channel();
        let worker = std::thread::spawn(move || {
            for job in job_rx {
                let completion = run_job(&client, &options, job);
                if done_tx.send(completion).is_err() {
                    break;
                }
            }
        });
        Self {
            jobs: Some(jobs),
            done,
            worker: Some(worker),
            in_flight: None,
        }
    }

    pub fn is_busy(&self) -> bool {
        self.in_flight.is_some()
    }

    /// Hands a directive to the worker. At most one may be in flight.
    pub fn submit(&mut self, index: usize, directive: CommentaryDirective) {
        assert!(self.in_flight.is_none(), "dispatcher already has an utterance in flight");
        self.in_flight = Some(index);
        self.jobs
            .as_ref()
            .expect("dispatcher is running")
            .send(Job { index, directive })
            .expect("dispatch worker alive");
    }

    pub fn try_completion(&mut self) -> Option<Completion> {
        let c = self.done.try_recv().ok()?;
        self.in_flight = None;
        Some(c)
    }

    pub fn wait_completion(&mut self, timeout: Duration) -> Option<Completion> {
        match self.done.recv_timeout(timeout) {
            Ok(c) => {
                self.in_flight = None;
                Some(c)
            }
            Err(RecvTimeoutError::Timeout | RecvTimeoutError::Disconnected) => None,
        }
    }
}

impl Drop for Dispatcher {
    fn drop(&mut self) {
        self.jobs.take();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

fn run_job(client: &TtsClient, options: &DispatchOptions, job: Job) -> Completion {
    let body = build_request(&job.directive, client.voice());
    let result = match client.synthesize(&body) {
        Ok(r) => r,
        Err(error) => {
            log::warn!("dropping utterance {}: {error}", job.index);
            return Completion::Dropped {
                index: job.index,
                error,
            };
        }
    };
    let audio_path = match &options.audio_dir {
        Some(dir) => {
            let stem = format!("{:04}_f{}", job.index, job.directive.frame_index);
            match result.persist(dir, &stem, client.voice().audio_encoding.extension()) {
                Ok(p) => Some(p),
                Err(e) => {
                    return Completion::Dropped {
                        index: job.index,
                        error: e.into(),
                    }
                }
            }
        }
        None => None,
    };
    if options.playback_scale > 0.0 {
        let hold = estimate_duration(&job.directive.text) * options.playback_scale;
        std::thread::sleep(Duration::from_secs_f64(hold));
    }
    Completion::Played {
        index: job.index,
        result,
        audio_path,
    }
}

#[derive(Debug, Default)]
pub struct LiveReport {
    pub directives: Vec<CommentaryDirective>,
    pub completions: Vec<Completion>,
}

impl LiveReport {
    pub fn dropped(&self) -> usize {
        self.completions
            .iter()
            .filter(|c| matches!(c, Completion::Dropped { .. }))
            .count()
    }
}

/// Runs a live-mode commentator over `events`, sending each directive to the
/// dispatcher. `frame_period` paces the loop in real time when set. Waits up to
/// `drain_timeout` for the last utterance after the stream ends.
pub fn run_live<'a>(
    events: impl IntoIterator<Item = &'a LogEvent>,
    commentator: &mut Commentator,
    dispatcher: &mut Dispatcher,
    frame_period: Option<Duration>,
    drain_timeout: Duration,
) -> Result<LiveReport, CueError> {
    let mut report = LiveReport::default();
    for event in events {
        while let Some(done) = dispatcher.try_completion() {
            commentator.playback_finished();
            report.completions.push(done);
        }
        if let Some(d) = commentator.handle(event)? {
            dispatcher.submit(report.directives.len(), d.clone());
            report.directives.push(d);
        }
        if let (Some(period), LogEvent::Frame(_)) = (frame_period, event) {
            std::thread::sleep(period);
        }
    }
    if dispatcher.is_busy() {
        if let Some(done) = dispatcher.wait_completion(drain_timeout) {
            commentator.playback_finished();
            report.completions.push(done);
        }
    }
    Ok(report)
}
