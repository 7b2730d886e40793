//! In-process stand-in for a synthesize endpoint. Records every request body and
//! answers according to a per-request behavior script.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

pub const SYNTHESIZE_PATH: &str = "/v1/text:synthesize";
pub const DEFAULT_AUDIO: &str = "MOCK-AUDIO";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockResponse {
    pub status: u16,
    pub delay_ms: u64,
    /// Answer with a body that is not a synthesize response.
    pub malformed: bool,
    pub audio: String,
}

impl Default for MockResponse {
    fn default() -> Self {
        Self {
            status: 200,
            delay_ms: 0,
            malformed: false,
            audio: DEFAULT_AUDIO.to_owned(),
        }
    }
}

impl MockResponse {
    pub fn status(status: u16) -> Self {
        Self {
            status,
            ..Self::default()
        }
    }
}

/// `requests[i]` answers the i-th request; later requests get `default`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockBehavior {
    pub default: MockResponse,
    pub requests: Vec<MockResponse>,
}

impl MockBehavior {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn response_for(&self, index: usize) -> &MockResponse {
        self.requests.get(index).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    pub authorization: Option<String>,
    pub body: Vec<u8>,
}

/// Running mock server; stops when dropped.
pub struct MockServer {
    server: Arc<tiny_http::Server>,
    addr: SocketAddr,
    recorded: Arc<Mutex<Vec<RecordedRequest>>>,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Binds `127.0.0.1:port`; port 0 picks a free port.
    pub fn start(port: u16, behavior: MockBehavior) -> std::io::Result<Self> {
        Self::bind(("127.0.0.1", port), behavior)
    }

    pub fn bind(
        addr: impl std::net::ToSocketAddrs,
        behavior: MockBehavior,
    ) -> std::io::Result<Self> {
        let server = tiny_http::Server::http(addr).map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock server has no ip address"))?;
        let server = Arc::new(server);
        let recorded = Arc::new(Mutex::new(Vec::new()));
        let worker = {
            let server = Arc::clone(&server);
            let recorded = Arc::clone(&recorded);
            std::thread::spawn(move || serve(&server, &behavior, &recorded))
        };
        Ok(Self {
            server,
            addr,
            recorded,
            worker: Some(worker),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Full synthesize URL of this server.
    pub fn url(&self) -> String {
        format!("http://{}{}", self.addr, SYNTHESIZE_PATH)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.recorded.lock().expect("recorder poisoned").clone()
    }

    /// Blocks until the server is stopped from another handle or the process exits.
    pub fn join(mut self) {
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}

fn serve(
    server: &tiny_http::Server,
    behavior: &MockBehavior,
    recorded: &Mutex<Vec<RecordedRequest>>,
) {
    let mut synth_count = 0usize;
    for mut request in server.incoming_requests() {
        let mut body = Vec::new();
        if request.as_reader().read_to_end(&mut body).is_err() {
            continue;
        }
        let method = request.method().as_str().to_owned();
        let path = request.url().to_owned();
        let authorization = request
            .headers()
            .iter()
            .find(|h| h.field.equiv("Authorization"))
            .map(|h| h.value.as_str().to_owned());
        recorded.lock().expect("recorder poisoned").push(RecordedRequest {
            method: method.clone(),
            path: path.clone(),
            authorization,
            body,
        });

        if method != "POST" || path != SYNTHESIZE_PATH {
            let _ = request.respond(tiny_http::Response::from_string("not found").with_status_code(404));
            continue;
        }
        let plan = behavior.response_for(synth_count).clone();
        synth_count += 1;
        if plan.delay_ms > 0 {
            std::thread::spawn(move || {
                std::thread::sleep(Duration::from_millis(plan.delay_ms));
                respond(request, &plan);
            });
        } else {
            respond(request, &plan);
        }
    }
}

fn respond(request: tiny_http::Request, plan: &MockResponse) {
    let body = if plan.malformed {
        "{\"unexpected\":true".to_owned()
    } else if (200..300).contains(&plan.status) {
        serde_json::json!({ "audioContent": BASE64.encode(plan.audio.as_bytes()) }).to_string()
    } else {
        serde_json::json!({ "error": { "code": plan.status, "message": "injected failure" } })
            .to_string()
    };
    let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
        .expect("static header is valid");
    let _ = request.respond(
        tiny_http::Response::from_string(body)
            .with_status_code(plan.status)
            .with_header(header),
    );
}
