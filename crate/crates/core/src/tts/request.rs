use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::scheduler::CommentaryDirective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AudioEncoding {
    #[serde(rename = "MP3")]
    Mp3,
    #[serde(rename = "LINEAR16")]
    Linear16,
}

impl AudioEncoding {
    pub fn content_type(self) -> &'static str {
        match self {
            AudioEncoding::Mp3 => "audio/mpeg",
            AudioEncoding::Linear16 => "audio/wav",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            AudioEncoding::Mp3 => "mp3",
            AudioEncoding::Linear16 => "wav",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoiceConfig {
    pub language_code: String,
    pub voice_name: String,
    pub audio_encoding: AudioEncoding,
}

impl Default for VoiceConfig {
    fn default() -> Self {
        Self {
            language_code: "en-US".to_owned(),
            voice_name: "en-US-Wavenet-D".to_owned(),
            audio_encoding: AudioEncoding::Mp3,
        }
    }
}

#[derive(Serialize)]
struct Body<'a> {
    input: Input<'a>,
    voice: Voice<'a>,
    #[serde(rename = "audioConfig")]
    audio_config: AudioConfig,
}

#[derive(Serialize)]
struct Input<'a> {
    text: &'a str,
}

#[derive(Serialize)]
struct Voice<'a> {
    #[serde(rename = "languageCode")]
    language_code: &'a str,
    name: &'a str,
}

#[derive(Serialize)]
struct AudioConfig {
    #[serde(rename = "audioEncoding")]
    audio_encoding: AudioEncoding,
    pitch: f64,
    #[serde(rename = "volumeGainDb")]
    volume_gain_db: f64,
}

fn round4(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    // Avoid emitting "-0.0".
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// JSON body of a synthesize call. Keys come out in a fixed order and pitch and
/// volume are rounded to four decimals.
pub fn build_request(d: &CommentaryDirective, voice: &VoiceConfig) -> Vec<u8> {
    let body = Body {
        input: Input { text: &d.text },
        voice: Voice {
            language_code: &voice.language_code,
            name: &voice.voice_name,
        },
        audio_config: AudioConfig {
            audio_encoding: voice.audio_encoding,
            pitch: round4(d.phonetics.pitch),
            volume_gain_db: round4(d.phonetics.volume_gain_db),
        },
    };
    serde_json::to_vec(&body).expect("request bodies always serialize")
}

/// Leaf paths every request body carries, and nothing else.
pub const REQUEST_LEAVES: [&str; 6] = [
    "audioConfig.audioEncoding",
    "audioConfig.pitch",
    "audioConfig.volumeGainDb",
    "input.text",
    "voice.languageCode",
    "voice.name",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RequestSummary {
    pub text: String,
    pub pitch: f64,
    pub volume_gain_db: f64,
}

fn collect_leaves(prefix: &str, v: &serde_json::Value, out: &mut BTreeSet<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, child) in map {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                collect_leaves(&path, child, out);
            }
        }
        _ => {
            out.insert(prefix.to_owned());
        }
    }
}

/// Checks that `body` is a well-formed synthesize request with exactly the expected
/// leaf fields of the expected types.
pub fn validate_request_body(body: &[u8]) -> Result<RequestSummary, String> {
    let v: serde_json::Value = serde_json::from_slice(body).map_err(|e| e.to_string())?;
    let mut leaves = BTreeSet::new();
    collect_leaves("", &v, &mut leaves);
    let expected: BTreeSet<String> = REQUEST_LEAVES.iter().map(|s| s.to_string()).collect();
    if leaves != expected {
        return Err(format!("leaf fields {leaves:?} differ from {expected:?}"));
    }
    let text = v["input"]["text"].as_str().ok_or("input.text is not a string")?;
    for path in [("voice", "languageCode"), ("voice", "name"), ("audioConfig", "audioEncoding")] {
        if !v[path.0][path.1].is_string() {
            return Err(format!("{}.{} is not a string", path.0, path.1));
        }
    }
    let pitch = v["audioConfig"]["pitch"]
        .as_f64()
        .ok_or("audioConfig.pitch is not a number")?;
    let volume_gain_db = v["audioConfig"]["volumeGainDb"]
        .as_f64()
        .ok_or("audioConfig.volumeGainDb is not a number")?;
    Ok(RequestSummary {
        text: text.to_owned(),
        pitch,
        volume_gain_db,
    })
}
