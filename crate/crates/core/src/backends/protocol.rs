//! Request and response bodies of the sidecar protocol.
//!
//! | endpoint        | request                                   | response                          |
//! |-----------------|-------------------------------------------|-----------------------------------|
//! | `/v1/embed`     | `{"texts":[..]}`                          | `{"dimension":D,"vectors":[[..]]}`|
//! | `/v1/translate` | `{"texts":[..],"source","target","n"}`    | `{"translations":[[..]]}`         |
//! | `/v1/detect`    | `{"pairs":[["a","b"],..]}`                | `{"probabilities":[..]}`          |
//! | `/v1/fluency`   | `{"texts":[..]}`                          | `{"losses":[..]}`                 |
//! | `/v1/chunk`     | `{"text":"..","tokens":[..]}`             | `{"phrases":[{start,end,label}]}` |
//!
//! Any non-200 response carries `{"error": "..."}`.

use serde::{Deserialize, Serialize};

use super::Phrase;

pub const EMBED: &str = "/v1/embed";
pub const TRANSLATE: &str = "/v1/translate";
pub const DETECT: &str = "/v1/detect";
pub const FLUENCY: &str = "/v1/fluency";
pub const CHUNK: &str = "/v1/chunk";
pub const HEALTH: &str = "/v1/health";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub dimension: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub texts: Vec<String>,
    pub source: String,
    pub target: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub translations: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectRequest {
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectResponse {
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluencyRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluencyResponse {
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkRequest {
    pub text: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkResponse {
    pub phrases: Vec<Phrase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}
