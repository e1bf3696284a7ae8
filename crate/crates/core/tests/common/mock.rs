//! A minimal HTTP/1.1 sidecar stand-in serving the backend protocol from the
//! reference implementations.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};
use utterance_gen::backends::protocol::*;
use utterance_gen::backends::BackendSuite;
use utterance_gen::lexicon::{Lexicons, PpdbTable, SynonymLexicon};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    None,
    /// The first `n` requests get `status`.
    FailFirst(usize, u16),
    /// Every request gets `status`.
    Always(u16),
    /// 200 responses whose bodies break the protocol contract.
    Malformed,
}

#[derive(Debug, Clone)]
pub struct Exchange {
    pub path: String,
    pub request: Value,
    pub status: u16,
    pub response: Value,
}

pub struct MockSidecar {
    pub url: String,
    pub log: Arc<Mutex<Vec<Exchange>>>,
    hits: Arc<AtomicUsize>,
}

impl MockSidecar {
    pub fn start(fault: Fault) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let url = format!("http://{}", listener.local_addr().unwrap());
        let log = Arc::new(Mutex::new(Vec::new()));
        let hits = Arc::new(AtomicUsize::new(0));
        let backends = Arc::new(BackendSuite::reference(&Lexicons::with_defaults(
            SynonymLexicon::default(),
            PpdbTable::default(),
        )));
        let (log2, hits2) = (Arc::clone(&log), Arc::clone(&hits));
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (log, hits, backends) = (Arc::clone(&log2), Arc::clone(&hits2), Arc::clone(&backends));
                thread::spawn(move || serve(stream, fault, &log, &hits, &backends));
            }
        });
        Self { url, log, hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().unwrap().clone()
    }
}

fn serve(stream: TcpStream, fault: Fault, log: &Mutex<Vec<Exchange>>, hits: &AtomicUsize, backends: &BackendSuite) {
    let mut reader = BufReader::new(stream.try_clone().expect("clone"));
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).unwrap_or(0) == 0 {
        return;
    }
    let mut parts = request_line.split_whitespace();
    let method = parts.next().unwrap_or("").to_string();
    let path = parts.next().unwrap_or("").to_string();
    let mut length = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 || line.trim().is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let request: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let n = hits.fetch_add(1, Ordering::SeqCst);
    let injected = match fault {
        Fault::FailFirst(count, status) if n < count => Some(status),
        Fault::Always(status) => Some(status),
        _ => None,
    };
    let (status, response) = match injected {
        Some(status) => (status, json!({ "error": format!("injected failure {n}") })),
        None => respond(&method, &path, &request, fault == Fault::Malformed, backends),
    };
    log.lock().unwrap().push(Exchange {
        path: path.clone(),
        request,
        status,
        response: response.clone(),
    });
    let payload = response.to_string();
    let reason = if status == 200 { "OK" } else { "Error" };
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
    let _ = stream.flush();
}

fn bad_request(message: impl std::fmt::Display) -> (u16, Value) {
    (400, json!({ "error": message.to_string() }))
}

fn respond(method: &str, path: &str, request: &Value, malformed: bool, backends: &BackendSuite) -> (u16, Value) {
    macro_rules! parse {
        ($t:ty) => {
            match serde_json::from_value::<$t>(request.clone()) {
                Ok(v) => v,
                Err(e) => return bad_request(e),
            }
        };
    }
    let result: Result<Value, String> = match (method, path) {
        ("GET", HEALTH) => Ok(json!({
            "models": {"encoder": "reference", "translator": "reference", "detector": "reference",
                       "fluency": "reference", "chunker": "reference"},
            "dimension": 256
        })),
        ("POST", EMBED) => {
            let req = parse!(EmbedRequest);
            backends.encoder.embed(&req.texts).map_err(|e| e.to_string()).map(|v| {
                let mut vectors: Vec<Vec<f64>> = v.iter().map(|e| e.values().to_vec()).collect();
                if malformed {
                    vectors.pop();
                }
                serde_json::to_value(EmbedResponse { dimension: 256, vectors }).unwrap()
            })
        }
        ("POST", TRANSLATE) => {
            let req = parse!(TranslateRequest);
            backends
                .translator
                .translate(&req.texts, &req.source, &req.target, req.n)
                .map_err(|e| e.to_string())
                .map(|mut translations| {
                    if malformed {
                        translations.push(vec!["extra".into()]);
                    }
                    serde_json::to_value(TranslateResponse { translations }).unwrap()
                })
        }
        ("POST", DETECT) => {
            let req = parse!(DetectRequest);
            backends.detector.probabilities(&req.pairs).map_err(|e| e.to_string()).map(|mut probabilities| {
                if malformed {
                    probabilities.iter_mut().for_each(|p| *p += 2.0);
                }
                serde_json::to_value(DetectResponse { probabilities }).unwrap()
            })
        }
        ("POST", FLUENCY) => {
            let req = parse!(FluencyRequest);
            backends.fluency.losses(&req.texts).map_err(|e| e.to_string()).map(|mut losses| {
                if malformed {
                    losses.iter_mut().for_each(|l| *l = -1.0);
                }
                serde_json::to_value(FluencyResponse { losses }).unwrap()
            })
        }
        ("POST", CHUNK) => {
            let req = parse!(ChunkRequest);
            backends.chunker.phrases(&req.text, &req.tokens).map_err(|e| e.to_string()).map(|mut phrases| {
                if malformed {
                    if let Some(p) = phrases.first_mut() {
                        p.end = req.tokens.len() + 5;
                    }
                }
                serde_json::to_value(ChunkResponse { phrases }).unwrap()
            })
        }
        _ => return (404, json!({ "error": format!("no route {method} {path}") })),
    };
    match result {
        Ok(v) => (200, v),
        Err(e) => bad_request(e),
    }
}
