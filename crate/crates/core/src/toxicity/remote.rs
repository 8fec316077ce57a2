use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ToxicityClient, ToxicityError, ToxicityScores};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    /// URL receiving `POST {"text": ...}` and answering with the six attributes.
    pub endpoint: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub max_retries: u32,
    pub backoff_base_s: f64,
    pub max_in_flight: usize,
    pub timeout_s: f64,
    /// Append-only JSONL cache keyed by the SHA-256 of the text.
    pub cache_path: Option<PathBuf>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            api_key_env: "TOXICITY_API_KEY".into(),
            max_retries: 3,
            backoff_base_s: 1.0,
            max_in_flight: 4,
            timeout_s: 30.0,
            cache_path: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    sha256: String,
    scores: ToxicityScores,
}

struct Semaphore {
    free: Mutex<usize>,
    cond: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("semaphore poisoned");
        while *free == 0 {
            free = self.cond.wait(free).expect("semaphore poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("semaphore poisoned") += 1;
        self.0.cond.notify_one();
    }
}

struct Cache {
    entries: HashMap<String, ToxicityScores>,
    file: Option<File>,
}

/// HTTP scoring client with retries, a bounded number of requests in flight
/// and a persistent cache.
pub struct RemoteScorer {
    config: RemoteConfig,
    api_key: String,
    agent: ureq::Agent,
    cache: Mutex<Cache>,
    slots: Semaphore,
}

enum Attempt {
    Retry(String),
    Fatal(ToxicityError),
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RemoteScorer {
    pub fn new(config: RemoteConfig, api_key: String) -> Result<Self, ToxicityError> {
        let mut entries = HashMap::new();
        let file = match &config.cache_path {
            Some(path) => {
                if path.exists() {
                    let f = File::open(path).map_err(|e| ToxicityError::Cache(e.to_string()))?;
                    for line in BufReader::new(f).lines() {
                        let line = line.map_err(|e| ToxicityError::Cache(e.to_string()))?;
                        if line.trim().is_empty() {
                            continue;
                        }
                        let entry: CacheLine =
                            serde_json::from_str(&line).map_err(|e| ToxicityError::Cache(e.to_string()))?;
                        entries.insert(entry.sha256, entry.scores);
                    }
                }
                let f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| ToxicityError::Cache(e.to_string()))?;
                Some(f)
            }
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        let slots = Semaphore::new(config.max_in_flight);
        Ok(Self {
            config,
            api_key,
            agent,
            cache: Mutex::new(Cache { entries, file }),
            slots,
        })
    }

    /// Reads the bearer token from the configured environment variable.
    pub fn from_env(config: RemoteConfig) -> Result<Self, ToxicityError> {
        let key = std::env::var(&config.api_key_env).map_err(|_| ToxicityError::MissingApiKey(config.api_key_env.clone()))?;
        Self::new(config, key)
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.lock().expect("cache poisoned").entries.len()
    }

    fn request(&self, text: &str) -> Result<ToxicityScores, Attempt> {
        let _permit = self.slots.acquire();
        let response = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(serde_json::json!({ "text": text }));
        let mut response = match response {
            Ok(r) => r,
            Err(e) => return Err(Attempt::Retry(e.to_string())),
        };
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(Attempt::Fatal(ToxicityError::ScoringUnavailable(format!("HTTP {status}"))));
        }
        let scores: ToxicityScores = response
            .body_mut()
            .read_json()
            .map_err(|e| Attempt::Fatal(ToxicityError::MalformedResponse(e.to_string())))?;
        scores.validate().map_err(Attempt::Fatal)?;
        Ok(scores)
    }
}

impl ToxicityClient for RemoteScorer {
    fn score(&self, text: &str) -> Result<ToxicityScores, ToxicityError> {
        let key = text_hash(text);
        if let Some(hit) = self.cache.lock().expect("cache poisoned").entries.get(&key) {
            return Ok(*hit);
        }
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let wait = self.config.backoff_base_s * f64::from(1u32 << (attempt - 1).min(16));
                thread::sleep(Duration::from_secs_f64(wait));
            }
            match self.request(text) {
                Ok(scores) => {
                    let mut cache = self.cache.lock().expect("cache poisoned");
                    if let Some(file) = cache.file.as_mut() {
                        let line = serde_json::to_string(&CacheLine {
                            sha256: key.clone(),
                            scores,
                        })
                        .map_err(|e| ToxicityError::Cache(e.to_string()))?;
                        writeln!(file, "{line}").map_err(|e| ToxicityError::Cache(e.to_string()))?;
                        file.flush().map_err(|e| ToxicityError::Cache(e.to_string()))?;
                    }
                    cache.entries.insert(key, scores);
                    return Ok(scores);
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => {
                    log::warn!("toxicity request failed (attempt {}): {msg}", attempt + 1);
                    last = msg;
                }
            }
        }
        Err(ToxicityError::ScoringUnavailable(last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Serves canned HTTP responses in order, counting requests.
    fn fake_server(responses: Vec<(u16, String)>) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        thread::spawn(move || {
            for (status, body) in responses {
                let Ok((mut stream, _)) = listener.accept() else { return };
                let mut buf = Vec::new();
                let mut chunk = [0u8; 4096];
                loop {
                    let n = stream.read(&mut chunk).unwrap_or(0);
                    if n == 0 {
                        break;
                    }
                    buf.extend_from_slice(&chunk[..n]);
                    let text = String::from_utf8_lossy(&buf);
                    if let Some(head_end) = text.find("\r\n\r\n") {
                        let len = text[..head_end]
                            .lines()
                            .find_map(|l| {
                                let (k, v) = l.split_once(':')?;
                                k.eq_ignore_ascii_case("content-length").then(|| v.trim().parse::<usize>().ok())?
                            })
                            .unwrap_or(0);
                        if buf.len() >= head_end + 4 + len {
                            break;
                        }
                    }
                }
                counter.fetch_add(1, Ordering::SeqCst);
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = std::io::Write::write_all(&mut stream, reply.as_bytes());
            }
        });
        (format!("http://{addr}/score"), hits)
    }

    const OK_BODY: &str = r#"{"toxicity":0.1234567890123,"severe_toxicity":0.01,"profanity":0.02,"insult":0.61,"threat":0.0,"identity_attack":0.003}"#;

    fn config(endpoint: String, cache: Option<PathBuf>) -> RemoteConfig {
        RemoteConfig {
            endpoint,
            backoff_base_s: 0.01,
            cache_path: cache,
            timeout_s: 5.0,
            ..RemoteConfig::default()
        }
    }

    #[test]
    fn retries_then_caches() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache.jsonl");
        let (url, hits) = fake_server(vec![(503, "{}".into()), (429, "{}".into()), (200, OK_BODY.into())]);
        let scorer = RemoteScorer::new(config(url, Some(cache.clone())), "k".into()).unwrap();
        let first = scorer.score("you are an idiot").unwrap();
        assert_eq!(hits.load(Ordering::SeqCst), 3);
        assert_eq!(first.insult, 0.61);
        let again = scorer.score("you are an idiot").unwrap();
        assert_eq!(hits.load(Ordering::SeqCst), 3);
        assert_eq!(again.toxicity.to_bits(), first.toxicity.to_bits());

        let reopened = RemoteScorer::new(config("http://127.0.0.1:9/none".into(), Some(cache)), "k".into()).unwrap();
        assert_eq!(reopened.cached_entries(), 1);
        let cached = reopened.score("you are an idiot").unwrap();
        assert_eq!(cached, first);
        for a in super::super::Attribute::ALL {
            assert_eq!(cached.get(a).to_bits(), first.get(a).to_bits());
        }
    }

    #[test]
    fn gives_up_after_retries() {
        let (url, hits) = fake_server(vec![(500, "{}".into()); 4]);
        let scorer = RemoteScorer::new(config(url, None), "k".into()).unwrap();
        assert!(matches!(scorer.score("x"), Err(ToxicityError::ScoringUnavailable(_))));
        assert_eq!(hits.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, hits) = fake_server(vec![(401, "{}".into()), (200, OK_BODY.into())]);
        let scorer = RemoteScorer::new(config(url, None), "k".into()).unwrap();
        assert!(matches!(scorer.score("x"), Err(ToxicityError::ScoringUnavailable(_))));
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn malformed_body() {
        let (url, _) = fake_server(vec![(200, "{\"toxicity\": 2}".into())]);
        let scorer = RemoteScorer::new(config(url, None), "k".into()).unwrap();
        assert!(scorer.score("x").is_err());
    }

    #[test]
    fn missing_key() {
        let cfg = RemoteConfig {
            api_key_env: "PANELSCOPE_TEST_SURELY_UNSET_KEY".into(),
            ..RemoteConfig::default()
        };
        assert!(matches!(RemoteScorer::from_env(cfg), Err(ToxicityError::MissingApiKey(_))));
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(text_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
