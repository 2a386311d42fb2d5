use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest as _, Sha256};

/// SHA-256 over the command line and every input file, in reading order.
pub struct Digest(Sha256);

impl Digest {
    pub fn new(args: &[String]) -> Self {
        let mut h = Sha256::new();
        for a in args {
            h.update((a.len() as u64).to_le_bytes());
            h.update(a.as_bytes());
        }
        Self(h)
    }

    pub fn add(&mut self, name: &str, bytes: &[u8]) {
        self.0.update((name.len() as u64).to_le_bytes());
        self.0.update(name.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn hex(self) -> String {
        self.0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// The JSON document printed on standard output after every run.
///
/// Everything except `wall_time_ms` is a function of the arguments, the
/// seed and the input files.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub seed: u64,
    pub inputs_digest: String,
    pub outputs: serde_json::Value,
    pub checks: BTreeMap<String, bool>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|&ok| ok)
    }
}
