//! Output files: provenance header, CSV rows, JSON envelopes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub model_sha256: String,
    pub seed: u64,
    pub command: String,
}

impl Provenance {
    pub fn new(model_bytes: &[u8], seed: u64, command: String) -> Self {
        Self {
            tool: "mqlab",
            version: VERSION,
            model_sha256: hex::encode(Sha256::digest(model_bytes)),
            seed,
            command,
        }
    }
}

/// Full round-trip decimal form (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(prov: &Provenance, columns: &[&str]) -> Self {
        let mut text = String::new();
        writeln!(text, "# {} {} model_sha256={} seed={}", prov.tool, prov.version, prov.model_sha256, prov.seed).unwrap();
        writeln!(text, "# {}", prov.command).unwrap();
        writeln!(text, "{}", columns.join(",")).unwrap();
        Self { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().collect();
        writeln!(self.text, "{}", line.join(",")).unwrap();
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(prov: &Provenance, report: &T) -> String {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        meta: &'a Provenance,
        report: &'a T,
    }
    serde_json::to_string_pretty(&Envelope { meta: prov, report }).expect("reports serialize") + "\n"
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}
