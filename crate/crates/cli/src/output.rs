//! Artifact files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use bhtlab::table::{content_hash, Table};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn as_str(self) -> &'static str {
        self.extension()
    }
}

/// One output file: a name stem and its payload.
pub struct Artifact {
    pub stem: String,
    pub extension: &'static str,
    pub payload: String,
}

impl Artifact {
    pub fn table(stem: impl Into<String>, table: &Table, format: Format) -> Self {
        let payload = match format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        };
        Artifact {
            stem: stem.into(),
            extension: format.extension(),
            payload,
        }
    }

    pub fn json(stem: impl Into<String>, value: &Value) -> Self {
        let mut payload = serde_json::to_string_pretty(value).expect("json values serialize");
        payload.push('\n');
        Artifact {
            stem: stem.into(),
            extension: "json",
            payload,
        }
    }

    pub fn raw(stem: impl Into<String>, extension: &'static str, payload: String) -> Self {
        Artifact {
            stem: stem.into(),
            extension,
            payload,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.{}", self.stem, self.extension)
    }
}

/// Writes every artifact and then `<subcommand>.manifest.json`; returns the manifest path.
///
/// The manifest holds the config echo, one hash per file and a run hash over
/// the file hashes in order. Nothing time- or host-dependent goes in.
pub fn write_run(dir: &Path, subcommand: &str, config: Value, artifacts: &[Artifact], pass: bool) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(artifacts.len());
    let mut joined = String::new();
    for a in artifacts {
        let name = a.file_name();
        fs::write(dir.join(&name), &a.payload)?;
        let hash = content_hash(a.payload.as_bytes());
        joined.push_str(&hash);
        joined.push('\n');
        entries.push(json!({"file": name, "bytes": a.payload.len(), "hash": hash}));
    }
    let manifest = json!({
        "tool": "bhtlab",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "artifacts": entries,
        "hash": content_hash(joined.as_bytes()),
        "pass": pass,
    });
    let path = dir.join(format!("{subcommand}.manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest).expect("json values serialize");
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
