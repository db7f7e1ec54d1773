//! Artifact emission: deterministic CSV/JSON writers and the run manifest.
//!
//! Everything except `manifest.txt` is a pure function of (config, seed),
//! so re-running an experiment reproduces the artifact bytes exactly.

use crate::config::{ExperimentConfig, OutputFormat};
use anyhow::{Context, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct ArtifactWriter {
    dir: PathBuf,
    format: OutputFormat,
    started: Instant,
    files: Vec<String>,
}

impl ArtifactWriter {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.output.dir)
            .with_context(|| format!("creating {}", cfg.output.dir.display()))?;
        Ok(ArtifactWriter {
            dir: cfg.output.dir.clone(),
            format: cfg.output.format,
            started: Instant::now(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write a CSV table: header plus rows of already-formatted cells.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut text = String::new();
        writeln!(&mut text, "{}", header.join(",")).unwrap();
        for row in rows {
            writeln!(&mut text, "{}", row.join(",")).unwrap();
        }
        self.write_raw(name, text.as_bytes())
    }

    /// Serialize a value as pretty JSON.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_raw(name, &bytes)
    }

    /// Append-style JSON lines (one serialized value per row).
    pub fn write_json_lines<T: Serialize>(&mut self, name: &str, values: &[T]) -> Result<PathBuf> {
        let mut bytes = Vec::new();
        for v in values {
            bytes.extend(serde_json::to_vec(v)?);
            bytes.push(b'\n');
        }
        self.write_raw(name, &bytes)
    }

    pub fn write_raw(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Table emission honoring the configured format: CSV stays CSV, JSON
    /// renders the same rows as an array of objects.
    pub fn write_table(
        &mut self,
        stem: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<PathBuf> {
        match self.format {
            OutputFormat::Csv => self.write_csv(&format!("{stem}.csv"), header, rows),
            OutputFormat::Json => {
                let objects: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| {
                                let val = v
                                    .parse::<f64>()
                                    .map(|x| {
                                        serde_json::Number::from_f64(x)
                                            .map(serde_json::Value::Number)
                                            .unwrap_or(serde_json::Value::String(v.clone()))
                                    })
                                    .unwrap_or(serde_json::Value::String(v.clone()));
                                (k.to_string(), val)
                            })
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                self.write_json(&format!("{stem}.json"), &objects)
            }
        }
    }

    /// The manifest is written last: config echo, code version, wall time.
    /// It is the one artifact excluded from the byte-determinism contract
    /// (it contains the wall time).
    pub fn finish(self, cfg: &ExperimentConfig, status: &str) -> Result<()> {
        let wall = self.started.elapsed().as_secs_f64();
        let manifest = format!(
            "experiment: {}\nversion: {}\nstatus: {}\nwall_time_seconds: {:.3}\nartifacts: {}\n\n--- config echo ---\n{}",
            cfg.experiment.name(),
            env!("CARGO_PKG_VERSION"),
            status,
            wall,
            self.files.join(", "),
            cfg.to_toml()
        );
        let path = self.dir.join("manifest.txt");
        std::fs::write(&path, manifest).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Canonical float formatting for CSV cells: shortest round-trip form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
