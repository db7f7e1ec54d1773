//! Markdown summary of a run directory's artifacts.

use anyhow::{bail, Context, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Aggregate the artifacts in `dir` into `report.md`. Errors when the
/// directory lacks a manifest (nothing was run there).
pub fn emit_summary(dir: &Path) -> Result<String> {
    let manifest_path = dir.join("manifest.txt");
    if !manifest_path.exists() {
        bail!(
            "missing artifact: {} (run an experiment into this directory first)",
            manifest_path.display()
        );
    }
    let manifest = std::fs::read_to_string(&manifest_path)?;
    let mut doc = String::new();
    writeln!(&mut doc, "# Run report\n").unwrap();
    for line in manifest.lines().take_while(|l| !l.starts_with("---")) {
        if !line.is_empty() {
            writeln!(&mut doc, "- {line}").unwrap();
        }
    }
    writeln!(&mut doc).unwrap();

    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .collect();
    entries.sort();
    for path in entries {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                writeln!(&mut doc, "## {name}\n").unwrap();
                let text = std::fs::read_to_string(&path)?;
                let mut lines = text.lines();
                if let Some(header) = lines.next() {
                    let cols = header.split(',').count();
                    writeln!(&mut doc, "| {} |", header.replace(',', " | ")).unwrap();
                    writeln!(&mut doc, "|{}", "---|".repeat(cols)).unwrap();
                    for (i, line) in lines.enumerate() {
                        if i >= 50 {
                            writeln!(&mut doc, "| … truncated … |").unwrap();
                            break;
                        }
                        writeln!(&mut doc, "| {} |", line.replace(',', " | ")).unwrap();
                    }
                }
                writeln!(&mut doc).unwrap();
            }
            Some("json") | Some("jsonl") => {
                writeln!(&mut doc, "## {name}\n").unwrap();
                let text = std::fs::read_to_string(&path)?;
                let shown: String = text.lines().take(120).collect::<Vec<_>>().join("\n");
                writeln!(&mut doc, "```json\n{shown}\n```\n").unwrap();
            }
            _ => {}
        }
    }
    let out = dir.join("report.md");
    std::fs::write(&out, &doc)?;
    Ok(format!("report written to {}", out.display()))
}
