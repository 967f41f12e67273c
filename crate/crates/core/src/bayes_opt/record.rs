use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::{Error, Result};
use crate::gp::{KernelConfig, KernelFamily};

/// Fitted hyperparameters used to choose an entry (standardized units).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub family: KernelFamily,
    pub length_scale: f64,
    pub output_scale: f64,
    pub noise_variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl From<&KernelConfig> for Theta {
    fn from(k: &KernelConfig) -> Self {
        Theta {
            family: k.family,
            length_scale: k.length_scale,
            output_scale: k.output_scale,
            noise_variance: k.noise_variance,
            period: (k.family == KernelFamily::Periodic).then_some(k.period),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    /// 1-based evaluation index.
    pub iter: usize,
    /// Physical settings.
    pub x: Vec<f64>,
    pub y: f64,
    pub best: f64,
    pub theta: Option<Theta>,
    pub t_wall_ms: Option<f64>,
}

/// Every evaluation of one optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// `"bo"` or `"gd"`.
    pub kind: String,
    pub domain: Domain,
    pub config: serde_json::Value,
    pub seed: u64,
    pub incomplete: bool,
    pub failure: Option<String>,
    #[serde(skip)]
    pub entries: Vec<RecordEntry>,
}

impl RunRecord {
    pub(crate) fn new(kind: &str, domain: Domain, config: serde_json::Value, seed: u64) -> Self {
        RunRecord { kind: kind.into(), domain, config, seed, incomplete: false, failure: None, entries: Vec::new() }
    }

    pub(crate) fn finish(mut self, entries: Vec<RecordEntry>) -> Self {
        self.entries = entries;
        self
    }

    pub(crate) fn finish_incomplete(mut self, entries: Vec<RecordEntry>, failure: String) -> Self {
        log::warn!("run aborted after {} evaluations: {failure}", entries.len());
        self.entries = entries;
        self.incomplete = true;
        self.failure = Some(failure);
        self
    }

    /// Final best-so-far (infinite for an empty record).
    pub fn best(&self) -> f64 {
        self.entries.last().map_or(f64::INFINITY, |e| e.best)
    }

    /// Entry holding the smallest observation.
    pub fn best_entry(&self) -> Option<&RecordEntry> {
        self.entries.iter().min_by(|a, b| a.y.total_cmp(&b.y))
    }

    /// Best-so-far after each evaluation.
    pub fn best_curve(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.best).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    header: RunRecord,
}

/// Write records as JSON lines: per record, one header line then one line per entry.
pub fn write_jsonl(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, &Header { header: r.clone() })?;
        writeln!(w)?;
        for e in &r.entries {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RunRecord>> {
    let mut out: Vec<RunRecord> = Vec::new();
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)?;
        if v.get("header").is_some() {
            out.push(serde_json::from_value::<Header>(v)?.header);
        } else {
            let r = out.last_mut().ok_or_else(|| Error::arg(format!("line {}: entry before any header", n + 1)))?;
            r.entries.push(serde_json::from_value(v)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let mut r = RunRecord::new("bo", Domain::unit(2), serde_json::json!({"a": 1}), 9);
        r = r.finish(vec![
            RecordEntry { iter: 1, x: vec![0.1, 0.2], y: 3.0, best: 3.0, theta: None, t_wall_ms: None },
            RecordEntry {
                iter: 2,
                x: vec![0.3, 0.4],
                y: 1.0,
                best: 1.0,
                theta: Some(Theta::from(&KernelConfig::new(KernelFamily::Periodic))),
                t_wall_ms: Some(1.5),
            },
        ]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        write_jsonl(&p, &[r.clone(), r.clone()]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(1).unwrap().contains("\"t_wall_ms\":null"));
        assert_eq!(read_jsonl(&p).unwrap(), vec![r.clone(), r]);
    }
}
