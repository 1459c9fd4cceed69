//! Checks, artifacts and the run summary.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Reported without gating, e.g. when a curvature hypothesis fails.
    Info,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    /// The formula the check is about.
    pub anchor: &'static str,
    pub scope: String,
    pub status: Status,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn gate(anchor: &'static str, scope: impl Into<String>, value: f64, tolerance: f64, ok: bool) -> Self {
        Check {
            anchor,
            scope: scope.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            tolerance: Some(tolerance),
            detail: String::new(),
        }
    }

    pub fn at_most(anchor: &'static str, scope: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::gate(anchor, scope, value, tolerance, value <= tolerance)
    }

    pub fn info(anchor: &'static str, scope: impl Into<String>, value: f64) -> Self {
        Check {
            anchor,
            scope: scope.into(),
            status: Status::Info,
            value,
            tolerance: None,
            detail: String::new(),
        }
    }

    /// A gate that degrades to `Info` when `gated` is `None`.
    pub fn optional(anchor: &'static str, scope: impl Into<String>, value: f64, tolerance: f64, gated: Option<bool>) -> Self {
        match gated {
            Some(ok) => Self::gate(anchor, scope, value, tolerance, ok),
            None => Check {
                tolerance: Some(tolerance),
                ..Self::info(anchor, scope, value)
            }
            .with_detail("hypothesis violated: reported, not asserted"),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Writes artifacts under the output directory, each echoing the config.
pub struct Sink {
    root: PathBuf,
    config_json: String,
    written: Vec<String>,
}

impl Sink {
    pub fn new(root: &Path, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Sink {
            root: root.to_path_buf(),
            config_json: serde_json::to_string(config)?,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn create(&mut self, rel: &str) -> Result<BufWriter<fs::File>> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        self.written.push(rel.to_string());
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    /// CSV with a leading `# config: {...}` comment line.
    pub fn csv(&mut self, rel: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let echo = self.config_json.clone();
        let mut w = self.create(rel)?;
        writeln!(w, "# config: {echo}")?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// JSON object `{"config": ..., "data": ...}`.
    pub fn json(&mut self, rel: &str, data: &impl Serialize) -> Result<()> {
        let doc = serde_json::json!({
            "config": serde_json::from_str::<Value>(&self.config_json)?,
            "data": data,
        });
        let mut w = self.create(rel)?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// The configuration as TOML, re-runnable as is.
    pub fn config_toml(&mut self, config: &RunConfig) -> Result<()> {
        let mut w = self.create("config.toml")?;
        w.write_all(config.to_toml().as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn artifacts(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
}

impl Outcome {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.results.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    config: &'a RunConfig,
    pass: bool,
    gated: usize,
    failed: usize,
    checks: &'a [Check],
    results: &'a Map<String, Value>,
    artifacts: Vec<String>,
}

/// Writes `summary.json` and `ledger.txt`; the ledger's first line is the
/// only place a timestamp appears.
pub fn write_summary(sink: &mut Sink, experiment: &str, config: &RunConfig, outcome: &Outcome, timestamp: u64) -> Result<()> {
    let gated = outcome.checks.iter().filter(|c| c.status != Status::Info).count();
    let failed = outcome.checks.iter().filter(|c| c.status == Status::Fail).count();
    let mut artifacts = sink.artifacts().to_vec();
    artifacts.push("summary.json".into());
    artifacts.push("ledger.txt".into());
    let summary = Summary {
        experiment,
        config,
        pass: failed == 0,
        gated,
        failed,
        checks: &outcome.checks,
        results: &outcome.results,
        artifacts,
    };
    let path = sink.root().join("summary.json");
    let mut w = BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;

    let path = sink.root().join("ledger.txt");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "# maxgraph {experiment} run, unix time {timestamp}")?;
    write_ledger_lines(&mut w, &outcome.checks)?;
    writeln!(w, "# {} gated checks, {failed} failed", gated)?;
    w.flush()?;
    Ok(())
}

pub fn write_ledger_lines(w: &mut impl Write, checks: &[Check]) -> std::io::Result<()> {
    for c in checks {
        let bound = c.tolerance.map(|t| format!(" (tolerance {t:.3e})")).unwrap_or_default();
        let detail = if c.detail.is_empty() { String::new() } else { format!("; {}", c.detail) };
        writeln!(
            w,
            "{}  {}  [{}] value {:.6e}{bound}{detail}",
            c.status.label(),
            c.anchor,
            c.scope,
            c.value
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_and_info() {
        assert_eq!(Check::at_most("x", "s", 1.0, 2.0).status, Status::Pass);
        assert_eq!(Check::at_most("x", "s", 3.0, 2.0).status, Status::Fail);
        assert_eq!(Check::at_most("x", "s", f64::NAN, 2.0).status, Status::Fail);
        assert_eq!(Check::optional("x", "s", 3.0, 2.0, None).status, Status::Info);
        let mut o = Outcome::default();
        o.push(Check::info("x", "s", 1.0));
        assert!(o.passed());
        o.push(Check::at_most("x", "s", 3.0, 2.0));
        assert!(!o.passed());
    }

    #[test]
    fn ledger_line_format() {
        let mut buf = Vec::new();
        write_ledger_lines(&mut buf, &[Check::at_most("Δh = 0", "level 0", 1e-12, 1e-3)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "PASS  Δh = 0  [level 0] value 1.000000e-12 (tolerance 1.000e-3)\n"
        );
    }
}
