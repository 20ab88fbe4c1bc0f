//! Batch verification of the level-3 and deformation claims for the
//! supersingular curve `y^2 + y = x^3` over `F_4`.
//!
//! Every check is a pure computation; [`run`] evaluates a selection (in
//! parallel if asked) and assembles a report in catalog order.

mod checks;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sslevel3::deformation::Precision;

pub use checks::catalog;

pub const REPORT_VERSION: &str = "1";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Data worth keeping whose value is not asserted.
    RecordedOutcome,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::RecordedOutcome => "recorded-outcome",
        }
    }
}

/// Result of one check body.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub details: Value,
}

impl Outcome {
    pub fn assert(ok: bool, summary: impl Into<String>, details: Value) -> Outcome {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            summary: summary.into(),
            details,
        }
    }

    pub fn recorded(summary: impl Into<String>, details: Value) -> Outcome {
        Outcome {
            status: Status::RecordedOutcome,
            summary: summary.into(),
            details,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Config {
    pub k: u32,
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
}

impl Default for Config {
    fn default() -> Self {
        let p = Precision::DEFAULT;
        Config {
            k: p.k,
            m: p.m,
            n: p.n,
        }
    }
}

impl Config {
    pub fn precision(&self) -> sslevel3::Result<Precision> {
        Precision::new(self.k, self.m, self.n)
    }
}

pub type CheckFn = fn(&Config) -> sslevel3::Result<Outcome>;

/// A registered check: unique name, the claim it tests, and its body.
pub struct Check {
    pub name: &'static str,
    pub anchor: &'static str,
    pub body: CheckFn,
}

/// One report line.
#[derive(Clone, Debug, Serialize)]
pub struct CheckDescriptor {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub details: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub config: Config,
    pub checks: Vec<CheckDescriptor>,
}

impl Report {
    /// Whether every assertable check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckDescriptor> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = format!(
            "sslevel3 report v{} (k={}, m={}, N={})\n",
            self.version, self.config.k, self.config.m, self.config.n
        );
        for c in &self.checks {
            let summary = c.details["summary"].as_str().unwrap_or("");
            out.push_str(&format!(
                "{:<16} {:<width$}  {}  [{}]\n",
                c.status.as_str(),
                c.name,
                summary,
                c.anchor
            ));
        }
        let fails = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), fails));
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("unknown check `{0}` (see `sslevel3 list`)")]
    UnknownCheck(String),
    #[error("invalid precision: {0}")]
    Precision(String),
}

/// Resolves names against the catalog; `all` or an empty list selects
/// everything. The selection keeps catalog order and drops duplicates.
pub fn select(names: &[String]) -> Result<Vec<&'static Check>, UsageError> {
    let cat = catalog();
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(cat.iter().collect());
    }
    for n in names {
        if !cat.iter().any(|c| c.name == n) {
            return Err(UsageError::UnknownCheck(n.clone()));
        }
    }
    Ok(cat
        .iter()
        .filter(|c| names.iter().any(|n| n == c.name))
        .collect())
}

fn evaluate(check: &Check, config: &Config) -> CheckDescriptor {
    let (status, details) = match (check.body)(config) {
        Ok(o) => {
            let mut details = serde_json::Map::new();
            details.insert("summary".into(), Value::String(o.summary));
            match o.details {
                Value::Object(m) => details.extend(m),
                Value::Null => {}
                other => {
                    details.insert("data".into(), other);
                }
            }
            (o.status, Value::Object(details))
        }
        Err(e) => (
            Status::Fail,
            serde_json::json!({ "summary": "error", "error": e.to_string() }),
        ),
    };
    CheckDescriptor {
        name: check.name.into(),
        anchor: check.anchor.into(),
        status,
        details,
    }
}

/// Runs the named checks. Results do not depend on `parallel`.
pub fn run(names: &[String], config: Config, parallel: bool) -> Result<Report, UsageError> {
    config
        .precision()
        .map_err(|e| UsageError::Precision(e.to_string()))?;
    let selected = select(names)?;
    let checks = if parallel {
        selected.par_iter().map(|c| evaluate(c, &config)).collect()
    } else {
        selected.iter().map(|c| evaluate(c, &config)).collect()
    };
    Ok(Report {
        version: REPORT_VERSION.into(),
        config,
        checks,
    })
}

/// The catalog as `(name, anchor)` pairs.
pub fn list() -> Vec<(&'static str, &'static str)> {
    catalog().iter().map(|c| (c.name, c.anchor)).collect()
}
