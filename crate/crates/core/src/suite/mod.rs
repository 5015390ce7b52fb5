//! Batch verification: configuration, the check registry and the report.

mod checks;
mod weights;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::Coupling;
use crate::error::{Error, Result};

pub use weights::{default_grid, emit_weights, WeightRow};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Curves,
    Elliptic,
    Lax,
    Rmatrix,
    Fibration,
}

impl SuiteName {
    pub const ALL: [SuiteName; 5] = [SuiteName::Curves, SuiteName::Elliptic, SuiteName::Lax, SuiteName::Rmatrix, SuiteName::Fibration];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Curves => "curves",
            SuiteName::Elliptic => "elliptic",
            SuiteName::Lax => "lax",
            SuiteName::Rmatrix => "rmatrix",
            SuiteName::Fibration => "fibration",
        }
    }

    /// Parses a comma list; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<SuiteName>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Self::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config("no suite selected".into()));
        }
        Ok(out)
    }
}

impl FromStr for SuiteName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}` (expected curves, elliptic, lax, rmatrix, fibration or all)")))
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision: u32,
    /// Numeric tolerance is 2^(−exponent); None means precision/2 − 12.
    pub tolerance_exponent: Option<u32>,
    pub samples: usize,
    pub seed: u64,
    pub couplings: Vec<Coupling>,
    pub suites: Vec<SuiteName>,
    pub stretch: bool,
    pub mutations: bool,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: 128,
            tolerance_exponent: None,
            samples: 100,
            seed: 0,
            couplings: ["1", "2", "3", "1+i"].iter().map(|s| s.parse().unwrap()).collect(),
            suites: SuiteName::ALL.to_vec(),
            stretch: false,
            mutations: false,
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn tol_exponent(&self) -> u32 {
        self.tolerance_exponent.unwrap_or(self.precision / 2 - 12)
    }

    pub fn tolerance(&self) -> f64 {
        crate::numeric::pow2neg(self.tol_exponent() as i64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision < 64 {
            return Err(Error::Config(format!("precision {} < 64 bits", self.precision)));
        }
        if self.precision > 4096 {
            return Err(Error::Config(format!("precision {} > 4096 bits", self.precision)));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be ≥ 1".into()));
        }
        if self.tol_exponent() == 0 || self.tol_exponent() >= self.precision {
            return Err(Error::Config(format!("tolerance exponent {} outside 1..{}", self.tol_exponent(), self.precision)));
        }
        if self.couplings.is_empty() {
            return Err(Error::Config("empty coupling list".into()));
        }
        if let Some(u) = self.couplings.iter().find(|u| u.is_degenerate() && !u.is_zero()) {
            return Err(Error::Config(format!("U = {u} puts the modulus on the branch cut")));
        }
        if self.suites.is_empty() {
            return Err(Error::Config("no suite selected".into()));
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            precision: self.precision,
            tolerance_exponent: self.tol_exponent(),
            samples: self.samples,
            seed: self.seed,
            couplings: self.couplings.iter().map(|u| u.to_string()).collect(),
            suites: self.suites.clone(),
            stretch: self.stretch,
            mutations: self.mutations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub precision: u32,
    pub tolerance_exponent: u32,
    pub samples: usize,
    pub seed: u64,
    pub couplings: Vec<String>,
    pub suites: Vec<SuiteName>,
    pub stretch: bool,
    pub mutations: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub suite: SuiteName,
    pub anchor: String,
    pub method: Method,
    pub status: Status,
    /// True for a mutation control: it passes when the mutant is detected.
    pub mutation: bool,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub overall: Status,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub config: ConfigEcho,
    pub records: Vec<Record>,
}

impl Report {
    pub fn get(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        if self.overall == Status::Pass {
            0
        } else {
            1
        }
    }
}

/// What a check produced, before naming and timing.
#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub name: String,
    pub method: Method,
    pub status: Status,
    pub mutation: bool,
    pub summary: String,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
}

pub(crate) type JobFn = Box<dyn Fn(&RunConfig) -> Vec<Outcome> + Send + Sync>;

pub(crate) struct Job {
    pub suite: SuiteName,
    pub anchor: &'static str,
    pub run: JobFn,
}

/// Runs every enabled check; failures and errors never stop the others.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let jobs = checks::plan(config);
    let mut records: Vec<Record> = jobs
        .par_iter()
        .flat_map_iter(|job| {
            let t0 = Instant::now();
            let outs = (job.run)(config);
            let dt = t0.elapsed().as_secs_f64() / outs.len().max(1) as f64;
            outs.into_iter().map(move |o| Record {
                name: o.name,
                suite: job.suite,
                anchor: job.anchor.to_string(),
                method: o.method,
                status: o.status,
                mutation: o.mutation,
                summary: o.summary,
                residual: o.residual,
                tolerance: o.tolerance,
                runtime_s: config.timings.then_some(dt),
            })
        })
        .collect();
    records.sort_by(|a, b| a.name.cmp(&b.name));
    for w in records.windows(2) {
        if w[0].name == w[1].name {
            return Err(Error::Config(format!("duplicate check name {}", w[0].name)));
        }
    }
    let count = |s: Status| records.iter().filter(|r| r.status == s).count();
    let (passed, failed, errors) = (count(Status::Pass), count(Status::Fail), count(Status::Error));
    let overall = if failed + errors == 0 { Status::Pass } else { Status::Fail };
    Ok(Report { schema_version: SCHEMA_VERSION, overall, passed, failed, errors, config: config.echo(), records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_lists() {
        assert_eq!(SuiteName::parse_list("all").unwrap().len(), 5);
        assert_eq!(SuiteName::parse_list("lax, curves,lax").unwrap(), vec![SuiteName::Curves, SuiteName::Lax]);
        assert!(SuiteName::parse_list("bogus").is_err());
        assert!(SuiteName::parse_list("").is_err());
    }

    #[test]
    fn config_validation() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.tol_exponent(), 52);
        assert!(RunConfig { precision: 32, ..ok.clone() }.validate().is_err());
        assert!(RunConfig { samples: 0, ..ok.clone() }.validate().is_err());
        let cut = RunConfig { couplings: vec!["4i".parse().unwrap()], ..ok.clone() };
        assert!(cut.validate().is_err());
        assert!(RunConfig { couplings: vec!["0".parse().unwrap()], ..ok }.validate().is_ok());
    }
}
