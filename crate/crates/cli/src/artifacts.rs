//! On-disk run artifacts. Every JSON artifact records the fingerprint of the
//! grid it was computed on, and readers refuse artifacts from another grid.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use skorokhod_core::config::RunConfig;
use skorokhod_core::dual::{BDCertificate, StopReason};
use skorokhod_core::grid::ScalarField;
use skorokhod_core::primal::{OptimalityReport, SimResult, TransportPlan};

use crate::error::{io_err, CliError, Result};

pub const PSI: &str = "psi.json";
pub const SUMMARY: &str = "summary.json";
pub const ITERATIONS: &str = "iterations.csv";
pub const BARRIER: &str = "barrier.csv";
pub const VALUE_TABLE: &str = "value_table.csv";
pub const PLAN_JSON: &str = "plan.json";
pub const PLAN_CSV: &str = "plan.csv";
pub const ORACLE: &str = "oracle.json";
pub const WITNESS: &str = "witness.json";
pub const VERIFY: &str = "verify.json";
pub const SIM: &str = "sim.json";
pub const MARGINALS: &str = "marginals.csv";
pub const STOPPING_TIMES: &str = "stopping_times.csv";
pub const REPORT: &str = "report.txt";

pub trait Fingerprinted {
    fn fingerprint(&self) -> &str;
}

macro_rules! fingerprinted {
    ($($t:ty),*) => {
        $(impl Fingerprinted for $t {
            fn fingerprint(&self) -> &str {
                &self.fingerprint
            }
        })*
    };
}

/// The optimized potential. `psi` solves the dual of the walking part when
/// the stay-put split applies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiArtifact {
    pub fingerprint: String,
    pub h: f64,
    pub stay_put: bool,
    pub walk_fraction: f64,
    pub psi: ScalarField,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub fingerprint: String,
    pub seed: u64,
    /// The configuration with every default spelled out.
    pub config: RunConfig,
    pub nodes: usize,
    pub interior_nodes: usize,
    /// Dual objective of the full problem.
    pub objective: f64,
    /// LP optimum of the full problem, when the oracle ran.
    pub oracle_value: Option<f64>,
    pub relative_gap: Option<f64>,
    pub oracle_skipped: Option<String>,
    pub stop_reason: Option<StopReason>,
    pub iterations: usize,
    pub budget_exhausted: bool,
    pub stay_put_mass: f64,
    /// Certificate extremes of the final potential.
    pub certificate: Option<BDCertificate>,
    /// Total variation between the law embedded by the barrier and `nu`.
    pub exact_law_tv: f64,
    /// `(sum |y|^2 nu - sum |x|^2 mu) / 2d`, the mean stopping time of every embedding.
    pub mean_stopping_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanArtifact {
    pub fingerprint: String,
    /// Mass of the walking part the plan transports (its sources carry unit total mass).
    pub walk_fraction: f64,
    pub plan: TransportPlan,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSummary {
    pub fingerprint: String,
    pub seed: u64,
    /// LP optimum of the full problem.
    pub value: f64,
    pub walk_value: f64,
    pub dual_value: Option<f64>,
    pub mean_stopping_time: f64,
    pub marginal_error: f64,
    pub balance_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Check {
        Check { name: name.into(), value, limit, pass: value <= limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Check {
        Check { name: name.into(), value, limit, pass: value >= limit }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub fingerprint: String,
    pub seed: u64,
    /// Where the checked plan came from.
    pub plan_source: String,
    pub checks: Vec<Check>,
    pub optimality: Option<OptimalityReport>,
    pub certificate: Option<BDCertificate>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn table(&self) -> String {
        let mut s = format!("{:<34} {:>14} {:>12}  result\n", "check", "value", "limit");
        for c in &self.checks {
            s += &format!(
                "{:<34} {:>14.6e} {:>12.3e}  {}\n",
                c.name,
                c.value,
                c.limit,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimArtifact {
    pub fingerprint: String,
    pub seed: u64,
    pub result: SimResult,
    /// Total variation between the exact barrier law and `nu`.
    pub exact_tv: f64,
}

fingerprinted!(PsiArtifact, Summary, PlanArtifact, OracleSummary, VerifyReport, SimArtifact);

pub fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let p = path(dir, name);
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&p, e))?;
    fs::write(&p, text + "\n").map_err(|e| io_err(&p, e))
}

/// Reads an artifact and checks that it belongs to the grid with `fingerprint`.
pub fn read_json<T: DeserializeOwned + Fingerprinted>(
    dir: &Path,
    name: &str,
    fingerprint: &str,
    producer: &'static str,
) -> Result<T> {
    let p = path(dir, name);
    if !p.exists() {
        return Err(CliError::MissingArtifact { path: p, producer });
    }
    let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
    let value: T = serde_json::from_str(&text).map_err(|e| io_err(&p, e))?;
    if value.fingerprint() != fingerprint {
        return Err(CliError::ArtifactMismatch {
            path: p,
            expected: fingerprint.to_string(),
            found: value.fingerprint().to_string(),
        });
    }
    Ok(value)
}

/// Like [`read_json`], but a missing file is `None`.
pub fn read_optional<T: DeserializeOwned + Fingerprinted>(
    dir: &Path,
    name: &str,
    fingerprint: &str,
) -> Result<Option<T>> {
    match read_json(dir, name, fingerprint, "solve") {
        Ok(v) => Ok(Some(v)),
        Err(CliError::MissingArtifact { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn create_file(dir: &Path, name: &str) -> Result<fs::File> {
    let p = path(dir, name);
    fs::File::create(&p).map_err(|e| io_err(&p, e))
}
