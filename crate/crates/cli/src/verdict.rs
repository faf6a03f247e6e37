//! Verdict records, one JSON line per experiment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qnmlab_core::serial::SCHEMA;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// measured ≤ bound + slack
    Le,
    /// measured ≥ bound − slack
    Ge,
    /// |measured − bound| ≤ slack
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: Relation,
    pub slack: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, bound: f64, slack: f64) -> Self {
        let pass = match relation {
            Relation::Le => measured <= bound + slack,
            Relation::Ge => measured >= bound - slack,
            Relation::Eq => (measured - bound).abs() <= slack,
        };
        Check { name: name.into(), measured, bound, relation, slack, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub schema: String,
    pub experiment: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub pass: bool,
    /// Wall-clock time; only filled in with `--timings` so that output stays reproducible.
    pub runtime_ms: Option<u64>,
}

impl VerdictRecord {
    pub fn new(
        experiment: &str,
        inputs_digest: String,
        seed: u64,
        checks: Vec<Check>,
        values: BTreeMap<String, serde_json::Value>,
    ) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        VerdictRecord {
            schema: SCHEMA.to_string(),
            experiment: experiment.to_string(),
            inputs_digest,
            seed,
            checks,
            values,
            pass,
            runtime_ms: None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

/// Plain-text summary table.
pub fn summary_table(records: &[VerdictRecord]) -> String {
    let w = records.iter().map(|r| r.experiment.len()).max().unwrap_or(10).max(10);
    let mut out = format!("{:<w$}  {:>7}  {:<7}  first failing check\n", "experiment", "checks", "verdict");
    for r in records {
        let passed = r.checks.iter().filter(|c| c.pass).count();
        let first_fail = r.checks.iter().find(|c| !c.pass).map(|c| c.name.as_str()).unwrap_or("-");
        let frac = format!("{passed}/{}", r.checks.len());
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{:<w$}  {frac:>7}  {verdict:<7}  {first_fail}\n", r.experiment));
    }
    out
}
