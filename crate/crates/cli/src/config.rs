//! Experiment configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qnmlab_core::SchemeSpec;

use crate::error::CliError;

pub const SEED_ENV: &str = "QNMLAB_SEED";

/// Size of the seeded state battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBattery {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attacks: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<StateBattery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Batch {
    experiments: Vec<ExperimentConfig>,
    #[serde(default)]
    output: Option<PathBuf>,
}

/// A parsed config file: one or more experiments and an optional output path.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub experiments: Vec<ExperimentConfig>,
    pub output: Option<PathBuf>,
}

fn parse_as<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path == "." { String::new() } else { format!("{path}: ") };
        CliError::Config(format!("{field}{inner}"))
    })
}

/// Parse a config document. An object with an `experiments` array is a batch.
pub fn parse_plan(text: &str) -> Result<RunPlan, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let plan = if value.get("experiments").is_some() {
        let b: Batch = parse_as(text)?;
        if b.experiments.iter().any(|e| e.output.is_some()) {
            return Err(CliError::Config("experiments[].output: set the output once at the top level".into()));
        }
        RunPlan { experiments: b.experiments, output: b.output }
    } else {
        let mut c: ExperimentConfig = parse_as(text)?;
        let output = c.output.take();
        RunPlan { experiments: vec![c], output }
    };
    if plan.experiments.is_empty() {
        return Err(CliError::Config("experiments: empty list".into()));
    }
    Ok(plan)
}

pub fn load_plan(path: &Path) -> Result<RunPlan, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_plan(&text)
}

/// Apply the seed override and require a seed on every experiment.
pub fn resolve_seeds(plan: &mut RunPlan, env_seed: Option<&str>) -> Result<(), CliError> {
    let forced = match env_seed {
        Some(s) => Some(
            s.trim().parse::<u64>().map_err(|e| CliError::Config(format!("{SEED_ENV}: `{s}` is not a 64-bit seed ({e})")))?,
        ),
        None => None,
    };
    for (i, e) in plan.experiments.iter_mut().enumerate() {
        if let Some(s) = forced {
            e.seed = Some(s);
        }
        if e.seed.is_none() {
            let at = if plan.experiments.len() > 1 { format!("experiments[{i}].") } else { String::new() };
            return Err(CliError::Config(format!("{at}seed: missing (set it in the config or via {SEED_ENV})")));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(experiment: &str, seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            scheme: None,
            attacks: None,
            states: None,
            seed: Some(seed),
            tolerances: BTreeMap::new(),
            output: None,
        }
    }

    /// SHA-256 of the canonical JSON of everything that affects the result.
    pub fn inputs_digest(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let d = Sha256::digest(json.as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}
