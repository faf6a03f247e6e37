//! Built-in experiments. Each one runs a fixed recipe against a scheme
//! (configurable where it makes sense) and records named checks.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use qnmlab_core::auth::{self, ImplicationStatus};
use qnmlab_core::designs::{self, Provenance, UnitaryEnsemble};
use qnmlab_core::linalg::{self, CVector};
use qnmlab_core::nm::{self, AttackScenario, NamedAttack, ATTACK_LIBRARY};
use qnmlab_core::quantum::{self, DensityOperator, SystemLayout};
use qnmlab_core::schemes::{self, EncryptionScheme, EnsembleSpec, SchemeSpec};
use qnmlab_core::{lemmas, random, Error, Isometry};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::verdict::{Check, Relation, VerdictRecord};

/// Which scheme descriptors an experiment accepts in its config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeUse {
    Fixed,
    Any,
    Tagged,
    Injection,
    WernerHolevo,
}

pub struct ExperimentInfo {
    pub name: &'static str,
    pub claim: &'static str,
    pub default_scheme: &'static str,
    pub scheme: SchemeUse,
    pub attacks: bool,
    pub states: bool,
    /// Check names; per-item checks are `name/item`.
    pub checks: &'static [&'static str],
    run: fn(&ExperimentConfig, u64, &mut Recorder) -> Result<(), CliError>,
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "characterization",
        claim: "An eps-NM scheme's effective maps lie within 2*sqrt(2 eps)|A|^4|C|(4 sqrt|A| + 1) of the characterized form, and a small residual bounds the gain.",
        default_scheme: "Clifford group on 1 qubit",
        scheme: SchemeUse::Any,
        attacks: true,
        states: true,
        checks: &["char-residual", "converse"],
        run: characterization,
    },
    ExperimentInfo {
        name: "dns-from-nm",
        claim: "A tagged scheme built on a 2-design authenticates in the DNS sense with error at most 4/|T|.",
        default_scheme: "1-qubit plaintext, 3 tag qubits, 2000 sampled 4-qubit Clifford keys",
        scheme: SchemeUse::Tagged,
        attacks: true,
        states: true,
        checks: &["dns-residual", "witness-correction"],
        run: dns_from_nm,
    },
    ExperimentInfo {
        name: "gyz-2design",
        claim: "Tagged 2-design schemes authenticate in the GYZ sense: keywise mean-square deviation is at most 1/|T| + 3 delta and the residual is at most 4(1/|T| + 3 delta)^(1/3).",
        default_scheme: "1-qubit plaintext, 1 tag qubit, full 2-qubit Clifford group; plus 2 tag qubits over 2000 sampled 3-qubit Cliffords",
        scheme: SchemeUse::Tagged,
        attacks: true,
        states: true,
        checks: &["keywise-mean-sq", "keywise-oracle", "markov", "gyz-residual"],
        run: gyz_2design,
    },
    ExperimentInfo {
        name: "gyz-implies-dns",
        claim: "GYZ authentication with error eps <= 62^-2 implies DNS authentication with error 4(28 sqrt(eps) + 3 eps).",
        default_scheme: "1-qubit plaintext, 1 tag qubit, full 2-qubit Clifford group",
        scheme: SchemeUse::Tagged,
        attacks: false,
        states: true,
        checks: &["implication", "in-regime"],
        run: gyz_implies_dns,
    },
    ExperimentInfo {
        name: "injection-separation",
        claim: "The plaintext-injection scheme is ABW-non-malleable but not non-malleable.",
        default_scheme: "Clifford group on 1 qubit with an injected plaintext block",
        scheme: SchemeUse::Injection,
        attacks: false,
        states: false,
        checks: &["nm-gain", "abw"],
        run: injection_separation,
    },
    ExperimentInfo {
        name: "its-iff-ind",
        claim: "Information-theoretic secrecy holds exactly when average ciphertexts are indistinguishable.",
        default_scheme: "quantum one-time pad on 1 qubit, contrasted with single-key and phase-flip schemes",
        scheme: SchemeUse::Any,
        attacks: false,
        states: true,
        checks: &["agreement"],
        run: its_iff_ind,
    },
    ExperimentInfo {
        name: "nm-2design",
        claim: "A unitary scheme is non-malleable when its keys form a 2-design.",
        default_scheme: "Clifford group on 1 qubit",
        scheme: SchemeUse::Any,
        attacks: true,
        states: true,
        checks: &["nm-gain", "characterization"],
        run: nm_2design,
    },
    ExperimentInfo {
        name: "nm-implies-abw",
        claim: "Non-malleability implies ABW non-malleability.",
        default_scheme: "Clifford group on 1 qubit",
        scheme: SchemeUse::Any,
        attacks: true,
        states: false,
        checks: &["abw", "abw-dominated"],
        run: nm_implies_abw,
    },
    ExperimentInfo {
        name: "nm-implies-its",
        claim: "Non-malleability implies secrecy: the ciphertext-extraction attack has p= = 0 and reproduces the mixture marginal.",
        default_scheme: "Clifford group on 1 qubit",
        scheme: SchemeUse::Any,
        attacks: false,
        states: true,
        checks: &["extraction-p-eq", "extraction-marginal", "its"],
        run: nm_implies_its,
    },
    ExperimentInfo {
        name: "qotp-malleable",
        claim: "The quantum one-time pad is malleable: a coin-mixture attack gains 0.5488 bits on a maximally entangled input.",
        default_scheme: "quantum one-time pad on 1 qubit (fixed)",
        scheme: SchemeUse::Fixed,
        attacks: false,
        states: false,
        checks: &["nm-gain", "h-p-eq", "pauli-x-residual"],
        run: qotp_malleable,
    },
    ExperimentInfo {
        name: "secrecy-1design",
        claim: "A scheme is secret when its keys form a 1-design; a single-key scheme leaks 2 log|A| bits.",
        default_scheme: "quantum one-time pad on 1 qubit",
        scheme: SchemeUse::Any,
        attacks: false,
        states: true,
        checks: &["its", "single-key-leak"],
        run: secrecy_1design,
    },
    ExperimentInfo {
        name: "twirl-lemmas",
        claim: "Supporting lemmas hold numerically: swap trick, mirror identity, 1-norm/2-norm, CJ-diamond sandwich, Pinsker, continuity bounds, Schur 2-twirl, d-factor relation.",
        default_scheme: "none",
        scheme: SchemeUse::Fixed,
        attacks: false,
        states: false,
        checks: &[
            "swap-trick",
            "mirror",
            "one-norm-two-norm",
            "cj-diamond-sandwich",
            "pinsker",
            "fannes",
            "schur-2twirl",
            "channel-twirl-uubar-d-factor",
        ],
        run: twirl_lemmas,
    },
    ExperimentInfo {
        name: "werner-holevo-sideinfo",
        claim: "The Werner-Holevo scheme hides pure states to within 2/(d-1) but not entangled ones.",
        default_scheme: "Werner-Holevo keys over the 1-qubit Clifford group",
        scheme: SchemeUse::WernerHolevo,
        attacks: false,
        states: true,
        checks: &["closed-form", "pure-pair-distance", "entangled-distance"],
        run: werner_holevo_sideinfo,
    },
];

pub fn find(name: &str) -> Result<&'static ExperimentInfo, CliError> {
    EXPERIMENTS.iter().find(|e| e.name == name).ok_or_else(|| CliError::UnknownExperiment(name.to_string()))
}

/// Checks the config against the experiment's interface before running anything.
pub fn validate(cfg: &ExperimentConfig) -> Result<&'static ExperimentInfo, CliError> {
    let info = find(&cfg.experiment)?;
    if let Some(spec) = &cfg.scheme {
        let ok = match info.scheme {
            SchemeUse::Fixed => false,
            SchemeUse::Any => true,
            SchemeUse::Tagged => matches!(spec, SchemeSpec::Tagged { .. }),
            SchemeUse::Injection => matches!(spec, SchemeSpec::Injection { .. }),
            SchemeUse::WernerHolevo => matches!(spec, SchemeSpec::WernerHolevo { .. }),
        };
        if !ok {
            return Err(CliError::InvalidCombination(format!(
                "experiment `{}` does not accept scheme {} (expects {:?})",
                info.name,
                serde_json::to_string(spec).unwrap_or_default(),
                info.scheme
            )));
        }
    }
    if let Some(names) = &cfg.attacks {
        if !info.attacks {
            return Err(CliError::InvalidCombination(format!("experiment `{}` uses a fixed attack set", info.name)));
        }
        if names.is_empty() {
            return Err(CliError::Config("attacks: empty list".into()));
        }
        if let Some(bad) = names.iter().find(|n| !ATTACK_LIBRARY.contains(&n.as_str())) {
            return Err(CliError::InvalidCombination(format!("unknown attack `{bad}`")));
        }
    }
    if let Some(st) = &cfg.states {
        if !info.states {
            return Err(CliError::InvalidCombination(format!("experiment `{}` uses a fixed state battery", info.name)));
        }
        if st.count == 0 {
            return Err(CliError::Config("states.count: must be positive".into()));
        }
        if st.side_dim == Some(0) {
            return Err(CliError::Config("states.side_dim: must be positive".into()));
        }
    }
    for key in cfg.tolerances.keys() {
        let base = key.split('/').next().unwrap_or(key);
        if !info.checks.contains(&base) {
            return Err(CliError::Config(format!("tolerances.{key}: no such check in `{}`", info.name)));
        }
    }
    if let Some((k, v)) = cfg.tolerances.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(CliError::Config(format!("tolerances.{k}: {v} is not a non-negative number")));
    }
    Ok(info)
}

/// Run one experiment. The config must carry a seed.
pub fn run(cfg: &ExperimentConfig) -> Result<VerdictRecord, CliError> {
    let info = validate(cfg)?;
    let seed = cfg.seed.ok_or_else(|| CliError::Config("seed: missing".into()))?;
    let mut rec = Recorder { tolerances: &cfg.tolerances, checks: Vec::new(), values: BTreeMap::new() };
    (info.run)(cfg, seed, &mut rec)?;
    Ok(VerdictRecord::new(info.name, cfg.inputs_digest(), seed, rec.checks, rec.values))
}

pub struct Recorder<'a> {
    tolerances: &'a BTreeMap<String, f64>,
    checks: Vec<Check>,
    values: BTreeMap<String, Value>,
}

impl Recorder<'_> {
    fn slack(&self, name: &str, default: f64) -> f64 {
        let base = name.split('/').next().unwrap_or(name);
        self.tolerances.get(name).or_else(|| self.tolerances.get(base)).copied().unwrap_or(default)
    }

    fn push(&mut self, name: String, measured: f64, rel: Relation, bound: f64, slack: f64) {
        let slack = self.slack(&name, slack);
        self.checks.push(Check::new(name, measured, rel, bound, slack));
    }

    fn le(&mut self, name: impl Into<String>, measured: f64, bound: f64, slack: f64) {
        self.push(name.into(), measured, Relation::Le, bound, slack);
    }

    fn ge(&mut self, name: impl Into<String>, measured: f64, bound: f64, slack: f64) {
        self.push(name.into(), measured, Relation::Ge, bound, slack);
    }

    fn eq(&mut self, name: impl Into<String>, measured: f64, bound: f64, slack: f64) {
        self.push(name.into(), measured, Relation::Eq, bound, slack);
    }

    fn value(&mut self, name: &str, v: impl Serialize) {
        self.values.insert(name.to_string(), serde_json::to_value(v).expect("value serializes"));
    }
}

// helpers

fn build_scheme(cfg: &ExperimentConfig, default: SchemeSpec) -> Result<EncryptionScheme, CliError> {
    let spec = cfg.scheme.clone().unwrap_or(default);
    spec.build().map_err(|e| CliError::InvalidCombination(format!("scheme: {e}")))
}

fn attacks_for(cfg: &ExperimentConfig, scheme: &EncryptionScheme, db: usize, seed: u64) -> Result<Vec<NamedAttack>, CliError> {
    let Some(names) = &cfg.attacks else {
        return Ok(nm::attack_library(scheme.ciphertext(), db, seed)?);
    };
    names
        .iter()
        .map(|n| match nm::build_attack(n, scheme.ciphertext(), db, seed) {
            Ok(channel) => Ok(NamedAttack { name: n.clone(), channel }),
            Err(Error::IncompatibleAttack(m)) => Err(CliError::InvalidCombination(format!("attack `{n}`: {m}"))),
            Err(e) => Err(e.into()),
        })
        .collect()
}

fn state_count(cfg: &ExperimentConfig, default: usize) -> usize {
    cfg.states.as_ref().map_or(default, |s| s.count)
}

fn side_dim(cfg: &ExperimentConfig, default: usize) -> usize {
    cfg.states.as_ref().and_then(|s| s.side_dim).unwrap_or(default)
}

/// φ⁺ on A ⊗ B (when |B| = |A|) followed by seeded random pure states.
fn ab_states(da: usize, db: usize, count: usize, seed: u64) -> Result<Vec<DensityOperator>, CliError> {
    let layout = SystemLayout::new(&[(schemes::PLAINTEXT, da), (nm::SIDE, db)])?;
    let mut out = Vec::with_capacity(count);
    if db == da {
        out.push(DensityOperator::from_pure(&quantum::phi_plus_vector(da), layout.clone())?);
    }
    let mut r = random::substream(seed, "ab-states");
    while out.len() < count {
        out.push(DensityOperator::from_pure(&random::pure_state(da * db, &mut r), layout.clone())?);
    }
    Ok(out)
}

/// Basis states, |+⟩, then seeded random pure states on A.
fn plaintext_states(da: usize, count: usize, seed: u64) -> Result<Vec<DensityOperator>, CliError> {
    let layout = schemes::plaintext_layout(da);
    let plus = CVector::from_element(da, linalg::real(1.0 / (da as f64).sqrt()));
    let mut out = vec![
        DensityOperator::basis(layout.clone(), 0)?,
        DensityOperator::basis(layout.clone(), da - 1)?,
        DensityOperator::from_pure(&plus, layout.clone())?,
    ];
    out.truncate(count);
    let mut r = random::substream(seed, "plaintext-states");
    while out.len() < count {
        out.push(DensityOperator::from_pure(&random::pure_state(da, &mut r), layout.clone())?);
    }
    Ok(out)
}

fn single_key_scheme(da: usize) -> Result<EncryptionScheme, CliError> {
    let ens = UnitaryEnsemble::uniform(vec![linalg::identity(da)], Provenance::Custom)?;
    Ok(schemes::unitary_scheme_from(&ens)?)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Per-attack maxima of nm_gain over the state battery, plus characterization residuals.
struct NmSweep {
    gain: BTreeMap<String, f64>,
    residual: BTreeMap<String, f64>,
}

fn nm_sweep(scheme: &EncryptionScheme, attacks: &[NamedAttack], states: &[DensityOperator]) -> Result<NmSweep, CliError> {
    let mut gain = BTreeMap::new();
    let mut residual = BTreeMap::new();
    for a in attacks {
        let mut g = f64::NEG_INFINITY;
        let mut eff = None;
        for rho in states {
            let sc = AttackScenario::new(scheme, rho.clone(), a.channel.clone())?;
            let e = match &eff {
                Some(e) => nm::evaluate_with(&sc, Clone::clone(e))?,
                None => {
                    let e = nm::evaluate(&sc)?;
                    eff = Some(e.effective.clone());
                    e
                }
            };
            g = g.max(e.nm_gain);
        }
        let sc = AttackScenario::new(scheme, states[0].clone(), a.channel.clone())?;
        residual.insert(a.name.clone(), nm::characterization_residual(&sc)?.upper);
        gain.insert(a.name.clone(), g);
    }
    Ok(NmSweep { gain, residual })
}

// experiments

fn secrecy_1design(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::Qotp { qubits: 1 })?;
    let da = s.plaintext_dim();
    let states = ab_states(da, side_dim(cfg, da), state_count(cfg, 10), seed)?;
    let its: Vec<f64> = states.iter().map(|r| nm::its_check(&s, r)).collect::<Result<_, _>>()?;
    rec.le("its", max_of(its.iter().copied()), 0.0, 1e-10);
    rec.value("its", &its);

    let leak = nm::its_check(&single_key_scheme(da)?, &quantum::max_entangled_on(schemes::PLAINTEXT, nm::SIDE, da))?;
    rec.eq("single-key-leak", leak, 2.0 * (da as f64).log2(), 1e-9);
    rec.value("key_count", s.key_count());
    Ok(())
}

fn its_iff_ind(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let primary = build_scheme(cfg, SchemeSpec::Qotp { qubits: 1 })?;
    let da = primary.plaintext_dim();
    let mut cases = vec![("configured".to_string(), primary), ("single-key".to_string(), single_key_scheme(da)?)];
    if da.is_power_of_two() && da >= 2 {
        let n = da.trailing_zeros() as usize;
        let z = designs::pauli_string(&format!("Z{}", "I".repeat(n - 1)))?;
        let ens = UnitaryEnsemble::uniform(vec![linalg::identity(da), z], Provenance::Custom)?;
        cases.push(("phase-flip".to_string(), schemes::unitary_scheme_from(&ens)?));
    }
    let count = state_count(cfg, 10);
    let states = ab_states(da, side_dim(cfg, da), count, seed)?;
    let mut r = random::substream(seed, "ind-pairs");
    let plus = linalg::projector(&CVector::from_element(da, linalg::real(1.0 / (da as f64).sqrt())));
    let mut pairs = vec![
        (linalg::matrix_unit(da, 0, 0), linalg::matrix_unit(da, da - 1, da - 1)),
        (linalg::matrix_unit(da, 0, 0), plus),
    ];
    for _ in 0..count {
        let rank = 1 + random::index(&mut r, da);
        pairs.push((random::density_matrix(da, rank, &mut r), random::density_matrix(da, rank, &mut r)));
    }
    let mut table = BTreeMap::new();
    for (name, s) in &cases {
        let its = max_of(states.iter().map(|st| nm::its_check(s, st)).collect::<Result<Vec<_>, _>>()?);
        let ind = max_of(pairs.iter().map(|(a, b)| nm::ind_distance(s, a, b)).collect::<Result<Vec<_>, _>>()?);
        let agree = (its <= 1e-10) == (ind <= 1e-10);
        rec.eq(format!("agreement/{name}"), if agree { 1.0 } else { 0.0 }, 1.0, 0.0);
        table.insert(name.clone(), serde_json::json!({ "its": its, "ind": ind, "secret": its <= 1e-10 }));
    }
    rec.value("schemes", table);
    Ok(())
}

fn nm_implies_its(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::Clifford { qubits: 1 })?;
    let da = s.plaintext_dim();
    let states = nm::scenario_states(da, 1, da, state_count(cfg, 10), seed)?;
    let (mut p_eq, mut marginal, mut its, mut gain) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for st in &states {
        let rho_ar = st.marginal(&[schemes::PLAINTEXT, nm::REFERENCE])?;
        let rep = nm::secrecy_attack_from_nm(&s, &rho_ar)?;
        p_eq = p_eq.max(rep.p_eq.abs());
        marginal = marginal.max(rep.marginal_residual);
        gain = gain.max(nm::nm_gain(&rep.scenario)?);
        its = its.max(nm::its_check(&s, &rho_ar)?);
    }
    rec.eq("extraction-p-eq", p_eq, 0.0, 1e-12);
    rec.le("extraction-marginal", marginal, 0.0, 1e-9);
    rec.le("its", its, 0.0, 1e-10);
    rec.value("extraction_nm_gain", gain);
    Ok(())
}

fn nm_2design(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::Clifford { qubits: 1 })?;
    let da = s.plaintext_dim();
    let db = side_dim(cfg, 2);
    let attacks = attacks_for(cfg, &s, db, seed)?;
    let states = nm::scenario_states(da, db, da, state_count(cfg, 10), seed)?;
    let sweep = nm_sweep(&s, &attacks, &states)?;
    rec.le("nm-gain", max_of(sweep.gain.values().copied()), 0.0, 1e-9);
    rec.le("characterization", max_of(sweep.residual.values().copied()), 0.0, 1e-9);
    if s.is_unitary() {
        let d = auth::key_deficiency(&s)?;
        rec.value("two_design_deficiency", [d.lower, d.upper]);
    }
    rec.value("nm_gain", &sweep.gain);
    rec.value("characterization_residual", &sweep.residual);
    Ok(())
}

fn characterization(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::Clifford { qubits: 1 })?;
    let (da, dc) = (s.plaintext_dim(), s.ciphertext_dim());
    let db = side_dim(cfg, 2);
    let attacks = attacks_for(cfg, &s, db, seed)?;
    let states = nm::scenario_states(da, db, da, state_count(cfg, 10), seed)?;
    let sweep = nm_sweep(&s, &attacks, &states)?;
    let eps = max_of(sweep.gain.values().copied()).max(0.0);
    let tol = nm::characterization_tolerance(eps, da, dc);
    let r_bits = (da as f64).log2();
    for (name, res) in &sweep.residual {
        rec.le(format!("char-residual/{name}"), *res, tol, 1e-9);
        rec.le(format!("converse/{name}"), sweep.gain[name], nm::converse_tolerance(*res, da, r_bits), 1e-9);
    }
    rec.value("epsilon", eps);
    rec.value("tolerance", tol);
    rec.value("characterization_residual", &sweep.residual);
    Ok(())
}

fn nm_implies_abw(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::Clifford { qubits: 1 })?;
    let attacks = attacks_for(cfg, &s, 1, seed)?;
    let rho = nm::phi_plus_ar(s.plaintext_dim());
    let mut abw = BTreeMap::new();
    for a in &attacks {
        let r = nm::abw_residual_of(&s, &a.channel)?;
        let ch = nm::characterization_residual(&AttackScenario::new(&s, rho.clone(), a.channel.clone())?)?;
        rec.le(format!("abw-dominated/{}", a.name), r.diamond_upper, ch.upper, 1e-8);
        abw.insert(a.name.clone(), r.diamond_upper);
    }
    rec.le("abw", max_of(abw.values().copied()), 0.0, 1e-8);
    rec.value("abw_residual", abw);
    Ok(())
}

fn injection_separation(cfg: &ExperimentConfig, _seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::Injection { base: Box::new(SchemeSpec::Clifford { qubits: 1 }) })?;
    let (da, dc) = (s.plaintext_dim(), s.ciphertext_dim());
    let attack = nm::build_attack("injection", s.ciphertext(), 1, 0)?;
    let r = nm::evaluate(&AttackScenario::new(&s, nm::phi_plus_ar(da), attack.clone())?)?;
    let oracle = 2.0 * (da as f64).log2() - quantum::binary_entropy(1.0 / (dc * dc) as f64);
    rec.eq("nm-gain", r.nm_gain, oracle, 1e-6);
    let abw = nm::abw_residual_of(&s, &attack)?;
    rec.le("abw", abw.diamond_upper, 0.0, 1e-6);
    rec.value("p_eq", r.p_eq);
    rec.value("abw_choi_distance", abw.choi_distance);
    Ok(())
}

fn qotp_malleable(_cfg: &ExperimentConfig, _seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = schemes::qotp_scheme(1)?;
    let attack = nm::build_attack("coin-mixture", s.ciphertext(), 1, 0)?;
    let r = nm::evaluate(&AttackScenario::new(&s, nm::phi_plus_ar(2), attack)?)?;
    // spectrum {5/8, 1/8, 1/8, 1/8} of the heads/tails mixture, minus the 1 bit of φ⁺ correlation
    let oracle = quantum::spectrum_entropy(&[0.625, 0.125, 0.125, 0.125]) - 1.0;
    let h = quantum::binary_entropy(r.p_eq);
    rec.eq("nm-gain", r.nm_gain, oracle, 1e-3);
    rec.eq("h-p-eq", h, 0.0, 1e-9);
    let x = nm::build_attack("pauli-x", s.ciphertext(), 1, 0)?;
    let res = nm::characterization_residual(&AttackScenario::new(&s, nm::phi_plus_ar(2), x)?)?;
    rec.ge("pauli-x-residual", res.lower, 1.0, 1e-9);
    rec.value("information_gain", r.nm_gain + h);
    rec.value("p_eq", r.p_eq);
    rec.value("oracle", oracle);
    Ok(())
}

fn werner_holevo_sideinfo(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let s = build_scheme(cfg, SchemeSpec::WernerHolevo { design: EnsembleSpec::Clifford { qubits: 1 } })?;
    let d = s.plaintext_dim();
    let ek = s.avg_encrypt()?;
    let closed = schemes::werner_holevo_channel(d)?;
    rec.le("closed-form", quantum::trace_norm_hermitian(&(ek.choi() - closed.choi())), 0.0, 1e-9);

    let mut r = random::substream(seed, "werner-holevo-pairs");
    let mut worst: f64 = 0.0;
    for _ in 0..state_count(cfg, 200) {
        let a = linalg::projector(&random::pure_state(d, &mut r));
        let b = linalg::projector(&random::pure_state(d, &mut r));
        worst = worst.max(quantum::trace_norm_hermitian(&ek.apply_matrix(&(a - b))));
    }
    rec.le("pure-pair-distance", worst, 2.0 / (d as f64 - 1.0), 1e-9);

    let phi = quantum::max_entangled_on(schemes::PLAINTEXT, nm::SIDE, d);
    let out = ek.apply(&phi, &[schemes::PLAINTEXT])?;
    let tt = quantum::maximally_mixed(d * d);
    rec.ge("entangled-distance", quantum::trace_norm_hermitian(&(out.matrix() - tt)), 1.0, 1e-9);
    Ok(())
}

fn pauli_isometry(label: &str) -> Result<Isometry, CliError> {
    let p = designs::pauli_string(label)?;
    let l = SystemLayout::single(schemes::CIPHERTEXT, p.nrows());
    Ok(Isometry::new(p, l.clone(), l)?)
}

fn gyz_2design(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let base = SchemeSpec::Clifford { qubits: 2 };
    let s = build_scheme(cfg, SchemeSpec::Tagged { base: Box::new(base), tag_qubits: 1, tag_state: None })?;
    let (da, dc) = (s.plaintext_dim(), s.ciphertext_dim());
    let dt = dc / da;
    let delta = auth::key_deficiency(&s)?.upper;
    let phi = linalg::basis_vector(da, 0);
    if !dc.is_power_of_two() {
        return Err(CliError::InvalidCombination("keywise Pauli sweep needs a qubit ciphertext".into()));
    }
    let n = dc.trailing_zeros() as usize;
    // every non-identity Pauli up to 3 ciphertext qubits, else the 15 lowest labels
    let labels: Vec<String> = (1..linalg::ipow(4, n).min(64)).map(|k| designs::pauli_label(n, k)).collect();
    let oracle = ((da * da * dt) as f64 - 1.0) / ((dc * dc) as f64 - 1.0);
    let mut table = BTreeMap::new();
    for label in &labels {
        let r = auth::gyz_keywise(&s, &pauli_isometry(label)?, &phi, delta)?;
        rec.le(format!("keywise-mean-sq/{label}"), r.mean_sq_deviation, r.mean_sq_bound(), 1e-10);
        if delta <= 1e-9 {
            rec.eq(format!("keywise-oracle/{label}"), r.mean_sq_deviation, oracle, 1e-10);
        }
        for alpha in [1.5, 2.0, 3.0, 5.0, 10.0] {
            rec.le(format!("markov/{label}/{alpha}"), r.bad_fraction(alpha), 1.0 / alpha, 1e-12);
        }
        table.insert(label.clone(), [r.mean_sq_deviation, r.mean_accept_prob]);
    }
    rec.value("keywise_delta", delta);
    rec.value("keywise_mean_sq_and_accept", table);

    // sampled Clifford keys on 1 + 2 qubits
    let sampled = SchemeSpec::Tagged {
        base: Box::new(SchemeSpec::SampledClifford { qubits: 3, keys: 2000, seed }),
        tag_qubits: 2,
        tag_state: None,
    }
    .build()?;
    let delta_hat = auth::key_deficiency(&sampled)?.upper;
    let bound = auth::gyz_theorem_bound(4, delta_hat);
    let db = side_dim(cfg, 2);
    let attacks = attacks_for(cfg, &sampled, db, seed)?;
    let states = ab_states(sampled.plaintext_dim(), db, state_count(cfg, 2), seed)?;
    let mut residuals = BTreeMap::new();
    for a in &attacks {
        let r = max_of(states.iter().map(|st| auth::gyz_residual(&sampled, &a.channel, st)).collect::<Result<Vec<_>, _>>()?);
        rec.le(format!("gyz-residual/{}", a.name), r, bound, 1e-9);
        residuals.insert(a.name.clone(), r);
    }
    rec.value("delta_hat", delta_hat);
    rec.value("gyz_bound", bound);
    rec.value("gyz_residual", residuals);
    Ok(())
}

fn gyz_implies_dns(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let base = SchemeSpec::Clifford { qubits: 2 };
    let s = build_scheme(cfg, SchemeSpec::Tagged { base: Box::new(base), tag_qubits: 1, tag_state: None })?;
    let attacks = auth::near_identity_attacks(s.ciphertext_dim(), 1, 10, 1e-5, seed)?;
    let battery = plaintext_states(s.plaintext_dim(), state_count(cfg, 4), seed)?;
    let slack = rec.slack("implication", 1e-6);
    let entries = auth::gyz_implies_dns_check(&s, &attacks, &battery, slack)?;
    let mut checked = 0usize;
    for e in &entries {
        if let ImplicationStatus::Checked { bound, .. } = e.status {
            checked += 1;
            rec.le(format!("implication/{}", e.attack), e.epsilon_dns, bound, 1e-6);
        }
    }
    rec.ge("in-regime", checked as f64, attacks.len() as f64, 0.0);
    rec.value("regime", auth::GYZ_DNS_REGIME);
    rec.value("entries", &entries);
    Ok(())
}

fn dns_from_nm(cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    let default = SchemeSpec::Tagged {
        base: Box::new(SchemeSpec::SampledClifford { qubits: 4, keys: 2000, seed }),
        tag_qubits: 3,
        tag_state: None,
    };
    let s = build_scheme(cfg, default)?;
    let dt = s.ciphertext_dim() / s.plaintext_dim();
    let attacks = attacks_for(cfg, &s, 1, seed)?;
    let battery = plaintext_states(s.plaintext_dim(), state_count(cfg, 4), seed)?;
    let mut table = BTreeMap::new();
    for a in &attacks {
        let r = auth::dns_residual(&s, &a.channel, &battery)?;
        rec.le(format!("dns-residual/{}", a.name), r.residual, 4.0 / dt as f64, 1e-6);
        rec.le(format!("witness-correction/{}", a.name), r.correction, 2.0 * r.eta, 1e-12);
        table.insert(a.name.clone(), r);
    }
    rec.value("dns", table);
    Ok(())
}

fn twirl_lemmas(_cfg: &ExperimentConfig, seed: u64, rec: &mut Recorder) -> Result<(), CliError> {
    for c in lemmas::run_battery(seed)? {
        rec.ge(c.name.clone(), c.worst_margin, 0.0, c.tolerance);
        rec.value(&format!("samples/{}", c.name), c.samples);
    }
    Ok(())
}
