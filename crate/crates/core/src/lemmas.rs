//! Seeded numeric checks of the supporting lemmas: swap trick, mirror
//! identity, 1-norm/2-norm, CJ-to-diamond sandwich, Pinsker, Fannes-type
//! continuity, Schur 2-twirl, and the d-factor relation between the
//! channel twirl and the U-Ū twirl.

use serde::{Deserialize, Serialize};

use crate::channels::{self, QuantumChannel};
use crate::designs::{self, DesignNotion, UnitaryEnsemble};
use crate::error::Result;
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::{self, DensityOperator, FannesFlavor, SystemLayout};
use crate::random::{self, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub samples: usize,
    /// Smallest bound − measured over all samples (≥ −tol means pass).
    pub worst_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl LemmaCheck {
    fn new(name: &str, margins: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let mut samples = 0;
        let mut worst = f64::INFINITY;
        for m in margins {
            samples += 1;
            worst = worst.min(m);
        }
        LemmaCheck { name: name.to_string(), samples, worst_margin: worst, tolerance, pass: worst >= -tolerance }
    }
}

/// ‖(X ⊗ 1)|φ⁺⟩_{AA'} − √(|B|/|A|)(1 ⊗ Xᵀ)|φ⁺⟩_{BB'}‖₂ for X: A → B.
pub fn mirror_residual(x: &CMatrix) -> f64 {
    let (db, da) = x.shape();
    let lhs = linalg::kron(x, &linalg::identity(da)) * quantum::phi_plus_vector(da);
    let rhs = (linalg::kron(&linalg::identity(db), &x.transpose()) * quantum::phi_plus_vector(db))
        .scale((db as f64 / da as f64).sqrt());
    (lhs - rhs).norm()
}

/// 2‖ψ − φ‖₂ − ‖ψψ† − φφ†‖₁.
pub fn one_norm_two_norm_margin(psi: &CVector, phi: &CVector) -> f64 {
    let d = linalg::outer(psi, psi) - linalg::outer(phi, phi);
    2.0 * (psi - phi).norm() - quantum::trace_norm_hermitian(&d)
}

/// |Tr(AB) − Tr(F(A⊗B))|.
pub fn swap_trick_residual(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let (l, r) = quantum::swap_trick_check(a, b)?;
    Ok((l - r).norm())
}

/// Unclamped see-saw value between the two CJ bounds: (value − lower, upper − value).
pub fn cj_sandwich_margins(a: &QuantumChannel, b: &QuantumChannel, seed: u64) -> Result<(f64, f64)> {
    let bounds = channels::diamond_distance_bounds(a, b)?;
    let h = channels::diamond_norm_search(&(a.choi() - b.choi()), a.input_dim(), a.output_dim(), seed);
    Ok((h - bounds.lower, bounds.upper - h))
}

/// Margins of the entropy, conditional-entropy and mutual-information
/// continuity bounds for a pair of states on [A, B].
pub fn fannes_margins(rho: &DensityOperator, sigma: &DensityOperator) -> Result<[f64; 3]> {
    let eps = rho.trace_distance(sigma)?.min(2.0);
    let da = rho.layout().dim_of("A")?;
    let db = rho.layout().dim_of("B")?;
    let dh = (quantum::entropy(rho, &["A"])? - quantum::entropy(sigma, &["A"])?).abs();
    let dc = (quantum::conditional_entropy(rho, &["A"], &["B"])? - quantum::conditional_entropy(sigma, &["A"], &["B"])?).abs();
    let di = (quantum::mutual_information(rho, &["A"], &["B"])? - quantum::mutual_information(sigma, &["A"], &["B"])?).abs();
    Ok([
        quantum::fannes_bound(eps, &[da], FannesFlavor::Entropy)? - dh,
        quantum::fannes_bound(eps, &[da], FannesFlavor::CondEntropy)? - dc,
        quantum::fannes_bound(eps, &[da, db], FannesFlavor::MutualInfo)? - di,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DFactorReport {
    pub ensemble: String,
    pub dim: usize,
    pub uubar_lower: f64,
    pub uubar_upper: f64,
    pub channel_lower: f64,
    pub channel_upper: f64,
}

impl DFactorReport {
    /// Measured lower bounds never exceed d times the other notion's upper bound.
    pub fn margins(&self) -> [f64; 2] {
        let d = self.dim as f64;
        [d * self.channel_upper - self.uubar_lower, d * self.uubar_upper - self.channel_lower]
    }
}

pub fn d_factor(name: &str, ens: &UnitaryEnsemble, seed: u64) -> Result<DFactorReport> {
    let uu = designs::design_deficiency_seeded(ens, DesignNotion::Uubar, seed)?;
    let ch = designs::design_deficiency_seeded(ens, DesignNotion::ChannelTwirl, seed)?;
    Ok(DFactorReport {
        ensemble: name.to_string(),
        dim: ens.dim(),
        uubar_lower: uu.lower,
        uubar_upper: uu.upper,
        channel_lower: ch.lower,
        channel_upper: ch.upper,
    })
}

fn random_state(da: usize, db: usize, r: &mut SeededRng) -> DensityOperator {
    let rank = 1 + random::index(r, da * db);
    let layout = SystemLayout::new(&[("A", da), ("B", db)]).expect("distinct labels");
    DensityOperator::new(random::density_matrix(da * db, rank, r), layout).expect("random state is valid")
}

fn random_channel(d_in: usize, d_out: usize, r: &mut SeededRng) -> Result<QuantumChannel> {
    let rank = (1 + random::index(r, 3)).max(d_in.div_ceil(d_out));
    QuantumChannel::from_kraus(
        SystemLayout::single("A", d_in),
        SystemLayout::single("B", d_out),
        random::channel_kraus(d_in, d_out, rank, r),
    )
}

/// Ensembles used for the d-factor check: exact and deliberately imperfect.
pub fn d_factor_ensembles(seed: u64) -> Result<Vec<(String, UnitaryEnsemble)>> {
    let mut out = vec![
        ("pauli-1".to_string(), designs::pauli_group(1)?),
        ("clifford-1".to_string(), designs::clifford_group(1)?),
        ("pauli-2".to_string(), designs::pauli_group(2)?),
    ];
    let mut r = random::substream(seed, "d-factor");
    for (i, count) in [3usize, 8].into_iter().enumerate() {
        let us = (0..count).map(|_| random::unitary(2, &mut r)).collect();
        out.push((format!("haar-sample-{i}"), UnitaryEnsemble::uniform(us, designs::Provenance::Custom)?));
    }
    Ok(out)
}

/// The full lemma battery with fixed sample counts.
pub fn run_battery(seed: u64) -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();

    let mut r = random::substream(seed, "swap-trick");
    let mut m = Vec::new();
    for i in 0..500 {
        let d = 2 + i % 5;
        let a = random::ginibre(d, d, &mut r);
        let b = random::ginibre(d, d, &mut r);
        m.push(-swap_trick_residual(&a, &b)?);
    }
    out.push(LemmaCheck::new("swap-trick", m, 1e-10));

    let mut r = random::substream(seed, "mirror");
    let m: Vec<f64> = (0..200)
        .map(|i| {
            let x = random::ginibre(1 + i % 4, 1 + (i / 4) % 4, &mut r);
            -mirror_residual(&x)
        })
        .collect();
    out.push(LemmaCheck::new("mirror", m, 1e-12));

    let mut r = random::substream(seed, "one-norm-two-norm");
    let m: Vec<f64> = (0..200)
        .map(|i| {
            let d = 2 + i % 6;
            one_norm_two_norm_margin(&random::pure_state(d, &mut r), &random::pure_state(d, &mut r))
        })
        .collect();
    out.push(LemmaCheck::new("one-norm-two-norm", m, 1e-12));

    let mut r = random::substream(seed, "cj-sandwich");
    let mut m = Vec::new();
    for i in 0..20 {
        let (d_in, d_out) = (2 + i % 2, 2 + (i / 2) % 2);
        let a = random_channel(d_in, d_out, &mut r)?;
        let b = random_channel(d_in, d_out, &mut r)?;
        let (lo, hi) = cj_sandwich_margins(&a, &b, seed ^ i as u64)?;
        m.push(lo.min(hi));
    }
    out.push(LemmaCheck::new("cj-diamond-sandwich", m, 1e-9));

    let mut r = random::substream(seed, "pinsker");
    let mut m = Vec::new();
    for i in 0..500 {
        let rho = random_state(2 + i % 2, 2 + (i / 2) % 2, &mut r);
        m.push(quantum::pinsker_gap(&rho, &["A"], &["B"])?);
    }
    out.push(LemmaCheck::new("pinsker", m, 1e-9));

    let mut r = random::substream(seed, "fannes");
    let mut m = Vec::new();
    for i in 0..500 {
        let (da, db) = (2 + i % 2, 2 + (i / 2) % 2);
        let rho = random_state(da, db, &mut r);
        let other = random_state(da, db, &mut r);
        let p = random::uniform(&mut r);
        let mixed = rho.matrix().scale(1.0 - p) + other.matrix().scale(p);
        let sigma = DensityOperator::new(mixed, rho.layout().clone())?;
        m.extend(fannes_margins(&rho, &sigma)?);
    }
    out.push(LemmaCheck::new("fannes", m, 1e-9));

    let mut r = random::substream(seed, "schur-2twirl");
    let mut m = Vec::new();
    for i in 0..50 {
        let d = 2 + i % 2;
        let x = random::ginibre(d * d, d * d, &mut r);
        let once = designs::haar_2twirl(&x, d)?;
        let twice = designs::haar_2twirl(&once, d)?;
        m.push(-linalg::max_abs_diff(&once, &twice));
        let y = designs::uubar_twirl_haar(&x, d)?;
        m.push(-span_residual(&y, d));
    }
    out.push(LemmaCheck::new("schur-2twirl", m, 1e-10));

    let mut m = Vec::new();
    for (name, ens) in d_factor_ensembles(seed)? {
        m.extend(d_factor(&name, &ens, seed)?.margins());
    }
    out.push(LemmaCheck::new("channel-twirl-uubar-d-factor", m, 1e-9));

    Ok(out)
}

/// Distance of Y from span{φ⁺, 1} on d ⊗ d (Hilbert-Schmidt projection).
pub fn span_residual(y: &CMatrix, d: usize) -> f64 {
    let phi = quantum::phi_plus(d);
    let one = linalg::identity(d * d);
    // φ⁺ and 1 − φ⁺ are orthogonal
    let rest = &one - &phi;
    let a = linalg::hs_inner(&phi, y);
    let b = linalg::hs_inner(&rest, y) / linalg::hs_inner(&rest, &rest);
    let proj = phi.map(|z| z * a) + rest.map(|z| z * b);
    linalg::max_abs_diff(y, &proj)
}
