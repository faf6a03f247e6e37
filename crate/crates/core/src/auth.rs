//! DNS and GYZ authentication: keywise statistics for tagged unitary
//! schemes, canonical simulators, and the residuals they leave.

use serde::{Deserialize, Serialize};

use crate::channels::{self, DiamondBounds, Isometry, QuantumChannel};
use crate::designs::{self, DeficiencyReport, DesignNotion, Provenance, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::nm::{self, NamedAttack, SIDE};
use crate::quantum::{self, DensityOperator, SystemLayout};
use crate::random;
use crate::schemes::{self, EncryptionScheme, Structure, PLAINTEXT};

/// ε_GYZ above which the GYZ ⇒ DNS implication is not claimed.
pub const GYZ_DNS_REGIME: f64 = 1.0 / (62.0 * 62.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyDeviation {
    pub key: usize,
    /// ‖(Γ_V − Φ_k)|ρ⟩‖₂
    pub deviation: f64,
    pub accept_prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeywiseReport {
    pub per_key: Vec<KeyDeviation>,
    pub weights: Vec<f64>,
    pub mean_sq_deviation: f64,
    pub mean_accept_prob: f64,
    pub tag_dim: usize,
    pub delta: f64,
}

impl KeywiseReport {
    /// 1/|T| + 3δ.
    pub fn mean_sq_bound(&self) -> f64 {
        1.0 / self.tag_dim as f64 + 3.0 * self.delta
    }

    /// Weight of keys whose deviation exceeds √(α(1/|T| + 3δ)).
    pub fn bad_fraction(&self, alpha: f64) -> f64 {
        let thr = (alpha * self.mean_sq_bound()).sqrt();
        self.per_key.iter().zip(&self.weights).filter(|(d, _)| d.deviation > thr).map(|(_, w)| w).sum()
    }

    pub fn markov_holds(&self, alpha: f64) -> bool {
        self.bad_fraction(alpha) <= 1.0 / alpha + 1e-12
    }

    /// Deviation quantiles at the given levels (nearest rank, key-uniform).
    pub fn quantiles(&self, levels: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = self.per_key.iter().map(|k| k.deviation).collect();
        d.sort_by(f64::total_cmp);
        levels
            .iter()
            .map(|q| {
                if d.is_empty() {
                    return 0.0;
                }
                let i = ((q.clamp(0.0, 1.0) * (d.len() - 1) as f64).round()) as usize;
                d[i]
            })
            .collect()
    }
}

/// Key unitaries and tag state; plain unitary schemes have a trivial tag.
fn tagged_parts(scheme: &EncryptionScheme) -> Result<(&[CMatrix], CVector)> {
    match scheme.structure() {
        Structure::TaggedUnitary { unitaries, tag } => Ok((unitaries, tag.clone())),
        Structure::Unitary { unitaries } => Ok((unitaries, CVector::from_element(1, linalg::ONE))),
        _ => Err(Error::Unsupported("keywise analysis needs a (tagged) unitary scheme".into())),
    }
}

/// Key ensemble of a (tagged) unitary scheme.
pub fn key_ensemble(scheme: &EncryptionScheme) -> Result<UnitaryEnsemble> {
    let (us, _) = tagged_parts(scheme)?;
    let elems = us.iter().cloned().zip(scheme.weights().iter().copied()).collect();
    UnitaryEnsemble::new(elems, Provenance::Custom)
}

/// 2-design deficiency of the key ensemble.
pub fn key_deficiency(scheme: &EncryptionScheme) -> Result<DeficiencyReport> {
    designs::design_deficiency(&key_ensemble(scheme)?, DesignNotion::TDesign { t: 2 })
}

/// (1/|C|) Tr_C K for each Kraus operator K: C ⊗ B → C ⊗ X.
fn partial_trace_c(ks: &[CMatrix], dc: usize, db: usize) -> Vec<CMatrix> {
    ks.iter()
        .map(|k| {
            let dx = k.nrows() / dc;
            let mut g = CMatrix::zeros(dx, db);
            for c in 0..dc {
                g += k.view((c * dx, c * db), (dx, db));
            }
            g.unscale(dc as f64)
        })
        .collect()
}

/// Γ_V = (1/|C|) Tr_C V.
pub fn ideal_operator(v: &Isometry, dc: usize) -> Result<CMatrix> {
    let m = v.matrix();
    if !m.ncols().is_multiple_of(dc) || !m.nrows().is_multiple_of(dc) {
        return Err(Error::DimensionMismatch(format!("isometry {}x{} does not act on C:{dc}", m.nrows(), m.ncols())));
    }
    Ok(partial_trace_c(std::slice::from_ref(m), dc, m.ncols() / dc).remove(0))
}

/// Per-key deviations ‖(Γ_V − Φ_k)|ρ⟩‖₂ with Φ_k = ⟨ψ|_T U_k† V U_k |ψ⟩_T,
/// checked against 1/|T| + 3δ.
pub fn gyz_keywise(scheme: &EncryptionScheme, v: &Isometry, rho_ab: &CVector, delta: f64) -> Result<KeywiseReport> {
    let (us, psi) = tagged_parts(scheme)?;
    let dc = scheme.ciphertext_dim();
    let da = scheme.plaintext_dim();
    let dt = psi.len();
    let vm = v.matrix();
    if !vm.ncols().is_multiple_of(dc) || !vm.nrows().is_multiple_of(dc) {
        return Err(Error::DimensionMismatch(format!("attack {}x{} does not act on C:{dc}", vm.nrows(), vm.ncols())));
    }
    let db = vm.ncols() / dc;
    let dx = vm.nrows() / dc;
    if rho_ab.len() != da * db {
        return Err(Error::DimensionMismatch(format!("state has dim {}, expected {}", rho_ab.len(), da * db)));
    }
    let n = rho_ab.norm();
    if (n - 1.0).abs() > quantum::TOL {
        return Err(Error::NotNormalized(n * n));
    }
    let gamma = ideal_operator(v, dc)?;
    let ideal = linalg::kron(&linalg::identity(da), &gamma) * rho_ab;
    let psi_col = CMatrix::from_column_slice(dt, 1, psi.as_slice());
    let append = |d: usize| linalg::kron(&linalg::kron(&linalg::identity(da), &psi_col), &linalg::identity(d));
    let (app_b, app_x) = (append(db), append(dx));
    let (id_b, id_x) = (linalg::identity(db), linalg::identity(dx));
    let mut per_key = Vec::with_capacity(us.len());
    let (mut msd, mut macc) = (0.0, 0.0);
    for (k, (u, &w)) in us.iter().zip(scheme.weights()).enumerate() {
        let left = linalg::kron(u, &id_x) * &app_x;
        let right = linalg::kron(u, &id_b) * &app_b;
        let real = left.adjoint() * (vm * (right * rho_ab));
        let deviation = (&ideal - &real).norm();
        let accept_prob = real.norm_squared();
        msd += w * deviation * deviation;
        macc += w * accept_prob;
        per_key.push(KeyDeviation { key: k, deviation, accept_prob });
    }
    Ok(KeywiseReport {
        per_key,
        weights: scheme.weights().to_vec(),
        mean_sq_deviation: msd,
        mean_accept_prob: macc,
        tag_dim: dt,
        delta,
    })
}

/// 4(1/|T| + 3δ)^{1/3}.
pub fn gyz_theorem_bound(tag_dim: usize, delta: f64) -> f64 {
    4.0 * (1.0 / tag_dim as f64 + 3.0 * delta).cbrt()
}

/// Puts ρ on [A, B], adding a trivial B.
fn ab_matrix(rho: &DensityOperator) -> Result<(CMatrix, usize)> {
    let rho = if rho.layout().contains(SIDE) {
        rho.clone()
    } else {
        let b = DensityOperator::new(linalg::identity(1), SystemLayout::single(SIDE, 1))?;
        quantum::tensor_compose(&[rho, &b])?
    };
    if rho.layout().len() != 2 {
        return Err(Error::LayoutMismatch(format!("expected a state on A, B; got {}", rho.layout())));
    }
    let rho = rho.permute(&[PLAINTEXT, SIDE])?;
    let db = rho.layout().dim_of(SIDE)?;
    Ok((rho.matrix().clone(), db))
}

fn sandwich(ks: &[CMatrix], x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(ks[0].nrows(), ks[0].nrows());
    for k in ks {
        out += k * x * k.adjoint();
    }
    out
}

fn fitted_attack(attack: &QuantumChannel, dc: usize, db: usize) -> Result<QuantumChannel> {
    if attack.input_dim() != dc * db || !attack.output_dim().is_multiple_of(dc) {
        return Err(Error::LayoutMismatch(format!("attack {} -> {} does not fit C:{dc} ⊗ B:{db}", attack.input(), attack.output())));
    }
    let (il, ol) = nm::attack_layouts(dc, db, attack.output_dim() / dc);
    attack.relabel(il, ol)
}

/// E_k ‖Π_acc D_k(Λ(E_k(ρ))) Π_acc − Λ^acc(ρ)‖₁ with the oblivious simulator
/// Λ^acc(ρ) = Tr_E Γ_V ρ Γ_V†, V a Stinespring dilation of Λ.
pub fn gyz_residual(scheme: &EncryptionScheme, attack: &QuantumChannel, rho_ab: &DensityOperator) -> Result<f64> {
    let (rho, db) = ab_matrix(rho_ab)?;
    let da = scheme.plaintext_dim();
    let dc = scheme.ciphertext_dim();
    let attack = fitted_attack(attack, dc, db)?;
    let ak = attack.kraus()?;
    let dbt = attack.output_dim() / dc;
    // Kraus form of Tr_E Γ_V(·)Γ_V†; independent of the dilation chosen.
    let id_a = linalg::identity(da);
    let gammas: Vec<CMatrix> = partial_trace_c(&ak, dc, db).iter().map(|g| linalg::kron(&id_a, g)).collect();
    let ideal = sandwich(&gammas, &rho);
    let n_acc = da * dbt;
    let mut total = 0.0;
    for k in 0..scheme.key_count() {
        let w = scheme.weights()[k];
        if w == 0.0 {
            continue;
        }
        let ks = nm::key_kraus(scheme, k, &ak, db)?;
        let out = sandwich(&ks, &rho);
        let acc = out.view((0, 0), (n_acc, n_acc)).into_owned();
        total += w * quantum::trace_norm_hermitian(&(acc - &ideal));
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnsReport {
    /// Max over the battery of the trace distance to the simulator.
    pub residual: f64,
    pub gamma_hat: f64,
    pub gamma: f64,
    /// max |eig(M) − 1| for M = (Λ_acc + Λ_rej)†(1).
    pub eta: f64,
    /// (1 + λ_min^{-1/2}) · max(1 − λ_max^{-1/2}, λ_min^{-1/2} − 1), bounding ‖𝓜 − id‖⋄.
    pub correction: f64,
    pub corrected: bool,
    /// Choi-based bounds on the diamond distance to the simulator.
    pub diamond: DiamondBounds,
}

impl DnsReport {
    pub fn correction_within_bound(&self) -> bool {
        self.correction <= 2.0 * self.eta + 1e-12
    }
}

/// Simulator channel id ⊗ Λ_acc + ⟨⊥⟩ ⊗ Λ_rej on [A, B] → [Ā, B̃].
pub fn dns_simulator(da: usize, acc: &QuantumChannel, rej: &QuantumChannel) -> Result<QuantumChannel> {
    let al = schemes::plaintext_layout(da);
    let ol = schemes::decrypted_layout(da);
    let j = QuantumChannel::from_kraus(al.clone(), ol.clone(), vec![schemes::accept_embedding(da)])?;
    let bot = DensityOperator::basis(ol, da)?;
    let r = QuantumChannel::constant(al, &bot)?;
    QuantumChannel::linear_combination(&[(1.0, &j.tensor(acc)?), (1.0, &r.tensor(rej)?)])
}

/// DNS residual with the witnesses Λ_rej = (1−γ)|C|²Λ″/(|C|²−1),
/// Λ_acc = Λ′ + (γ|C|²−1)Λ″/(|C|²−1), γ = max(γ̂, |C|⁻²).
pub fn dns_residual(scheme: &EncryptionScheme, attack: &QuantumChannel, battery: &[DensityOperator]) -> Result<DnsReport> {
    let first = battery.first().ok_or_else(|| Error::InvalidArgument("empty state battery".into()))?;
    let (_, db) = ab_matrix(first)?;
    let da = scheme.plaintext_dim();
    let dc = scheme.ciphertext_dim();
    let attack = fitted_attack(attack, dc, db)?;
    let (l1, l2) = nm::characterization_maps(&attack, dc)?;
    let dk_tau = scheme.avg_decrypt()?.apply_matrix(&quantum::maximally_mixed(dc));
    let gamma_hat = 1.0 - dk_tau[(da, da)].re;
    let c2 = (dc * dc) as f64;
    let gamma = gamma_hat.max(1.0 / c2);
    let mut acc = QuantumChannel::linear_combination(&[(1.0, &l1), ((gamma * c2 - 1.0) / (c2 - 1.0), &l2)])?;
    let mut rej = QuantumChannel::linear_combination(&[((1.0 - gamma) * c2 / (c2 - 1.0), &l2)])?;

    let m = QuantumChannel::linear_combination(&[(1.0, &acc), (1.0, &rej)])?.dual_identity();
    let m = linalg::hermitian_part(&m);
    let ev = linalg::eigvalsh(&m);
    let (lmin, lmax) = (ev[0], ev[ev.len() - 1]);
    let eta = (1.0 - lmin).abs().max((lmax - 1.0).abs());
    let mut correction = 0.0;
    let mut corrected = false;
    if linalg::max_abs_diff(&m, &linalg::identity(db)) > 1e-10 {
        if lmin <= 0.0 {
            return Err(Error::InvalidArgument(format!("witness sum is singular (λ_min = {lmin:.3e})")));
        }
        let inv_sqrt = linalg::hermitian_fn(&m, |x| 1.0 / x.sqrt());
        let bl = SystemLayout::single(SIDE, db);
        let fix = QuantumChannel::conjugation(bl.clone(), bl, inv_sqrt)?;
        acc = fix.then(&acc)?;
        rej = fix.then(&rej)?;
        correction = (1.0 + lmin.powf(-0.5)) * (1.0 - lmax.powf(-0.5)).max(lmin.powf(-0.5) - 1.0);
        corrected = true;
    }
    let sim = dns_simulator(da, &acc, &rej)?;
    let eff = nm::effective_channel_of(scheme, &attack, db)?;
    let diamond = channels::diamond_distance_bounds(&eff, &sim)?;
    let delta = eff.choi() - sim.choi();
    let delta = QuantumChannel::from_hermitian_choi(eff.input().clone(), eff.output().clone(), delta)?;
    let mut residual: f64 = 0.0;
    for rho in battery {
        let (x, b) = ab_matrix(rho)?;
        if b != db {
            return Err(Error::DimensionMismatch("battery states disagree on |B|".into()));
        }
        residual = residual.max(quantum::trace_norm_hermitian(&delta.apply_matrix(&x)));
    }
    Ok(DnsReport { residual, gamma_hat, gamma, eta, correction, corrected, diamond })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ImplicationStatus {
    Checked { bound: f64, pass: bool },
    OutOfRegime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationEntry {
    pub attack: String,
    pub epsilon_gyz: f64,
    pub epsilon_dns: f64,
    pub status: ImplicationStatus,
}

/// 4(28√ε + 3ε).
pub fn gyz_to_dns_bound(eps: f64) -> f64 {
    4.0 * (28.0 * eps.sqrt() + 3.0 * eps)
}

/// For each attack: ε_GYZ (max over the battery), ε_DNS, and whether
/// ε_DNS ≤ 4(28√ε_GYZ + 3ε_GYZ) + slack when ε_GYZ ≤ 62⁻².
pub fn gyz_implies_dns_check(
    scheme: &EncryptionScheme,
    attacks: &[NamedAttack],
    battery: &[DensityOperator],
    slack: f64,
) -> Result<Vec<ImplicationEntry>> {
    let mut out = Vec::with_capacity(attacks.len());
    for a in attacks {
        let mut eps_gyz: f64 = 0.0;
        for rho in battery {
            eps_gyz = eps_gyz.max(gyz_residual(scheme, &a.channel, rho)?);
        }
        let eps_dns = dns_residual(scheme, &a.channel, battery)?.residual;
        let status = if eps_gyz <= GYZ_DNS_REGIME {
            let bound = gyz_to_dns_bound(eps_gyz);
            ImplicationStatus::Checked { bound, pass: eps_dns <= bound + slack }
        } else {
            ImplicationStatus::OutOfRegime
        };
        out.push(ImplicationEntry { attack: a.name.clone(), epsilon_gyz: eps_gyz, epsilon_dns: eps_dns, status });
    }
    Ok(out)
}

/// exp(−iθG) on C ⊗ B for seeded Hermitian G with ‖G‖∞ = 1, θ_i = θ₀(i + 1).
pub fn near_identity_attacks(dc: usize, db: usize, count: usize, theta0: f64, seed: u64) -> Result<Vec<NamedAttack>> {
    let (il, ol) = nm::attack_layouts(dc, db, db);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let name = format!("near-identity-{i}");
        let mut r = random::substream(seed, &name);
        let g = random::hermitian(dc * db, &mut r);
        let theta = theta0 * (i + 1) as f64;
        let (vals, vecs) = linalg::eigh(&g);
        let mut scaled = vecs.clone();
        for (k, &v) in vals.iter().enumerate() {
            let ph = linalg::c((theta * v).cos(), -(theta * v).sin());
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
        let u = scaled * vecs.adjoint();
        out.push(NamedAttack { name, channel: QuantumChannel::from_kraus(il.clone(), ol.clone(), vec![u])? });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliAcceptStats {
    pub accept_prob: f64,
    /// ⟨φ|Π_acc ρ_out Π_acc|φ⟩ / accept_prob; `None` when acceptance mass ≤ 1e-12.
    pub fidelity_given_accept: Option<f64>,
}

/// Key-averaged acceptance and post-selected fidelity under a fixed
/// ciphertext Pauli `label` (e.g. "XI"), for plaintext |φ⟩.
pub fn pauli_attack_accept_stats(scheme: &EncryptionScheme, label: &str, phi: &CVector) -> Result<PauliAcceptStats> {
    if label.chars().all(|ch| ch == 'I') {
        return Err(Error::InvalidArgument("identity Pauli: use the identity attack".into()));
    }
    let p = designs::pauli_string(label)?;
    let dc = scheme.ciphertext_dim();
    let da = scheme.plaintext_dim();
    if p.nrows() != dc {
        return Err(Error::DimensionMismatch(format!("Pauli `{label}` has dim {}, ciphertext has {dc}", p.nrows())));
    }
    if phi.len() != da {
        return Err(Error::DimensionMismatch(format!("plaintext state has dim {}, expected {da}", phi.len())));
    }
    let rho = linalg::outer(phi, phi);
    let attack = [p];
    let (mut acc, mut fid) = (0.0, 0.0);
    for k in 0..scheme.key_count() {
        let w = scheme.weights()[k];
        if w == 0.0 {
            continue;
        }
        let out = sandwich(&nm::key_kraus(scheme, k, &attack, 1)?, &rho);
        let a = out.view((0, 0), (da, da)).into_owned();
        acc += w * a.trace().re;
        fid += w * (phi.adjoint() * &a * phi)[(0, 0)].re;
    }
    let fidelity_given_accept = if acc > 1e-12 { Some(fid / acc) } else { None };
    Ok(PauliAcceptStats { accept_prob: acc, fidelity_given_accept })
}
