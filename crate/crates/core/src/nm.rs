//! Effective attacks, p₌, entropic non-malleability gain, characterization
//! and ABW residuals, secrecy checks and the attack library.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channels::{self, DiamondBounds, QuantumChannel};
use crate::designs;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE};
use crate::quantum::{self, DensityOperator, EntropyLedger, SystemLayout};
use crate::random;
use crate::schemes::{self, EncryptionScheme, CIPHERTEXT, DECRYPTED, PLAINTEXT};

pub const SIDE: &str = "B";
pub const SIDE_OUT: &str = "Bt";
pub const REFERENCE: &str = "R";
const CIPHER_COPY: &str = "C'";

/// Initial state on A ⊗ B ⊗ R plus an attack C ⊗ B → C ⊗ B̃.
#[derive(Clone, Debug)]
pub struct AttackScenario<'a> {
    scheme: &'a EncryptionScheme,
    initial: DensityOperator,
    attack: QuantumChannel,
}

pub fn attack_layouts(dc: usize, db: usize, dbt: usize) -> (SystemLayout, SystemLayout) {
    let i = SystemLayout::new(&[(CIPHERTEXT, dc), (SIDE, db)]).expect("distinct labels");
    let o = SystemLayout::new(&[(CIPHERTEXT, dc), (SIDE_OUT, dbt)]).expect("distinct labels");
    (i, o)
}

fn trivial(label: &str) -> DensityOperator {
    DensityOperator::new(linalg::identity(1), SystemLayout::single(label, 1)).expect("1x1 state")
}

impl<'a> AttackScenario<'a> {
    /// `initial` must carry register `A`; missing `B`/`R` are added as trivial registers.
    pub fn new(scheme: &'a EncryptionScheme, initial: DensityOperator, attack: QuantumChannel) -> Result<Self> {
        let mut rho = initial;
        for label in [SIDE, REFERENCE] {
            if !rho.layout().contains(label) {
                rho = quantum::tensor_compose(&[&rho, &trivial(label)])?;
            }
        }
        if rho.layout().len() != 3 {
            return Err(Error::LayoutMismatch(format!("initial state must live on A, B, R; got {}", rho.layout())));
        }
        let rho = rho.permute(&[PLAINTEXT, SIDE, REFERENCE])?;
        let da = scheme.plaintext_dim();
        if rho.layout().dim_of(PLAINTEXT)? != da {
            return Err(Error::DimensionMismatch(format!("plaintext register must have dim {da}")));
        }
        let dr = rho.layout().dim_of(REFERENCE)?;
        if dr > da * da {
            return Err(Error::InvalidArgument(format!("reference dim {dr} exceeds |A|^2 = {}", da * da)));
        }
        let db = rho.layout().dim_of(SIDE)?;
        let dc = scheme.ciphertext_dim();
        let in_dims = attack.input().total_dim();
        if in_dims != dc * db || !attack.output_dim().is_multiple_of(dc) {
            return Err(Error::LayoutMismatch(format!(
                "attack {} -> {} does not fit C:{dc} ⊗ B:{db}",
                attack.input(),
                attack.output()
            )));
        }
        if !attack.is_cp() || !attack.is_tp() {
            return Err(Error::InvalidArgument("attack must be CPTP".into()));
        }
        let (il, ol) = attack_layouts(dc, db, attack.output_dim() / dc);
        let attack = attack.relabel(il, ol)?;
        Ok(AttackScenario { scheme, initial: rho, attack })
    }

    pub fn scheme(&self) -> &EncryptionScheme {
        self.scheme
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn attack(&self) -> &QuantumChannel {
        &self.attack
    }

    pub fn side_dim(&self) -> usize {
        self.initial.layout().dim_of(SIDE).unwrap_or(1)
    }

    pub fn side_out_dim(&self) -> usize {
        self.attack.output_dim() / self.scheme.ciphertext_dim()
    }

    pub fn side_state(&self) -> Result<DensityOperator> {
        self.initial.marginal(&[SIDE])
    }
}

/// Result of running one scenario.
#[derive(Clone, Debug)]
pub struct EffectiveAttack {
    pub effective: QuantumChannel,
    pub output: DensityOperator,
    pub p_eq: f64,
    pub ledger: EntropyLedger,
    pub nm_gain: f64,
}

/// Tr_K (D ∘ Λ ∘ E)(· ⊗ τ_K) as a channel A ⊗ B → Ā ⊗ B̃, by exact key averaging.
pub fn effective_channel(scenario: &AttackScenario) -> Result<QuantumChannel> {
    effective_channel_of(scenario.scheme, &scenario.attack, scenario.side_dim())
}

pub fn effective_channel_of(scheme: &EncryptionScheme, attack: &QuantumChannel, db: usize) -> Result<QuantumChannel> {
    let da = scheme.plaintext_dim();
    let dc = scheme.ciphertext_dim();
    if attack.input_dim() != dc * db {
        return Err(Error::LayoutMismatch(format!("attack input dim {} != {dc}·{db}", attack.input_dim())));
    }
    let dbt = attack.output_dim() / dc;
    let d_in = da * db;
    let d_out = (da + 1) * dbt;
    let a_kraus = attack.kraus()?;
    let r = a_kraus.len();
    // all attack Kraus operators stacked vertically
    let rows = dc * dbt;
    let mut a_stack = CMatrix::zeros(r * rows, dc * db);
    for (j, a) in a_kraus.iter().enumerate() {
        a_stack.view_mut((j * rows, 0), (rows, dc * db)).copy_from(a);
    }
    let id_b = linalg::identity(db);
    let n = d_in * d_out;
    let mut choi = CMatrix::zeros(n, n);
    for k in 0..scheme.key_count() {
        let w = scheme.weights()[k];
        if w == 0.0 {
            continue;
        }
        let dk = scheme.decrypt(k).kraus()?;
        let nd = dk.len();
        let mut d_stack = CMatrix::zeros(nd * (da + 1), dc);
        for (l, d) in dk.iter().enumerate() {
            d_stack.view_mut((l * (da + 1), 0), (da + 1, dc)).copy_from(d);
        }
        for e in scheme.encrypt(k).kraus()? {
            let ae = &a_stack * linalg::kron(&e, &id_b);
            // regroup to C × (j, b̃, i) so that D acts on C alone
            let mut m = CMatrix::zeros(dc, r * dbt * d_in);
            for j in 0..r {
                for c in 0..dc {
                    for bt in 0..dbt {
                        for i in 0..d_in {
                            m[(c, (j * dbt + bt) * d_in + i)] = ae[(j * rows + c * dbt + bt, i)];
                        }
                    }
                }
            }
            let p = &d_stack * m;
            // column (l, j) holds vec of the composite Kraus operator
            let mut wk = CMatrix::zeros(n, nd * r);
            for l in 0..nd {
                for j in 0..r {
                    let col = l * r + j;
                    for ao in 0..=da {
                        for bt in 0..dbt {
                            for i in 0..d_in {
                                wk[((ao * dbt + bt) * d_in + i, col)] = p[(l * (da + 1) + ao, (j * dbt + bt) * d_in + i)];
                            }
                        }
                    }
                }
            }
            choi += (&wk * wk.adjoint()).scale(w / d_in as f64);
        }
    }
    let input = SystemLayout::new(&[(PLAINTEXT, da), (SIDE, db)])?;
    let output = SystemLayout::new(&[(DECRYPTED, da + 1), (SIDE_OUT, dbt)])?;
    QuantumChannel::from_choi(input, output, choi)
}

/// Kraus operators of (D_k ⊗ id) ∘ Λ ∘ (E_k ⊗ id) for a single key.
pub fn key_kraus(scheme: &EncryptionScheme, k: usize, attack_kraus: &[CMatrix], db: usize) -> Result<Vec<CMatrix>> {
    let dbt = attack_kraus.first().map_or(1, |a| a.nrows() / scheme.ciphertext_dim());
    let id_b = linalg::identity(db);
    let id_bt = linalg::identity(dbt);
    let ek: Vec<CMatrix> = scheme.encrypt(k).kraus()?.iter().map(|e| linalg::kron(e, &id_b)).collect();
    let dk: Vec<CMatrix> = scheme.decrypt(k).kraus()?.iter().map(|d| linalg::kron(d, &id_bt)).collect();
    let mut out = Vec::with_capacity(ek.len() * dk.len() * attack_kraus.len());
    for a in attack_kraus {
        for e in &ek {
            let ae = a * e;
            for d in &dk {
                out.push(d * &ae);
            }
        }
    }
    Ok(out)
}

/// Tr[(φ⁺_{CC'} ⊗ 1_B̃) Λ(φ⁺_{CC'} ⊗ ρ_B)].
pub fn p_equals(scenario: &AttackScenario) -> Result<f64> {
    p_equals_of(&scenario.attack, scenario.side_state()?.matrix())
}

pub fn p_equals_of(attack: &QuantumChannel, rho_b: &CMatrix) -> Result<f64> {
    let db = rho_b.nrows();
    let dc = attack.input_dim() / db;
    let dbt = attack.output_dim() / dc;
    let (il, ol) = attack_layouts(dc, db, dbt);
    let attack = attack.relabel(il, ol)?;
    let phi = quantum::phi_plus(dc);
    let layout = SystemLayout::new(&[(CIPHERTEXT, dc), (CIPHER_COPY, dc), (SIDE, db)])?;
    let x = linalg::kron(&phi, rho_b);
    let (y, yl) = attack.apply_operator(&x, &layout, &[CIPHERTEXT, SIDE])?;
    let (z, _) = quantum::reorder(&y, &yl, &[CIPHERTEXT, CIPHER_COPY, SIDE_OUT])?;
    let (m, _) = quantum::trace_out(&z, &SystemLayout::new(&[(CIPHERTEXT, dc), (CIPHER_COPY, dc), (SIDE_OUT, dbt)])?, &[SIDE_OUT])?;
    Ok((&phi * m).trace().re)
}

/// Runs the scenario: effective map, output state, p₌ and
/// gain = I(AR:B̃) − I(AR:B) − h(p₌).
pub fn evaluate(scenario: &AttackScenario) -> Result<EffectiveAttack> {
    let effective = effective_channel(scenario)?;
    evaluate_with(scenario, effective)
}

pub fn evaluate_with(scenario: &AttackScenario, effective: QuantumChannel) -> Result<EffectiveAttack> {
    let output = effective.apply(&scenario.initial, &[PLAINTEXT, SIDE])?;
    let p_eq = p_equals(scenario)?;
    let before = quantum::mutual_information(&scenario.initial, &[PLAINTEXT, REFERENCE], &[SIDE])?;
    let after = quantum::mutual_information(&output, &[DECRYPTED, REFERENCE], &[SIDE_OUT])?;
    let h = quantum::binary_entropy(p_eq);
    let mut ledger = EntropyLedger::new();
    ledger.insert("I(AR:B)", before);
    ledger.insert("I(AR:Bt)", after);
    ledger.insert("p_eq", p_eq);
    ledger.insert("h(p_eq)", h);
    Ok(EffectiveAttack { effective, output, p_eq, ledger, nm_gain: after - before - h })
}

pub fn nm_gain(scenario: &AttackScenario) -> Result<f64> {
    Ok(evaluate(scenario)?.nm_gain)
}

/// Λ′ = Tr_{CC'}[φ⁺ Λ(φ⁺ ⊗ ·)] and Λ″ = Tr_{CC'}[Π⁻ Λ(φ⁺ ⊗ ·)] as maps B → B̃.
///
/// Uses the reduced forms Λ′(x) = Σ_K N_K x N_K† with N_K = Tr_C K / |C|, and
/// Λ″(x) = Tr_C Λ(τ_C ⊗ x) − Λ′(x). Non-CP inputs go through
/// [`characterization_maps_projected`].
pub fn characterization_maps(attack: &QuantumChannel, dc: usize) -> Result<(QuantumChannel, QuantumChannel)> {
    if !attack.is_cp() {
        return characterization_maps_projected(attack, dc);
    }
    let db = attack.input_dim() / dc;
    let dbt = attack.output_dim() / dc;
    if db * dc != attack.input_dim() || dbt * dc != attack.output_dim() {
        return Err(Error::LayoutMismatch(format!("attack {} -> {} does not split off C:{dc}", attack.input(), attack.output())));
    }
    let n = db * dbt;
    let mut j1 = CMatrix::zeros(n, n);
    let mut jt = CMatrix::zeros(n, n);
    let add = |j: &mut CMatrix, blk: &CMatrix, w: f64| {
        let v = CVector::from_iterator(n, (0..dbt).flat_map(|o| (0..db).map(move |i| blk[(o, i)])));
        *j += (&v * v.adjoint()).scale(w / db as f64);
    };
    for k in attack.kraus()? {
        let mut tr = CMatrix::zeros(dbt, db);
        for c in 0..dc {
            for c2 in 0..dc {
                let blk = k.view((c2 * dbt, c * db), (dbt, db)).into_owned();
                if c == c2 {
                    tr += &blk;
                }
                add(&mut jt, &blk, 1.0 / dc as f64);
            }
        }
        add(&mut j1, &tr, 1.0 / (dc * dc) as f64);
    }
    let bl = SystemLayout::single(SIDE, db);
    let btl = SystemLayout::single(SIDE_OUT, dbt);
    let l2 = QuantumChannel::from_hermitian_choi(bl.clone(), btl.clone(), &jt - &j1)?;
    let l1 = QuantumChannel::from_hermitian_choi(bl, btl, j1)?;
    Ok((l1, l2))
}

/// Same maps as [`characterization_maps`], by applying Λ to φ⁺_{CC'} ⊗ x and
/// projecting. Cost grows with |C|² times the attack's output; kept as a
/// reference route.
pub fn characterization_maps_projected(attack: &QuantumChannel, dc: usize) -> Result<(QuantumChannel, QuantumChannel)> {
    let db = attack.input_dim() / dc;
    let dbt = attack.output_dim() / dc;
    let (il, ol) = attack_layouts(dc, db, dbt);
    let attack = attack.relabel(il, ol)?;
    let phi = quantum::phi_plus(dc);
    let pim = quantum::pi_minus(dc);
    let layout = SystemLayout::new(&[(CIPHERTEXT, dc), (CIPHER_COPY, dc), (SIDE, db)])?;
    let out_layout = SystemLayout::new(&[(CIPHERTEXT, dc), (CIPHER_COPY, dc), (SIDE_OUT, dbt)])?;
    let id_bt = linalg::identity(dbt);
    let reduce = |proj: &CMatrix| -> Result<CMatrix> {
        let big = linalg::kron(proj, &id_bt);
        let err = std::cell::RefCell::new(None);
        let eta = channels::choi_of_map(db, dbt, |x| {
            let run = || -> Result<CMatrix> {
                let (y, yl) = attack.apply_operator(&linalg::kron(&phi, x), &layout, &[CIPHERTEXT, SIDE])?;
                let (z, _) = quantum::reorder(&y, &yl, &[CIPHERTEXT, CIPHER_COPY, SIDE_OUT])?;
                Ok(quantum::trace_out(&(&big * z), &out_layout, &[CIPHERTEXT, CIPHER_COPY])?.0)
            };
            run().unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                CMatrix::zeros(dbt, dbt)
            })
        });
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(eta),
        }
    };
    let bl = SystemLayout::single(SIDE, db);
    let btl = SystemLayout::single(SIDE_OUT, dbt);
    let l1 = QuantumChannel::from_hermitian_choi(bl.clone(), btl.clone(), reduce(&phi)?)?;
    let l2 = QuantumChannel::from_hermitian_choi(bl, btl, reduce(&pim)?)?;
    Ok((l1, l2))
}

/// id ⊗ Λ′ + (|C|²⟨D_K(τ_C)⟩ − id) ⊗ Λ″ / (|C|² − 1).
pub fn characterization_ideal(scenario: &AttackScenario) -> Result<QuantumChannel> {
    characterization_ideal_of(scenario.scheme, &scenario.attack)
}

pub fn characterization_ideal_of(scheme: &EncryptionScheme, attack: &QuantumChannel) -> Result<QuantumChannel> {
    let da = scheme.plaintext_dim();
    let dc = scheme.ciphertext_dim();
    let (l1, l2) = characterization_maps(attack, dc)?;
    let al = schemes::plaintext_layout(da);
    let ol = schemes::decrypted_layout(da);
    let id = QuantumChannel::from_kraus(al.clone(), ol.clone(), vec![schemes::accept_embedding(da)])?;
    let dk_tau = scheme.avg_decrypt()?.apply_matrix(&quantum::maximally_mixed(dc));
    let sigma = DensityOperator::new(dk_tau, ol)?;
    let rep = QuantumChannel::constant(al, &sigma)?;
    let c2 = (dc * dc) as f64;
    let t1 = id.tensor(&l1)?;
    let t2 = rep.tensor(&l2)?;
    let t3 = id.tensor(&l2)?;
    QuantumChannel::linear_combination(&[(1.0, &t1), (c2 / (c2 - 1.0), &t2), (-1.0 / (c2 - 1.0), &t3)])
}

/// Diamond bounds between the effective map and its characterization form.
pub fn characterization_residual(scenario: &AttackScenario) -> Result<DiamondBounds> {
    let eff = effective_channel(scenario)?;
    let ideal = characterization_ideal(scenario)?;
    channels::diamond_distance_bounds(&eff, &ideal)
}

/// Tolerance 2√(2ε)|A|⁴|C|(4√|A| + 1) on the characterization for ε-NM schemes.
pub fn characterization_tolerance(eps: f64, da: usize, dc: usize) -> f64 {
    let a = da as f64;
    2.0 * (2.0 * eps).sqrt() * a.powi(4) * dc as f64 * (4.0 * a.sqrt() + 1.0)
}

/// Converse tolerance 5ε(log|A| + r) + 3h(ε), with r a bound on log|R|.
pub fn converse_tolerance(eps: f64, da: usize, r: f64) -> f64 {
    5.0 * eps * ((da as f64).log2() + r) + 3.0 * quantum::binary_entropy(eps.min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbwResidual {
    /// ‖η − P‖₁ + clipping, P the constrained least-squares projection.
    pub choi_distance: f64,
    /// |A| · choi_distance.
    pub diamond_upper: f64,
    /// Trace norm of the negative part of P.
    pub clipping: f64,
}

/// Orthonormal Hermitian basis of d × d matrices.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(linalg::matrix_unit(d, i, i));
        for j in i + 1..d {
            out.push((linalg::matrix_unit(d, i, j) + linalg::matrix_unit(d, j, i)).scale(s));
            out.push((linalg::matrix_unit(d, i, j) - linalg::matrix_unit(d, j, i)).map(|z| z * linalg::I * s));
        }
    }
    out
}

/// Distance from the B̃-discarded effective map to the ABW class
/// span_ℝ{id, ⟨D_K(σ)⟩} ∩ TP.
pub fn abw_residual(scenario: &AttackScenario) -> Result<AbwResidual> {
    if scenario.side_dim() != 1 {
        return Err(Error::InvalidArgument("ABW adversaries carry no side information (B must be trivial)".into()));
    }
    abw_residual_of(scenario.scheme, &scenario.attack)
}

pub fn abw_residual_of(scheme: &EncryptionScheme, attack: &QuantumChannel) -> Result<AbwResidual> {
    let da = scheme.plaintext_dim();
    let dc = scheme.ciphertext_dim();
    let eff = effective_channel_of(scheme, attack, 1)?;
    let dbt = eff.output_dim() / (da + 1);
    // Choi on [Abar, Bt, A'] (B' trivial); discard Bt.
    let eta = linalg::partial_trace(eff.choi(), &[da + 1, dbt, da], &[true, false, true]);
    let dk = scheme.avg_decrypt()?;
    let tau_a = quantum::maximally_mixed(da);
    let j = schemes::accept_embedding(da);
    let mut basis = vec![channels::choi_of_map(da, da + 1, |x| &j * x * j.adjoint())];
    for y in hermitian_basis(dc) {
        basis.push(linalg::kron(&dk.apply_matrix(&y), &tau_a));
    }
    let proj = constrained_projection(&eta, &basis, da + 1, da)?;
    let resid = quantum::trace_norm_hermitian(&(&eta - &proj));
    let clipping: f64 = linalg::eigvalsh(&proj).iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let choi_distance = resid + clipping;
    Ok(AbwResidual { choi_distance, diamond_upper: da as f64 * choi_distance, clipping })
}

/// Least-squares projection of η onto span_ℝ(basis) subject to Tr_out = τ_in.
fn constrained_projection(eta: &CMatrix, basis: &[CMatrix], d_out: usize, d_in: usize) -> Result<CMatrix> {
    let m = basis.len();
    let mut g = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..m {
        for k in i..m {
            let v = linalg::hs_inner(&basis[i], &basis[k]).re;
            g[(i, k)] = v;
            g[(k, i)] = v;
        }
        rhs[i] = linalg::hs_inner(&basis[i], eta).re;
    }
    // TP: Tr_out(Σ x_i B_i) = 1/d_in, split into real equations.
    let margs: Vec<CMatrix> = basis.iter().map(|b| linalg::partial_trace(b, &[d_out, d_in], &[false, true])).collect();
    let target = quantum::maximally_mixed(d_in);
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for p in 0..d_in {
        for q in p..d_in {
            rows.push((margs.iter().map(|t| t[(p, q)].re).collect(), target[(p, q)].re));
            if q > p {
                rows.push((margs.iter().map(|t| t[(p, q)].im).collect(), target[(p, q)].im));
            }
        }
    }
    let r = rows.len();
    let mut kkt = DMatrix::<f64>::zeros(m + r, m + r);
    let mut b = DVector::<f64>::zeros(m + r);
    kkt.view_mut((0, 0), (m, m)).copy_from(&g);
    b.rows_mut(0, m).copy_from(&rhs);
    for (k, (row, val)) in rows.iter().enumerate() {
        for i in 0..m {
            kkt[(m + k, i)] = row[i];
            kkt[(i, m + k)] = row[i];
        }
        b[m + k] = *val;
    }
    let pinv = kkt
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::InvalidArgument(format!("ABW projection failed: {e}")))?;
    let x = pinv * b;
    let mut proj = CMatrix::zeros(eta.nrows(), eta.ncols());
    for i in 0..m {
        proj += basis[i].scale(x[i]);
    }
    Ok(proj)
}

/// I(C:B) of E_K(ρ_AB); zero for information-theoretically secret schemes.
pub fn its_check(scheme: &EncryptionScheme, rho_ab: &DensityOperator) -> Result<f64> {
    let others: Vec<&str> = rho_ab.layout().labels().into_iter().filter(|l| *l != PLAINTEXT).collect();
    let sigma = scheme.avg_encrypt()?.apply(rho_ab, &[PLAINTEXT])?;
    quantum::mutual_information(&sigma, &[CIPHERTEXT], &others)
}

/// ‖E_K(ρ) − E_K(ρ′)‖₁.
pub fn ind_distance(scheme: &EncryptionScheme, rho: &CMatrix, rho2: &CMatrix) -> Result<f64> {
    let ek = scheme.avg_encrypt()?;
    Ok(quantum::trace_norm_hermitian(&(ek.apply_matrix(rho) - ek.apply_matrix(rho2))))
}

/// Choi matrix on [C, B̃, C'] of the ciphertext-extraction attack:
/// (d²/(d²−1)) Π⁻_{CC'} (τ_C ⊗ φ⁺_{C'B̃}) Π⁻_{CC'}.
pub fn extraction_choi(dc: usize) -> CMatrix {
    let d2 = (dc * dc) as f64;
    let theta = linalg::kron(&quantum::maximally_mixed(dc), &quantum::phi_plus(dc));
    let p = linalg::kron(&quantum::pi_minus(dc), &linalg::identity(dc));
    let eta = (&p * theta * &p).scale(d2 / (d2 - 1.0));
    // [C, C', Bt] -> [C, Bt, C']
    linalg::permute_subsystems(&eta, &[dc, dc, dc], &[0, 2, 1])
}

/// The extraction attack as a channel C → C ⊗ B̃ with B̃ ≅ C.
pub fn extraction_attack(dc: usize) -> Result<QuantumChannel> {
    if dc < 2 {
        return Err(Error::InvalidArgument("extraction needs |C| >= 2".into()));
    }
    let (il, ol) = attack_layouts(dc, 1, dc);
    QuantumChannel::from_kraus(il, ol, extraction_kraus(dc))
}

/// Rank-|C| Kraus form of the extraction attack, C → C ⊗ B̃:
/// K_i = (d/√(d²−1)) Π⁻_{CC'}(|i⟩_C ⊗ φ⁺_{C'B̃}) read as a map from C'.
pub fn extraction_kraus(dc: usize) -> Vec<CMatrix> {
    let d = dc as f64;
    let g = d / (d * d - 1.0).sqrt();
    (0..dc)
        .map(|i| {
            let mut k = CMatrix::zeros(dc * dc, dc);
            for j in 0..dc {
                // |i⟩_C |j⟩_B̃ ⟨j|_C' / √d  −  |j⟩_C |i⟩_B̃ ⟨j|_C' / d^{3/2}
                k[(i * dc + j, j)] += linalg::real(g / d.sqrt());
                k[(j * dc + i, j)] -= linalg::real(g / (d * d.sqrt()));
            }
            k
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SecrecyAttackReport<'a> {
    pub scenario: AttackScenario<'a>,
    pub p_eq: f64,
    /// ‖σ_{B̃R} − ((d²−2)γ_{B̃R} + τ_{B̃} ⊗ ρ_R)/(d²−1)‖₁.
    pub marginal_residual: f64,
}

/// Extraction-attack scenario for a plaintext/reference state ρ_AR.
pub fn secrecy_attack_from_nm<'a>(scheme: &'a EncryptionScheme, rho_ar: &DensityOperator) -> Result<SecrecyAttackReport<'a>> {
    let dc = scheme.ciphertext_dim();
    let attack = extraction_attack(dc)?;
    let scenario = AttackScenario::new(scheme, rho_ar.clone(), attack)?;
    let p_eq = p_equals(&scenario)?;
    let eff = effective_channel(&scenario)?;
    let out = eff.apply(&scenario.initial, &[PLAINTEXT, SIDE])?;
    let sigma = out.marginal(&[SIDE_OUT, REFERENCE])?;
    let gamma = scheme.avg_encrypt()?.apply(&scenario.initial.marginal(&[PLAINTEXT, REFERENCE])?, &[PLAINTEXT])?;
    let rho_r = scenario.initial.marginal(&[REFERENCE])?;
    let d2 = (dc * dc) as f64;
    let expect = (gamma.matrix().scale(d2 - 2.0) + linalg::kron(&quantum::maximally_mixed(dc), rho_r.matrix())).unscale(d2 - 1.0);
    let marginal_residual = quantum::trace_norm_hermitian(&(sigma.matrix() - expect));
    Ok(SecrecyAttackReport { scenario, p_eq, marginal_residual })
}

// Attack library

/// Names of the library attacks, in evaluation order.
pub const ATTACK_LIBRARY: &[&str] = &[
    "identity",
    "pauli-x",
    "pauli-y",
    "pauli-z",
    "replace-zero",
    "coin-mixture",
    "coin-flip",
    "cnot-copy",
    "injection",
    "extraction",
    "random-isometry-0",
    "random-isometry-1",
    "random-isometry-2",
    "random-channel-0",
    "random-channel-1",
    "random-channel-2",
];

#[derive(Clone, Debug)]
pub struct NamedAttack {
    pub name: String,
    pub channel: QuantumChannel,
}

/// Lift Kraus operators C → C ⊗ X to C ⊗ B → C ⊗ (B ⊗ X), acting trivially on B.
fn with_side(kraus: &[CMatrix], dc: usize, dx: usize, db: usize) -> Result<QuantumChannel> {
    let dbt = db * dx;
    let mut out = Vec::with_capacity(kraus.len());
    for k in kraus {
        let mut m = CMatrix::zeros(dc * dbt, dc * db);
        for c in 0..dc {
            for x in 0..dx {
                for c2 in 0..dc {
                    let v = k[(c * dx + x, c2)];
                    if v == linalg::ZERO {
                        continue;
                    }
                    for b in 0..db {
                        m[(c * dbt + b * dx + x, c2 * db + b)] = v;
                    }
                }
            }
        }
        out.push(m);
    }
    let (il, ol) = attack_layouts(dc, db, dbt);
    QuantumChannel::from_kraus(il, ol, out)
}

/// Single-qubit Pauli on the first ciphertext qubit, or a cyclic shift / clock when |C| is not a power of two.
fn first_qubit_op(p: char, dc: usize) -> Result<CMatrix> {
    if dc.is_power_of_two() && dc >= 2 {
        let n = dc.trailing_zeros() as usize;
        let mut label = String::from(p);
        label.extend(std::iter::repeat_n('I', n - 1));
        return designs::pauli_string(&label);
    }
    let shift = CMatrix::from_fn(dc, dc, |r, c| if r == (c + 1) % dc { ONE } else { linalg::ZERO });
    let w = std::f64::consts::TAU / dc as f64;
    let clock = CMatrix::from_fn(dc, dc, |r, c| if r == c { linalg::c((w * r as f64).cos(), (w * r as f64).sin()) } else { linalg::ZERO });
    Ok(match p {
        'X' => shift,
        'Z' => clock,
        _ => &shift * &clock,
    })
}

fn tag(k: &CMatrix, dx: usize, x: usize) -> CMatrix {
    let mut v = CMatrix::zeros(dx, 1);
    v[(x, 0)] = ONE;
    linalg::kron(k, &v)
}

fn replace_kraus(sigma_vec: &CVector, dc: usize) -> Vec<CMatrix> {
    (0..dc)
        .map(|j| {
            let mut m = CMatrix::zeros(dc, dc);
            m.set_column(j, sigma_vec);
            m
        })
        .collect()
}

/// (d²⟨τ⟩ − id)/(d² − 1), the p₌ = 0 channel with Choi matrix τ⁻.
pub fn tau_minus_channel(dc: usize) -> Result<QuantumChannel> {
    let l = SystemLayout::single(CIPHERTEXT, dc);
    QuantumChannel::from_choi(l.clone(), l, quantum::tau_minus(dc))
}

/// Build a library attack for ciphertext layout `cipher` and side-information dim `db`.
pub fn build_attack(name: &str, cipher: &SystemLayout, db: usize, seed: u64) -> Result<QuantumChannel> {
    let dc = cipher.total_dim();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "identity" => with_side(&[linalg::identity(dc)], dc, 1, db),
        "pauli-x" => with_side(&[first_qubit_op('X', dc)?], dc, 1, db),
        "pauli-y" => with_side(&[first_qubit_op('Y', dc)?], dc, 1, db),
        "pauli-z" => with_side(&[first_qubit_op('Z', dc)?], dc, 1, db),
        "replace-zero" => with_side(&replace_kraus(&linalg::basis_vector(dc, 0), dc), dc, 1, db),
        "coin-mixture" => {
            // heads: X on the first qubit; tails: replace with τ; coin kept in B̃
            let mut ks = vec![tag(&first_qubit_op('X', dc)?.scale(s), 2, 0)];
            let f = (1.0 / (2.0 * dc as f64)).sqrt();
            for i in 0..dc {
                for j in 0..dc {
                    ks.push(tag(&linalg::matrix_unit(dc, i, j).scale(f), 2, 1));
                }
            }
            with_side(&ks, dc, 2, db)
        }
        "coin-flip" => {
            // heads: identity; tails: the τ⁻ channel (p₌ = 0); coin kept in B̃
            let mut ks = vec![tag(&linalg::identity(dc).scale(s), 2, 0)];
            for k in tau_minus_channel(dc)?.kraus()? {
                ks.push(tag(&k.scale(s), 2, 1));
            }
            with_side(&ks, dc, 2, db)
        }
        "cnot-copy" => {
            if db != 2 || !dc.is_power_of_two() || dc < 2 {
                return Err(Error::IncompatibleAttack("cnot-copy needs a qubit side register and qubit ciphertext".into()));
            }
            // control: first ciphertext qubit (most significant), target: B
            let n = dc * 2;
            let mut u = CMatrix::zeros(n, n);
            for c in 0..dc {
                let ctl = c >= dc / 2;
                for b in 0..2 {
                    let b2 = if ctl { 1 - b } else { b };
                    u[(c * 2 + b2, c * 2 + b)] = ONE;
                }
            }
            let (il, ol) = attack_layouts(dc, 2, 2);
            QuantumChannel::from_kraus(il, ol, vec![u])
        }
        "injection" => {
            let blocks = cipher
                .registers()
                .first()
                .and_then(|r| r.blocks.clone())
                .filter(|b| b.len() == 2)
                .ok_or_else(|| Error::IncompatibleAttack("injection needs a C ⊕ Â ciphertext".into()))?;
            let (d0, da) = (blocks[0], blocks[1]);
            let mut phi = CVector::zeros(dc * da);
            for a in 0..da {
                phi[(d0 + a) * da + a] = linalg::real(1.0 / (da as f64).sqrt());
            }
            let din = dc * db;
            let ks = (0..din)
                .map(|i| {
                    let mut m = CMatrix::zeros(dc * da, din);
                    m.set_column(i, &phi);
                    m
                })
                .collect();
            let (il, ol) = attack_layouts(dc, db, da);
            QuantumChannel::from_kraus(il, ol, ks)
        }
        "extraction" => {
            if dc < 2 {
                return Err(Error::IncompatibleAttack("extraction needs |C| >= 2".into()));
            }
            let ks = extraction_attack(dc)?.kraus()?;
            with_side(&ks, dc, dc, db)
        }
        _ => {
            if name.starts_with("random-isometry-") {
                let mut r = random::substream(seed, name);
                let v = random::isometry(dc * db * 2, dc * db, &mut r);
                let (il, ol) = attack_layouts(dc, db, 2 * db);
                return QuantumChannel::from_kraus(il, ol, vec![v]);
            }
            if name.starts_with("random-channel-") {
                let mut r = random::substream(seed, name);
                let ks = random::channel_kraus(dc * db, dc * db, 3, &mut r);
                let (il, ol) = attack_layouts(dc, db, db);
                return QuantumChannel::from_kraus(il, ol, ks);
            }
            Err(Error::IncompatibleAttack(format!("unknown attack `{name}`")))
        }
    }
}

/// Every library attack compatible with the given layout.
pub fn attack_library(cipher: &SystemLayout, db: usize, seed: u64) -> Result<Vec<NamedAttack>> {
    let mut out = Vec::new();
    for name in ATTACK_LIBRARY {
        match build_attack(name, cipher, db, seed) {
            Ok(channel) => out.push(NamedAttack { name: name.to_string(), channel }),
            Err(Error::IncompatibleAttack(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Seeded initial states on A ⊗ B ⊗ R: first φ⁺_{AR} ⊗ |0⟩⟨0|_B, then random pure states.
pub fn scenario_states(da: usize, db: usize, dr: usize, count: usize, seed: u64) -> Result<Vec<DensityOperator>> {
    let layout = SystemLayout::new(&[(PLAINTEXT, da), (SIDE, db), (REFERENCE, dr)])?;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    if dr == da {
        let phi = quantum::phi_plus_vector(da);
        let zero = linalg::basis_vector(db, 0);
        let v = linalg::permute_vector(&kron_vec(&phi, &zero), &[da, dr, db], &[0, 2, 1]);
        out.push(DensityOperator::from_pure(&v, layout.clone())?);
    }
    let mut r = random::substream(seed, "scenario-states");
    while out.len() < count {
        let v = random::pure_state(da * db * dr, &mut r);
        out.push(DensityOperator::from_pure(&v, layout.clone())?);
    }
    Ok(out)
}

fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    CVector::from_iterator(a.len() * b.len(), (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| a[i] * b[j])))
}

/// φ⁺ on A ⊗ R.
pub fn phi_plus_ar(da: usize) -> DensityOperator {
    quantum::max_entangled_on(PLAINTEXT, REFERENCE, da)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::schemes::{clifford_scheme, injection_scheme, qotp_scheme};

    fn trivial_b(scheme: &EncryptionScheme, name: &str) -> QuantumChannel {
        build_attack(name, scheme.ciphertext(), 1, 7).unwrap()
    }

    #[test]
    fn identity_attack_is_transparent() {
        let q = qotp_scheme(1).unwrap();
        let sc = AttackScenario::new(&q, phi_plus_ar(2), trivial_b(&q, "identity")).unwrap();
        let r = evaluate(&sc).unwrap();
        assert!((r.p_eq - 1.0).abs() < 1e-12);
        assert!(r.nm_gain.abs() < 1e-9);
        let j = schemes::accept_embedding(2);
        let expect = channels::choi_of_map(2, 3, |x| &j * x * j.adjoint());
        assert!(max_abs_diff(r.effective.choi(), &expect) < 1e-12);
    }

    #[test]
    fn pauli_attack_on_qotp_and_clifford() {
        let q = qotp_scheme(1).unwrap();
        let x = trivial_b(&q, "pauli-x");
        let eff = effective_channel_of(&q, &x, 1).unwrap();
        let j = schemes::accept_embedding(2);
        let xm = designs::pauli_string("X").unwrap();
        let expect = channels::choi_of_map(2, 3, |m| &j * &xm * m * xm.adjoint() * j.adjoint());
        assert!(max_abs_diff(eff.choi(), &expect) < 1e-12);
        assert!(p_equals_of(&x, &linalg::identity(1)).unwrap().abs() < 1e-12);

        let c1 = clifford_scheme(1).unwrap();
        let eff = effective_channel_of(&c1, &x, 1).unwrap();
        // (4⟨τ⟩ − id)/3 embedded
        let expect = channels::choi_of_map(2, 3, |m| {
            let v = (linalg::identity(2) * (m.trace() * 2.0) - m).unscale(3.0);
            &j * v * j.adjoint()
        });
        assert!(max_abs_diff(eff.choi(), &expect) < 1e-12);
    }

    #[test]
    fn p_equals_examples() {
        let q = qotp_scheme(1).unwrap();
        let rep = trivial_b(&q, "replace-zero");
        assert!((p_equals_of(&rep, &linalg::identity(1)).unwrap() - 0.25).abs() < 1e-12);
        let inj = injection_scheme(&clifford_scheme(1).unwrap()).unwrap();
        let a = build_attack("injection", inj.ciphertext(), 1, 0).unwrap();
        assert!((p_equals_of(&a, &linalg::identity(1)).unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn coin_mixture_on_qotp() {
        let q = qotp_scheme(1).unwrap();
        let sc = AttackScenario::new(&q, phi_plus_ar(2), trivial_b(&q, "coin-mixture")).unwrap();
        let r = evaluate(&sc).unwrap();
        let gain_mi = r.ledger.get("I(AR:Bt)").unwrap();
        let oracle = -[0.625f64, 0.125, 0.125, 0.125].iter().map(|p| p * p.log2()).sum::<f64>() - 1.0;
        assert!((gain_mi - oracle).abs() < 1e-9);
        assert!((r.p_eq - 0.125).abs() < 1e-12);
    }

    #[test]
    fn coin_flip_gain_is_exactly_allowance() {
        for s in [qotp_scheme(1).unwrap(), clifford_scheme(1).unwrap()] {
            let sc = AttackScenario::new(&s, phi_plus_ar(2), trivial_b(&s, "coin-flip")).unwrap();
            let r = evaluate(&sc).unwrap();
            assert!((r.p_eq - 0.5).abs() < 1e-12);
            assert!(r.nm_gain.abs() < 1e-9, "{}", r.nm_gain);
        }
    }

    #[test]
    fn cnot_copy_on_qotp() {
        let q = qotp_scheme(1).unwrap();
        let layout = SystemLayout::new(&[(PLAINTEXT, 2), (SIDE, 2), (REFERENCE, 2)]).unwrap();
        let phi = phi_plus_ar(2);
        let zero = DensityOperator::basis(SystemLayout::single(SIDE, 2), 0).unwrap();
        let rho = quantum::tensor_compose(&[&phi, &zero]).unwrap().permute(&[PLAINTEXT, SIDE, REFERENCE]).unwrap();
        assert_eq!(rho.layout(), &layout);
        let a = build_attack("cnot-copy", q.ciphertext(), 2, 0).unwrap();
        let r = evaluate(&AttackScenario::new(&q, rho, a).unwrap()).unwrap();
        assert!((r.p_eq - 0.5).abs() < 1e-12);
        assert!(r.nm_gain.abs() < 1e-9);
    }

    #[test]
    fn characterization_on_clifford_and_qotp() {
        let c1 = clifford_scheme(1).unwrap();
        for a in attack_library(c1.ciphertext(), 2, 3).unwrap() {
            let sc = AttackScenario::new(&c1, scenario_states(2, 2, 2, 1, 0).unwrap().remove(0), a.channel.clone()).unwrap();
            let b = characterization_residual(&sc).unwrap();
            assert!(b.upper < 1e-9, "{}: {b:?}", a.name);
            let (l1, l2) = characterization_maps(sc.attack(), 2).unwrap();
            let sum = QuantumChannel::linear_combination(&[(1.0, &l1), (1.0, &l2)]).unwrap();
            assert!(sum.tp_defect() < 1e-10);
        }
        let q = qotp_scheme(1).unwrap();
        let sc = AttackScenario::new(&q, phi_plus_ar(2), trivial_b(&q, "pauli-x")).unwrap();
        assert!(characterization_residual(&sc).unwrap().lower >= 1.0);
        let ideal = characterization_ideal(&AttackScenario::new(&q, phi_plus_ar(2), trivial_b(&q, "identity")).unwrap()).unwrap();
        let j = schemes::accept_embedding(2);
        assert!(max_abs_diff(ideal.choi(), &channels::choi_of_map(2, 3, |x| &j * x * j.adjoint())) < 1e-12);
    }

    #[test]
    fn abw_examples() {
        let q = qotp_scheme(1).unwrap();
        let r = abw_residual_of(&q, &trivial_b(&q, "pauli-x")).unwrap();
        assert!((r.choi_distance - 4.0 / 3.0).abs() < 1e-9, "{r:?}");
        let c1 = clifford_scheme(1).unwrap();
        for a in attack_library(c1.ciphertext(), 1, 1).unwrap() {
            assert!(abw_residual_of(&c1, &a.channel).unwrap().diamond_upper < 1e-8, "{}", a.name);
        }
        let inj = injection_scheme(&c1).unwrap();
        let a = build_attack("injection", inj.ciphertext(), 1, 0).unwrap();
        assert!(abw_residual_of(&inj, &a).unwrap().diamond_upper < 1e-6);
    }

    #[test]
    fn injection_gain() {
        let c1 = clifford_scheme(1).unwrap();
        let inj = injection_scheme(&c1).unwrap();
        let a = build_attack("injection", inj.ciphertext(), 1, 0).unwrap();
        let rho = DensityOperator::basis(schemes::plaintext_layout(2), 0).unwrap();
        let r = evaluate(&AttackScenario::new(&inj, rho, a).unwrap()).unwrap();
        assert!((r.nm_gain - (2.0 - quantum::binary_entropy(1.0 / 16.0))).abs() < 1e-6);
    }

    #[test]
    fn extraction_attack_properties() {
        let c1 = clifford_scheme(1).unwrap();
        let rep = secrecy_attack_from_nm(&c1, &phi_plus_ar(2)).unwrap();
        assert!(rep.p_eq.abs() < 1e-12);
        assert!(rep.marginal_residual < 1e-9);
        assert!(rep.scenario.attack().is_tp() && rep.scenario.attack().is_cp());
    }

    #[test]
    fn stacked_effective_channel_matches_per_key_composition() {
        let c1 = clifford_scheme(1).unwrap();
        let tagged = schemes::tagged_scheme(&qotp_scheme(2).unwrap(), 1, None).unwrap();
        let inj = injection_scheme(&c1).unwrap();
        for (s, db, dbt) in [(&c1, 2, 3), (&tagged, 1, 2), (&inj, 2, 1)] {
            let dc = s.ciphertext_dim();
            let (il, ol) = attack_layouts(dc, db, dbt);
            let ks = random::channel_kraus(dc * db, dc * dbt, 4, &mut random::rng(dc as u64));
            let a = QuantumChannel::from_kraus(il, ol, ks.clone()).unwrap();
            let fast = effective_channel_of(s, &a, db).unwrap();
            let mut slow = CMatrix::zeros(fast.choi().nrows(), fast.choi().ncols());
            let d_in = s.plaintext_dim() * db;
            for k in 0..s.key_count() {
                for m in &key_kraus(s, k, &ks, db).unwrap() {
                    let v = CVector::from_iterator(m.len(), (0..m.nrows()).flat_map(|o| (0..d_in).map(move |i| m[(o, i)])));
                    slow += (&v * v.adjoint()).scale(s.weights()[k] / d_in as f64);
                }
            }
            assert!(max_abs_diff(fast.choi(), &slow) < 1e-12);
        }
    }

    #[test]
    fn reduced_characterization_matches_projection() {
        for (dc, db, dbt, seed) in [(2, 1, 2, 1), (2, 2, 2, 2), (3, 2, 1, 3), (4, 1, 3, 4)] {
            let (il, ol) = attack_layouts(dc, db, dbt);
            let ks = random::channel_kraus(dc * db, dc * dbt, 3, &mut random::rng(seed));
            let a = QuantumChannel::from_kraus(il, ol, ks).unwrap();
            let (f1, f2) = characterization_maps(&a, dc).unwrap();
            let (r1, r2) = characterization_maps_projected(&a, dc).unwrap();
            assert!(max_abs_diff(f1.choi(), r1.choi()) < 1e-12);
            assert!(max_abs_diff(f2.choi(), r2.choi()) < 1e-12);
        }
    }

    #[test]
    fn extraction_kraus_matches_projected_choi() {
        for dc in 2..5 {
            let ch = extraction_attack(dc).unwrap();
            assert!(max_abs_diff(ch.choi(), &extraction_choi(dc)) < 1e-12);
        }
    }

    #[test]
    fn its_examples() {
        let q = qotp_scheme(1).unwrap();
        let phi = quantum::max_entangled_on(PLAINTEXT, SIDE, 2);
        assert!(its_check(&q, &phi).unwrap() < 1e-10);
        let single = schemes::unitary_scheme_from(
            &designs::UnitaryEnsemble::uniform(vec![linalg::identity(2)], designs::Provenance::Custom).unwrap(),
        )
        .unwrap();
        assert!((its_check(&single, &phi).unwrap() - 2.0).abs() < 1e-9);
        let r0 = linalg::matrix_unit(2, 0, 0);
        let r1 = linalg::matrix_unit(2, 1, 1);
        assert!(ind_distance(&q, &r0, &r1).unwrap() < 1e-12);
        assert!((ind_distance(&single, &r0, &r1).unwrap() - 2.0).abs() < 1e-12);
    }
}
