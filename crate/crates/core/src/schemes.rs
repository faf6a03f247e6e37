//! Symmetric-key encryption schemes as key-indexed channel families.
//!
//! Plaintext register `A`, ciphertext register `C`, decryption output
//! `Abar` = A ⊕ span{⊥} with ⊥ the last basis vector.

use serde::{Deserialize, Serialize};

use crate::channels::{Isometry, QuantumChannel};
use crate::designs::{self, UnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE};
use crate::quantum::{self, DensityOperator, SystemLayout, TOL};
use crate::serial::{MatrixDoc, SCHEMA};

pub const PLAINTEXT: &str = "A";
pub const CIPHERTEXT: &str = "C";
pub const DECRYPTED: &str = "Abar";

/// How a scheme was built; lets analyses take cheaper routes.
#[derive(Clone, Debug)]
pub enum Structure {
    Generic,
    /// E_k = U_k(·)U_k†.
    Unitary { unitaries: Vec<CMatrix> },
    /// E_k(ρ) = U_k(ρ ⊗ ψ)U_k† with tag state ψ.
    TaggedUnitary { unitaries: Vec<CMatrix>, tag: CVector },
    /// Ciphertext C ⊕ Â; the Â block is passed through by decryption.
    Injection { base: Box<Structure>, base_cipher_dim: usize },
}

/// Generator descriptor for a unitary ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleSpec {
    Pauli { qubits: usize },
    Clifford { qubits: usize },
    SampledClifford { qubits: usize, count: usize, seed: u64 },
    Circuit { qubits: usize, depth: usize, count: usize, seed: u64 },
    Explicit { unitaries: Vec<MatrixDoc> },
}

impl EnsembleSpec {
    pub fn build(&self) -> Result<UnitaryEnsemble> {
        match self {
            EnsembleSpec::Pauli { qubits } => designs::pauli_group(*qubits),
            EnsembleSpec::Clifford { qubits } => designs::clifford_group(*qubits),
            EnsembleSpec::SampledClifford { qubits, count, seed } => designs::random_clifford(*qubits, *count, *seed),
            EnsembleSpec::Circuit { qubits, depth, count, seed } => {
                designs::random_circuit_ensemble(*qubits, *depth, *count, *seed)
            }
            EnsembleSpec::Explicit { unitaries } => {
                let us = unitaries.iter().map(MatrixDoc::to_matrix).collect::<Result<Vec<_>>>()?;
                UnitaryEnsemble::uniform(us, designs::Provenance::Custom)
            }
        }
    }
}

/// Generator descriptor for a scheme; the compact JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SchemeSpec {
    Qotp { qubits: usize },
    Clifford { qubits: usize },
    SampledClifford { qubits: usize, keys: usize, seed: u64 },
    Unitary { ensemble: EnsembleSpec },
    Tagged {
        base: Box<SchemeSpec>,
        tag_qubits: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tag_state: Option<Vec<[f64; 2]>>,
    },
    Injection { base: Box<SchemeSpec> },
    WernerHolevo { design: EnsembleSpec },
}

impl SchemeSpec {
    pub fn build(&self) -> Result<EncryptionScheme> {
        let mut s = match self {
            SchemeSpec::Qotp { qubits } => qotp_scheme(*qubits)?,
            SchemeSpec::Clifford { qubits } => clifford_scheme(*qubits)?,
            SchemeSpec::SampledClifford { qubits, keys, seed } => sampled_clifford_scheme(*qubits, *keys, *seed)?,
            SchemeSpec::Unitary { ensemble } => unitary_scheme_from(&ensemble.build()?)?,
            SchemeSpec::Tagged { base, tag_qubits, tag_state } => {
                let b = base.build()?;
                let psi = tag_state.as_ref().map(|v| CVector::from_iterator(v.len(), v.iter().map(|[re, im]| linalg::c(*re, *im))));
                tagged_scheme(&b, *tag_qubits, psi.as_ref())?
            }
            SchemeSpec::Injection { base } => injection_scheme(&base.build()?)?,
            SchemeSpec::WernerHolevo { design } => werner_holevo_scheme(&design.build()?)?,
        };
        s.descriptor = Some(self.clone());
        Ok(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDocument {
    pub schema: String,
    pub descriptor: SchemeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct EncryptionScheme {
    weights: Vec<f64>,
    enc: Vec<QuantumChannel>,
    dec: Vec<QuantumChannel>,
    plaintext: SystemLayout,
    ciphertext: SystemLayout,
    output: SystemLayout,
    structure: Structure,
    descriptor: Option<SchemeSpec>,
}

pub fn plaintext_layout(d: usize) -> SystemLayout {
    SystemLayout::single(PLAINTEXT, d)
}

pub fn ciphertext_layout(d: usize) -> SystemLayout {
    SystemLayout::single(CIPHERTEXT, d)
}

pub fn decrypted_layout(d_plain: usize) -> SystemLayout {
    SystemLayout::single(DECRYPTED, d_plain + 1)
}

/// Inclusion A → A ⊕ ⊥.
pub fn accept_embedding(d_plain: usize) -> CMatrix {
    let mut j = CMatrix::zeros(d_plain + 1, d_plain);
    for k in 0..d_plain {
        j[(k, k)] = ONE;
    }
    j
}

/// Π_acc on A ⊕ ⊥.
pub fn accept_projector(d_plain: usize) -> CMatrix {
    let mut p = linalg::identity(d_plain + 1);
    p[(d_plain, d_plain)] = linalg::ZERO;
    p
}

/// |⊥⟩⟨⊥| on A ⊕ ⊥.
pub fn reject_projector(d_plain: usize) -> CMatrix {
    linalg::matrix_unit(d_plain + 1, d_plain, d_plain)
}

/// Informationally complete inputs: |i⟩, (|i⟩+|j⟩)/√2, (|i⟩+i|j⟩)/√2.
pub fn spanning_inputs(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        out.push(linalg::matrix_unit(d, i, i));
        for j in i + 1..d {
            for ph in [ONE, linalg::I] {
                let mut v = CVector::zeros(d);
                v[i] = linalg::real(s);
                v[j] = ph * s;
                out.push(linalg::projector(&v));
            }
        }
    }
    out
}

impl EncryptionScheme {
    /// Build from explicit per-key channels; layouts are renamed to `A`, `C`, `Abar`.
    pub fn new(weights: Vec<f64>, enc: Vec<QuantumChannel>, dec: Vec<QuantumChannel>) -> Result<Self> {
        let ciphertext = enc
            .first()
            .map(|e| ciphertext_layout(e.output_dim()))
            .ok_or_else(|| Error::InvalidArgument("scheme needs at least one key".into()))?;
        Self::with_structure(weights, enc, dec, ciphertext, Structure::Generic)
    }

    fn with_structure(
        weights: Vec<f64>,
        enc: Vec<QuantumChannel>,
        dec: Vec<QuantumChannel>,
        ciphertext: SystemLayout,
        structure: Structure,
    ) -> Result<Self> {
        if weights.len() != enc.len() || enc.len() != dec.len() || enc.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} weights, {} encryptions, {} decryptions",
                weights.len(),
                enc.len(),
                dec.len()
            )));
        }
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("key weights must be a probability vector".into()));
        }
        let da = enc[0].input_dim();
        let dc = enc[0].output_dim();
        let plaintext = plaintext_layout(da);
        let output = decrypted_layout(da);
        let mut e2 = Vec::with_capacity(enc.len());
        let mut d2 = Vec::with_capacity(dec.len());
        for (e, d) in enc.iter().zip(&dec) {
            if e.input_dim() != da || e.output_dim() != dc || d.input_dim() != dc || d.output_dim() != da + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "key channels must be {da}->{dc} and {dc}->{} (got {}->{} and {}->{})",
                    da + 1,
                    e.input_dim(),
                    e.output_dim(),
                    d.input_dim(),
                    d.output_dim()
                )));
            }
            if !e.is_cp() || !e.is_tp() || !d.is_cp() || !d.is_tp() {
                return Err(Error::InvalidArgument("encryption and decryption maps must be CPTP".into()));
            }
            e2.push(e.relabel(plaintext.clone(), ciphertext.clone())?);
            d2.push(d.relabel(ciphertext.clone(), output.clone())?);
        }
        Ok(EncryptionScheme { weights, enc: e2, dec: d2, plaintext, ciphertext, output, structure, descriptor: None })
    }

    pub fn key_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn encrypt(&self, k: usize) -> &QuantumChannel {
        &self.enc[k]
    }

    pub fn decrypt(&self, k: usize) -> &QuantumChannel {
        &self.dec[k]
    }

    pub fn plaintext(&self) -> &SystemLayout {
        &self.plaintext
    }

    pub fn ciphertext(&self) -> &SystemLayout {
        &self.ciphertext
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn plaintext_dim(&self) -> usize {
        self.plaintext.total_dim()
    }

    pub fn ciphertext_dim(&self) -> usize {
        self.ciphertext.total_dim()
    }

    /// Index of ⊥ in the decryption output.
    pub fn reject_index(&self) -> usize {
        self.plaintext_dim()
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn descriptor(&self) -> Option<&SchemeSpec> {
        self.descriptor.as_ref()
    }

    /// True iff every E_k is a unitary conjugation.
    pub fn is_unitary(&self) -> bool {
        match &self.structure {
            Structure::Unitary { .. } => true,
            Structure::Generic => {
                self.plaintext_dim() == self.ciphertext_dim()
                    && self.enc.iter().all(|e| e.kraus().map(|k| k.len() == 1).unwrap_or(false))
            }
            _ => false,
        }
    }

    /// Max over keys and spanning inputs of ‖D_k(E_k(ρ)) − ρ ⊕ 0‖₁.
    pub fn check_correctness(&self) -> f64 {
        let da = self.plaintext_dim();
        let inputs = spanning_inputs(da);
        let j = accept_embedding(da);
        let targets: Vec<CMatrix> = inputs.iter().map(|r| &j * r * j.adjoint()).collect();
        let mut worst = 0.0f64;
        for (e, d) in self.enc.iter().zip(&self.dec) {
            for (rho, target) in inputs.iter().zip(&targets) {
                let out = d.apply_matrix(&e.apply_matrix(rho));
                worst = worst.max(quantum::trace_norm_hermitian(&(out - target)));
            }
        }
        worst
    }

    /// E_K = Σ_k w_k E_k.
    pub fn avg_encrypt(&self) -> Result<QuantumChannel> {
        average(&self.weights, &self.enc)
    }

    /// D_K = Σ_k w_k D_k.
    pub fn avg_decrypt(&self) -> Result<QuantumChannel> {
        average(&self.weights, &self.dec)
    }

    pub fn to_document(&self) -> Result<SchemeDocument> {
        let descriptor = self
            .descriptor
            .clone()
            .ok_or_else(|| Error::Unsupported("scheme has no generator descriptor".into()))?;
        let uniform = self.weights.iter().all(|w| (w - self.weights[0]).abs() < 1e-15);
        Ok(SchemeDocument {
            schema: SCHEMA.to_string(),
            descriptor,
            key_weights: if uniform { None } else { Some(self.weights.clone()) },
        })
    }

    pub fn from_document(doc: &SchemeDocument) -> Result<Self> {
        if doc.schema != SCHEMA {
            return Err(Error::Serialization(format!("unsupported schema `{}`", doc.schema)));
        }
        let mut s = doc.descriptor.build()?;
        if let Some(w) = &doc.key_weights {
            if w.len() != s.key_count() {
                return Err(Error::Serialization(format!("{} weights for {} keys", w.len(), s.key_count())));
            }
            if w.iter().any(|x| x.is_nan() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::Serialization("key weights must be a probability vector".into()));
            }
            s.weights = w.clone();
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document()?)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

fn average(weights: &[f64], chans: &[QuantumChannel]) -> Result<QuantumChannel> {
    let first = &chans[0];
    let mut acc = CMatrix::zeros(first.choi().nrows(), first.choi().ncols());
    for (w, ch) in weights.iter().zip(chans) {
        acc += ch.choi().scale(*w);
    }
    QuantumChannel::from_choi(first.input().clone(), first.output().clone(), acc)
}

/// E_k = U_k(·)U_k†, D_k = U_k†(·)U_k followed by the inclusion into A ⊕ ⊥.
pub fn unitary_scheme_from(ensemble: &UnitaryEnsemble) -> Result<EncryptionScheme> {
    let d = ensemble.dim();
    let (pl, cl, ol) = (plaintext_layout(d), ciphertext_layout(d), decrypted_layout(d));
    let j = accept_embedding(d);
    let mut enc = Vec::with_capacity(ensemble.len());
    let mut dec = Vec::with_capacity(ensemble.len());
    let mut weights = Vec::with_capacity(ensemble.len());
    let mut us = Vec::with_capacity(ensemble.len());
    for (u, w) in ensemble.elements() {
        if !linalg::is_unitary(u, TOL) {
            return Err(Error::NotUnitary(linalg::isometry_defect(u)));
        }
        enc.push(QuantumChannel::from_kraus(pl.clone(), cl.clone(), vec![u.clone()])?);
        dec.push(QuantumChannel::from_kraus(cl.clone(), ol.clone(), vec![&j * u.adjoint()])?);
        weights.push(*w);
        us.push(u.clone());
    }
    EncryptionScheme::with_structure(weights, enc, dec, cl, Structure::Unitary { unitaries: us })
}

fn qubit_descriptor(s: Result<EncryptionScheme>, spec: SchemeSpec) -> Result<EncryptionScheme> {
    let mut s = s?;
    s.descriptor = Some(spec);
    Ok(s)
}

pub fn qotp_scheme(n: usize) -> Result<EncryptionScheme> {
    qubit_descriptor(unitary_scheme_from(&designs::pauli_group(n)?), SchemeSpec::Qotp { qubits: n })
}

pub fn clifford_scheme(n: usize) -> Result<EncryptionScheme> {
    qubit_descriptor(unitary_scheme_from(&designs::clifford_group(n)?), SchemeSpec::Clifford { qubits: n })
}

pub fn sampled_clifford_scheme(n: usize, keys: usize, seed: u64) -> Result<EncryptionScheme> {
    qubit_descriptor(
        unitary_scheme_from(&designs::random_clifford(n, keys, seed)?),
        SchemeSpec::SampledClifford { qubits: n, keys, seed },
    )
}

/// Plaintext A' with tag register T appended: E'_k(ρ) = E_k(ρ ⊗ ψ), and
/// decryption rejects unless the tag projects onto ψ.
pub fn tagged_scheme(base: &EncryptionScheme, t: usize, tag_state: Option<&CVector>) -> Result<EncryptionScheme> {
    if t == 0 {
        return Ok(base.clone());
    }
    let dt = 1usize << t;
    let da_base = base.plaintext_dim();
    if !da_base.is_multiple_of(dt) || da_base == dt {
        return Err(Error::InvalidArgument(format!(
            "tag dimension {dt} must properly divide the plaintext dimension {da_base}"
        )));
    }
    let da = da_base / dt;
    let psi = match tag_state {
        Some(v) => {
            if v.len() != dt {
                return Err(Error::DimensionMismatch(format!("tag state has dim {}, expected {dt}", v.len())));
            }
            let n = v.norm();
            if (n - 1.0).abs() > TOL {
                return Err(Error::NotNormalized(n * n));
            }
            v.clone()
        }
        None => linalg::basis_vector(dt, 0),
    };
    // |a⟩ ↦ |a⟩ ⊗ |ψ⟩
    let append = linalg::kron(&linalg::identity(da), &CMatrix::from_column_slice(dt, 1, psi.as_slice()));
    // Tag check Ā_base → Ā.
    let mut check = Vec::new();
    let proj_psi = accept_embedding(da) * append.adjoint();
    let mut k0 = CMatrix::zeros(da + 1, da_base + 1);
    k0.view_mut((0, 0), (da + 1, da_base)).copy_from(&proj_psi);
    check.push(k0);
    let comp = orthonormal_complement(&psi);
    for e in &comp {
        for a in 0..da {
            let mut k = CMatrix::zeros(da + 1, da_base + 1);
            for tt in 0..dt {
                k[(da, a * dt + tt)] = e[tt].conj();
            }
            check.push(k);
        }
    }
    let mut kr = CMatrix::zeros(da + 1, da_base + 1);
    kr[(da, da_base)] = ONE;
    check.push(kr);
    let check = QuantumChannel::from_kraus(decrypted_layout(da_base), decrypted_layout(da), check)?;
    let embed = QuantumChannel::from_kraus(plaintext_layout(da), plaintext_layout(da_base), vec![append])?;

    let mut enc = Vec::with_capacity(base.key_count());
    let mut dec = Vec::with_capacity(base.key_count());
    for k in 0..base.key_count() {
        enc.push(embed.then(base.encrypt(k))?);
        dec.push(prune(base.decrypt(k).then(&check)?)?);
    }
    let structure = match &base.structure {
        Structure::Unitary { unitaries } => Structure::TaggedUnitary { unitaries: unitaries.clone(), tag: psi },
        _ => Structure::Generic,
    };
    let mut s = EncryptionScheme::with_structure(base.weights.clone(), enc, dec, base.ciphertext.clone(), structure)?;
    if let Some(b) = &base.descriptor {
        let tag_state = tag_state.map(|v| v.iter().map(|z| [z.re, z.im]).collect());
        s.descriptor = Some(SchemeSpec::Tagged { base: Box::new(b.clone()), tag_qubits: t, tag_state });
    }
    Ok(s)
}

/// Drop vanishing Kraus operators left over from composition.
fn prune(ch: QuantumChannel) -> Result<QuantumChannel> {
    let ks: Vec<CMatrix> = ch.kraus()?.into_iter().filter(|k| linalg::max_abs(k) > 1e-14).collect();
    QuantumChannel::from_kraus(ch.input().clone(), ch.output().clone(), ks)
}

/// Orthonormal basis of the complement of a unit vector.
fn orthonormal_complement(psi: &CVector) -> Vec<CVector> {
    let d = psi.len();
    let mut basis: Vec<CVector> = vec![psi.clone()];
    for i in 0..d {
        let mut v = linalg::basis_vector(d, i);
        for b in &basis {
            let ov = b.dotc(&v);
            v -= b * ov;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v.unscale(n));
        }
        if basis.len() == d {
            break;
        }
    }
    basis.split_off(1)
}

/// Ciphertext space C ⊕ Â; encryption never touches Â and decryption
/// returns the Â block verbatim.
pub fn injection_scheme(base: &EncryptionScheme) -> Result<EncryptionScheme> {
    let da = base.plaintext_dim();
    let dc = base.ciphertext_dim();
    let dn = dc + da;
    let cl = ciphertext_layout(dn).with_blocks(CIPHERTEXT, vec![dc, da])?;
    let mut pad = CMatrix::zeros(dn, dc);
    let mut p_c = CMatrix::zeros(dc, dn);
    for k in 0..dc {
        pad[(k, k)] = ONE;
        p_c[(k, k)] = ONE;
    }
    let mut p_a = CMatrix::zeros(da, dn);
    for k in 0..da {
        p_a[(k, dc + k)] = ONE;
    }
    let pass = accept_embedding(da) * p_a;
    let mut enc = Vec::with_capacity(base.key_count());
    let mut dec = Vec::with_capacity(base.key_count());
    for k in 0..base.key_count() {
        let ek: Vec<CMatrix> = base.encrypt(k).kraus()?.iter().map(|m| &pad * m).collect();
        let mut dk: Vec<CMatrix> = base.decrypt(k).kraus()?.iter().map(|m| m * &p_c).collect();
        dk.push(pass.clone());
        enc.push(QuantumChannel::from_kraus(base.plaintext.clone(), cl.clone(), ek)?);
        dec.push(QuantumChannel::from_kraus(cl.clone(), base.output.clone(), dk)?);
    }
    let structure = Structure::Injection { base: Box::new(base.structure.clone()), base_cipher_dim: dc };
    let mut s = EncryptionScheme::with_structure(base.weights.clone(), enc, dec, cl, structure)?;
    s.descriptor = base.descriptor.clone().map(|b| SchemeSpec::Injection { base: Box::new(b) });
    Ok(s)
}

/// Antidiagonal V with V[j, d−1−j] = i·sign(d − 2j − 1) (0-based rows).
pub fn werner_holevo_v(d: usize) -> CMatrix {
    let mut v = CMatrix::zeros(d, d);
    for j in 0..d {
        let s = (d as f64 - 2.0 * j as f64 - 1.0).signum();
        v[(j, d - 1 - j)] = linalg::I * s;
    }
    v
}

/// Keys Û V Û^T for Û ranging over a 2-design; E_K is the Werner-Holevo channel.
pub fn werner_holevo_scheme(design: &UnitaryEnsemble) -> Result<EncryptionScheme> {
    let d = design.dim();
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("Werner-Holevo scheme needs even dimension, got {d}")));
    }
    let v = werner_holevo_v(d);
    let els = design.elements().iter().map(|(u, w)| (u * &v * u.transpose(), *w)).collect();
    let ens = UnitaryEnsemble::new(els, designs::Provenance::Custom)?;
    unitary_scheme_from(&ens)
}

/// X ↦ (d·Tr(X)·τ − X^T)/(d − 1).
pub fn werner_holevo_channel(d: usize) -> Result<QuantumChannel> {
    let l = plaintext_layout(d);
    let choi = crate::channels::choi_of_map(d, d, |x| {
        (linalg::identity(d) * x.trace() - x.transpose()).unscale(d as f64 - 1.0)
    });
    QuantumChannel::from_choi(l.clone(), ciphertext_layout(d), choi)
}

/// Recover E(X) = V (X ⊗ σ) V† from the Choi spectrum of an encryption map.
pub fn decompose_encryption_map(e: &QuantumChannel) -> Result<(Isometry, DensityOperator)> {
    let da = e.input_dim();
    let ks = e.kraus()?;
    let r = ks.len();
    let mut s = Vec::with_capacity(r);
    for (i, ki) in ks.iter().enumerate() {
        for (j, kj) in ks.iter().enumerate().skip(i) {
            let m = ki.adjoint() * kj;
            if i == j {
                let sj = m.trace().re / da as f64;
                let dev = linalg::max_abs_diff(&m, &linalg::identity(da).scale(sj));
                if dev > 1e-9 {
                    return Err(Error::NotDecomposable(format!("K{i}^†K{i} is not proportional to 1 (deviation {dev:.3e})")));
                }
                s.push(sj);
            } else if linalg::max_abs(&m) > 1e-9 {
                return Err(Error::NotDecomposable(format!("K{i}^†K{j} does not vanish")));
            }
        }
    }
    let dc = e.output_dim();
    if dc < da * r {
        return Err(Error::NotDecomposable(format!("{r} ancilla dims do not fit {da} -> {dc}")));
    }
    let mut v = CMatrix::zeros(dc, da * r);
    for (j, k) in ks.iter().enumerate() {
        let f = 1.0 / s[j].sqrt();
        for a in 0..da {
            for o in 0..dc {
                v[(o, a * r + j)] = k[(o, a)] * f;
            }
        }
    }
    let anc = SystemLayout::single("S", r);
    let iso = Isometry::new(v, e.input().concat(&anc)?, e.output().clone())?;
    let sigma = CMatrix::from_diagonal(&CVector::from_iterator(r, s.iter().map(|x| linalg::real(*x))));
    Ok((iso, DensityOperator::new(sigma, anc)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::random;

    #[test]
    fn qotp_and_clifford_basics() {
        let q = qotp_scheme(1).unwrap();
        assert_eq!(q.key_count(), 4);
        assert!(q.is_unitary());
        assert!(q.check_correctness() < 1e-12);
        let ek = q.avg_encrypt().unwrap();
        let tau = linalg::kron(&quantum::maximally_mixed(2), &quantum::maximally_mixed(2));
        assert!(max_abs_diff(ek.choi(), &tau) < 1e-12);
        let c1 = clifford_scheme(1).unwrap();
        assert_eq!(c1.key_count(), 24);
        assert!(c1.check_correctness() < 1e-10);
        let s = sampled_clifford_scheme(2, 64, 3).unwrap();
        assert!(s.check_correctness() < 1e-10);
    }

    #[test]
    fn two_design_decrypts_tau_to_tau() {
        let c1 = clifford_scheme(1).unwrap();
        let dk = c1.avg_decrypt().unwrap();
        let out = dk.apply_matrix(&quantum::maximally_mixed(2));
        let expect = accept_embedding(2) * quantum::maximally_mixed(2) * accept_embedding(2).adjoint();
        assert!(max_abs_diff(&out, &expect) < 1e-12);
    }

    #[test]
    fn corrupted_decrypt_reports_residual() {
        let q = qotp_scheme(1).unwrap();
        let bot = DensityOperator::basis(decrypted_layout(2), 2).unwrap();
        let dec: Vec<_> = (0..4).map(|_| QuantumChannel::constant(ciphertext_layout(2), &bot).unwrap()).collect();
        let enc: Vec<_> = (0..4).map(|k| q.encrypt(k).clone()).collect();
        let bad = EncryptionScheme::new(vec![0.25; 4], enc, dec).unwrap();
        assert!((bad.check_correctness() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tagged_scheme_accepts_identity() {
        let c2 = sampled_clifford_scheme(2, 32, 5).unwrap();
        let t = tagged_scheme(&c2, 1, None).unwrap();
        assert_eq!((t.plaintext_dim(), t.ciphertext_dim()), (2, 4));
        assert!(t.check_correctness() < 1e-10);
        assert_eq!(tagged_scheme(&c2, 0, None).unwrap().key_count(), 32);
        let mut r = random::rng(1);
        for _ in 0..5 {
            let rho = random::density_matrix(2, 2, &mut r);
            let k = random::index(&mut r, 32);
            let out = t.decrypt(k).apply_matrix(&t.encrypt(k).apply_matrix(&rho));
            assert!((out[(2, 2)].re).abs() < 1e-12);
        }
        assert!(tagged_scheme(&c2, 2, None).is_err());
    }

    #[test]
    fn injection_scheme_blocks() {
        let c1 = clifford_scheme(1).unwrap();
        let inj = injection_scheme(&c1).unwrap();
        assert_eq!(inj.ciphertext_dim(), 4);
        assert_eq!(inj.ciphertext().blocks(CIPHERTEXT), Some(&[2usize, 2][..]));
        assert!(inj.check_correctness() < 1e-10);
        let ek = inj.avg_encrypt().unwrap();
        let img = ek.apply_matrix(&linalg::identity(2));
        assert!(linalg::max_abs(&img.view((2, 0), (2, 4)).into_owned()) < 1e-12);
    }

    #[test]
    fn werner_holevo_average() {
        let c1 = designs::clifford_group(1).unwrap();
        assert!(max_abs_diff(&werner_holevo_v(2), &designs::pauli_string("Y").unwrap().scale(-1.0)) < 1e-15);
        let wh = werner_holevo_scheme(&c1).unwrap();
        assert!(wh.check_correctness() < 1e-10);
        let ek = wh.avg_encrypt().unwrap();
        let target = werner_holevo_channel(2).unwrap();
        assert!(max_abs_diff(ek.choi(), target.choi()) < 1e-9);
        assert!(werner_holevo_scheme(&designs::UnitaryEnsemble::uniform(vec![linalg::identity(3)], designs::Provenance::Custom).unwrap()).is_err());
    }

    #[test]
    fn decompositions() {
        let c1 = clifford_scheme(1).unwrap();
        let (v, sigma) = decompose_encryption_map(c1.encrypt(5)).unwrap();
        assert_eq!(sigma.dim(), 1);
        assert!(linalg::is_unitary(v.matrix(), 1e-12));
        // append |0⟩ then a random unitary on two qubits
        let mut r = random::rng(8);
        let u = random::unitary(4, &mut r);
        let app = linalg::kron(&linalg::identity(2), &CMatrix::from_column_slice(2, 1, &[ONE, linalg::ZERO]));
        let e = QuantumChannel::from_kraus(plaintext_layout(2), ciphertext_layout(4), vec![&u * app]).unwrap();
        let (v, sigma) = decompose_encryption_map(&e).unwrap();
        assert_eq!(sigma.dim(), 1);
        let rho = random::density_matrix(2, 2, &mut r);
        let rebuilt = v.matrix() * linalg::kron(&rho, sigma.matrix()) * v.matrix().adjoint();
        assert!(max_abs_diff(&rebuilt, &e.apply_matrix(&rho)) < 1e-9);
        // mixed ancilla: E(X) = U (X ⊗ diag(0.7, 0.3)) U†
        let sig = CMatrix::from_diagonal(&CVector::from_vec(vec![linalg::real(0.7), linalg::real(0.3)]));
        let k0 = &u * linalg::kron(&linalg::identity(2), &CMatrix::from_column_slice(2, 1, &[linalg::real(0.7f64.sqrt()), linalg::ZERO]));
        let k1 = &u * linalg::kron(&linalg::identity(2), &CMatrix::from_column_slice(2, 1, &[linalg::ZERO, linalg::real(0.3f64.sqrt())]));
        let e2 = QuantumChannel::from_kraus(plaintext_layout(2), ciphertext_layout(4), vec![k0, k1]).unwrap();
        let (v2, s2) = decompose_encryption_map(&e2).unwrap();
        let rebuilt = v2.matrix() * linalg::kron(&rho, s2.matrix()) * v2.matrix().adjoint();
        assert!(max_abs_diff(&rebuilt, &e2.apply_matrix(&rho)) < 1e-9);
        assert!((s2.matrix().trace().re - 1.0).abs() < 1e-12 && max_abs_diff(&CMatrix::from_diagonal(&s2.matrix().diagonal()), &sig) < 1e-9);
        let tau = DensityOperator::maximally_mixed(ciphertext_layout(2));
        let broken = QuantumChannel::constant(plaintext_layout(2), &tau).unwrap();
        assert!(matches!(decompose_encryption_map(&broken), Err(Error::NotDecomposable(_))));
    }

    #[test]
    fn scheme_json_roundtrip() {
        let spec = SchemeSpec::Tagged { base: Box::new(SchemeSpec::SampledClifford { qubits: 2, keys: 8, seed: 1 }), tag_qubits: 1, tag_state: None };
        let s = spec.build().unwrap();
        let json = s.to_json().unwrap();
        let back = EncryptionScheme::from_json(&json).unwrap();
        assert_eq!(back.key_count(), 8);
        assert!(max_abs_diff(back.encrypt(3).choi(), s.encrypt(3).choi()) < 1e-15);
        assert!(EncryptionScheme::from_json(r#"{"schema":"qnmlab/1","descriptor":{"kind":"qotp","qubits":1,"x":2}}"#).is_err());
    }
}
