//! Unitary ensembles (Pauli, Clifford, random circuits), their twirls and
//! design-deficiency estimates against closed-form Haar averages.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::channels::{self, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, I, ONE, ZERO};
use crate::quantum::{self, TOL};
use crate::random;
use crate::serial::{MatrixDoc, SCHEMA};

/// Choi matrices of twirl channels are formed exactly up to this many rows.
pub const EXACT_CHOI_LIMIT: usize = 256;
/// Number of seeded random channels in the channel-twirl probe battery.
pub const RANDOM_PROBES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Enumerated { family: String, qubits: usize },
    Sampled { family: String, qubits: usize, seed: u64, count: usize },
    Circuit { qubits: usize, depth: usize, seed: u64, count: usize },
    Custom,
}

#[derive(Clone, Debug)]
pub struct UnitaryEnsemble {
    elements: Vec<(CMatrix, f64)>,
    dim: usize,
    provenance: Provenance,
}

impl UnitaryEnsemble {
    pub fn new(elements: Vec<(CMatrix, f64)>, provenance: Provenance) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.0.nrows())
            .ok_or_else(|| Error::InvalidArgument("ensemble needs at least one element".into()))?;
        let mut total = 0.0;
        for (u, w) in &elements {
            if u.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!("element is {}x{}, expected {dim}", u.nrows(), u.ncols())));
            }
            if !linalg::is_unitary(u, TOL) {
                return Err(Error::NotUnitary(linalg::isometry_defect(u)));
            }
            if w.is_nan() || *w < 0.0 {
                return Err(Error::InvalidArgument(format!("negative weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        Ok(UnitaryEnsemble { elements, dim, provenance })
    }

    pub fn uniform(unitaries: Vec<CMatrix>, provenance: Provenance) -> Result<Self> {
        let w = 1.0 / unitaries.len().max(1) as f64;
        Self::new(unitaries.into_iter().map(|u| (u, w)).collect(), provenance)
    }

    pub fn elements(&self) -> &[(CMatrix, f64)] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_document(&self) -> EnsembleDocument {
        EnsembleDocument {
            schema: SCHEMA.to_string(),
            dim: self.dim,
            provenance: self.provenance.clone(),
            elements: self
                .elements
                .iter()
                .map(|(u, w)| EnsembleElement { unitary: MatrixDoc::from_matrix(u), weight: *w })
                .collect(),
        }
    }

    pub fn from_document(doc: &EnsembleDocument) -> Result<Self> {
        if doc.schema != SCHEMA {
            return Err(Error::Serialization(format!("unsupported schema `{}`", doc.schema)));
        }
        let els = doc
            .elements
            .iter()
            .map(|e| Ok((e.unitary.to_matrix()?, e.weight)))
            .collect::<Result<Vec<_>>>()?;
        let ens = Self::new(els, doc.provenance.clone())?;
        if ens.dim != doc.dim {
            return Err(Error::Serialization(format!("declared dim {} but elements are {}", doc.dim, ens.dim)));
        }
        Ok(ens)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("ensemble document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleElement {
    pub unitary: MatrixDoc,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    pub schema: String,
    pub dim: usize,
    pub provenance: Provenance,
    pub elements: Vec<EnsembleElement>,
}

// ---------------------------------------------------------------------------
// Gates

pub fn pauli_matrix(p: char) -> Result<CMatrix> {
    let m = match p {
        'I' => [ONE, ZERO, ZERO, ONE],
        'X' => [ZERO, ONE, ONE, ZERO],
        'Y' => [ZERO, -I, I, ZERO],
        'Z' => [ONE, ZERO, ZERO, -ONE],
        _ => return Err(Error::InvalidArgument(format!("unknown Pauli `{p}`"))),
    };
    Ok(CMatrix::from_row_slice(2, 2, &m))
}

/// Tensor product of single-qubit Paulis, e.g. `"XZ"` = X ⊗ Z.
pub fn pauli_string(label: &str) -> Result<CMatrix> {
    let mut out = linalg::identity(1);
    for ch in label.chars() {
        out = linalg::kron(&out, &pauli_matrix(ch)?);
    }
    Ok(out)
}

/// Label of the k-th n-qubit Pauli in I, X, Y, Z lexicographic order.
pub fn pauli_label(n: usize, k: usize) -> String {
    linalg::digits(k, &vec![4; n]).iter().map(|&d| ['I', 'X', 'Y', 'Z'][d]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    T(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
}

impl Gate {
    /// Dense matrix on n qubits (qubit 0 most significant).
    pub fn matrix(self, n: usize) -> CMatrix {
        let mut u = linalg::identity(1 << n);
        self.apply_left(&mut u, n);
        u
    }

    /// In-place `m ← G·m` using row operations.
    pub fn apply_left(self, m: &mut CMatrix, n: usize) {
        let bit = |q: usize| 1usize << (n - 1 - q);
        let rows = m.nrows();
        match self {
            Gate::H(q) => {
                let b = bit(q);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for r in (0..rows).filter(|r| r & b == 0) {
                    for col in 0..m.ncols() {
                        let (x, y) = (m[(r, col)], m[(r | b, col)]);
                        m[(r, col)] = (x + y) * s;
                        m[(r | b, col)] = (x - y) * s;
                    }
                }
            }
            Gate::S(q) | Gate::T(q) | Gate::Z(q) => {
                let ph = match self {
                    Gate::S(_) => I,
                    Gate::Z(_) => -ONE,
                    _ => c(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
                };
                let b = bit(q);
                for r in (0..rows).filter(|r| r & b != 0) {
                    for col in 0..m.ncols() {
                        m[(r, col)] *= ph;
                    }
                }
            }
            Gate::X(q) => {
                let b = bit(q);
                for r in (0..rows).filter(|r| r & b == 0) {
                    m.swap_rows(r, r | b);
                }
            }
            Gate::Cnot(ctl, tgt) => {
                let (bc, bt) = (bit(ctl), bit(tgt));
                for r in (0..rows).filter(|r| r & bc != 0 && r & bt == 0) {
                    m.swap_rows(r, r | bt);
                }
            }
        }
    }
}

fn clifford_generators(n: usize) -> Vec<Gate> {
    let mut g = Vec::new();
    for q in 0..n {
        g.push(Gate::H(q));
        g.push(Gate::S(q));
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                g.push(Gate::Cnot(a, b));
            }
        }
    }
    g
}

/// Make the first nonzero entry (row-major) real and positive.
pub fn canonical_phase(u: &CMatrix) -> CMatrix {
    for r in 0..u.nrows() {
        for col in 0..u.ncols() {
            let z = u[(r, col)];
            if z.norm() > 1e-9 {
                let ph = z.conj() / z.norm();
                return u.map(|x| x * ph);
            }
        }
    }
    u.clone()
}

fn phase_key(u: &CMatrix) -> Vec<i64> {
    let mut key = Vec::with_capacity(2 * u.len());
    for r in 0..u.nrows() {
        for col in 0..u.ncols() {
            let z = u[(r, col)];
            key.push((z.re * 1e6).round() as i64);
            key.push((z.im * 1e6).round() as i64);
        }
    }
    key
}

// ---------------------------------------------------------------------------
// Ensembles

pub fn pauli_group(n: usize) -> Result<UnitaryEnsemble> {
    if !(1..=4).contains(&n) {
        return Err(Error::Unsupported(format!("Pauli group on {n} qubits (supported: 1..=4)")));
    }
    let els = (0..linalg::ipow(4, n)).map(|k| pauli_string(&pauli_label(n, k))).collect::<Result<Vec<_>>>()?;
    UnitaryEnsemble::uniform(els, Provenance::Enumerated { family: "pauli".into(), qubits: n })
}

/// Clifford group modulo phases by breadth-first closure over {H, S, CNOT}.
pub fn clifford_group(n: usize) -> Result<UnitaryEnsemble> {
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported(format!(
            "exhaustive Clifford enumeration on {n} qubits (supported: 1..=2; use random_clifford)"
        )));
    }
    let gens = clifford_generators(n);
    let start = linalg::identity(1 << n);
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    seen.insert(phase_key(&start), ());
    let mut out = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for g in &gens {
            let mut v = u.clone();
            g.apply_left(&mut v, n);
            let v = canonical_phase(&v);
            let key = phase_key(&v);
            if seen.insert(key, ()).is_none() {
                out.push(v.clone());
                queue.push_back(v);
            }
        }
    }
    UnitaryEnsemble::uniform(out, Provenance::Enumerated { family: "clifford".into(), qubits: n })
}

/// Walk length used by [`random_clifford`].
pub fn clifford_walk_length(n: usize) -> usize {
    40 * n * n + 40
}

/// Clifford samples from independent lazy random walks over {H, S, CNOT},
/// each finished with a uniformly random Pauli.
pub fn random_clifford(n: usize, count: usize, seed: u64) -> Result<UnitaryEnsemble> {
    if !(1..=4).contains(&n) {
        return Err(Error::Unsupported(format!("random Clifford on {n} qubits (supported: 1..=4)")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let gens = clifford_generators(n);
    let mut rng = random::substream(seed, "clifford");
    let steps = clifford_walk_length(n);
    let mut els = Vec::with_capacity(count);
    for _ in 0..count {
        let mut u = linalg::identity(1 << n);
        for _ in 0..steps {
            let k = random::index(&mut rng, gens.len() + 1);
            if k < gens.len() {
                gens[k].apply_left(&mut u, n);
            }
        }
        for q in 0..n {
            if random::index(&mut rng, 2) == 1 {
                Gate::X(q).apply_left(&mut u, n);
            }
            if random::index(&mut rng, 2) == 1 {
                Gate::Z(q).apply_left(&mut u, n);
            }
        }
        els.push(canonical_phase(&u));
    }
    UnitaryEnsemble::uniform(els, Provenance::Sampled { family: "clifford".into(), qubits: n, seed, count })
}

/// Random circuits over {H, T, CNOT}: each layer applies H or T to every
/// qubit, then one CNOT on a random ordered pair.
pub fn random_circuit_ensemble(n: usize, depth: usize, count: usize, seed: u64) -> Result<UnitaryEnsemble> {
    if !(1..=4).contains(&n) {
        return Err(Error::Unsupported(format!("random circuits on {n} qubits (supported: 1..=4)")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let mut rng = random::substream(seed, "circuit");
    let mut els = Vec::with_capacity(count);
    for _ in 0..count {
        let mut u = linalg::identity(1 << n);
        for _ in 0..depth {
            for q in 0..n {
                let g = if random::index(&mut rng, 2) == 0 { Gate::H(q) } else { Gate::T(q) };
                g.apply_left(&mut u, n);
            }
            if n >= 2 {
                let a = random::index(&mut rng, n);
                let b = (a + 1 + random::index(&mut rng, n - 1)) % n;
                Gate::Cnot(a, b).apply_left(&mut u, n);
            }
        }
        els.push(u);
    }
    UnitaryEnsemble::uniform(els, Provenance::Circuit { qubits: n, depth, seed, count })
}

// ---------------------------------------------------------------------------
// Twirls

fn tensor_power(u: &CMatrix, t: usize) -> CMatrix {
    let mut w = linalg::identity(1);
    for _ in 0..t {
        w = linalg::kron(&w, u);
    }
    w
}

fn aux_dim(x: &CMatrix, block: usize, what: &str) -> Result<usize> {
    let n = linalg::check_square(x, what)?;
    if block == 0 || n % block != 0 {
        return Err(Error::DimensionMismatch(format!("{what} has dim {n}, not a multiple of {block}")));
    }
    Ok(n / block)
}

/// Σ_U w_U (W ⊗ 1) X (W ⊗ 1)† where the aux factor is least significant.
fn conjugate_average(x: &CMatrix, ws: impl Iterator<Item = (CMatrix, f64)>, aux: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(x.nrows(), x.ncols());
    for (w, p) in ws {
        let big = if aux == 1 { w } else { linalg::kron(&w, &linalg::identity(aux)) };
        acc += (&big * x * big.adjoint()).scale(p);
    }
    acc
}

/// Σ_U w_U U^{⊗t} X U^{†⊗t}.
pub fn t_twirl(d: &UnitaryEnsemble, x: &CMatrix, t: usize) -> Result<CMatrix> {
    let big = linalg::ipow(d.dim, t);
    let n = linalg::check_square(x, "twirl input")?;
    if n != big {
        return Err(Error::DimensionMismatch(format!("t={t} twirl on dim {} needs {big}, got {n}", d.dim)));
    }
    Ok(conjugate_average(x, d.elements.iter().map(|(u, w)| (tensor_power(u, t), *w)), 1))
}

/// Closed-form Haar 2-twirl on the leading A⊗A factor of M (trailing aux factor untouched).
pub fn haar_2twirl(m: &CMatrix, d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument("Haar 2-twirl needs d >= 2".into()));
    }
    let aux = aux_dim(m, d * d, "Haar 2-twirl input")?;
    let f = quantum::swap_operator(d);
    let f_full = linalg::kron(&f, &linalg::identity(aux));
    let dims = [d * d, aux];
    let tr_m = linalg::partial_trace(m, &dims, &[false, true]);
    let tr_fm = linalg::partial_trace(&(&f_full * m), &dims, &[false, true]);
    let df = d as f64;
    let den = df * (df * df - 1.0);
    let r1 = (tr_m.scale(df) - &tr_fm).unscale(den);
    let rf = (tr_fm.scale(df) - &tr_m).unscale(den);
    Ok(linalg::kron(&linalg::identity(d * d), &r1) + linalg::kron(&f, &rf))
}

/// Empirical U ⊗ Ū twirl on the leading d² factor of X.
pub fn uubar_twirl(d: &UnitaryEnsemble, x: &CMatrix) -> Result<CMatrix> {
    let aux = aux_dim(x, d.dim * d.dim, "U-Ubar twirl input")?;
    Ok(conjugate_average(x, d.elements.iter().map(|(u, w)| (linalg::kron(u, &linalg::conj(u)), *w)), aux))
}

/// Haar U ⊗ Ū twirl: projection onto span{φ⁺, Π⁻} on the leading d² factor.
pub fn uubar_twirl_haar(x: &CMatrix, d: usize) -> Result<CMatrix> {
    let aux = aux_dim(x, d * d, "U-Ubar twirl input")?;
    let phi = quantum::phi_plus(d);
    let pim = quantum::pi_minus(d);
    let dims = [d * d, aux];
    let with = |p: &CMatrix| linalg::kron(p, &linalg::identity(aux));
    let a = linalg::partial_trace(&(with(&phi) * x), &dims, &[false, true]);
    let b = linalg::partial_trace(&(with(&pim) * x), &dims, &[false, true]);
    Ok(linalg::kron(&phi, &a) + linalg::kron(&pim, &b).unscale((d * d) as f64 - 1.0))
}

fn check_design_channel(d: &UnitaryEnsemble, ch: &QuantumChannel) -> Result<()> {
    if ch.input_dim() != d.dim || ch.output_dim() != d.dim {
        return Err(Error::DimensionMismatch(format!(
            "channel {} -> {} does not act on the design dimension {}",
            ch.input(),
            ch.output(),
            d.dim
        )));
    }
    if !ch.is_cp() || !ch.is_tp() {
        return Err(Error::InvalidArgument("channel twirl needs a CPTP map".into()));
    }
    Ok(())
}

/// Channel whose Choi matrix is the U ⊗ Ū twirl of η_Λ.
pub fn channel_twirl(d: &UnitaryEnsemble, ch: &QuantumChannel) -> Result<QuantumChannel> {
    check_design_channel(d, ch)?;
    let eta = uubar_twirl(d, ch.choi())?;
    QuantumChannel::from_choi(ch.input().clone(), ch.output().clone(), eta)
}

pub fn channel_twirl_haar(ch: &QuantumChannel) -> Result<QuantumChannel> {
    let dim = ch.input_dim();
    if ch.output_dim() != dim {
        return Err(Error::DimensionMismatch("channel twirl needs equal input and output dims".into()));
    }
    let eta = uubar_twirl_haar(ch.choi(), dim)?;
    QuantumChannel::from_choi(ch.input().clone(), ch.output().clone(), eta)
}

/// Row-major superoperator S = Σ w W ⊗ W̄ of X ↦ Σ w W X W†.
#[derive(Clone, Debug)]
pub struct Superoperator {
    matrix: CMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn from_weighted(ws: impl Iterator<Item = (CMatrix, f64)>, dim: usize) -> Self {
        let n = dim * dim;
        let mut s = CMatrix::zeros(n, n);
        for (w, p) in ws {
            let wc = linalg::conj(&w);
            for a in 0..dim {
                for cc in 0..dim {
                    let x = w[(a, cc)] * p;
                    if x == ZERO {
                        continue;
                    }
                    for b in 0..dim {
                        for e in 0..dim {
                            s[(a * dim + b, cc * dim + e)] += x * wc[(b, e)];
                        }
                    }
                }
            }
        }
        Superoperator { matrix: s, dim }
    }

    pub fn t_twirl(d: &UnitaryEnsemble, t: usize) -> Self {
        let dim = linalg::ipow(d.dim, t);
        Self::from_weighted(d.elements.iter().map(|(u, w)| (tensor_power(u, t), *w)), dim)
    }

    pub fn uubar(d: &UnitaryEnsemble) -> Self {
        let dim = d.dim * d.dim;
        Self::from_weighted(d.elements.iter().map(|(u, w)| (linalg::kron(u, &linalg::conj(u)), *w)), dim)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let y = &self.matrix * linalg::vec_row(x);
        linalg::unvec_row(&y, self.dim, self.dim)
    }

    /// Choi matrix on `out ⊗ in'`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut eta = CMatrix::zeros(d * d, d * d);
        for o in 0..d {
            for i in 0..d {
                for o2 in 0..d {
                    for i2 in 0..d {
                        eta[(o * d + i, o2 * d + i2)] = self.matrix[(o * d + o2, i * d + i2)];
                    }
                }
            }
        }
        eta.unscale(d as f64)
    }
}

// ---------------------------------------------------------------------------
// Deficiency

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DesignNotion {
    TDesign { t: usize },
    Uubar,
    ChannelTwirl,
}

impl std::fmt::Display for DesignNotion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DesignNotion::TDesign { t } => write!(f, "{t}-design"),
            DesignNotion::Uubar => write!(f, "uubar"),
            DesignNotion::ChannelTwirl => write!(f, "channel-twirl"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeficiencyMethod {
    /// Two-sided CJ bounds on the exact twirl channels.
    ExactChoi,
    /// Hilbert-Schmidt bounds from the frame potential.
    FramePotential,
    /// Probe-battery lower bound, upper bound through the U-Ū deficiency.
    ProbeBattery,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyReport {
    pub notion: String,
    pub lower: f64,
    pub upper: f64,
    pub probes: usize,
    pub method: DeficiencyMethod,
}

fn factorial(t: usize) -> f64 {
    (1..=t).map(|k| k as f64).product()
}

/// Σ_{j,k} w_j w_k |Tr(U_j† U_k)|^{2t}.
pub fn frame_potential(d: &UnitaryEnsemble, t: usize) -> f64 {
    let n = d.elements.len();
    let mut total = 0.0;
    for j in 0..n {
        let (uj, wj) = &d.elements[j];
        for k in j..n {
            let (uk, wk) = &d.elements[k];
            let mut tr = ZERO;
            for (a, b) in uj.iter().zip(uk.iter()) {
                tr += a.conj() * b;
            }
            let v = wj * wk * tr.norm_sqr().powi(t as i32);
            total += if j == k { v } else { 2.0 * v };
        }
    }
    total
}

fn haar_twirl_choi(d: usize, t: usize) -> Result<CMatrix> {
    let big = linalg::ipow(d, t);
    match t {
        1 => Ok(linalg::kron(&quantum::maximally_mixed(big), &quantum::maximally_mixed(big))),
        2 => {
            if d < 2 {
                return Err(Error::InvalidArgument("Haar 2-twirl needs d >= 2".into()));
            }
            Ok(channels::choi_of_map(big, big, |x| haar_2twirl(x, d).expect("dims checked")))
        }
        _ => Err(Error::Unsupported(format!("t = {t} (supported: 1, 2)"))),
    }
}

fn haar_uubar_choi(d: usize) -> Result<CMatrix> {
    let big = d * d;
    Ok(channels::choi_of_map(big, big, |x| uubar_twirl_haar(x, d).expect("dims checked")))
}

fn exact_report(notion: DesignNotion, emp: &CMatrix, haar: &CMatrix, in_dim: usize) -> DeficiencyReport {
    let lower = quantum::trace_norm_hermitian(&(emp - haar));
    DeficiencyReport { notion: notion.to_string(), lower, upper: in_dim as f64 * lower, probes: 0, method: DeficiencyMethod::ExactChoi }
}

fn frame_report(notion: DesignNotion, fp: f64, haar_value: f64, in_dim: usize) -> DeficiencyReport {
    let hs = (fp - haar_value).max(0.0).sqrt();
    DeficiencyReport {
        notion: notion.to_string(),
        lower: hs / in_dim as f64,
        upper: in_dim as f64 * hs,
        probes: 0,
        method: DeficiencyMethod::FramePotential,
    }
}

/// Fixed probe battery: every Pauli unitary channel, then seeded random channels.
pub fn probe_battery(dim: usize, seed: u64) -> Result<Vec<QuantumChannel>> {
    let n = dim.trailing_zeros() as usize;
    let layout = quantum::SystemLayout::single("A", dim);
    let mut out = Vec::new();
    if dim.is_power_of_two() && n >= 1 {
        for k in 0..linalg::ipow(4, n) {
            out.push(QuantumChannel::unitary(layout.clone(), pauli_string(&pauli_label(n, k))?)?);
        }
    }
    let mut rng = random::substream(seed, "probe-battery");
    for j in 0..RANDOM_PROBES {
        let rank = 1 + j % dim.min(4);
        let ks = random::channel_kraus(dim, dim, rank, &mut rng);
        out.push(QuantumChannel::from_kraus(layout.clone(), layout.clone(), ks)?);
    }
    Ok(out)
}

/// Two-sided bounds on the deficiency δ of `d` for the given notion.
pub fn design_deficiency(d: &UnitaryEnsemble, notion: DesignNotion) -> Result<DeficiencyReport> {
    design_deficiency_seeded(d, notion, 0)
}

pub fn design_deficiency_seeded(d: &UnitaryEnsemble, notion: DesignNotion, seed: u64) -> Result<DeficiencyReport> {
    let dim = d.dim;
    match notion {
        DesignNotion::TDesign { t } => {
            if !(1..=2).contains(&t) {
                return Err(Error::Unsupported(format!("t = {t} (supported: 1, 2)")));
            }
            let big = linalg::ipow(dim, t);
            if big * big <= EXACT_CHOI_LIMIT {
                let emp = Superoperator::t_twirl(d, t).choi();
                Ok(exact_report(notion, &emp, &haar_twirl_choi(dim, t)?, big))
            } else {
                if dim < t {
                    return Err(Error::Unsupported("frame potential needs d >= t".into()));
                }
                Ok(frame_report(notion, frame_potential(d, t), factorial(t), big))
            }
        }
        DesignNotion::Uubar => {
            let big = dim * dim;
            if big * big <= EXACT_CHOI_LIMIT {
                let emp = Superoperator::uubar(d).choi();
                Ok(exact_report(notion, &emp, &haar_uubar_choi(dim)?, big))
            } else {
                Ok(frame_report(notion, frame_potential(d, 2), 2.0, big))
            }
        }
        DesignNotion::ChannelTwirl => {
            if dim * dim > 16 {
                return Err(Error::Unsupported(format!("channel-twirl battery on dim {dim} (supported: <= 4)")));
            }
            let sup = Superoperator::uubar(d);
            let probes = probe_battery(dim, seed)?;
            let mut lower = 0.0f64;
            for p in &probes {
                let emp = sup.apply(p.choi());
                let haar = uubar_twirl_haar(p.choi(), dim)?;
                lower = lower.max(quantum::trace_norm_hermitian(&(emp - haar)));
            }
            let uu = design_deficiency_seeded(d, DesignNotion::Uubar, seed)?;
            Ok(DeficiencyReport {
                notion: notion.to_string(),
                lower,
                upper: (dim as f64 * uu.upper).max(lower),
                probes: probes.len(),
                method: DeficiencyMethod::ProbeBattery,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::quantum::{maximally_mixed, phi_plus, swap_operator, SystemLayout};

    fn random_matrix(d: usize, seed: u64) -> CMatrix {
        random::ginibre(d, d, &mut random::rng(seed))
    }

    #[test]
    fn pauli_group_basics() {
        let p1 = pauli_group(1).unwrap();
        assert_eq!(p1.len(), 4);
        assert_eq!(pauli_label(2, 6), "XY");
        let p2 = pauli_group(2).unwrap();
        assert_eq!(p2.len(), 16);
        for (j, (a, _)) in p2.elements().iter().enumerate() {
            for (b, _) in &p2.elements()[j + 1..] {
                assert!(linalg::hs_inner(a, b).norm() < 1e-14);
            }
        }
        let x = random_matrix(2, 1);
        let tw = t_twirl(&p1, &x, 1).unwrap();
        let expect = linalg::identity(2).map(|z| z * x.trace() / 2.0);
        assert!(max_abs_diff(&tw, &expect) < 1e-14);
        assert!(pauli_group(5).is_err());
    }

    #[test]
    fn clifford_counts_and_normalizer() {
        let c1 = clifford_group(1).unwrap();
        assert_eq!(c1.len(), 24);
        let c2 = clifford_group(2).unwrap();
        assert_eq!(c2.len(), 11520);
        let paulis: Vec<CMatrix> = (0..16).map(|k| pauli_string(&pauli_label(2, k)).unwrap()).collect();
        for (u, _) in c2.elements().iter().step_by(97) {
            for p in &paulis {
                let q = u * p * u.adjoint();
                let hits = paulis.iter().filter(|r| (linalg::hs_inner(r, &q).norm() - 4.0).abs() < 1e-9).count();
                assert_eq!(hits, 1);
            }
        }
        assert!(clifford_group(3).is_err());
    }

    #[test]
    fn twirl_examples() {
        let c1 = clifford_group(1).unwrap();
        let f = swap_operator(2);
        assert!(max_abs_diff(&t_twirl(&c1, &f, 2).unwrap(), &f) < 1e-12);
        for s in 0..10 {
            let x = random_matrix(4, 100 + s);
            let a = t_twirl(&c1, &x, 2).unwrap();
            let b = haar_2twirl(&x, 2).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-12);
            let ua = uubar_twirl(&c1, &x).unwrap();
            let ub = uubar_twirl_haar(&x, 2).unwrap();
            assert!(max_abs_diff(&ua, &ub) < 1e-12);
        }
        assert!(max_abs_diff(&haar_2twirl(&linalg::identity(9), 3).unwrap(), &linalg::identity(9)) < 1e-12);
        assert!(max_abs_diff(&haar_2twirl(&swap_operator(3), 3).unwrap(), &swap_operator(3)) < 1e-12);
        let phi = phi_plus(3);
        assert!(max_abs_diff(&uubar_twirl_haar(&phi, 3).unwrap(), &phi) < 1e-12);
        assert!(max_abs_diff(&uubar_twirl_haar(&maximally_mixed(9), 3).unwrap(), &maximally_mixed(9)) < 1e-12);
        assert!(haar_2twirl(&linalg::identity(1), 1).is_err());
        assert!(t_twirl(&c1, &linalg::identity(3), 2).is_err());
    }

    #[test]
    fn superoperator_matches_direct_twirl() {
        let c1 = clifford_group(1).unwrap();
        let s = Superoperator::t_twirl(&c1, 2);
        let x = random_matrix(4, 3);
        assert!(max_abs_diff(&s.apply(&x), &t_twirl(&c1, &x, 2).unwrap()) < 1e-12);
        let choi = channels::choi_of_map(4, 4, |m| t_twirl(&c1, m, 2).unwrap());
        assert!(max_abs_diff(&s.choi(), &choi) < 1e-12);
    }

    #[test]
    fn channel_twirl_examples() {
        let c1 = clifford_group(1).unwrap();
        let l = SystemLayout::single("A", 2);
        let id = QuantumChannel::identity(l.clone());
        assert!(max_abs_diff(channel_twirl(&c1, &id).unwrap().choi(), id.choi()) < 1e-12);
        let x = QuantumChannel::unitary(l, pauli_string("X").unwrap()).unwrap();
        let tw = channel_twirl(&c1, &x).unwrap();
        assert!(max_abs_diff(tw.choi(), &quantum::tau_minus(2)) < 1e-12);
    }

    #[test]
    fn deficiency_examples() {
        let c1 = clifford_group(1).unwrap();
        let p1 = pauli_group(1).unwrap();
        assert!(design_deficiency(&c1, DesignNotion::TDesign { t: 2 }).unwrap().upper < 1e-10);
        assert!(design_deficiency(&p1, DesignNotion::TDesign { t: 1 }).unwrap().upper < 1e-10);
        let p2 = design_deficiency(&p1, DesignNotion::TDesign { t: 2 }).unwrap();
        assert!(p2.lower >= 0.5, "{p2:?}");
        assert!(design_deficiency(&c1, DesignNotion::TDesign { t: 3 }).is_err());
        let ch = design_deficiency(&c1, DesignNotion::ChannelTwirl).unwrap();
        assert!(ch.upper < 1e-10 && ch.probes == 24);
    }

    #[test]
    fn random_ensembles_are_reproducible() {
        let a = random_clifford(2, 5, 9).unwrap();
        let b = random_clifford(2, 5, 9).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let r = random_circuit_ensemble(3, 4, 3, 1).unwrap();
        assert_eq!(r.to_json(), random_circuit_ensemble(3, 4, 3, 1).unwrap().to_json());
        let back = UnitaryEnsemble::from_json(&r.to_json()).unwrap();
        assert_eq!(back.len(), 3);
    }

    #[test]
    fn frame_potential_of_exact_designs() {
        let c1 = clifford_group(1).unwrap();
        assert!((frame_potential(&c1, 2) - 2.0).abs() < 1e-10);
        let p1 = pauli_group(1).unwrap();
        assert!((frame_potential(&p1, 1) - 1.0).abs() < 1e-10);
    }
}
