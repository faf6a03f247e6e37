//! Linear maps between registers in Kraus and Choi form.
//!
//! The Choi matrix of Λ: A → B is η = (Λ ⊗ id)(φ⁺_{AA'}) laid out as
//! `B ⊗ A'` (output registers first, then primed copies of the input).
//! Hermitian-preserving maps that are not completely positive (differences
//! of channels, ideal forms) are held as signed Kraus sums.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ONE};
use crate::quantum::{self, DensityOperator, Register, SystemLayout, TOL};
use crate::random;
use crate::serial::{MatrixDoc, SCHEMA};

/// Choi eigenvalues below this magnitude are dropped when deriving Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-12;

type Term = (f64, CMatrix);

#[derive(Clone, Debug)]
pub struct QuantumChannel {
    input: SystemLayout,
    output: SystemLayout,
    terms: OnceLock<Vec<Term>>,
    choi: OnceLock<CMatrix>,
    tp: bool,
    cp: bool,
}

impl QuantumChannel {
    pub fn from_kraus(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        let terms = kraus.into_iter().map(|k| (1.0, k)).collect();
        Self::from_terms(input, output, terms)
    }

    fn from_terms(input: SystemLayout, output: SystemLayout, terms: Vec<Term>) -> Result<Self> {
        let (di, dout) = (input.total_dim(), output.total_dim());
        if terms.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for (_, k) in &terms {
            if k.shape() != (dout, di) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, layouts need {dout}x{di}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let cp = terms.iter().all(|(s, _)| *s >= 0.0);
        let mut dual = CMatrix::zeros(di, di);
        for (s, k) in &terms {
            dual += (k.adjoint() * k).scale(*s);
        }
        let tp = linalg::max_abs_diff(&dual, &linalg::identity(di)) <= TOL;
        let cell = OnceLock::new();
        let _ = cell.set(terms);
        Ok(QuantumChannel { input, output, terms: cell, choi: OnceLock::new(), tp, cp })
    }

    /// Completely positive map from its Choi matrix; rejects non-PSD input.
    pub fn from_choi(input: SystemLayout, output: SystemLayout, choi: CMatrix) -> Result<Self> {
        let ch = Self::from_hermitian_choi(input, output, choi)?;
        if !ch.cp {
            let min = linalg::eigvalsh(ch.choi()).first().copied().unwrap_or(0.0);
            return Err(Error::NotCompletelyPositive(min));
        }
        Ok(ch)
    }

    /// Any Hermitian-preserving map from its (Hermitian) Choi matrix.
    pub fn from_hermitian_choi(input: SystemLayout, output: SystemLayout, choi: CMatrix) -> Result<Self> {
        let n = input.total_dim() * output.total_dim();
        if choi.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, layouts need {n}x{n}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let asym = linalg::asymmetry(&choi);
        if asym > TOL * (1.0 + linalg::max_abs(&choi)) {
            return Err(Error::NotHermitian(asym));
        }
        let choi = linalg::hermitian_part(&choi);
        let min = linalg::eigvalsh(&choi).first().copied().unwrap_or(0.0);
        let cp = min >= -TOL;
        let di = input.total_dim();
        let dual = dual_from_choi(&choi, di, output.total_dim());
        let tp = linalg::max_abs_diff(&dual, &linalg::identity(di)) <= TOL;
        let cell = OnceLock::new();
        let _ = cell.set(choi);
        Ok(QuantumChannel { input, output, terms: OnceLock::new(), choi: cell, tp, cp })
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Self::from_kraus(layout.clone(), layout, vec![linalg::identity(d)]).expect("identity channel")
    }

    pub fn unitary(layout: SystemLayout, u: CMatrix) -> Result<Self> {
        if !linalg::is_unitary(&u, TOL) {
            return Err(Error::NotUnitary(linalg::isometry_defect(&u)));
        }
        Self::from_kraus(layout.clone(), layout, vec![u])
    }

    /// X ↦ V X V† for an isometry (or any single operator) V.
    pub fn conjugation(input: SystemLayout, output: SystemLayout, v: CMatrix) -> Result<Self> {
        Self::from_kraus(input, output, vec![v])
    }

    /// Replacement channel ⟨σ⟩: X ↦ Tr(X)·σ.
    pub fn constant(input: SystemLayout, sigma: &DensityOperator) -> Result<Self> {
        let choi = linalg::kron(sigma.matrix(), &quantum::maximally_mixed(input.total_dim()));
        Self::from_choi(input, sigma.layout().clone(), choi)
    }

    /// Isometric inclusion of `input` as the leading block of a larger space.
    pub fn embedding(input: SystemLayout, output: SystemLayout) -> Result<Self> {
        let (di, dout) = (input.total_dim(), output.total_dim());
        if dout < di {
            return Err(Error::DimensionMismatch(format!("cannot embed {di} dims into {dout}")));
        }
        let mut j = CMatrix::zeros(dout, di);
        for k in 0..di {
            j[(k, k)] = ONE;
        }
        Self::from_kraus(input, output, vec![j])
    }

    /// Partial trace over the named registers of `input`.
    pub fn discard(input: SystemLayout, labels: &[&str]) -> Result<Self> {
        let pos = input.positions(labels)?;
        let dims = input.dims();
        let keep: Vec<usize> = (0..dims.len()).filter(|k| !pos.contains(k)).collect();
        let kept_regs: Vec<Register> = keep.iter().map(|&k| input.registers()[k].clone()).collect();
        let output = SystemLayout::from_registers(kept_regs)?;
        let dk = output.total_dim();
        let dt: usize = pos.iter().map(|&k| dims[k]).product();
        let sub_t: Vec<usize> = pos.iter().map(|&k| dims[k]).collect();
        let sub_k: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let mut kraus = Vec::with_capacity(dt);
        for t in 0..dt {
            let tdig = linalg::digits(t, &sub_t);
            let mut k = CMatrix::zeros(dk, input.total_dim());
            for o in 0..dk {
                let odig = linalg::digits(o, &sub_k);
                let mut full = vec![0; dims.len()];
                for (p, &r) in keep.iter().enumerate() {
                    full[r] = odig[p];
                }
                for (p, &r) in pos.iter().enumerate() {
                    full[r] = tdig[p];
                }
                k[(o, linalg::flat_index(&full, &dims))] = ONE;
            }
            kraus.push(k);
        }
        Self::from_kraus(input, output, kraus)
    }

    pub fn input(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn input_dim(&self) -> usize {
        self.input.total_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output.total_dim()
    }

    pub fn is_tp(&self) -> bool {
        self.tp
    }

    pub fn is_cp(&self) -> bool {
        self.cp
    }

    /// Copy of the channel on new layouts with the same total dimensions.
    pub fn relabel(&self, input: SystemLayout, output: SystemLayout) -> Result<Self> {
        if input.total_dim() != self.input_dim() || output.total_dim() != self.output_dim() {
            return Err(Error::LayoutMismatch(format!(
                "cannot relabel {} -> {} as {input} -> {output}",
                self.input, self.output
            )));
        }
        let mut out = self.clone();
        out.input = input;
        out.output = output;
        Ok(out)
    }

    /// Λ†(1); equals the identity exactly when Λ is trace preserving.
    pub fn dual_identity(&self) -> CMatrix {
        if let Some(terms) = self.terms.get() {
            let mut acc = CMatrix::zeros(self.input_dim(), self.input_dim());
            for (s, k) in terms {
                acc += (k.adjoint() * k).scale(*s);
            }
            acc
        } else {
            dual_from_choi(self.choi(), self.input_dim(), self.output_dim())
        }
    }

    pub fn tp_defect(&self) -> f64 {
        linalg::max_abs_diff(&self.dual_identity(), &linalg::identity(self.input_dim()))
    }

    fn signed_terms(&self) -> &[Term] {
        self.terms.get_or_init(|| terms_from_choi(self.choi(), self.input_dim(), self.output_dim()))
    }

    /// Kraus operators; errors for maps that are not completely positive.
    pub fn kraus(&self) -> Result<Vec<CMatrix>> {
        if !self.cp {
            let min = linalg::eigvalsh(self.choi()).first().copied().unwrap_or(0.0);
            return Err(Error::NotCompletelyPositive(min));
        }
        Ok(self.signed_terms().iter().filter(|t| t.0 > 0.0).map(|t| t.1.clone()).collect())
    }

    pub fn kraus_count(&self) -> usize {
        self.signed_terms().len()
    }

    /// Raw Choi matrix on `output ⊗ input'`.
    pub fn choi(&self) -> &CMatrix {
        self.choi.get_or_init(|| {
            let terms = self.terms.get().expect("channel holds at least one representation");
            choi_from_terms(terms, self.input_dim(), self.output_dim())
        })
    }

    pub fn choi_layout(&self) -> Result<SystemLayout> {
        self.output.concat(&self.input.primed("'"))
    }

    /// CJ state η_Λ = (Λ ⊗ id)(φ⁺) as a validated density operator.
    pub fn cj_state(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.choi().clone(), self.choi_layout()?)
    }

    /// Apply to an operator on exactly the input space.
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        linalg::apply_terms_front(x, self.signed_terms(), 1)
    }

    /// Ξ(X) = |A|·Tr_{A'}[(1 ⊗ X^T) η], evaluated literally from the Choi matrix.
    pub fn apply_choi_formula(&self, x: &CMatrix) -> CMatrix {
        let (di, dout) = (self.input_dim(), self.output_dim());
        let eta = self.choi();
        let mut out = CMatrix::zeros(dout, dout);
        for b2 in 0..dout {
            for b1 in 0..dout {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..di {
                    for a2 in 0..di {
                        // (X^T)[a, a2] = X[a2, a]
                        acc += x[(a2, a)] * eta[(b1 * di + a2, b2 * di + a)];
                    }
                }
                out[(b1, b2)] = acc * di as f64;
            }
        }
        out
    }

    /// Apply Λ ⊗ id to a labelled operator; the output registers take the
    /// place of the first consumed register.
    pub fn apply_operator(&self, m: &CMatrix, layout: &SystemLayout, on: &[&str]) -> Result<(CMatrix, SystemLayout)> {
        let pos = layout.positions(on)?;
        let dims = layout.dims();
        let on_dims: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
        if on_dims != self.input.dims() {
            return Err(Error::LayoutMismatch(format!(
                "registers {on:?} have dims {on_dims:?}, channel expects {}",
                self.input
            )));
        }
        if m.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!("operator does not match layout {layout}")));
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|k| !pos.contains(k)).collect();
        let mut perm = pos.clone();
        perm.extend(&rest);
        let front = if perm.iter().enumerate().all(|(k, &p)| k == p) {
            m.clone()
        } else {
            linalg::permute_subsystems(m, &dims, &perm)
        };
        let rest_dim: usize = rest.iter().map(|&k| dims[k]).product();
        let y = linalg::apply_terms_front(&front, self.signed_terms(), rest_dim);

        // Layout of y: output registers then the untouched ones.
        let mut mid = self.output.registers().to_vec();
        mid.extend(rest.iter().map(|&k| layout.registers()[k].clone()));
        let mid = SystemLayout::from_registers(mid)?;
        let first = pos.iter().copied().min().unwrap_or(0);
        let n_out = self.output.len();
        let before = rest.iter().filter(|&&k| k < first).count();
        let mut order: Vec<usize> = (n_out..n_out + before).collect();
        order.extend(0..n_out);
        order.extend(n_out + before..mid.len());
        if order.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok((y, mid));
        }
        let final_regs = order.iter().map(|&k| mid.registers()[k].clone()).collect();
        Ok((linalg::permute_subsystems(&y, &mid.dims(), &order), SystemLayout::from_registers(final_regs)?))
    }

    pub fn apply(&self, rho: &DensityOperator, on: &[&str]) -> Result<DensityOperator> {
        let (m, l) = self.apply_operator(rho.matrix(), rho.layout(), on)?;
        DensityOperator::new(m, l)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &QuantumChannel) -> Result<Self> {
        if self.output.dims() != next.input.dims() {
            return Err(Error::LayoutMismatch(format!("cannot feed {} into {}", self.output, next.input)));
        }
        let mut terms = Vec::with_capacity(self.kraus_count() * next.kraus_count());
        for (s2, k2) in next.signed_terms() {
            for (s1, k1) in self.signed_terms() {
                terms.push((s1 * s2, k2 * k1));
            }
        }
        Self::from_terms(self.input.clone(), next.output.clone(), terms)
    }

    pub fn tensor(&self, other: &QuantumChannel) -> Result<Self> {
        let input = self.input.concat(&other.input)?;
        let output = self.output.concat(&other.output)?;
        let mut terms = Vec::with_capacity(self.kraus_count() * other.kraus_count());
        for (s1, k1) in self.signed_terms() {
            for (s2, k2) in other.signed_terms() {
                terms.push((s1 * s2, linalg::kron(k1, k2)));
            }
        }
        Self::from_terms(input, output, terms)
    }

    /// Σ_i c_i Λ_i for maps with identical layouts.
    pub fn linear_combination(items: &[(f64, &QuantumChannel)]) -> Result<Self> {
        let first = items.first().ok_or_else(|| Error::InvalidArgument("empty combination".into()))?.1;
        let mut acc = CMatrix::zeros(first.choi().nrows(), first.choi().ncols());
        for (w, ch) in items {
            if ch.input != first.input || ch.output != first.output {
                return Err(Error::LayoutMismatch(format!(
                    "{} -> {} vs {} -> {}",
                    ch.input, ch.output, first.input, first.output
                )));
            }
            acc += ch.choi().scale(*w);
        }
        Self::from_hermitian_choi(first.input.clone(), first.output.clone(), acc)
    }

    /// Channel whose Kraus operators are the entrywise transposes of these.
    pub fn transpose_channel(&self) -> Result<Self> {
        let terms = self.signed_terms().iter().map(|(s, k)| (*s, k.transpose())).collect();
        Self::from_terms(self.output.clone(), self.input.clone(), terms)
    }

    /// V = Σ_j K_j ⊗ |j⟩_E with environment register `E`.
    pub fn stinespring_dilate(&self) -> Result<Isometry> {
        let kraus = self.kraus()?;
        let r = kraus.len();
        let (di, dout) = (self.input_dim(), self.output_dim());
        let mut v = CMatrix::zeros(dout * r, di);
        for (j, k) in kraus.iter().enumerate() {
            for o in 0..dout {
                for i in 0..di {
                    v[(o * r + j, i)] = k[(o, i)];
                }
            }
        }
        let env = SystemLayout::single(&unique_label(&self.output, "E"), r);
        Isometry::new(v, self.input.clone(), self.output.concat(&env)?)
    }

    pub fn to_document(&self) -> ChannelDocument {
        let (representation, kraus, choi) = if self.cp && self.terms.get().is_some() {
            let k = self.kraus().unwrap_or_default();
            (Representation::Kraus, Some(k.iter().map(MatrixDoc::from_matrix).collect()), None)
        } else {
            (Representation::Choi, None, Some(MatrixDoc::from_matrix(self.choi())))
        };
        ChannelDocument {
            schema: SCHEMA.to_string(),
            input: self.input.clone(),
            output: self.output.clone(),
            representation,
            trace_preserving: self.tp,
            kraus,
            choi,
        }
    }

    pub fn from_document(doc: &ChannelDocument) -> Result<Self> {
        if doc.schema != SCHEMA {
            return Err(Error::Serialization(format!("unsupported schema `{}`", doc.schema)));
        }
        let ch = match doc.representation {
            Representation::Kraus => {
                let ks = doc.kraus.as_ref().ok_or_else(|| Error::Serialization("missing `kraus`".into()))?;
                let ks = ks.iter().map(MatrixDoc::to_matrix).collect::<Result<Vec<_>>>()?;
                Self::from_kraus(doc.input.clone(), doc.output.clone(), ks)?
            }
            Representation::Choi => {
                let m = doc.choi.as_ref().ok_or_else(|| Error::Serialization("missing `choi`".into()))?;
                Self::from_hermitian_choi(doc.input.clone(), doc.output.clone(), m.to_matrix()?)?
            }
        };
        if ch.tp != doc.trace_preserving {
            return Err(Error::Serialization("trace_preserving flag disagrees with the data".into()));
        }
        Ok(ch)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("channel document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// Inverse CJ map: the channel whose Choi matrix is `eta`.
pub fn cj_inverse(eta: &CMatrix, input: SystemLayout, output: SystemLayout) -> Result<QuantumChannel> {
    QuantumChannel::from_choi(input, output, eta.clone())
}

fn unique_label(layout: &SystemLayout, base: &str) -> String {
    let mut label = base.to_string();
    while layout.contains(&label) {
        label.push('\'');
    }
    label
}

fn dual_from_choi(choi: &CMatrix, di: usize, dout: usize) -> CMatrix {
    let marg = linalg::partial_trace(choi, &[dout, di], &[false, true]);
    marg.transpose().scale(di as f64)
}

fn choi_from_terms(terms: &[Term], di: usize, dout: usize) -> CMatrix {
    let n = di * dout;
    let mut w = CMatrix::zeros(n, terms.len());
    let mut ws = CMatrix::zeros(n, terms.len());
    for (t, (s, k)) in terms.iter().enumerate() {
        for o in 0..dout {
            for i in 0..di {
                w[(o * di + i, t)] = k[(o, i)];
                ws[(o * di + i, t)] = k[(o, i)] * *s;
            }
        }
    }
    (ws * w.adjoint()).unscale(di as f64)
}

fn terms_from_choi(choi: &CMatrix, di: usize, dout: usize) -> Vec<Term> {
    let (vals, vecs) = linalg::eigh(choi);
    let mut terms = Vec::new();
    for (k, &lam) in vals.iter().enumerate().rev() {
        if lam.abs() < KRAUS_CUTOFF {
            continue;
        }
        let scale = (di as f64 * lam.abs()).sqrt();
        let op = CMatrix::from_fn(dout, di, |o, i| vecs[(o * di + i, k)] * scale);
        terms.push((lam.signum(), op));
    }
    if terms.is_empty() {
        terms.push((1.0, CMatrix::zeros(dout, di)));
    }
    terms
}

/// Choi matrix of an arbitrary linear map given as a closure on d_in × d_in inputs.
pub fn choi_of_map(d_in: usize, d_out: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut eta = CMatrix::zeros(d_out * d_in, d_out * d_in);
    for i in 0..d_in {
        for j in 0..d_in {
            let img = f(&linalg::matrix_unit(d_in, i, j));
            for o1 in 0..d_out {
                for o2 in 0..d_out {
                    eta[(o1 * d_in + i, o2 * d_in + j)] = img[(o1, o2)];
                }
            }
        }
    }
    eta.unscale(d_in as f64)
}

/// Rectangular V with V†V = 1.
#[derive(Clone, Debug)]
pub struct Isometry {
    matrix: CMatrix,
    input: SystemLayout,
    output: SystemLayout,
}

impl Isometry {
    pub fn new(matrix: CMatrix, input: SystemLayout, output: SystemLayout) -> Result<Self> {
        if matrix.shape() != (output.total_dim(), input.total_dim()) {
            return Err(Error::DimensionMismatch(format!(
                "isometry is {}x{}, layouts need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                output.total_dim(),
                input.total_dim()
            )));
        }
        let defect = linalg::isometry_defect(&matrix);
        if defect > TOL {
            return Err(Error::NotIsometry(defect));
        }
        Ok(Isometry { matrix, input, output })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn input(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn to_channel(&self) -> QuantumChannel {
        QuantumChannel::conjugation(self.input.clone(), self.output.clone(), self.matrix.clone())
            .expect("isometry dims match layouts")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Kraus,
    Choi,
}

/// On-disk channel format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub schema: String,
    pub input: SystemLayout,
    pub output: SystemLayout,
    pub representation: Representation,
    pub trace_preserving: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixDoc>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic_exact: Option<f64>,
}

fn check_same_layouts(a: &QuantumChannel, b: &QuantumChannel) -> Result<()> {
    if a.input != b.input || a.output != b.output {
        return Err(Error::LayoutMismatch(format!(
            "{} -> {} vs {} -> {}",
            a.input, a.output, b.input, b.output
        )));
    }
    Ok(())
}

/// lower = ‖η₁−η₂‖₁ and upper = |A|·‖η₁−η₂‖₁.
pub fn diamond_distance_bounds(a: &QuantumChannel, b: &QuantumChannel) -> Result<DiamondBounds> {
    check_same_layouts(a, b)?;
    let lower = quantum::trace_norm_hermitian(&(a.choi() - b.choi()));
    Ok(DiamondBounds { lower, upper: a.input_dim() as f64 * lower, heuristic_exact: None })
}

/// As [`diamond_distance_bounds`], plus a seeded local search over purified inputs.
pub fn diamond_distance_bounds_with_heuristic(a: &QuantumChannel, b: &QuantumChannel, seed: u64) -> Result<DiamondBounds> {
    let mut bounds = diamond_distance_bounds(a, b)?;
    let delta = a.choi() - b.choi();
    let h = diamond_norm_search(&delta, a.input_dim(), a.output_dim(), seed);
    bounds.heuristic_exact = Some(h.clamp(bounds.lower, bounds.upper));
    Ok(bounds)
}

/// Maximize d·‖(1⊗Y) η (1⊗Y)†‖₁ over ‖Y‖_F = 1 by alternating between the
/// sign matrix of the current output and the top eigenvector of the
/// resulting quadratic form in Y. Every step is non-decreasing.
pub fn diamond_norm_search(delta_choi: &CMatrix, d_in: usize, d_out: usize, seed: u64) -> f64 {
    let value = |y: &CMatrix| -> (f64, CMatrix) {
        let m = linalg::apply_terms_back(delta_choi, &[(1.0, y.clone())], d_out);
        (d_in as f64 * quantum::trace_norm_hermitian(&m), m)
    };
    let mut rng = random::rng(seed);
    let mut starts = vec![linalg::identity(d_in).unscale((d_in as f64).sqrt())];
    for _ in 0..3 {
        let g = random::ginibre(d_in, d_in, &mut rng);
        let n = g.norm();
        starts.push(g.unscale(n));
    }
    let mut best = 0.0f64;
    for y0 in starts {
        let mut y = y0;
        let (mut f, mut m) = value(&y);
        for _ in 0..200 {
            let s = linalg::hermitian_sign(&m);
            let mut q = CMatrix::zeros(d_in * d_in, d_in * d_in);
            for b in 0..d_out {
                for b2 in 0..d_out {
                    let s_blk = s.view((b2 * d_in, b * d_in), (d_in, d_in)).into_owned();
                    let e_blk = delta_choi.view((b * d_in, b2 * d_in), (d_in, d_in)).transpose();
                    q += linalg::kron(&s_blk, &e_blk);
                }
            }
            let (_, vecs) = linalg::eigh(&q);
            let top = vecs.column(d_in * d_in - 1).into_owned();
            let y_new = CMatrix::from_fn(d_in, d_in, |a, c| top[a * d_in + c]);
            let (f_new, m_new) = value(&y_new);
            if f_new <= f + 1e-13 {
                break;
            }
            y = y_new;
            f = f_new;
            m = m_new;
        }
        let _ = &y;
        best = best.max(f);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use crate::quantum::{max_entangled_on, maximally_mixed, phi_plus};

    fn q(label: &str) -> SystemLayout {
        SystemLayout::single(label, 2)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    #[test]
    fn identity_choi_is_phi_plus() {
        let id = QuantumChannel::identity(q("A"));
        assert!(max_abs_diff(id.choi(), &phi_plus(2)) < 1e-15);
        assert!(id.is_tp() && id.is_cp());
    }

    #[test]
    fn constant_channel_choi() {
        let mut r = random::rng(1);
        let sigma = DensityOperator::new(random::density_matrix(3, 3, &mut r), SystemLayout::single("B", 3)).unwrap();
        let ch = QuantumChannel::constant(q("A"), &sigma).unwrap();
        let expect = linalg::kron(sigma.matrix(), &maximally_mixed(2));
        assert!(max_abs_diff(ch.choi(), &expect) < 1e-15);
        assert!(ch.is_tp());
        let x = random::density_matrix(2, 2, &mut r);
        assert!(max_abs_diff(&ch.apply_matrix(&x), sigma.matrix()) < 1e-12);
    }

    #[test]
    fn depolarizing_half_of_phi_plus() {
        let tau = DensityOperator::maximally_mixed(q("A"));
        let dep = QuantumChannel::constant(q("A"), &tau).unwrap();
        let phi = max_entangled_on("A", "B", 2);
        let out = dep.apply(&phi, &["A"]).unwrap();
        assert!(max_abs_diff(out.matrix(), &maximally_mixed(4)) < 1e-12);
        let same = QuantumChannel::identity(q("B")).apply(&phi, &["B"]).unwrap();
        assert!(max_abs_diff(same.matrix(), phi.matrix()) < 1e-15);
    }

    #[test]
    fn apply_substitutes_output_in_place() {
        let layout = SystemLayout::new(&[("R", 3), ("A", 2), ("B", 2)]).unwrap();
        let mut r = random::rng(3);
        let rho = DensityOperator::new(random::density_matrix(12, 4, &mut r), layout).unwrap();
        let ks = random::channel_kraus(2, 5, 2, &mut r);
        let ch = QuantumChannel::from_kraus(q("A"), SystemLayout::single("X", 5), ks.clone()).unwrap();
        let out = ch.apply(&rho, &["A"]).unwrap();
        assert_eq!(out.layout().labels(), vec!["R", "X", "B"]);
        let mut expect = CMatrix::zeros(30, 30);
        for k in &ks {
            let big = linalg::kron_all(&[&linalg::identity(3), k, &linalg::identity(2)]);
            expect += &big * rho.matrix() * big.adjoint();
        }
        assert!(max_abs_diff(out.matrix(), &expect) < 1e-12);
        assert!(ch.apply(&rho, &["R"]).is_err());
    }

    #[test]
    fn choi_roundtrip_random_channel() {
        let mut r = random::rng(11);
        let l = SystemLayout::new(&[("A", 2), ("B", 2)]).unwrap();
        let ks = random::channel_kraus(4, 4, 3, &mut r);
        let ch = QuantumChannel::from_kraus(l.clone(), l.clone(), ks).unwrap();
        let back = cj_inverse(ch.choi(), l.clone(), l).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = linalg::matrix_unit(4, i, j);
                let a = ch.apply_matrix(&e);
                assert!(max_abs_diff(&a, &back.apply_choi_formula(&e)) < 1e-10);
                assert!(max_abs_diff(&a, &back.apply_matrix(&e)) < 1e-10);
            }
        }
    }

    #[test]
    fn cj_inverse_rejects_non_psd() {
        let bad = phi_plus(2).scale(-1.0);
        assert!(matches!(cj_inverse(&bad, q("A"), q("B")), Err(Error::NotCompletelyPositive(_))));
    }

    #[test]
    fn transpose_of_unitary_and_identity() {
        let mut r = random::rng(5);
        let u = random::unitary(3, &mut r);
        let l = SystemLayout::single("A", 3);
        let t = QuantumChannel::unitary(l.clone(), u.clone()).unwrap().transpose_channel().unwrap();
        let x = random::density_matrix(3, 3, &mut r);
        let expect = u.transpose() * &x * linalg::conj(&u);
        assert!(max_abs_diff(&t.apply_matrix(&x), &expect) < 1e-12);
        let id = QuantumChannel::identity(l).transpose_channel().unwrap();
        assert!(max_abs_diff(&id.apply_matrix(&x), &x) < 1e-15);
    }

    #[test]
    fn stinespring_of_measurement() {
        let k0 = linalg::matrix_unit(2, 0, 0);
        let k1 = linalg::matrix_unit(2, 1, 1);
        let m = QuantumChannel::from_kraus(q("A"), q("A"), vec![k0, k1]).unwrap();
        let v = m.stinespring_dilate().unwrap();
        assert_eq!(v.output().dims(), vec![2, 2]);
        let mut r = random::rng(2);
        let rho = random::density_matrix(2, 2, &mut r);
        let big = v.matrix() * &rho * v.matrix().adjoint();
        let red = linalg::partial_trace(&big, &[2, 2], &[true, false]);
        assert!(max_abs_diff(&red, &m.apply_matrix(&rho)) < 1e-12);
    }

    #[test]
    fn diamond_examples() {
        let id = QuantumChannel::identity(q("A"));
        let tau = DensityOperator::maximally_mixed(q("A"));
        let dep = QuantumChannel::constant(q("A"), &tau).unwrap();
        let b = diamond_distance_bounds(&id, &dep).unwrap();
        assert!((b.lower - 1.5).abs() < 1e-12 && (b.upper - 3.0).abs() < 1e-12);
        let z = diamond_distance_bounds_with_heuristic(&id, &id, 0).unwrap();
        assert_eq!((z.lower, z.upper), (0.0, 0.0));
        let h = diamond_distance_bounds_with_heuristic(&id, &dep, 0).unwrap().heuristic_exact.unwrap();
        // ‖id − ⟨τ⟩‖⋄ = 2(1 − 1/d²) for a qubit.
        assert!((h - 1.5).abs() < 1e-9);
        let x = QuantumChannel::unitary(q("A"), pauli_x()).unwrap();
        let hx = diamond_distance_bounds_with_heuristic(&id, &x, 0).unwrap().heuristic_exact.unwrap();
        assert!((hx - 2.0).abs() < 1e-9);
    }

    #[test]
    fn json_roundtrip() {
        let mut r = random::rng(9);
        let ks = random::channel_kraus(2, 3, 2, &mut r);
        let ch = QuantumChannel::from_kraus(q("A"), SystemLayout::single("B", 3), ks).unwrap();
        let s = ch.to_json();
        let back = QuantumChannel::from_json(&s).unwrap();
        assert!(max_abs_diff(back.choi(), ch.choi()) < 1e-15);
        assert!(QuantumChannel::from_json(&s.replace("\"schema\"", "\"extra\":1,\"schema\"")).is_err());
    }

    #[test]
    fn discard_channel_is_partial_trace() {
        let l = SystemLayout::new(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let tr = QuantumChannel::discard(l.clone(), &["B"]).unwrap();
        assert_eq!(tr.output().labels(), vec!["A", "C"]);
        let mut r = random::rng(4);
        let rho = random::density_matrix(12, 12, &mut r);
        let expect = linalg::partial_trace(&rho, &[2, 3, 2], &[true, false, true]);
        assert!(max_abs_diff(&tr.apply_matrix(&rho), &expect) < 1e-12);
        assert!(tr.is_tp());
    }
}
