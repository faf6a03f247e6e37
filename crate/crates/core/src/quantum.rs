//! Registers, density operators, special states, norms and entropies.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE};

/// Tolerance used by every structural validity check.
pub const TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies.
pub const EIG_CLAMP: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub dim: usize,
    /// Direct-sum block sizes, when the register is a sum of orthogonal pieces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
}

impl PartialEq for Register {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.dim == other.dim
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemLayout {
    registers: Vec<Register>,
}

impl SystemLayout {
    pub fn new<S: AsRef<str>>(regs: &[(S, usize)]) -> Result<Self> {
        let registers = regs
            .iter()
            .map(|(l, d)| Register { label: l.as_ref().to_string(), dim: *d, blocks: None })
            .collect();
        Self::from_registers(registers)
    }

    pub fn from_registers(registers: Vec<Register>) -> Result<Self> {
        for (k, r) in registers.iter().enumerate() {
            if r.dim == 0 {
                return Err(Error::InvalidArgument(format!("register `{}` has dimension 0", r.label)));
            }
            if registers[..k].iter().any(|o| o.label == r.label) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
            if let Some(b) = &r.blocks {
                if b.iter().sum::<usize>() != r.dim {
                    return Err(Error::InvalidArgument(format!(
                        "blocks of `{}` do not sum to its dimension",
                        r.label
                    )));
                }
            }
        }
        Ok(SystemLayout { registers })
    }

    pub fn single(label: &str, dim: usize) -> Self {
        Self::new(&[(label, dim)]).expect("single register layout")
    }

    pub fn empty() -> Self {
        SystemLayout { registers: Vec::new() }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.registers.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::UnknownRegister(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.registers[self.position(label)?].dim)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.registers.iter().any(|r| r.label == label)
    }

    pub fn blocks(&self, label: &str) -> Option<&[usize]> {
        self.registers.iter().find(|r| r.label == label).and_then(|r| r.blocks.as_deref())
    }

    pub fn with_blocks(mut self, label: &str, blocks: Vec<usize>) -> Result<Self> {
        let p = self.position(label)?;
        self.registers[p].blocks = Some(blocks);
        Self::from_registers(self.registers)
    }

    pub fn concat(&self, other: &SystemLayout) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self::from_registers(regs)
    }

    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let regs = labels
            .iter()
            .map(|l| self.position(l).map(|p| self.registers[p].clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_registers(regs)
    }

    /// Copy with every label suffixed, used for reference copies of a layout.
    pub fn primed(&self, suffix: &str) -> Self {
        SystemLayout {
            registers: self
                .registers
                .iter()
                .map(|r| Register { label: format!("{}{}", r.label, suffix), dim: r.dim, blocks: r.blocks.clone() })
                .collect(),
        }
    }

    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.registers.iter().map(|r| format!("{}:{}", r.label, r.dim)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Partial trace of a raw operator over the named registers.
pub fn trace_out(m: &CMatrix, layout: &SystemLayout, discard: &[&str]) -> Result<(CMatrix, SystemLayout)> {
    let pos = layout.positions(discard)?;
    let keep: Vec<bool> = (0..layout.len()).map(|k| !pos.contains(&k)).collect();
    let regs = layout
        .registers()
        .iter()
        .enumerate()
        .filter(|(k, _)| keep[*k])
        .map(|(_, r)| r.clone())
        .collect();
    Ok((linalg::partial_trace(m, &layout.dims(), &keep), SystemLayout::from_registers(regs)?))
}

/// Reorder a raw operator so its registers follow `order` (must list every register).
pub fn reorder(m: &CMatrix, layout: &SystemLayout, order: &[&str]) -> Result<(CMatrix, SystemLayout)> {
    if order.len() != layout.len() {
        return Err(Error::LayoutMismatch(format!("permutation must list all registers of {layout}")));
    }
    let perm = layout.positions(order)?;
    let new_layout = layout.select(order)?;
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return Ok((m.clone(), new_layout));
    }
    Ok((linalg::permute_subsystems(m, &layout.dims(), &perm), new_layout))
}

/// Positive, unit-trace operator with a register layout.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: SystemLayout,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, layout: SystemLayout) -> Result<Self> {
        let d = linalg::check_square(&matrix, "density operator")?;
        if d != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {d}x{d} but layout {layout} has dimension {}",
                layout.total_dim()
            )));
        }
        let asym = linalg::asymmetry(&matrix);
        if asym > TOL {
            return Err(Error::NotHermitian(asym));
        }
        let matrix = linalg::hermitian_part(&matrix);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(tr));
        }
        let min = linalg::eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min < -TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityOperator { matrix, layout })
    }

    pub fn from_pure(psi: &CVector, layout: SystemLayout) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(n * n));
        }
        Self::new(linalg::projector(psi), layout)
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        DensityOperator { matrix: linalg::identity(d).scale(1.0 / d as f64), layout }
    }

    /// Computational basis state |index⟩⟨index|.
    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range {d}")));
        }
        Ok(DensityOperator { matrix: linalg::matrix_unit(d, index, index), layout })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_parts(self) -> (CMatrix, SystemLayout) {
        (self.matrix, self.layout)
    }

    pub fn partial_trace(&self, discard: &[&str]) -> Result<Self> {
        let (m, l) = trace_out(&self.matrix, &self.layout, discard)?;
        Ok(DensityOperator { matrix: m, layout: l })
    }

    /// Reduced state on the listed registers, in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<Self> {
        self.layout.positions(keep)?;
        let labels = self.layout.labels();
        let discard: Vec<&str> = labels.iter().copied().filter(|l| !keep.contains(l)).collect();
        let reduced = self.partial_trace(&discard)?;
        reduced.permute(keep)
    }

    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        let (m, l) = reorder(&self.matrix, &self.layout, order)?;
        Ok(DensityOperator { matrix: m, layout: l })
    }

    pub fn relabel(&self, layout: SystemLayout) -> Result<Self> {
        if layout.dims() != self.layout.dims() {
            return Err(Error::LayoutMismatch(format!("cannot relabel {} as {layout}", self.layout)));
        }
        Ok(DensityOperator { matrix: self.matrix.clone(), layout })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::LayoutMismatch(format!("{} vs {}", self.layout, other.layout)));
        }
        Ok(trace_norm_hermitian(&(&self.matrix - &other.matrix)))
    }
}

/// Kronecker product with concatenated layouts.
pub fn tensor_compose(parts: &[&DensityOperator]) -> Result<DensityOperator> {
    let mut layout = SystemLayout::empty();
    let mut matrix = CMatrix::identity(1, 1);
    for p in parts {
        layout = layout.concat(&p.layout)?;
        matrix = linalg::kron(&matrix, &p.matrix);
    }
    Ok(DensityOperator { matrix, layout })
}

pub fn phi_plus_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = linalg::real(a);
    }
    v
}

/// |φ⁺⟩⟨φ⁺| with |φ⁺⟩ = d^{-1/2} Σ|ii⟩.
pub fn phi_plus(d: usize) -> CMatrix {
    linalg::projector(&phi_plus_vector(d))
}

/// Π⁻ = 1 − φ⁺.
pub fn pi_minus(d: usize) -> CMatrix {
    linalg::identity(d * d) - phi_plus(d)
}

/// τ⁻ = Π⁻ / (d² − 1).
pub fn tau_minus(d: usize) -> CMatrix {
    pi_minus(d).scale(1.0 / ((d * d) as f64 - 1.0))
}

pub fn maximally_mixed(d: usize) -> CMatrix {
    linalg::identity(d).scale(1.0 / d as f64)
}

/// φ⁺ on registers `S`, `S'`.
pub fn max_entangled(d: usize) -> DensityOperator {
    max_entangled_on("S", "S'", d)
}

pub fn max_entangled_on(a: &str, b: &str, d: usize) -> DensityOperator {
    let layout = SystemLayout::new(&[(a, d), (b, d)]).expect("distinct labels");
    DensityOperator { matrix: phi_plus(d), layout }
}

/// Swap operator F on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = ONE;
        }
    }
    f
}

/// Returns (Tr[AB], Tr[F·A⊗B]).
pub fn swap_trick_check(a: &CMatrix, b: &CMatrix) -> Result<(C64, C64)> {
    let d = linalg::check_square(a, "A")?;
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!("A is {d}x{d}, B is {}x{}", b.nrows(), b.ncols())));
    }
    let lhs = (a * b).trace();
    let rhs = (swap_operator(d) * linalg::kron(a, b)).trace();
    Ok((lhs, rhs))
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    linalg::singular_values(m).iter().sum()
}

/// Trace norm of a Hermitian matrix via its spectrum.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    linalg::eigvalsh(m).iter().map(|x| x.abs()).sum()
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    linalg::singular_values(m).iter().copied().fold(0.0, f64::max)
}

/// Returns (|Tr[XY]|, ‖X‖₁‖Y‖_∞).
pub fn holder_check(x: &CMatrix, y: &CMatrix) -> (f64, f64) {
    ((x * y).trace().norm(), trace_norm(x) * operator_norm(y))
}

pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > EIG_CLAMP)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Entropy in bits of a (not necessarily validated) Hermitian matrix.
pub fn matrix_entropy(m: &CMatrix) -> f64 {
    spectrum_entropy(&linalg::eigvalsh(m))
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    matrix_entropy(&rho.matrix)
}

/// h(p) = −p log p − (1−p) log(1−p), in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    spectrum_entropy(&[p, 1.0 - p])
}

fn entropy_of(rho: &DensityOperator, regs: &[&str]) -> Result<f64> {
    if regs.is_empty() {
        return Ok(0.0);
    }
    let labels = rho.layout.labels();
    rho.layout.positions(regs)?;
    let discard: Vec<&str> = labels.iter().copied().filter(|l| !regs.contains(l)).collect();
    let (m, _) = trace_out(&rho.matrix, &rho.layout, &discard)?;
    Ok(matrix_entropy(&m))
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut out = a.to_vec();
    for x in b {
        if !out.contains(x) {
            out.push(x);
        }
    }
    out
}

pub fn entropy(rho: &DensityOperator, regs: &[&str]) -> Result<f64> {
    entropy_of(rho, regs)
}

/// H(A|B) = H(AB) − H(B).
pub fn conditional_entropy(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    Ok(entropy_of(rho, &union(a, b))? - entropy_of(rho, b)?)
}

/// I(A:B) = H(A) + H(B) − H(AB).
pub fn mutual_information(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    disjoint(a, b)?;
    Ok(entropy_of(rho, a)? + entropy_of(rho, b)? - entropy_of(rho, &union(a, b))?)
}

/// I(A:B|C) = H(AC) + H(BC) − H(ABC) − H(C).
pub fn conditional_mutual_information(rho: &DensityOperator, a: &[&str], b: &[&str], cond: &[&str]) -> Result<f64> {
    disjoint(a, b)?;
    disjoint(a, cond)?;
    disjoint(b, cond)?;
    let ac = union(a, cond);
    let bc = union(b, cond);
    let abc = union(&ac, b);
    Ok(entropy_of(rho, &ac)? + entropy_of(rho, &bc)? - entropy_of(rho, &abc)? - entropy_of(rho, cond)?)
}

fn disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    match a.iter().find(|x| b.contains(x)) {
        Some(x) => Err(Error::InvalidArgument(format!("register `{x}` appears on both sides"))),
        None => Ok(()),
    }
}

/// I(A:B) − ½‖ρ_AB − ρ_A⊗ρ_B‖₁².
pub fn pinsker_gap(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = union(a, b);
    let joint = rho.marginal(&ab)?;
    let ra = rho.marginal(a)?;
    let rb = rho.marginal(b)?;
    let prod = linalg::kron(ra.matrix(), rb.matrix());
    let dist = trace_norm_hermitian(&(joint.matrix() - prod));
    Ok(mutual_information(rho, a, b)? - 0.5 * dist * dist)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FannesFlavor {
    Entropy,
    CondEntropy,
    MutualInfo,
    CondMutualInfo,
}

impl FromStr for FannesFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(FannesFlavor::Entropy),
            "cond-entropy" => Ok(FannesFlavor::CondEntropy),
            "mutual-info" => Ok(FannesFlavor::MutualInfo),
            "cond-mutual-info" => Ok(FannesFlavor::CondMutualInfo),
            other => Err(Error::InvalidArgument(format!("unknown continuity-bound flavor `{other}`"))),
        }
    }
}

/// Continuity bound for entropic quantities of two states at trace distance `eps`.
///
/// `dims` is `[|A|]` for the entropy flavors and `[|A|, |B|]` for the
/// mutual-information flavors. For `eps > 1` the binary-entropy term is
/// replaced by its maximum, 1, and the entropy flavor saturates at log|A|.
pub fn fannes_bound(eps: f64, dims: &[usize], flavor: FannesFlavor) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside [0, 2]")));
    }
    let h = |x: f64| if x > 1.0 { 1.0 } else { binary_entropy(x) };
    let need = match flavor {
        FannesFlavor::Entropy | FannesFlavor::CondEntropy => 1,
        _ => 2,
    };
    if dims.len() < need || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("{flavor:?} needs {need} positive dimensions")));
    }
    let la = (dims[0] as f64).log2();
    Ok(match flavor {
        FannesFlavor::Entropy => {
            // T log(d−1) + h(T) peaks at T = 1 − 1/d with value log d and
            // only holds up to there; beyond it the bound is log d.
            let d = dims[0] as f64;
            let t = 0.5 * eps;
            if t >= 1.0 - 1.0 / d {
                la
            } else {
                let extra = if dims[0] > 1 { (d - 1.0).log2() } else { 0.0 };
                t * extra + h(t)
            }
        }
        FannesFlavor::CondEntropy => 4.0 * eps * la + 2.0 * h(eps),
        FannesFlavor::MutualInfo => {
            5.0 * eps * (dims[0].min(dims[1]) as f64).log2() + 3.0 * h(eps)
        }
        FannesFlavor::CondMutualInfo => {
            8.0 * eps * (dims[0].min(dims[1]) as f64).log2() + 4.0 * h(eps)
        }
    })
}

/// Named entropic quantities, in bits, in deterministic order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntropyLedger {
    pub entries: BTreeMap<String, f64>,
}

impl EntropyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, value: f64) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }
}

/// Embed a d×d operator into the top-left corner of a larger space.
pub fn embed_top_left(m: &CMatrix, total: usize) -> CMatrix {
    let mut out = CMatrix::zeros(total, total);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, max_abs_diff};

    fn qubit(label: &str) -> SystemLayout {
        SystemLayout::single(label, 2)
    }

    #[test]
    fn layout_rejects_duplicates() {
        assert!(matches!(SystemLayout::new(&[("A", 2), ("A", 3)]), Err(Error::DuplicateLabel(_))));
        let a = qubit("A");
        assert!(a.concat(&a).is_err());
    }

    #[test]
    fn layout_equality_ignores_blocks() {
        let a = SystemLayout::single("C", 6);
        let b = SystemLayout::single("C", 6).with_blocks("C", vec![4, 2]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, SystemLayout::single("D", 6));
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let ta = DensityOperator::maximally_mixed(qubit("A"));
        let tb = DensityOperator::maximally_mixed(qubit("B"));
        let t = tensor_compose(&[&ta, &tb]).unwrap();
        assert!(max_abs_diff(t.matrix(), &maximally_mixed(4)) < 1e-15);
        assert!(tensor_compose(&[&ta, &ta]).is_err());
    }

    #[test]
    fn phi_plus_with_tag_is_rank_one() {
        let phi = max_entangled_on("A", "A'", 2);
        let zero = DensityOperator::basis(qubit("T"), 0).unwrap();
        let s = tensor_compose(&[&phi, &zero]).unwrap();
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
        let ev = s.eigenvalues();
        assert!((ev[7] - 1.0).abs() < 1e-12 && ev[6].abs() < 1e-12);
    }

    #[test]
    fn marginals_of_special_states() {
        let phi = max_entangled_on("A", "A'", 2);
        let m = phi.partial_trace(&["A'"]).unwrap();
        assert!(max_abs_diff(m.matrix(), &maximally_mixed(2)) < 1e-15);
        assert!(phi.partial_trace(&["Z"]).is_err());
        let q = phi_plus(3);
        assert!((pi_minus(3).trace().re - 8.0).abs() < 1e-12);
        assert!((tau_minus(3) * &q).trace().norm() < 1e-15);
        let entries = phi_plus(2);
        assert!((entries[(0, 3)].re - 0.5).abs() < 1e-15 && entries[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn density_operator_validation() {
        let l = qubit("A");
        let bad_trace = linalg::identity(2);
        assert!(matches!(DensityOperator::new(bad_trace, l.clone()), Err(Error::NotNormalized(_))));
        let mut asym = maximally_mixed(2);
        asym[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityOperator::new(asym, l.clone()), Err(Error::NotHermitian(_))));
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityOperator::new(neg, l.clone()), Err(Error::NotPositive(_))));
        let mut tiny = maximally_mixed(2);
        tiny[(0, 1)] = c(1e-12, 0.0);
        let ok = DensityOperator::new(tiny, l).unwrap();
        assert_eq!(ok.matrix()[(0, 1)], ok.matrix()[(1, 0)].conj());
    }

    #[test]
    fn swap_trick_examples() {
        let (l, r) = swap_trick_check(&linalg::identity(2), &linalg::identity(2)).unwrap();
        assert!((l.re - 2.0).abs() < 1e-15 && (r.re - 2.0).abs() < 1e-15);
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let z = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let (l, r) = swap_trick_check(&x, &z).unwrap();
        assert!(l.norm() < 1e-15 && r.norm() < 1e-15);
        assert!(swap_trick_check(&x, &linalg::identity(3)).is_err());
    }

    #[test]
    fn norms_of_examples() {
        let d = phi_plus(2) - maximally_mixed(4);
        assert!((trace_norm(&d) - 1.5).abs() < 1e-12);
        assert!((trace_norm_hermitian(&d) - 1.5).abs() < 1e-12);
        let h = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(1., 0.), c(-1., 0.)]).scale(1.0 / 2f64.sqrt());
        assert!((operator_norm(&h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert!((matrix_entropy(&maximally_mixed(8)) - 3.0).abs() < 1e-12);
        let phi = max_entangled_on("A", "A'", 2);
        assert!((mutual_information(&phi, &["A"], &["A'"]).unwrap() - 2.0).abs() < 1e-12);
        let mut cl = CMatrix::zeros(4, 4);
        cl[(0, 0)] = c(0.5, 0.0);
        cl[(3, 3)] = c(0.5, 0.0);
        let cl = DensityOperator::new(cl, SystemLayout::new(&[("A", 2), ("B", 2)]).unwrap()).unwrap();
        assert!((mutual_information(&cl, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
    }

    #[test]
    fn pinsker_examples() {
        let phi = max_entangled_on("A", "B", 2);
        assert!((pinsker_gap(&phi, &["A"], &["B"]).unwrap() - 0.875).abs() < 1e-12);
        let ta = DensityOperator::maximally_mixed(qubit("A"));
        let tb = DensityOperator::basis(qubit("B"), 1).unwrap();
        let p = tensor_compose(&[&ta, &tb]).unwrap();
        assert!(pinsker_gap(&p, &["A"], &["B"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fannes_examples() {
        for f in [FannesFlavor::Entropy, FannesFlavor::CondEntropy, FannesFlavor::MutualInfo, FannesFlavor::CondMutualInfo] {
            assert_eq!(fannes_bound(0.0, &[2, 2], f).unwrap(), 0.0);
        }
        let v = fannes_bound(0.1, &[2, 2], FannesFlavor::MutualInfo).unwrap();
        assert!((v - (0.5 + 3.0 * binary_entropy(0.1))).abs() < 1e-12);
        assert!("bogus".parse::<FannesFlavor>().is_err());
        assert!(fannes_bound(2.5, &[2], FannesFlavor::Entropy).is_err());
    }

    #[test]
    fn permute_and_marginal_order() {
        let a = DensityOperator::basis(qubit("A"), 1).unwrap();
        let b = DensityOperator::maximally_mixed(SystemLayout::single("B", 3));
        let ab = tensor_compose(&[&a, &b]).unwrap();
        let ba = ab.permute(&["B", "A"]).unwrap();
        assert!(max_abs_diff(ba.matrix(), &kron(b.matrix(), a.matrix())) < 1e-15);
        let m = ab.marginal(&["B", "A"]).unwrap();
        assert!(max_abs_diff(m.matrix(), ba.matrix()) < 1e-15);
    }
}
