//! Finite-dimensional process-matrix formalism.
//!
//! A bipartite process matrix W lives on H_{A1} ⊗ H_{A2} ⊗ H_{B1} ⊗ H_{B2}
//! (inputs 1, outputs 2) and maps pairs of local operations, given as
//! Choi-Jamiołkowski operators, to outcome probabilities through
//! p = Tr[W (M_i^A ⊗ M_j^B)]. Validity is the conjunction of positivity,
//! the trace normalization Tr W = d_{A2} d_{B2}, and three projective
//! conditions expressed with the depolarize-and-reinsert map `_X W`.
//!
//! The one-party scenario is the special case where one party's spaces are
//! one-dimensional.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator_core::{
    depolarize_to_identity, is_positive_semidefinite, min_eigenvalue, partial_trace,
    spectral_norm, tensor, LabeledOperator, SubsystemLabel, DEFAULT_TOL,
};

pub const PARTY_LABELS: [&str; 4] = ["A1", "A2", "B1", "B2"];

/// One party's local operation: a list of CJ operators, one per outcome,
/// whose sum should be trace-preserving.
#[derive(Debug, Clone)]
pub struct Instrument {
    pub party: String,
    pub input_label: SubsystemLabel,
    pub output_label: SubsystemLabel,
    pub elements: Vec<LabeledOperator>,
}

/// A process matrix over the labels A1, A2, B1, B2 with the tolerance used
/// by its validity checks.
#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    op: LabeledOperator,
    pub tolerance: f64,
}

/// Claimed convex decomposition W = λ W^{A≺B} + (1−λ) W^{B≺A}.
#[derive(Debug, Clone)]
pub struct CausalDecomposition {
    pub lambda: f64,
    pub w_ab: ProcessMatrix,
    pub w_ba: ProcessMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalDirection {
    /// A may signal to B: W is invariant under depolarizing B2.
    AToB,
    /// B may signal to A: W is invariant under depolarizing A2.
    BToA,
    /// Shared state: W is invariant under depolarizing both outputs.
    NoSignaling,
}

impl ProcessMatrix {
    /// Wrap an operator as a process matrix. The operator must carry exactly
    /// the labels A1, A2, B1, B2 (any order; they are normalized to that
    /// order internally).
    pub fn new(op: LabeledOperator, tolerance: f64) -> Result<Self> {
        let mut names: Vec<&str> = op.labels().iter().map(|l| l.name.as_str()).collect();
        names.sort_unstable();
        let mut want = PARTY_LABELS;
        want.sort_unstable();
        if names != want {
            return Err(Error::LabelMismatch(format!(
                "process matrix needs labels {:?}, got {:?}",
                PARTY_LABELS, names
            )));
        }
        let op = op.permute(&PARTY_LABELS)?;
        Ok(Self { op, tolerance })
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let d: Vec<usize> = self.op.labels().iter().map(|l| l.dim).collect();
        (d[0], d[1], d[2], d[3])
    }

    /// Product of the output dimensions d_{A2} d_{B2}.
    pub fn output_dim(&self) -> usize {
        let (_, da2, _, db2) = self.dims();
        da2 * db2
    }
}

/// CJ operator of a completely positive map given by Kraus operators, built
/// with the non-normalized maximally entangled state |Φ⁺⟩ = Σ_i |ii⟩:
/// M = Σ_k (1 ⊗ K_k) |Φ⁺⟩⟨Φ⁺| (1 ⊗ K_k)†.
///
/// Indexing: M[(i,a),(j,b)] = Σ_k K_k[a,i] · conj(K_k[b,j]) on
/// H_{X1} ⊗ H_{X2}.
pub fn cj_from_kraus(
    kraus: &[Array2<C64>],
    input: SubsystemLabel,
    output: SubsystemLabel,
) -> Result<LabeledOperator> {
    let (din, dout) = (input.dim, output.dim);
    for k in kraus {
        if k.nrows() != dout || k.ncols() != din {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {}x{}",
                k.nrows(),
                k.ncols(),
                dout,
                din
            )));
        }
    }
    let d = din * dout;
    let mut data = Array2::zeros((d, d));
    for k in kraus {
        for i in 0..din {
            for a in 0..dout {
                let left = k[(a, i)];
                if left == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..din {
                    for b in 0..dout {
                        data[(i * dout + a, j * dout + b)] += left * k[(b, j)].conj();
                    }
                }
            }
        }
    }
    LabeledOperator::new(vec![input, output], data)
}

/// Per-element positivity flags plus the trace-preservation defect of the
/// summed instrument.
#[derive(Debug, Clone)]
pub struct InstrumentReport {
    pub element_positive: Vec<bool>,
    pub element_min_eigenvalue: Vec<f64>,
    /// ‖Σ_i Tr_{X2} M_i − 1_{X1}‖ in spectral norm.
    pub closure_deviation: f64,
    pub pass: bool,
}

pub fn check_instrument(inst: &Instrument, tol: f64) -> Result<InstrumentReport> {
    let mut element_positive = Vec::new();
    let mut element_min_eigenvalue = Vec::new();
    let mut sum: Option<LabeledOperator> = None;
    for el in &inst.elements {
        element_positive.push(is_positive_semidefinite(el, tol)?);
        element_min_eigenvalue.push(min_eigenvalue(el, tol)?);
        let reduced = partial_trace(el, &[inst.output_label.name.as_str()])?;
        sum = Some(match sum {
            None => reduced,
            Some(s) => s.add(&reduced)?,
        });
    }
    let sum = sum.ok_or_else(|| Error::DimensionMismatch("empty instrument".into()))?;
    let ident = LabeledOperator::identity(vec![inst.input_label.clone()]);
    let closure_deviation = spectral_norm(&sum.sub(&ident)?.into_data());
    let pass = element_positive.iter().all(|&p| p) && closure_deviation <= tol.max(1e-12);
    Ok(InstrumentReport {
        element_positive,
        element_min_eigenvalue,
        closure_deviation,
        pass,
    })
}

/// Outcome probability p = Tr[W (M_a ⊗ M_b)].
///
/// `a` must carry labels A1, A2 and `b` labels B1, B2.
pub fn probability(
    w: &ProcessMatrix,
    a: &LabeledOperator,
    b: &LabeledOperator,
) -> Result<f64> {
    let joint = tensor(a, b)?.permute(&PARTY_LABELS)?;
    let p = w.op().matmul(&joint)?.trace();
    Ok(p.re)
}

#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub deviation: f64,
    pub pass: bool,
}

/// Result of the five-condition validity suite.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub conditions: Vec<ConditionCheck>,
    pub pass: bool,
}

impl ValidityReport {
    pub fn failed(&self) -> Vec<&ConditionCheck> {
        self.conditions.iter().filter(|c| !c.pass).collect()
    }
}

/// Check the five validity conditions of a bipartite process matrix:
/// positivity, Tr W = d_{A2} d_{B2}, the two reduced-output conditions, and
/// the affine span condition W = _{A2}W + _{B2}W − _{A2B2}W.
///
/// Deviations are reported in spectral norm.
pub fn validate_w(w: &ProcessMatrix) -> Result<ValidityReport> {
    let tol = w.tolerance;
    let op = w.op();
    let mut conditions = Vec::with_capacity(5);

    let herm_dev = op.hermiticity_deviation();
    let pos_dev = if herm_dev > tol {
        herm_dev
    } else {
        (-min_eigenvalue(op, tol)?).max(0.0)
    };
    conditions.push(ConditionCheck {
        name: "positivity",
        deviation: pos_dev,
        pass: pos_dev <= tol,
    });

    let trace_dev = (op.trace() - C64::new(w.output_dim() as f64, 0.0)).norm();
    conditions.push(ConditionCheck {
        name: "trace",
        deviation: trace_dev,
        pass: trace_dev <= tol,
    });

    let dep = |names: &[&str]| depolarize_to_identity(op, names);
    let b1b2 = dep(&["B1", "B2"])?;
    let a2b1b2 = dep(&["A2", "B1", "B2"])?;
    let dev3 = b1b2.sub(&a2b1b2)?.spectral_norm();
    conditions.push(ConditionCheck {
        name: "reduced_B1B2",
        deviation: dev3,
        pass: dev3 <= tol,
    });

    let a1a2 = dep(&["A1", "A2"])?;
    let b2a1a2 = dep(&["B2", "A1", "A2"])?;
    let dev4 = a1a2.sub(&b2a1a2)?.spectral_norm();
    conditions.push(ConditionCheck {
        name: "reduced_A1A2",
        deviation: dev4,
        pass: dev4 <= tol,
    });

    let affine = dep(&["A2"])?
        .add(&dep(&["B2"])?)?
        .sub(&dep(&["A2", "B2"])?)?;
    let dev5 = op.sub(&affine)?.spectral_norm();
    conditions.push(ConditionCheck {
        name: "affine_span",
        deviation: dev5,
        pass: dev5 <= tol,
    });

    let pass = conditions.iter().all(|c| c.pass);
    Ok(ValidityReport { conditions, pass })
}

#[derive(Debug, Clone)]
pub struct OrderReport {
    pub direction: CausalDirection,
    pub validity: ValidityReport,
    /// ‖W − _{B2}W‖ (A≺B), ‖W − _{A2}W‖ (B≺A), or both plus the
    /// shared-state deviation for the no-signaling check.
    pub deviations: Vec<(&'static str, f64)>,
    pub pass: bool,
}

/// Check compatibility of W with a fixed causal order.
///
/// A≺B-compatible processes are exactly those with W = _{B2}W (no
/// dependence on B's output), and symmetrically for B≺A. No-signaling
/// processes satisfy both and reduce to a shared state ρ_{A1B1} ⊗ 1.
pub fn check_order(w: &ProcessMatrix, direction: CausalDirection) -> Result<OrderReport> {
    let validity = validate_w(w)?;
    let tol = w.tolerance;
    let op = w.op();
    let dev_ab = op.sub(&depolarize_to_identity(op, &["B2"])?)?.spectral_norm();
    let dev_ba = op.sub(&depolarize_to_identity(op, &["A2"])?)?.spectral_norm();
    let deviations = match direction {
        CausalDirection::AToB => vec![("no_B2_dependence", dev_ab)],
        CausalDirection::BToA => vec![("no_A2_dependence", dev_ba)],
        CausalDirection::NoSignaling => {
            let dev_ns = op
                .sub(&depolarize_to_identity(op, &["A2", "B2"])?)?
                .spectral_norm();
            vec![
                ("no_B2_dependence", dev_ab),
                ("no_A2_dependence", dev_ba),
                ("shared_state_form", dev_ns),
            ]
        }
    };
    let pass = validity.pass && deviations.iter().all(|&(_, d)| d <= tol);
    Ok(OrderReport {
        direction,
        validity,
        deviations,
        pass,
    })
}

/// True iff the claimed convex decomposition reproduces W within `tol` and
/// both components pass their respective order checks.
pub fn check_decomposition(
    w: &ProcessMatrix,
    d: &CausalDecomposition,
    tol: f64,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&d.lambda) {
        return Err(Error::InvalidConfig(format!("lambda = {} not in [0,1]", d.lambda)));
    }
    let ab_ok = check_order(&d.w_ab, CausalDirection::AToB)?.pass;
    let ba_ok = check_order(&d.w_ba, CausalDirection::BToA)?.pass;
    if !ab_ok || !ba_ok {
        return Err(Error::InvalidConfig(
            "decomposition component fails its order check".into(),
        ));
    }
    let mix = d
        .w_ab
        .op()
        .scale(C64::new(d.lambda, 0.0))
        .add(&d.w_ba.op().scale(C64::new(1.0 - d.lambda, 0.0)))?;
    Ok(w.op().sub(&mix)?.spectral_norm() <= tol)
}

/// Joint and marginal outcome statistics over sweeps of both parties'
/// instrument settings, with the worst-case total-variation dependence of
/// each party's marginal on the other party's setting.
#[derive(Debug, Clone)]
pub struct SignalingTable {
    /// Joint distributions indexed by (a_setting, b_setting).
    pub joints: Vec<Vec<Array2<f64>>>,
    /// max TV distance of A's marginal as B's setting varies.
    pub b_to_a: f64,
    /// max TV distance of B's marginal as A's setting varies.
    pub a_to_b: f64,
}

fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Tabulate marginal outcome distributions of each party as the other's
/// setting varies over the given instrument families.
pub fn signaling_matrix(
    w: &ProcessMatrix,
    family_a: &[Instrument],
    family_b: &[Instrument],
) -> Result<SignalingTable> {
    let mut joints: Vec<Vec<Array2<f64>>> = Vec::with_capacity(family_a.len());
    for ia in family_a {
        let mut row = Vec::with_capacity(family_b.len());
        for ib in family_b {
            let mut joint = Array2::zeros((ia.elements.len(), ib.elements.len()));
            for (i, ma) in ia.elements.iter().enumerate() {
                for (j, mb) in ib.elements.iter().enumerate() {
                    joint[(i, j)] = probability(w, ma, mb)?;
                }
            }
            row.push(joint);
        }
        joints.push(row);
    }

    let mut b_to_a: f64 = 0.0;
    for row in &joints {
        let marginals: Vec<Vec<f64>> = row
            .iter()
            .map(|j| j.rows().into_iter().map(|r| r.sum()).collect())
            .collect();
        for m in &marginals[1..] {
            b_to_a = b_to_a.max(tv_distance(&marginals[0], m));
        }
    }
    let mut a_to_b: f64 = 0.0;
    if !joints.is_empty() {
        for jb in 0..family_b.len() {
            let marginals: Vec<Vec<f64>> = joints
                .iter()
                .map(|row| {
                    row[jb]
                        .columns()
                        .into_iter()
                        .map(|c| c.sum())
                        .collect::<Vec<f64>>()
                })
                .collect();
            for m in &marginals[1..] {
                a_to_b = a_to_b.max(tv_distance(&marginals[0], m));
            }
        }
    }
    Ok(SignalingTable {
        joints,
        b_to_a,
        a_to_b,
    })
}

// ---------------------------------------------------------------------------
// Fixture builders
// ---------------------------------------------------------------------------

pub fn label(name: &str, dim: usize) -> SubsystemLabel {
    SubsystemLabel::new(name, dim)
}

fn basis_ket(i: usize, d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[i] = C64::new(1.0, 0.0);
    v
}

fn projector(v: &[C64]) -> Array2<C64> {
    let d = v.len();
    let mut m = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = v[i] * v[j].conj();
        }
    }
    m
}

/// Deterministic list of repreparation states: basis states plus the three
/// canonical superpositions of the first two basis vectors.
pub fn reprep_states(d: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = (0..d).map(|i| basis_ket(i, d)).collect();
    if d >= 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut plus = vec![C64::new(0.0, 0.0); d];
        plus[0] = C64::new(s, 0.0);
        plus[1] = C64::new(s, 0.0);
        let mut minus = plus.clone();
        minus[1] = C64::new(-s, 0.0);
        let mut plus_i = plus.clone();
        plus_i[1] = C64::new(0.0, s);
        out.push(plus);
        out.push(minus);
        out.push(plus_i);
    }
    out
}

/// Measure in the computational basis, then reprepare `phi`.
pub fn measure_reprep_instrument(
    party: &str,
    input: SubsystemLabel,
    output: SubsystemLabel,
    phi: &[C64],
) -> Instrument {
    let phi_proj = projector(phi);
    let elements = (0..input.dim)
        .map(|i| {
            let mut m = Array2::zeros((input.dim, input.dim));
            m[(i, i)] = C64::new(1.0, 0.0);
            let inp = LabeledOperator::new(vec![input.clone()], m).unwrap();
            let out = LabeledOperator::new(vec![output.clone()], phi_proj.clone()).unwrap();
            tensor(&inp, &out).unwrap()
        })
        .collect();
    Instrument {
        party: party.into(),
        input_label: input,
        output_label: output,
        elements,
    }
}

/// The default deterministic setting family for one party: one
/// measure-and-reprepare instrument per state in [`reprep_states`].
pub fn default_setting_family(
    party: &str,
    input: SubsystemLabel,
    output: SubsystemLabel,
) -> Vec<Instrument> {
    reprep_states(output.dim)
        .iter()
        .map(|phi| measure_reprep_instrument(party, input.clone(), output.clone(), phi))
        .collect()
}

/// W = ρ_{A1B1} ⊗ 1_{A2B2}: a shared state with no signaling.
///
/// `rho` must carry labels A1 and B1 and have unit trace.
pub fn shared_state_w(rho: &LabeledOperator, db_out: (usize, usize), tol: f64) -> Result<ProcessMatrix> {
    let (da2, db2) = db_out;
    let w = tensor(
        rho,
        &LabeledOperator::identity(vec![label("A2", da2), label("B2", db2)]),
    )?;
    ProcessMatrix::new(w, tol)
}

/// Process vector of a channel: |w⟩ = (1 ⊗ Σ_k K_k ·) |Φ⁺⟩ as an operator
/// Σ_k (1⊗K_k)|Φ⁺⟩⟨Φ⁺|(1⊗K_k)† on (from, to).
///
/// Note the Choi pairing convention: when a party reprepares φ into `from`,
/// the state arriving at `to` is Σ_k K_k |φ*⟩ (conjugate in the canonical
/// basis).
pub fn channel_link(
    kraus: &[Array2<C64>],
    from: SubsystemLabel,
    to: SubsystemLabel,
) -> Result<LabeledOperator> {
    cj_from_kraus(kraus, from, to)
}

/// W = ρ_{A1} ⊗ C_{A2→B1} ⊗ 1_{B2}: A's output is piped through a channel
/// into B's input; A signals to B.
pub fn channel_w_a_to_b(
    rho_a1: &Array2<C64>,
    kraus: &[Array2<C64>],
    db2: usize,
    tol: f64,
) -> Result<ProcessMatrix> {
    let da1 = rho_a1.nrows();
    let da2 = kraus[0].ncols();
    let db1 = kraus[0].nrows();
    let rho = LabeledOperator::new(vec![label("A1", da1)], rho_a1.clone())?;
    let chan = channel_link(kraus, label("A2", da2), label("B1", db1))?;
    let w = tensor(
        &tensor(&rho, &chan)?,
        &LabeledOperator::identity(vec![label("B2", db2)]),
    )?;
    ProcessMatrix::new(w, tol)
}

/// Mirror of [`channel_w_a_to_b`]: B's output feeds A's input.
pub fn channel_w_b_to_a(
    rho_b1: &Array2<C64>,
    kraus: &[Array2<C64>],
    da2: usize,
    tol: f64,
) -> Result<ProcessMatrix> {
    let db1 = rho_b1.nrows();
    let db2 = kraus[0].ncols();
    let da1 = kraus[0].nrows();
    let rho = LabeledOperator::new(vec![label("B1", db1)], rho_b1.clone())?;
    let chan = channel_link(kraus, label("B2", db2), label("A1", da1))?;
    let w = tensor(
        &tensor(&rho, &chan)?,
        &LabeledOperator::identity(vec![label("A2", da2)]),
    )?;
    ProcessMatrix::new(w, tol)
}

/// The grandfather-paradox fixture: an identity channel looping A's output
/// back into A's own input (one-party scenario, B trivial). This violates
/// the affine validity condition; paired with a bit-flip instrument it
/// would force |0⟩ = |1⟩.
pub fn grandfather_loop_w(tol: f64) -> ProcessMatrix {
    let loop_op = channel_link(&[Array2::eye(2)], label("A2", 2), label("A1", 2))
        .unwrap()
        .permute(&["A1", "A2"])
        .unwrap();
    let w = tensor(
        &loop_op,
        &LabeledOperator::identity(vec![label("B1", 1), label("B2", 1)]),
    )
    .unwrap();
    ProcessMatrix::new(w, tol).unwrap()
}

/// One-element "apply unitary" instrument for the paradox demo.
pub fn unitary_instrument(
    party: &str,
    input: SubsystemLabel,
    output: SubsystemLabel,
    u: &Array2<C64>,
) -> Instrument {
    let cj = cj_from_kraus(&[u.clone()], input.clone(), output.clone()).unwrap();
    Instrument {
        party: party.into(),
        input_label: input,
        output_label: output,
        elements: vec![cj],
    }
}

/// A W that correlates both output spaces at once (forbidden by the
/// validity conditions): ρ_{A1} ⊗ ρ_{B1} ⊗ Σ_{ij}|ii⟩⟨jj|_{A2B2}, scaled to
/// the correct trace.
pub fn both_outputs_w(tol: f64) -> ProcessMatrix {
    let rho = |name: &str| {
        LabeledOperator::new(vec![label(name, 2)], projector(&basis_ket(0, 2))).unwrap()
    };
    let link = channel_link(&[Array2::eye(2)], label("A2", 2), label("B2", 2)).unwrap();
    let w = tensor(&tensor(&rho("A1"), &rho("B1")).unwrap(), &link)
        .unwrap()
        .scale(C64::new(2.0, 0.0));
    ProcessMatrix::new(w, tol).unwrap()
}

// ---------------------------------------------------------------------------
// Fixture (de)serialization
// ---------------------------------------------------------------------------

/// Serializable form of a labeled operator: labels plus row-major matrix
/// entries as (re, im) pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorData {
    pub labels: Vec<SubsystemLabel>,
    pub entries: Vec<(f64, f64)>,
}

impl OperatorData {
    pub fn from_operator(op: &LabeledOperator) -> Self {
        Self {
            labels: op.labels().to_vec(),
            entries: op.data().iter().map(|z| (z.re, z.im)).collect(),
        }
    }

    pub fn to_operator(&self) -> Result<LabeledOperator> {
        let dim: usize = self.labels.iter().map(|l| l.dim).product();
        if self.entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries, labels require {}",
                self.entries.len(),
                dim * dim
            )));
        }
        let data = Array2::from_shape_vec(
            (dim, dim),
            self.entries.iter().map(|&(re, im)| C64::new(re, im)).collect(),
        )
        .expect("shape checked above");
        LabeledOperator::new(self.labels.clone(), data)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionData {
    pub lambda: f64,
    pub w_ab: OperatorData,
    pub w_ba: OperatorData,
}

/// On-disk process fixture: the W operator, an optional tolerance, and an
/// optional claimed causal decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessFixture {
    pub w: OperatorData,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub decomposition: Option<DecompositionData>,
}

impl ProcessFixture {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serialization cannot fail")
    }

    pub fn process_matrix(&self) -> Result<ProcessMatrix> {
        ProcessMatrix::new(self.w.to_operator()?, self.tolerance.unwrap_or(DEFAULT_TOL))
    }

    pub fn causal_decomposition(&self) -> Result<Option<CausalDecomposition>> {
        let Some(d) = &self.decomposition else {
            return Ok(None);
        };
        let tol = self.tolerance.unwrap_or(DEFAULT_TOL);
        Ok(Some(CausalDecomposition {
            lambda: d.lambda,
            w_ab: ProcessMatrix::new(d.w_ab.to_operator()?, tol)?,
            w_ba: ProcessMatrix::new(d.w_ba.to_operator()?, tol)?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> Array2<C64> {
        array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]
    }

    fn hadamard() -> Array2<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        array![[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]]
    }

    fn ket0_proj() -> Array2<C64> {
        array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]]
    }

    fn qubit_shared_state() -> ProcessMatrix {
        let rho = tensor(
            &LabeledOperator::new(vec![label("A1", 2)], ket0_proj()).unwrap(),
            &LabeledOperator::new(vec![label("B1", 2)], ket0_proj()).unwrap(),
        )
        .unwrap();
        shared_state_w(&rho, (2, 2), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn cj_identity_channel() {
        // CJ of the identity = Σ_{ij}|ii⟩⟨jj| with trace d = 2.
        let cj = cj_from_kraus(&[Array2::eye(2)], label("X1", 2), label("X2", 2)).unwrap();
        assert!((cj.trace() - c(2., 0.)).norm() < 1e-14);
        assert!((cj.data()[(0, 0)] - c(1., 0.)).norm() < 1e-14);
        assert!((cj.data()[(0, 3)] - c(1., 0.)).norm() < 1e-14);
        assert!((cj.data()[(3, 0)] - c(1., 0.)).norm() < 1e-14);
        assert!(cj.data()[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn cj_bit_flip() {
        // X relabels: Σ_{ij} |i, i⊕1⟩⟨j, j⊕1|
        let cj = cj_from_kraus(&[pauli_x()], label("X1", 2), label("X2", 2)).unwrap();
        // basis (i,a): entries at (0,1)=1 and (1,0)=2 i.e. flat 1 and 2
        assert!((cj.data()[(1, 1)] - c(1., 0.)).norm() < 1e-14);
        assert!((cj.data()[(1, 2)] - c(1., 0.)).norm() < 1e-14);
        assert!((cj.data()[(2, 1)] - c(1., 0.)).norm() < 1e-14);
        assert!(cj.data()[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn cj_measure_outcome_zero() {
        // Kraus |0⟩⟨0| → |00⟩⟨00|
        let cj = cj_from_kraus(&[ket0_proj()], label("X1", 2), label("X2", 2)).unwrap();
        assert!((cj.data()[(0, 0)] - c(1., 0.)).norm() < 1e-14);
        assert!((cj.trace() - c(1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn instrument_projective_passes() {
        let inst = measure_reprep_instrument(
            "A",
            label("A1", 2),
            label("A2", 2),
            &[c(1., 0.), c(0., 0.)],
        );
        let rep = check_instrument(&inst, 1e-9).unwrap();
        assert!(rep.pass);
        assert!(rep.closure_deviation < 1e-12);
    }

    #[test]
    fn instrument_lossy_fails_with_unit_deviation() {
        let mut inst = measure_reprep_instrument(
            "A",
            label("A1", 2),
            label("A2", 2),
            &[c(1., 0.), c(0., 0.)],
        );
        inst.elements.truncate(1); // keep only the outcome-0 element
        let rep = check_instrument(&inst, 1e-9).unwrap();
        assert!(!rep.pass);
        assert!((rep.closure_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn instrument_unitary_channel_passes() {
        let inst = unitary_instrument("A", label("A1", 2), label("A2", 2), &hadamard());
        let rep = check_instrument(&inst, 1e-9).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn probability_certain_and_impossible_outcomes() {
        // One-party W = ρ ⊗ 1 with ρ = |0⟩⟨0|, B trivial.
        let rho = tensor(
            &LabeledOperator::new(vec![label("A1", 2)], ket0_proj()).unwrap(),
            &LabeledOperator::identity(vec![label("B1", 1)]),
        )
        .unwrap();
        let w = shared_state_w(&rho, (2, 1), DEFAULT_TOL).unwrap();
        let inst = measure_reprep_instrument(
            "A",
            label("A1", 2),
            label("A2", 2),
            &[c(0., 0.), c(1., 0.)],
        );
        let b_triv = LabeledOperator::identity(vec![label("B1", 1), label("B2", 1)]);
        let p0 = probability(&w, &inst.elements[0], &b_triv).unwrap();
        let p1 = probability(&w, &inst.elements[1], &b_triv).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
        assert!(p1.abs() < 1e-12);
    }

    #[test]
    fn probability_channel_matches_statevector_oracle() {
        // W pipes A's repreparation through U into B's basis measurement:
        // p(j | reprep φ) = |⟨j| U |φ*⟩|².
        let u = hadamard();
        let w = channel_w_a_to_b(&ket0_proj(), &[u.clone()], 2, DEFAULT_TOL).unwrap();
        for phi in reprep_states(2) {
            let inst_a =
                measure_reprep_instrument("A", label("A1", 2), label("A2", 2), &phi);
            let inst_b = measure_reprep_instrument(
                "B",
                label("B1", 2),
                label("B2", 2),
                &[c(1., 0.), c(0., 0.)],
            );
            // statevector oracle
            let phi_conj: Vec<C64> = phi.iter().map(|z| z.conj()).collect();
            let out: Vec<C64> = (0..2)
                .map(|j| (0..2).map(|k| u[(j, k)] * phi_conj[k]).sum())
                .collect();
            for j in 0..2 {
                let mut p = 0.0;
                for i in 0..2 {
                    p += probability(&w, &inst_a.elements[i], &inst_b.elements[j]).unwrap();
                }
                assert!(
                    (p - out[j].norm_sqr()).abs() < 1e-12,
                    "phi {:?} outcome {}: {} vs {}",
                    phi,
                    j,
                    p,
                    out[j].norm_sqr()
                );
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_for_valid_w() {
        let fixtures: Vec<ProcessMatrix> = vec![
            qubit_shared_state(),
            channel_w_a_to_b(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap(),
            channel_w_b_to_a(&ket0_proj(), &[pauli_x()], 2, DEFAULT_TOL).unwrap(),
        ];
        for w in &fixtures {
            for phi_a in reprep_states(2).iter().take(3) {
                for phi_b in reprep_states(2).iter().take(3) {
                    let ia =
                        measure_reprep_instrument("A", label("A1", 2), label("A2", 2), phi_a);
                    let ib =
                        measure_reprep_instrument("B", label("B1", 2), label("B2", 2), phi_b);
                    let mut total = 0.0;
                    for ma in &ia.elements {
                        for mb in &ib.elements {
                            total += probability(w, ma, mb).unwrap();
                        }
                    }
                    assert!((total - 1.0).abs() < 1e-10, "sum = {total}");
                }
            }
        }
    }

    #[test]
    fn validate_shared_state_passes() {
        let rep = validate_w(&qubit_shared_state()).unwrap();
        assert!(rep.pass, "{:?}", rep);
        for cond in &rep.conditions {
            assert!(cond.deviation < 1e-12);
        }
    }

    #[test]
    fn validate_grandfather_loop_fails() {
        let w = grandfather_loop_w(DEFAULT_TOL);
        let rep = validate_w(&w).unwrap();
        assert!(!rep.pass);
        // Trace is fine (Tr = d_{A2} = 2 with trivial B). With B trivial the
        // violated condition is the one-party reduction W = _{A2}W, which
        // lives in the reduced_B1B2 slot of the two-party embedding.
        assert!(rep.conditions[1].pass, "trace should pass");
        let reduced = &rep.conditions[2];
        assert_eq!(reduced.name, "reduced_B1B2");
        assert!(!reduced.pass);
        assert!(reduced.deviation > 1e-3);
    }

    #[test]
    fn grandfather_paradox_probability_breaks_normalization() {
        // The loop W assigns total probability 4 to the identity instrument
        // and 0 to the bit flip: the logical paradox shows up as a
        // normalization failure for deterministic operations.
        let w = grandfather_loop_w(DEFAULT_TOL);
        let b_triv = LabeledOperator::identity(vec![label("B1", 1), label("B2", 1)]);
        let ident = unitary_instrument("A", label("A1", 2), label("A2", 2), &Array2::eye(2));
        let flip = unitary_instrument("A", label("A1", 2), label("A2", 2), &pauli_x());
        let p_id = probability(&w, &ident.elements[0], &b_triv).unwrap();
        let p_flip = probability(&w, &flip.elements[0], &b_triv).unwrap();
        assert!((p_id - 4.0).abs() < 1e-12);
        assert!(p_flip.abs() < 1e-12);
    }

    #[test]
    fn validate_zero_w_fails_trace() {
        let w = ProcessMatrix::new(
            LabeledOperator::zeros(vec![
                label("A1", 2),
                label("A2", 2),
                label("B1", 2),
                label("B2", 2),
            ]),
            DEFAULT_TOL,
        )
        .unwrap();
        let rep = validate_w(&w).unwrap();
        assert!(!rep.pass);
        assert!(!rep.conditions[1].pass);
        assert!(rep.conditions[1].deviation > 1e-3);
    }

    #[test]
    fn validate_both_outputs_w_fails() {
        let rep = validate_w(&both_outputs_w(DEFAULT_TOL)).unwrap();
        assert!(!rep.pass);
        assert!(rep.conditions[1].pass, "trace is tuned to pass");
        assert!(rep.failed().iter().any(|c| c.deviation > 1e-3));
    }

    #[test]
    fn order_checks_classify_fixtures() {
        let ns = qubit_shared_state();
        for dir in [
            CausalDirection::AToB,
            CausalDirection::BToA,
            CausalDirection::NoSignaling,
        ] {
            assert!(check_order(&ns, dir).unwrap().pass);
        }

        let ab = channel_w_a_to_b(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        assert!(check_order(&ab, CausalDirection::AToB).unwrap().pass);
        let ba_rep = check_order(&ab, CausalDirection::BToA).unwrap();
        assert!(!ba_rep.pass);
        assert!(ba_rep.deviations[0].1 > 1e-3);
    }

    #[test]
    fn order_check_symmetric_mixture_fails_both() {
        let ab = channel_w_a_to_b(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        let ba = channel_w_b_to_a(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        let mix = ProcessMatrix::new(
            ab.op()
                .scale(c(0.5, 0.0))
                .add(&ba.op().scale(c(0.5, 0.0)))
                .unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(validate_w(&mix).unwrap().pass);
        assert!(!check_order(&mix, CausalDirection::AToB).unwrap().pass);
        assert!(!check_order(&mix, CausalDirection::BToA).unwrap().pass);
    }

    #[test]
    fn decomposition_checks() {
        let ab = channel_w_a_to_b(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        let ba = channel_w_b_to_a(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        let mix = ProcessMatrix::new(
            ab.op()
                .scale(c(0.5, 0.0))
                .add(&ba.op().scale(c(0.5, 0.0)))
                .unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        let d = CausalDecomposition {
            lambda: 0.5,
            w_ab: ab.clone(),
            w_ba: ba.clone(),
        };
        assert!(check_decomposition(&mix, &d, 1e-9).unwrap());

        // λ = 1 decomposition of W_ab itself: the w_ba component is unused.
        let d_pure = CausalDecomposition {
            lambda: 1.0,
            w_ab: ab.clone(),
            w_ba: ba.clone(),
        };
        assert!(check_decomposition(&ab, &d_pure, 1e-9).unwrap());

        // Claiming W_ab = W_ba via λ = 0 must fail.
        let d_wrong = CausalDecomposition {
            lambda: 0.0,
            w_ab: ab.clone(),
            w_ba: ba,
        };
        assert!(!check_decomposition(&ab, &d_wrong, 1e-9).unwrap());
    }

    #[test]
    fn signaling_matrix_classifies() {
        let fam_a = default_setting_family("A", label("A1", 2), label("A2", 2));
        let fam_b = default_setting_family("B", label("B1", 2), label("B2", 2));

        let ns = qubit_shared_state();
        let t = signaling_matrix(&ns, &fam_a, &fam_b).unwrap();
        assert!(t.a_to_b < 1e-12);
        assert!(t.b_to_a < 1e-12);

        let ab = channel_w_a_to_b(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        let t = signaling_matrix(&ab, &fam_a, &fam_b).unwrap();
        assert!(t.a_to_b > 1e-2, "a_to_b = {}", t.a_to_b);
        assert!(t.b_to_a < 1e-12, "b_to_a = {}", t.b_to_a);

        // Symmetric mixture signals both ways.
        let ba = channel_w_b_to_a(&ket0_proj(), &[hadamard()], 2, DEFAULT_TOL).unwrap();
        let mix = ProcessMatrix::new(
            ab.op()
                .scale(c(0.5, 0.0))
                .add(&ba.op().scale(c(0.5, 0.0)))
                .unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
        let t = signaling_matrix(&mix, &fam_a, &fam_b).unwrap();
        assert!(t.a_to_b > 1e-3);
        assert!(t.b_to_a > 1e-3);
    }

    #[test]
    fn fixture_json_round_trip() {
        let w = qubit_shared_state();
        let fixture = ProcessFixture {
            w: OperatorData::from_operator(w.op()),
            tolerance: Some(1e-9),
            decomposition: None,
        };
        let text = fixture.to_json();
        let back = ProcessFixture::from_json(&text).unwrap();
        let w2 = back.process_matrix().unwrap();
        assert!(w.op().sub(w2.op()).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn fixture_rejects_unknown_keys() {
        let bad = r#"{"w": {"labels": [], "entries": []}, "surprise": 1}"#;
        assert!(matches!(
            ProcessFixture::from_json(bad),
            Err(Error::ConfigParse(_))
        ));
    }
}
