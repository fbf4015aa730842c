//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! Operators live on an ordered list of named subsystems. The canonical
//! basis is lexicographic over the subsystem indices, row-major (the first
//! label is the most significant digit). All operations are pure functions
//! on immutable values.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for Hermiticity and positivity decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A named tensor factor with its Hilbert-space dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLabel {
    pub name: String,
    pub dim: usize,
}

impl SubsystemLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        let name = name.into();
        assert!(dim >= 1, "subsystem dimension must be >= 1");
        Self { name, dim }
    }
}

/// A dense complex operator over an ordered tensor product of labeled
/// subsystems.
///
/// The matrix is square with dimension equal to the product of the
/// subsystem dimensions. Hermiticity and positivity are checkable
/// predicates, never assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    labels: Vec<SubsystemLabel>,
    data: Array2<C64>,
}

impl LabeledOperator {
    /// Wrap a matrix with its subsystem labels, validating dimensions and
    /// label uniqueness.
    pub fn new(labels: Vec<SubsystemLabel>, data: Array2<C64>) -> Result<Self> {
        let dim: usize = labels.iter().map(|l| l.dim).product();
        for (i, a) in labels.iter().enumerate() {
            if labels[i + 1..].iter().any(|b| b.name == a.name) {
                return Err(Error::DuplicateLabel(a.name.clone()));
            }
        }
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, labels require {}x{}",
                data.nrows(),
                data.ncols(),
                dim,
                dim
            )));
        }
        Ok(Self { labels, data })
    }

    /// Identity operator on the given subsystems.
    pub fn identity(labels: Vec<SubsystemLabel>) -> Self {
        let dim: usize = labels.iter().map(|l| l.dim).product();
        Self::new(labels, Array2::eye(dim)).expect("identity dims always consistent")
    }

    /// Zero operator on the given subsystems.
    pub fn zeros(labels: Vec<SubsystemLabel>) -> Self {
        let dim: usize = labels.iter().map(|l| l.dim).product();
        Self::new(labels, Array2::zeros((dim, dim))).expect("zero dims always consistent")
    }

    pub fn labels(&self) -> &[SubsystemLabel] {
        &self.labels
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn label_position(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn adjoint(&self) -> Self {
        let data = self.data.t().mapv(|z| z.conj());
        Self {
            labels: self.labels.clone(),
            data,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            labels: self.labels.clone(),
            data: self.data.mapv(|z| z * s),
        }
    }

    /// Elementwise sum. Labels must agree exactly (same names, same order).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_labels(other)?;
        Ok(Self {
            labels: self.labels.clone(),
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_labels(other)?;
        Ok(Self {
            labels: self.labels.clone(),
            data: &self.data - &other.data,
        })
    }

    /// Matrix product. Labels must agree exactly.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_labels(other)?;
        Ok(Self {
            labels: self.labels.clone(),
            data: self.data.dot(&other.data),
        })
    }

    fn check_same_labels(&self, other: &Self) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::LabelMismatch(format!(
                "{:?} vs {:?}",
                self.labels.iter().map(|l| &l.name).collect::<Vec<_>>(),
                other.labels.iter().map(|l| &l.name).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    /// Hermiticity deviation ‖A − A†‖ in spectral norm.
    pub fn hermiticity_deviation(&self) -> f64 {
        let diff = &self.data - &self.data.t().mapv(|z| z.conj());
        spectral_norm(&diff)
    }

    /// Frobenius norm of the matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral (operator) norm of the matrix.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.data)
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    ///
    /// Fails distinctly if the operator is not Hermitian within `tol`.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let dev = self.hermiticity_deviation();
        if dev > tol.max(1e-14 * self.frobenius_norm().max(1.0)) {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol,
            });
        }
        Ok(hermitian_eigenvalues(&self.data))
    }

    /// Reorder the subsystems to the given label order (a permutation of the
    /// current labels). The matrix is permuted accordingly.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::LabelMismatch(format!(
                "permutation has {} labels, operator has {}",
                order.len(),
                self.labels.len()
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|n| self.label_position(n))
            .collect::<Result<_>>()?;
        {
            let mut seen = vec![false; perm.len()];
            for &p in &perm {
                if seen[p] {
                    return Err(Error::DuplicateLabel(order[p].to_string()));
                }
                seen[p] = true;
            }
        }
        let old_dims: Vec<usize> = self.labels.iter().map(|l| l.dim).collect();
        let new_labels: Vec<SubsystemLabel> =
            perm.iter().map(|&p| self.labels[p].clone()).collect();
        let new_dims: Vec<usize> = new_labels.iter().map(|l| l.dim).collect();
        let dim = self.dim();
        let mut data = Array2::zeros((dim, dim));
        let mut new_multi_r = vec![0usize; perm.len()];
        let mut new_multi_c = vec![0usize; perm.len()];
        for r in 0..dim {
            let mr = unravel(r, &old_dims);
            for c in 0..dim {
                let mc = unravel(c, &old_dims);
                for (k, &p) in perm.iter().enumerate() {
                    new_multi_r[k] = mr[p];
                    new_multi_c[k] = mc[p];
                }
                data[(ravel(&new_multi_r, &new_dims), ravel(&new_multi_c, &new_dims))] =
                    self.data[(r, c)];
            }
        }
        Ok(Self {
            labels: new_labels,
            data,
        })
    }
}

/// Decompose a flat basis index into per-subsystem indices (row-major).
fn unravel(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

/// Flatten per-subsystem indices into the canonical basis index.
fn ravel(multi: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0usize;
    for (m, d) in multi.iter().zip(dims) {
        idx = idx * d + m;
    }
    idx
}

/// Kronecker product with concatenated labels.
///
/// Fails if the two operators share a label name.
pub fn tensor(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    for la in a.labels() {
        if b.labels().iter().any(|lb| lb.name == la.name) {
            return Err(Error::DuplicateLabel(la.name.clone()));
        }
    }
    let (da, db) = (a.dim(), b.dim());
    let mut data = Array2::zeros((da * db, da * db));
    for i1 in 0..da {
        for j1 in 0..da {
            let x = a.data[(i1, j1)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..db {
                for j2 in 0..db {
                    data[(i1 * db + i2, j1 * db + j2)] = x * b.data[(i2, j2)];
                }
            }
        }
    }
    let mut labels = a.labels.clone();
    labels.extend(b.labels.iter().cloned());
    LabeledOperator::new(labels, data)
}

/// Tensor product of several operators, left to right.
pub fn tensor_all(ops: &[&LabeledOperator]) -> Result<LabeledOperator> {
    let mut it = ops.iter();
    let first = it.next().expect("tensor_all needs at least one operator");
    let mut acc = (*first).clone();
    for op in it {
        acc = tensor(&acc, op)?;
    }
    Ok(acc)
}

/// Trace over the named subsystems; the result keeps the remaining labels in
/// their original order. Tracing over every label yields a 1×1 operator
/// holding the full trace.
pub fn partial_trace(op: &LabeledOperator, over: &[&str]) -> Result<LabeledOperator> {
    let mut traced = vec![false; op.labels().len()];
    for name in over {
        let pos = op.label_position(name)?;
        traced[pos] = true;
    }
    let dims: Vec<usize> = op.labels().iter().map(|l| l.dim).collect();
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| !traced[k]).collect();
    let tr: Vec<usize> = (0..dims.len()).filter(|&k| traced[k]).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let tr_dims: Vec<usize> = tr.iter().map(|&k| dims[k]).collect();
    let kd: usize = kept_dims.iter().product::<usize>().max(1);
    let td: usize = tr_dims.iter().product::<usize>().max(1);

    let mut data = Array2::zeros((kd, kd));
    let mut full_r = vec![0usize; dims.len()];
    let mut full_c = vec![0usize; dims.len()];
    for r in 0..kd {
        let mr = unravel(r, &kept_dims);
        for c in 0..kd {
            let mc = unravel(c, &kept_dims);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                let mt = unravel(t, &tr_dims);
                for (slot, &k) in kept.iter().enumerate() {
                    full_r[k] = mr[slot];
                    full_c[k] = mc[slot];
                }
                for (slot, &k) in tr.iter().enumerate() {
                    full_r[k] = mt[slot];
                    full_c[k] = mt[slot];
                }
                acc += op.data[(ravel(&full_r, &dims), ravel(&full_c, &dims))];
            }
            data[(r, c)] = acc;
        }
    }
    let labels: Vec<SubsystemLabel> = kept.iter().map(|&k| op.labels()[k].clone()).collect();
    LabeledOperator::new(labels, data)
}

/// Replace the named subsystems by the normalized identity:
/// returns (1/d_S) ⊗ Tr_S(op), reinserted in the original label order.
///
/// This map is a linear idempotent projector and commutes across disjoint
/// label sets.
pub fn depolarize_to_identity(op: &LabeledOperator, labels: &[&str]) -> Result<LabeledOperator> {
    let mut marked = vec![false; op.labels().len()];
    for name in labels {
        let pos = op.label_position(name)?;
        marked[pos] = true;
    }
    let dims: Vec<usize> = op.labels().iter().map(|l| l.dim).collect();
    let d_s: usize = (0..dims.len())
        .filter(|&k| marked[k])
        .map(|k| dims[k])
        .product();
    let reduced = partial_trace(op, labels)?;
    let red_dims: Vec<usize> = reduced.labels().iter().map(|l| l.dim).collect();
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| !marked[k]).collect();

    let dim = op.dim();
    let w = 1.0 / d_s as f64;
    let mut data = Array2::zeros((dim, dim));
    let mut red_r = vec![0usize; kept.len()];
    let mut red_c = vec![0usize; kept.len()];
    for r in 0..dim {
        let mr = unravel(r, &dims);
        for c in 0..dim {
            let mc = unravel(c, &dims);
            // Off-diagonal in the depolarized factors contributes nothing.
            if (0..dims.len()).any(|k| marked[k] && mr[k] != mc[k]) {
                continue;
            }
            for (slot, &k) in kept.iter().enumerate() {
                red_r[slot] = mr[k];
                red_c[slot] = mc[k];
            }
            data[(r, c)] =
                reduced.data()[(ravel(&red_r, &red_dims), ravel(&red_c, &red_dims))] * w;
        }
    }
    LabeledOperator::new(op.labels().to_vec(), data)
}

/// Positivity check: true iff the minimum eigenvalue is ≥ −tol.
///
/// A non-Hermitian input (beyond `tol`) is flagged as a distinct error
/// rather than reported as "not positive".
pub fn is_positive_semidefinite(op: &LabeledOperator, tol: f64) -> Result<bool> {
    let eigs = op.hermitian_eigenvalues(tol)?;
    Ok(eigs.iter().all(|&e| e >= -tol))
}

/// Minimum eigenvalue of a Hermitian operator (for positivity deviations).
pub fn min_eigenvalue(op: &LabeledOperator, tol: f64) -> Result<f64> {
    let eigs = op.hermitian_eigenvalues(tol)?;
    Ok(eigs.into_iter().fold(f64::INFINITY, f64::min))
}

fn to_nalgebra(m: &Array2<C64>) -> nalgebra::DMatrix<C64> {
    let (r, c) = (m.nrows(), m.ncols());
    nalgebra::DMatrix::from_fn(r, c, |i, j| m[(i, j)])
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let eig = to_nalgebra(m).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    vals
}

/// Spectral (operator) norm: largest singular value.
pub fn spectral_norm(m: &Array2<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // sqrt of the largest eigenvalue of A†A, which is Hermitian PSD.
    let a = to_nalgebra(m);
    let ata = a.adjoint() * &a;
    let eig = ata.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.max(0.0)))
        .sqrt()
}
