//! Discretized Weyl-symbol (Wigner) and characteristic-function
//! representation of operators, channels, and process matrices.
//!
//! Conventions, with ħ = 1 throughout:
//!
//! * One **mode** is one 1-D particle, with phase-space point ξ = (x, p).
//! * The Weyl symbol is normalized so that the trace rule
//!   Tr[AB] = (1/2π)^n ∫ A_W B_W dξ holds, which is the unique choice
//!   consistent with probability normalization in the Fourier picture.
//! * The characteristic function is χ_A(η) = (1/2π)^n ∫ A_W(ξ) e^{−iξ·η} dξ
//!   with η = (κ, ω) per mode and the pairing ξ·η = xκ + pω.
//!
//! On the grid the transforms are realized through exact discrete
//! displacement operators (a cyclic shift times a momentum boost with the
//! symmetric Weyl phase), so operator ↔ chi ↔ Wigner are exact linear
//! bijections and the trace rule holds to machine precision. Grid values
//! agree with the continuum formulas up to wrap-around tails of the
//! operators involved.

mod checks;
mod transform;

pub use checks::{
    check_cptp_chi, check_one_party_structure, check_two_party_structure,
    make_characteristic_test_map, probability_chi, probability_chi_single, CptpReport,
    EtaRectangle, OnePartyCheck, OnePartyStateCheck, OnePartyW, TwoPartyClass, TwoPartyReport,
};
pub use transform::{
    chi_of_operator, chi_transform, inverse_chi, inverse_weyl, operator_from_chi, weyl_symbol,
};

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sampling grid for one mode: `n` points x_k = x_min + k·Δx, with the
/// momentum grid fixed by discrete Fourier duality, Δp = 2π/(x_max − x_min).
///
/// `n` must be a power of two, at least 8. Momentum (and the κ, ω axes of
/// the characteristic function) run over centered indices, so the value 0
/// sits at index n/2.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::InvalidGrid(format!(
                "x_max {x_max} must exceed x_min {x_min}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// The default desk-scale grid: 64 points on [−8, 8).
    pub fn default_grid() -> Self {
        Self::new(-8.0, 8.0, 64).expect("default grid is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length()
    }

    /// κ spacing (conjugate to x): equal to Δp.
    pub fn dkappa(&self) -> f64 {
        self.dp()
    }

    /// ω spacing (conjugate to p): equal to Δx.
    pub fn domega(&self) -> f64 {
        self.dx()
    }

    /// Phase-space cell Δx·Δp = Δκ·Δω = 2π/n.
    pub fn cell(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    /// Centered index → signed integer offset from the origin index n/2.
    pub fn signed(&self, idx: usize) -> i64 {
        idx as i64 - (self.n / 2) as i64
    }

    pub fn p(&self, idx: usize) -> f64 {
        self.signed(idx) as f64 * self.dp()
    }

    pub fn kappa(&self, idx: usize) -> f64 {
        self.signed(idx) as f64 * self.dkappa()
    }

    pub fn omega(&self, idx: usize) -> f64 {
        self.signed(idx) as f64 * self.domega()
    }

    /// Index of the zero frequency / zero momentum.
    pub fn origin(&self) -> usize {
        self.n / 2
    }

    /// Index holding the negated frequency: −η of centered index i lives at
    /// (n − i) mod n (the Nyquist row is its own partner).
    pub fn negated(&self, idx: usize) -> usize {
        (self.n - idx) % self.n
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.p(k)).collect()
    }
}

/// Sampled Weyl symbol over one or more modes. Axes interleave as
/// [x₀, p₀, x₁, p₁, ...].
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub grids: Vec<PhaseSpaceGrid>,
    pub mode_labels: Vec<String>,
    pub values: ArrayD<C64>,
}

/// Sampled characteristic function over one or more modes. Axes interleave
/// as [κ₀, ω₀, κ₁, ω₁, ...] with centered frequency indices.
#[derive(Debug, Clone)]
pub struct ChiGrid {
    pub grids: Vec<PhaseSpaceGrid>,
    pub mode_labels: Vec<String>,
    pub values: ArrayD<C64>,
}

fn grid_shape(grids: &[PhaseSpaceGrid]) -> Vec<usize> {
    grids.iter().flat_map(|g| [g.n(), g.n()]).collect()
}

fn check_modes(grids: &[PhaseSpaceGrid], labels: &[String], values: &ArrayD<C64>) -> Result<()> {
    if grids.len() != labels.len() {
        return Err(Error::GridMismatch(format!(
            "{} grids vs {} labels",
            grids.len(),
            labels.len()
        )));
    }
    let want = grid_shape(grids);
    if values.shape() != want.as_slice() {
        return Err(Error::GridMismatch(format!(
            "value shape {:?}, grids require {:?}",
            values.shape(),
            want
        )));
    }
    Ok(())
}

impl WignerGrid {
    pub fn new(
        grids: Vec<PhaseSpaceGrid>,
        mode_labels: Vec<String>,
        values: ArrayD<C64>,
    ) -> Result<Self> {
        check_modes(&grids, &mode_labels, &values)?;
        Ok(Self {
            grids,
            mode_labels,
            values,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.grids.len()
    }

    /// (1/2π)^n Σ values · Δξ — equals the operator trace.
    pub fn quasi_norm(&self) -> C64 {
        let scale: f64 = self
            .grids
            .iter()
            .map(|g| g.cell() / (2.0 * std::f64::consts::PI))
            .product();
        self.values.sum() * scale
    }

    /// Largest |Im| over the grid; ≈ 0 for Hermitian operators.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()))
    }

    /// CSV dump: one row per grid point, coordinate columns then re, im.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = Vec::new();
        for l in &self.mode_labels {
            header.push(format!("x_{l}"));
            header.push(format!("p_{l}"));
        }
        header.push("re".into());
        header.push("im".into());
        writeln!(out, "{}", header.join(","))?;
        for (idx, v) in self.values.indexed_iter() {
            let mut cols = Vec::with_capacity(header.len());
            for (m, g) in self.grids.iter().enumerate() {
                cols.push(format!("{:.12e}", g.x(idx[2 * m])));
                cols.push(format!("{:.12e}", g.p(idx[2 * m + 1])));
            }
            cols.push(format!("{:.12e}", v.re));
            cols.push(format!("{:.12e}", v.im));
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

impl ChiGrid {
    pub fn new(
        grids: Vec<PhaseSpaceGrid>,
        mode_labels: Vec<String>,
        values: ArrayD<C64>,
    ) -> Result<Self> {
        check_modes(&grids, &mode_labels, &values)?;
        Ok(Self {
            grids,
            mode_labels,
            values,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.grids.len()
    }

    /// Worst-case |χ(−η) − conj χ(η)| over the grid; ≈ 0 for Hermitian
    /// operators.
    pub fn hermitian_symmetry_deviation(&self) -> f64 {
        let ndim = self.values.ndim();
        let mut worst = 0.0f64;
        for (idx, v) in self.values.indexed_iter() {
            let mut neg = vec![0usize; ndim];
            for (ax, &i) in idx.slice().iter().enumerate() {
                neg[ax] = self.grids[ax / 2].negated(i);
            }
            let w = self.values[IxDyn(&neg)];
            worst = worst.max((w - v.conj()).norm());
        }
        worst
    }

    /// The same grid with values(η) replaced by values(−η).
    pub fn parity_flip(&self) -> Self {
        let ndim = self.values.ndim();
        let mut flipped = self.values.clone();
        for (idx, v) in self.values.indexed_iter() {
            let mut neg = vec![0usize; ndim];
            for (ax, &i) in idx.slice().iter().enumerate() {
                neg[ax] = self.grids[ax / 2].negated(i);
            }
            flipped[IxDyn(&neg)] = *v;
        }
        Self {
            grids: self.grids.clone(),
            mode_labels: self.mode_labels.clone(),
            values: flipped,
        }
    }

    /// Tensor product over disjoint mode sets (concatenates modes).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for l in &self.mode_labels {
            if other.mode_labels.contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut grids = self.grids.clone();
        grids.extend(other.grids.iter().cloned());
        let mut labels = self.mode_labels.clone();
        labels.extend(other.mode_labels.iter().cloned());
        let shape = grid_shape(&grids);
        let mut values = ArrayD::zeros(IxDyn(&shape));
        let b_len = other.values.len();
        {
            let flat = values.as_slice_mut().expect("freshly built array");
            let a_flat: Vec<C64> = self.values.iter().copied().collect();
            let b_flat: Vec<C64> = other.values.iter().copied().collect();
            for (ia, va) in a_flat.iter().enumerate() {
                let base = ia * b_len;
                for (ib, vb) in b_flat.iter().enumerate() {
                    flat[base + ib] = va * vb;
                }
            }
        }
        Self::new(grids, labels, values)
    }

    /// Reorder modes to the given label order.
    pub fn permute_modes(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.mode_labels.len() {
            return Err(Error::LabelMismatch("mode count differs".into()));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|name| {
                self.mode_labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| Error::UnknownLabel(name.to_string()))
            })
            .collect::<Result<_>>()?;
        let mut axes = Vec::with_capacity(2 * perm.len());
        for &m in &perm {
            axes.push(2 * m);
            axes.push(2 * m + 1);
        }
        let values = self
            .values
            .clone()
            .permuted_axes(IxDyn(&axes))
            .as_standard_layout()
            .to_owned();
        Self::new(
            perm.iter().map(|&m| self.grids[m].clone()).collect(),
            perm.iter().map(|&m| self.mode_labels[m].clone()).collect(),
            values,
        )
    }

    /// CSV dump: one row per grid point, coordinate columns then re, im.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = Vec::new();
        for l in &self.mode_labels {
            header.push(format!("kappa_{l}"));
            header.push(format!("omega_{l}"));
        }
        header.push("re".into());
        header.push("im".into());
        writeln!(out, "{}", header.join(","))?;
        for (idx, v) in self.values.indexed_iter() {
            let mut cols = Vec::with_capacity(header.len());
            for (m, g) in self.grids.iter().enumerate() {
                cols.push(format!("{:.12e}", g.kappa(idx[2 * m])));
                cols.push(format!("{:.12e}", g.omega(idx[2 * m + 1])));
            }
            cols.push(format!("{:.12e}", v.re));
            cols.push(format!("{:.12e}", v.im));
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Chi grid of the identity operator on one mode: a discrete delta of
/// weight 2π/(ΔκΔω) = n at the origin.
pub fn identity_chi(grid: &PhaseSpaceGrid, label: &str) -> ChiGrid {
    let n = grid.n();
    let mut values = ArrayD::zeros(IxDyn(&[n, n]));
    values[IxDyn(&[grid.origin(), grid.origin()])] = C64::new(n as f64, 0.0);
    ChiGrid::new(vec![grid.clone()], vec![label.to_string()], values)
        .expect("shape consistent by construction")
}
