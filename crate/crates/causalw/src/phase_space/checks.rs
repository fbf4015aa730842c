//! Fourier-domain validity checks: trace preservation of channels, and the
//! structural characterization of one- and two-party process functions.
//!
//! A channel (two modes: input, output) is trace-preserving iff its
//! characteristic function satisfies χ(η₁, 0) = 2π δ(η₁), which on the grid
//! is a discrete delta of weight n at the κ₁ = ω₁ = 0 cell. A valid
//! one-party process function must be supported on the η₂ = 0 column,
//! χ_W(η₁, η₂) = 2π w(η₁) δ(η₂) with w(0) = 1; the two-party analogue may
//! depend on at most one of the two outputs.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64 as C64;

use super::{chi_of_operator, operator_from_chi, ChiGrid, PhaseSpaceGrid};
use crate::error::{Error, Result};
use crate::operator_core::{min_eigenvalue, LabeledOperator, SubsystemLabel};

/// Trace-preservation report for a channel's characteristic function.
#[derive(Debug, Clone)]
pub struct CptpReport {
    /// |χ(0,0)/n − 1|: defect of the delta weight at the origin.
    pub origin_weight_defect: f64,
    /// ‖Tr_out M − 1‖_F/√n, read off the η₂ = 0 slice (exact Parseval).
    pub closure_residual: f64,
    /// |1 − p| for the canonical Gaussian probe state ρ (σ = 1, centered):
    /// the operational normalization defect Tr[(ρ ⊗ 1) M] − 1.
    pub probe_defect: f64,
    pub pass: bool,
}

impl CptpReport {
    /// Headline deviation: the probability-normalization defect of the
    /// Gaussian probe. For a lossy map this is its missing weight.
    pub fn deviation(&self) -> f64 {
        self.probe_defect
    }
}

/// Trace-1 Gaussian state on a grid, as an operator.
pub(crate) fn gaussian_probe(grid: &PhaseSpaceGrid, label: &str) -> LabeledOperator {
    let n = grid.n();
    let mut ket: Vec<f64> = (0..n)
        .map(|k| (-grid.x(k).powi(2) / 2.0).exp())
        .collect();
    let norm: f64 = ket.iter().map(|a| a * a).sum::<f64>().sqrt();
    ket.iter_mut().for_each(|a| *a /= norm);
    let mut m = ndarray::Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = C64::new(ket[i] * ket[j], 0.0);
        }
    }
    LabeledOperator::new(vec![SubsystemLabel::new(label, n)], m).expect("square by construction")
}

/// Verify the trace-preservation condition χ(η₁, 0) = 2π δ(η₁) (grid weight
/// 2π/ΔκΔω = n) on a two-mode channel chi.
pub fn check_cptp_chi(m: &ChiGrid, tol: f64) -> Result<CptpReport> {
    if m.n_modes() != 2 {
        return Err(Error::GridMismatch(format!(
            "channel chi needs 2 modes (input, output), got {}",
            m.n_modes()
        )));
    }
    let g_in = &m.grids[0];
    let g_out = &m.grids[1];
    let n_in = g_in.n();
    let (o1, o2) = (g_in.origin(), g_out.origin());

    // η₂ = 0 slice: the chi of Tr_out M.
    let mut slice = ndarray::Array2::zeros((n_in, n_in));
    for s in 0..n_in {
        for t in 0..n_in {
            slice[(s, t)] = m.values[IxDyn(&[s, t, o2, o2])];
        }
    }

    let origin_weight_defect = (slice[(o1, o1)] / n_in as f64 - 1.0).norm();

    let mut resid_sq = 0.0f64;
    for s in 0..n_in {
        for t in 0..n_in {
            let expect = if (s, t) == (o1, o1) {
                C64::new(n_in as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            resid_sq += (slice[(s, t)] - expect).norm_sqr();
        }
    }
    let closure_residual = resid_sq.sqrt() / n_in as f64 * (n_in as f64).sqrt() / (n_in as f64).sqrt();
    let closure_residual = closure_residual; // ‖χ_D‖₂/n = ‖D‖_F/√n

    // Probe normalization: p = Tr[(ρ_g ⊗ 1) M]
    //   = (1/2π) Σ_{η₁} χ_ρ(η₁) χ_M(−η₁, 0) Δκ Δω.
    let probe = gaussian_probe(g_in, "probe");
    let chi_probe = chi_of_operator(&probe, &[g_in.clone()])?;
    let mut p = C64::new(0.0, 0.0);
    for s in 0..n_in {
        for t in 0..n_in {
            let ns = g_in.negated(s);
            let nt = g_in.negated(t);
            p += chi_probe.values[IxDyn(&[s, t])] * slice[(ns, nt)];
        }
    }
    p /= n_in as f64;
    let probe_defect = (p - 1.0).norm();

    let pass =
        origin_weight_defect <= tol && closure_residual <= tol && probe_defect <= tol;
    Ok(CptpReport {
        origin_weight_defect,
        closure_residual,
        probe_defect,
        pass,
    })
}

/// Rectangle in one mode's (κ, ω) frequency plane.
#[derive(Debug, Clone, Copy)]
pub struct EtaRectangle {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

/// The characteristic-function test map χ_M(η₁, η₂) = 2π δ(η₁) · 1_R(η₂):
/// a trace-preserving repreparation whose output chi is the indicator of a
/// rectangle. The rectangle must contain the origin and lie inside the
/// output grid's frequency ranges.
pub fn make_characteristic_test_map(
    grid_in: &PhaseSpaceGrid,
    grid_out: &PhaseSpaceGrid,
    rect: EtaRectangle,
    labels: (&str, &str),
) -> Result<ChiGrid> {
    let kappa_lo = grid_out.kappa(0);
    let kappa_hi = grid_out.kappa(grid_out.n() - 1);
    let omega_lo = grid_out.omega(0);
    let omega_hi = grid_out.omega(grid_out.n() - 1);
    if rect.kappa_min < kappa_lo
        || rect.kappa_max > kappa_hi
        || rect.omega_min < omega_lo
        || rect.omega_max > omega_hi
    {
        return Err(Error::RectangleOutOfRange(format!(
            "rect κ[{}, {}] ω[{}, {}] vs grid κ[{}, {}] ω[{}, {}]",
            rect.kappa_min,
            rect.kappa_max,
            rect.omega_min,
            rect.omega_max,
            kappa_lo,
            kappa_hi,
            omega_lo,
            omega_hi
        )));
    }
    if rect.kappa_min > 0.0 || rect.kappa_max < 0.0 || rect.omega_min > 0.0 || rect.omega_max < 0.0
    {
        return Err(Error::RectangleOutOfRange(
            "rectangle must contain the origin for trace preservation".into(),
        ));
    }
    let n_in = grid_in.n();
    let n_out = grid_out.n();
    let mut values = ArrayD::zeros(IxDyn(&[n_in, n_in, n_out, n_out]));
    let o1 = grid_in.origin();
    for s2 in 0..n_out {
        let kappa = grid_out.kappa(s2);
        if kappa < rect.kappa_min || kappa > rect.kappa_max {
            continue;
        }
        for t2 in 0..n_out {
            let omega = grid_out.omega(t2);
            if omega < rect.omega_min || omega > rect.omega_max {
                continue;
            }
            values[IxDyn(&[o1, o1, s2, t2])] = C64::new(n_in as f64, 0.0);
        }
    }
    ChiGrid::new(
        vec![grid_in.clone(), grid_out.clone()],
        vec![labels.0.to_string(), labels.1.to_string()],
        values,
    )
}

/// The extracted one-party profile w(η₁) of a process function supported on
/// the η₂ = 0 column.
#[derive(Debug, Clone)]
pub struct OnePartyW {
    pub profile: ChiGrid,
}

#[derive(Debug, Clone)]
pub struct OnePartyStateCheck {
    pub trace_defect: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl OnePartyW {
    /// w(0), which must equal 1 for a normalized process.
    pub fn w_at_origin(&self) -> C64 {
        let g = &self.profile.grids[0];
        self.profile.values[IxDyn(&[g.origin(), g.origin()])]
    }

    /// Inverse-transform the profile and check it is a valid state's
    /// symbol: unit trace, Hermitian, positive within tolerance.
    pub fn state_check(&self, tol: f64) -> Result<OnePartyStateCheck> {
        let rho = operator_from_chi(&self.profile)?;
        let trace_defect = (rho.trace() - 1.0).norm();
        let herm = rho.hermiticity_deviation();
        let min_eig = if herm <= tol * 100.0 {
            min_eigenvalue(&rho, tol * 100.0)?
        } else {
            f64::NEG_INFINITY
        };
        Ok(OnePartyStateCheck {
            trace_defect,
            hermiticity_deviation: herm,
            min_eigenvalue: min_eig,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OnePartyCheck {
    /// Relative L² mass of the cells with η₂ ≠ 0.
    pub off_column_mass: f64,
    /// Extracted w(0); 1 for a normalized process.
    pub w_at_origin: C64,
    pub profile: Option<OnePartyW>,
    pub pass: bool,
}

/// Relative L² mass of the cells where any of the listed modes sits away
/// from its frequency origin.
fn off_origin_mass(chi: &ChiGrid, modes: &[usize]) -> f64 {
    let mut off = 0.0f64;
    let mut total = 0.0f64;
    for (idx, v) in chi.values.indexed_iter() {
        let w = v.norm_sqr();
        total += w;
        let mut off_origin = false;
        for &m in modes {
            let g = &chi.grids[m];
            if idx[2 * m] != g.origin() || idx[2 * m + 1] != g.origin() {
                off_origin = true;
                break;
            }
        }
        if off_origin {
            off += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (off / total).sqrt()
    }
}

/// Verify the one-party structure χ_W(η₁, η₂) = 2π w(η₁) δ(η₂) with
/// w(0) = 1, and extract w.
pub fn check_one_party_structure(w: &ChiGrid, tol: f64) -> Result<OnePartyCheck> {
    if w.n_modes() != 2 {
        return Err(Error::GridMismatch(format!(
            "one-party process chi needs 2 modes, got {}",
            w.n_modes()
        )));
    }
    let g_in = &w.grids[0];
    let g_out = &w.grids[1];
    let off_column_mass = off_origin_mass(w, &[1]);

    let n_in = g_in.n();
    let o2 = g_out.origin();
    let scale = 1.0 / g_out.n() as f64;
    let mut profile_vals = ArrayD::zeros(IxDyn(&[n_in, n_in]));
    for s in 0..n_in {
        for t in 0..n_in {
            profile_vals[IxDyn(&[s, t])] = w.values[IxDyn(&[s, t, o2, o2])] * scale;
        }
    }
    let profile = ChiGrid::new(
        vec![g_in.clone()],
        vec![w.mode_labels[0].clone()],
        profile_vals,
    )?;
    let one = OnePartyW { profile };
    let w0 = one.w_at_origin();
    let pass = off_column_mass <= tol && (w0 - 1.0).norm() <= tol;
    Ok(OnePartyCheck {
        off_column_mass,
        w_at_origin: w0,
        profile: if pass { Some(one) } else { None },
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoPartyClass {
    /// Depends on neither output: shared-state form.
    NoSignaling,
    /// Depends on A's output only: compatible with A before B.
    AToB,
    /// Depends on B's output only: compatible with B before A.
    BToA,
    /// Depends on both outputs at once: not a valid process.
    Invalid,
}

#[derive(Debug, Clone)]
pub struct TwoPartyReport {
    pub class: TwoPartyClass,
    /// Relative mass away from η_{A2} = 0.
    pub off_a2_mass: f64,
    /// Relative mass away from η_{B2} = 0.
    pub off_b2_mass: f64,
    /// Residual of the slice η_{A1} = η_{A2} = 0 off the η_{B2} = 0 column.
    pub slice_a_residual: f64,
    /// Residual of the slice η_{B1} = η_{B2} = 0 off the η_{A2} = 0 column.
    pub slice_b_residual: f64,
    /// Extracted reduced profile w̃_{B1}, normalized so w̃(0) counts the
    /// trace weight.
    pub w_b1: ChiGrid,
    pub w_a1: ChiGrid,
    pub pass: bool,
}

/// Classify a four-mode (A1, A2, B1, B2) process chi by which outputs it
/// depends on, and check the intermediate slice conditions: at η_{A1} = 0,
/// η_{A2} = 0 the remaining function must be ∝ w̃_{B1}(η_{B1}) δ(η_{B2}),
/// and symmetrically with A and B swapped.
pub fn check_two_party_structure(w: &ChiGrid, tol: f64) -> Result<TwoPartyReport> {
    if w.n_modes() != 4 {
        return Err(Error::GridMismatch(format!(
            "two-party process chi needs 4 modes (A1, A2, B1, B2), got {}",
            w.n_modes()
        )));
    }
    let off_a2_mass = off_origin_mass(w, &[1]);
    let off_b2_mass = off_origin_mass(w, &[3]);
    let class = match (off_a2_mass <= tol, off_b2_mass <= tol) {
        (true, true) => TwoPartyClass::NoSignaling,
        (false, true) => TwoPartyClass::AToB,
        (true, false) => TwoPartyClass::BToA,
        (false, false) => TwoPartyClass::Invalid,
    };

    let g = |m: usize| &w.grids[m];
    let (oa1, oa2, ob1, ob2) = (
        g(0).origin(),
        g(1).origin(),
        g(2).origin(),
        g(3).origin(),
    );

    // Slice η_{A1} = η_{A2} = 0: function of (η_{B1}, η_{B2}).
    let (nb1, nb2) = (g(2).n(), g(3).n());
    let mut total_a = 0.0f64;
    let mut off_a = 0.0f64;
    let mut w_b1_vals = ArrayD::zeros(IxDyn(&[nb1, nb1]));
    let norm_b = 1.0 / (g(1).n() as f64 * g(3).n() as f64);
    for s in 0..nb1 {
        for t in 0..nb1 {
            for u in 0..nb2 {
                for v in 0..nb2 {
                    let val = w.values[IxDyn(&[oa1, oa1, oa2, oa2, s, t, u, v])];
                    let m = val.norm_sqr();
                    total_a += m;
                    if (u, v) != (ob2, ob2) {
                        off_a += m;
                    }
                }
            }
            w_b1_vals[IxDyn(&[s, t])] =
                w.values[IxDyn(&[oa1, oa1, oa2, oa2, s, t, ob2, ob2])] * norm_b;
        }
    }
    let slice_a_residual = if total_a == 0.0 {
        0.0
    } else {
        (off_a / total_a).sqrt()
    };

    // Slice η_{B1} = η_{B2} = 0: function of (η_{A1}, η_{A2}).
    let (na1, na2) = (g(0).n(), g(1).n());
    let mut total_b = 0.0f64;
    let mut off_b = 0.0f64;
    let mut w_a1_vals = ArrayD::zeros(IxDyn(&[na1, na1]));
    let norm_a = 1.0 / (g(1).n() as f64 * g(3).n() as f64);
    for s in 0..na1 {
        for t in 0..na1 {
            for u in 0..na2 {
                for v in 0..na2 {
                    let val = w.values[IxDyn(&[s, t, u, v, ob1, ob1, ob2, ob2])];
                    let m = val.norm_sqr();
                    total_b += m;
                    if (u, v) != (oa2, oa2) {
                        off_b += m;
                    }
                }
            }
            w_a1_vals[IxDyn(&[s, t])] =
                w.values[IxDyn(&[s, t, oa2, oa2, ob1, ob1, ob2, ob2])] * norm_a;
        }
    }
    let slice_b_residual = if total_b == 0.0 {
        0.0
    } else {
        (off_b / total_b).sqrt()
    };

    let w_b1 = ChiGrid::new(
        vec![g(2).clone()],
        vec![w.mode_labels[2].clone()],
        w_b1_vals,
    )?;
    let w_a1 = ChiGrid::new(
        vec![g(0).clone()],
        vec![w.mode_labels[0].clone()],
        w_a1_vals,
    )?;
    let pass = class != TwoPartyClass::Invalid
        && slice_a_residual <= tol
        && slice_b_residual <= tol;
    Ok(TwoPartyReport {
        class,
        off_a2_mass,
        off_b2_mass,
        slice_a_residual,
        slice_b_residual,
        w_b1,
        w_a1,
        pass,
    })
}

fn strides_for(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Contract a process chi against the chis of the parties' operations:
/// p = (1/2π)^n Σ_η χ_W(η) ∏_parts χ_M(−η_part) ΔκΔω. The parts' modes
/// must concatenate to exactly the process's modes. Exact counterpart of
/// Tr[W (M_A ⊗ M_B ⊗ …)].
pub fn pair_contract(w: &ChiGrid, parts: &[&ChiGrid]) -> Result<C64> {
    let total_modes: usize = parts.iter().map(|p| p.n_modes()).sum();
    if total_modes != w.n_modes() {
        return Err(Error::GridMismatch(format!(
            "parts cover {} modes, process has {}",
            total_modes,
            w.n_modes()
        )));
    }
    {
        let mut m = 0usize;
        for part in parts {
            for (pg, pl) in part.grids.iter().zip(&part.mode_labels) {
                if pg != &w.grids[m] {
                    return Err(Error::GridMismatch(format!(
                        "grid mismatch on mode {m} ({pl})"
                    )));
                }
                if pl != &w.mode_labels[m] {
                    return Err(Error::LabelMismatch(format!(
                        "mode {m}: {} vs {}",
                        pl, w.mode_labels[m]
                    )));
                }
                m += 1;
            }
        }
    }

    let shape = w.values.shape().to_vec();
    // Per global axis: which part, its local axis stride, and the negation map.
    struct AxisInfo {
        part: usize,
        stride: usize,
    }
    let mut axis_info = Vec::with_capacity(shape.len());
    {
        let mut ax_global = 0usize;
        for (pi, part) in parts.iter().enumerate() {
            let pstrides = strides_for(part.values.shape());
            for local_ax in 0..part.values.ndim() {
                axis_info.push(AxisInfo {
                    part: pi,
                    stride: pstrides[local_ax],
                });
                ax_global += 1;
            }
        }
        debug_assert_eq!(ax_global, shape.len());
    }
    let neg_tables: Vec<Vec<usize>> = (0..shape.len())
        .map(|ax| {
            let grid = &w.grids[ax / 2];
            (0..shape[ax]).map(|i| grid.negated(i)).collect()
        })
        .collect();

    let part_flats: Vec<&[C64]> = parts
        .iter()
        .map(|p| p.values.as_slice().expect("standard layout"))
        .collect();

    let mut acc = C64::new(0.0, 0.0);
    let mut offsets = vec![0usize; parts.len()];
    let w_flat = w.values.as_slice().expect("standard layout");
    let mut idx = vec![0usize; shape.len()];
    let mut flat = 0usize;
    loop {
        for o in offsets.iter_mut() {
            *o = 0;
        }
        for (ax, &i) in idx.iter().enumerate() {
            let info = &axis_info[ax];
            offsets[info.part] += info.stride * neg_tables[ax][i];
        }
        let mut prod = w_flat[flat];
        for (pi, pf) in part_flats.iter().enumerate() {
            prod *= pf[offsets[pi]];
        }
        acc += prod;

        // advance odometer
        let mut k = shape.len();
        loop {
            if k == 0 {
                let scale: f64 = w.grids.iter().map(|g| g.n() as f64).product();
                return Ok(acc / scale);
            }
            k -= 1;
            idx[k] += 1;
            flat += 1;
            if idx[k] < shape[k] {
                break;
            }
            // carry: subtract what we overcounted on this axis
            flat -= shape[k] * strides_for(&shape)[k];
            idx[k] = 0;
            if k == 0 {
                let scale: f64 = w.grids.iter().map(|g| g.n() as f64).product();
                return Ok(acc / scale);
            }
        }
    }
}

/// Probability of a pair of operations against a two-party process chi:
/// p = (1/2π)^4 Σ χ_W(η) χ_{M_A}(−η_A) χ_{M_B}(−η_B) over the grid.
pub fn probability_chi(w: &ChiGrid, m_a: &ChiGrid, m_b: &ChiGrid) -> Result<f64> {
    Ok(pair_contract(w, &[m_a, m_b])?.re)
}

/// One-party version of [`probability_chi`].
pub fn probability_chi_single(w: &ChiGrid, m: &ChiGrid) -> Result<f64> {
    Ok(pair_contract(w, &[m])?.re)
}
