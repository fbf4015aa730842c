//! Exact grid transforms between operators, characteristic functions, and
//! Weyl symbols.
//!
//! Per mode, the characteristic function is χ_A[s, t] = Tr[A · D(s,t)†]
//! where D(s,t) = e^{iπ s̃t̃/n} e^{iκ_s X̂} e^{iω_t P̂} is the discrete
//! displacement operator (momentum boost times cyclic shift with the
//! symmetric Weyl phase; s̃, t̃ are centered indices). The D(s,t) form an
//! orthogonal operator basis, Tr[D† D'] = n δ, so the transform is an exact
//! bijection and Tr[AB] = (1/2π)^n Σ χ_A(η) χ_B(−η) ΔκΔω holds to machine
//! precision. The Weyl symbol is the symplectic Fourier transform of χ.

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::{grid_shape, ChiGrid, PhaseSpaceGrid, WignerGrid};
use crate::error::{Error, Result};
use crate::operator_core::{LabeledOperator, SubsystemLabel};

struct FftPair {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// In-place Σ_u v[u] e^{−2πi k u / n}.
    fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    /// In-place Σ_k v[k] e^{+2πi k u / n} (unnormalized).
    fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
    }
}

/// e^{−iπ s̃ t̃ / n}, the symmetric-ordering phase of D(s,t)†.
fn weyl_phase(ss: i64, tt: i64, n: usize) -> C64 {
    C64::from_polar(1.0, -std::f64::consts::PI * (ss * tt) as f64 / n as f64)
}

/// e^{−i s̃ Δκ x_min}, the phase carried by the grid offset.
fn offset_phase(ss: i64, grid: &PhaseSpaceGrid) -> C64 {
    C64::from_polar(1.0, -(ss as f64) * grid.dkappa() * grid.x_min())
}

/// One-mode operator → chi: χ[s,t] = phase(s̃,t̃) Σ_u A[u, u+t̃] e^{−iκ_s x_u}.
fn mode_chi_from_matrix(a: &Array2<C64>, grid: &PhaseSpaceGrid, fft: &FftPair) -> Array2<C64> {
    let n = grid.n();
    let half = (n / 2) as i64;
    let mut out = Array2::zeros((n, n));
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for t_idx in 0..n {
        let tt = t_idx as i64 - half;
        for (u, b) in buf.iter_mut().enumerate() {
            let v = (u as i64 + tt).rem_euclid(n as i64) as usize;
            *b = a[(u, v)];
        }
        fft.forward(&mut buf);
        for s_idx in 0..n {
            let ss = s_idx as i64 - half;
            let k = ss.rem_euclid(n as i64) as usize;
            out[(s_idx, t_idx)] = buf[k] * weyl_phase(ss, tt, n) * offset_phase(ss, grid);
        }
    }
    out
}

/// Exact inverse of [`mode_chi_from_matrix`].
fn mode_matrix_from_chi(chi: &Array2<C64>, grid: &PhaseSpaceGrid, fft: &FftPair) -> Array2<C64> {
    let n = grid.n();
    let half = (n / 2) as i64;
    let scale = 1.0 / n as f64;
    let mut out = Array2::zeros((n, n));
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for t_idx in 0..n {
        let tt = t_idx as i64 - half;
        for s_idx in 0..n {
            let ss = s_idx as i64 - half;
            let k = ss.rem_euclid(n as i64) as usize;
            buf[k] = chi[(s_idx, t_idx)]
                * weyl_phase(ss, tt, n).conj()
                * offset_phase(ss, grid).conj();
        }
        fft.inverse(&mut buf);
        for (u, b) in buf.iter().enumerate() {
            let v = (u as i64 + tt).rem_euclid(n as i64) as usize;
            out[(u, v)] = b * scale;
        }
    }
    out
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Run `body` for every index combination of `dims` (row-major odometer).
fn odometer(dims: &[usize], mut body: impl FnMut(&[usize])) {
    if dims.iter().any(|&d| d == 0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        body(&idx);
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                return;
            }
        }
    }
}

/// Apply `f` to every 2-D slice of `flat` along the axis pair
/// (ax_row, ax_col), holding all other axes fixed.
fn map_axis_pair(
    flat: &mut [C64],
    shape: &[usize],
    ax_row: usize,
    ax_col: usize,
    mut f: impl FnMut(&Array2<C64>) -> Array2<C64>,
) {
    let strides = row_major_strides(shape);
    let (nr, nc) = (shape[ax_row], shape[ax_col]);
    let others: Vec<usize> = (0..shape.len())
        .filter(|&a| a != ax_row && a != ax_col)
        .collect();
    let other_dims: Vec<usize> = others.iter().map(|&a| shape[a]).collect();
    let mut tmp = Array2::zeros((nr, nc));
    odometer(&other_dims, |idx| {
        let base: usize = idx.iter().zip(&others).map(|(&c, &a)| c * strides[a]).sum();
        for i in 0..nr {
            for j in 0..nc {
                tmp[(i, j)] = flat[base + i * strides[ax_row] + j * strides[ax_col]];
            }
        }
        let res = f(&tmp);
        for i in 0..nr {
            for j in 0..nc {
                flat[base + i * strides[ax_row] + j * strides[ax_col]] = res[(i, j)];
            }
        }
    });
}

/// Apply `f` to every 1-D lane of `flat` along `axis`.
fn map_lanes(
    flat: &mut [C64],
    shape: &[usize],
    axis: usize,
    mut f: impl FnMut(&mut [C64]),
) {
    let strides = row_major_strides(shape);
    let n = shape[axis];
    let others: Vec<usize> = (0..shape.len()).filter(|&a| a != axis).collect();
    let other_dims: Vec<usize> = others.iter().map(|&a| shape[a]).collect();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    odometer(&other_dims, |idx| {
        let base: usize = idx.iter().zip(&others).map(|(&c, &a)| c * strides[a]).sum();
        for (i, b) in buf.iter_mut().enumerate() {
            *b = flat[base + i * strides[axis]];
        }
        f(&mut buf);
        for (i, b) in buf.iter().enumerate() {
            flat[base + i * strides[axis]] = *b;
        }
    });
}

/// Swap halves: centered index ↔ FFT index (n even).
fn half_shift(buf: &mut [C64]) {
    let n = buf.len();
    for i in 0..n / 2 {
        buf.swap(i, i + n / 2);
    }
}

/// Lane κ → x: out[a] = Σ_s v[s] e^{+i s̃ Δκ x_min} e^{+2πi s̃ a / n}.
fn lane_kappa_to_x(buf: &mut [C64], grid: &PhaseSpaceGrid, fft: &FftPair) {
    let n = grid.n();
    let half = (n / 2) as i64;
    for (s_idx, b) in buf.iter_mut().enumerate() {
        *b *= offset_phase(s_idx as i64 - half, grid).conj();
    }
    half_shift(buf);
    fft.inverse(buf);
}

/// Exact inverse of [`lane_kappa_to_x`] (includes the 1/n).
fn lane_x_to_kappa(buf: &mut [C64], grid: &PhaseSpaceGrid, fft: &FftPair) {
    let n = grid.n();
    let half = (n / 2) as i64;
    fft.forward(buf);
    half_shift(buf);
    let scale = 1.0 / n as f64;
    for (s_idx, b) in buf.iter_mut().enumerate() {
        *b = *b * scale * offset_phase(s_idx as i64 - half, grid);
    }
}

/// Lane ω → p: out[j] = Σ_t v[t] e^{+2πi j̃ t̃ / n}.
fn lane_omega_to_p(buf: &mut [C64], fft: &FftPair) {
    half_shift(buf);
    fft.inverse(buf);
    half_shift(buf);
}

/// Exact inverse of [`lane_omega_to_p`] (includes the 1/n).
fn lane_p_to_omega(buf: &mut [C64], fft: &FftPair) {
    let n = buf.len();
    half_shift(buf);
    fft.forward(buf);
    half_shift(buf);
    let scale = 1.0 / n as f64;
    for b in buf.iter_mut() {
        *b *= scale;
    }
}

fn check_op_grids(op: &LabeledOperator, grids: &[PhaseSpaceGrid]) -> Result<()> {
    if op.labels().len() != grids.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} subsystems, {} grids given",
            op.labels().len(),
            grids.len()
        )));
    }
    for (l, g) in op.labels().iter().zip(grids) {
        if l.dim != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem {} has dim {}, grid has {} points",
                l.name,
                l.dim,
                g.n()
            )));
        }
    }
    Ok(())
}

/// Characteristic function of an operator on the given per-mode grids.
pub fn chi_of_operator(op: &LabeledOperator, grids: &[PhaseSpaceGrid]) -> Result<ChiGrid> {
    check_op_grids(op, grids)?;
    let k = grids.len();
    let dims_rowcol: Vec<usize> = grids
        .iter()
        .map(|g| g.n())
        .chain(grids.iter().map(|g| g.n()))
        .collect();
    let mut flat: Vec<C64> = op.data().iter().copied().collect();

    for (m, g) in grids.iter().enumerate() {
        let fft = FftPair::new(g.n());
        map_axis_pair(&mut flat, &dims_rowcol, m, k + m, |slice| {
            mode_chi_from_matrix(slice, g, &fft)
        });
    }

    // Reorder axes [s_1..s_k, t_1..t_k] → [s_1, t_1, s_2, t_2, ...].
    let arr = ArrayD::from_shape_vec(IxDyn(&dims_rowcol), flat).expect("shape consistent");
    let mut axes = Vec::with_capacity(2 * k);
    for m in 0..k {
        axes.push(m);
        axes.push(k + m);
    }
    let values = arr
        .permuted_axes(IxDyn(&axes))
        .as_standard_layout()
        .to_owned();
    ChiGrid::new(
        grids.to_vec(),
        op.labels().iter().map(|l| l.name.clone()).collect(),
        values,
    )
}

/// Operator with the given characteristic function (exact inverse of
/// [`chi_of_operator`]).
pub fn operator_from_chi(chi: &ChiGrid) -> Result<LabeledOperator> {
    let k = chi.n_modes();
    // [s_1, t_1, ...] → [s_1..s_k, t_1..t_k]
    let mut axes = Vec::with_capacity(2 * k);
    for m in 0..k {
        axes.push(2 * m);
    }
    for m in 0..k {
        axes.push(2 * m + 1);
    }
    let arr = chi
        .values
        .clone()
        .permuted_axes(IxDyn(&axes))
        .as_standard_layout()
        .to_owned();
    let shape = arr.shape().to_vec();
    let mut flat: Vec<C64> = arr.iter().copied().collect();
    for (m, g) in chi.grids.iter().enumerate() {
        let fft = FftPair::new(g.n());
        map_axis_pair(&mut flat, &shape, m, k + m, |slice| {
            mode_matrix_from_chi(slice, g, &fft)
        });
    }
    let d: usize = chi.grids.iter().map(|g| g.n()).product();
    let data = Array2::from_shape_vec((d, d), flat).expect("square by construction");
    let labels: Vec<SubsystemLabel> = chi
        .grids
        .iter()
        .zip(&chi.mode_labels)
        .map(|(g, l)| SubsystemLabel::new(l.clone(), g.n()))
        .collect();
    LabeledOperator::new(labels, data)
}

/// Symplectic Fourier transform χ → Weyl symbol:
/// W(ξ) = (1/2π)^n Σ χ(η) e^{+iξ·η} ΔκΔω.
pub fn inverse_chi(chi: &ChiGrid) -> WignerGrid {
    let shape = grid_shape(&chi.grids);
    let mut flat: Vec<C64> = chi.values.iter().copied().collect();
    let mut scale = 1.0f64;
    for (m, g) in chi.grids.iter().enumerate() {
        let fft = FftPair::new(g.n());
        map_lanes(&mut flat, &shape, 2 * m, |lane| lane_kappa_to_x(lane, g, &fft));
        map_lanes(&mut flat, &shape, 2 * m + 1, |lane| lane_omega_to_p(lane, &fft));
        scale /= g.n() as f64;
    }
    for v in flat.iter_mut() {
        *v *= scale;
    }
    let values = ArrayD::from_shape_vec(IxDyn(&shape), flat).expect("shape consistent");
    WignerGrid::new(chi.grids.clone(), chi.mode_labels.clone(), values)
        .expect("shape consistent by construction")
}

/// Exact inverse of [`inverse_chi`]: Weyl symbol → characteristic function,
/// matching the convention χ(η) = (1/2π)^n ∫ W(ξ) e^{−iξ·η} dξ.
pub fn chi_transform(wg: &WignerGrid) -> ChiGrid {
    let shape = grid_shape(&wg.grids);
    let mut flat: Vec<C64> = wg.values.iter().copied().collect();
    let mut scale = 1.0f64;
    for (m, g) in wg.grids.iter().enumerate() {
        let fft = FftPair::new(g.n());
        map_lanes(&mut flat, &shape, 2 * m, |lane| lane_x_to_kappa(lane, g, &fft));
        map_lanes(&mut flat, &shape, 2 * m + 1, |lane| lane_p_to_omega(lane, &fft));
        scale *= g.n() as f64;
    }
    for v in flat.iter_mut() {
        *v *= scale;
    }
    let values = ArrayD::from_shape_vec(IxDyn(&shape), flat).expect("shape consistent");
    ChiGrid::new(wg.grids.clone(), wg.mode_labels.clone(), values)
        .expect("shape consistent by construction")
}

/// Weyl symbol of an operator on a discretized position basis.
pub fn weyl_symbol(op: &LabeledOperator, grids: &[PhaseSpaceGrid]) -> Result<WignerGrid> {
    Ok(inverse_chi(&chi_of_operator(op, grids)?))
}

/// Operator with the given Weyl symbol (exact inverse of [`weyl_symbol`]).
pub fn inverse_weyl(wg: &WignerGrid) -> Result<LabeledOperator> {
    operator_from_chi(&chi_transform(wg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn grid16() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(-8.0, 8.0, 16).unwrap()
    }

    fn grid64() -> PhaseSpaceGrid {
        PhaseSpaceGrid::default_grid()
    }

    fn mode_label(g: &PhaseSpaceGrid, name: &str) -> SubsystemLabel {
        SubsystemLabel::new(name, g.n())
    }

    /// Normalized Gaussian wavepacket on the grid (discrete ℓ² norm 1).
    fn gaussian_ket(g: &PhaseSpaceGrid, x0: f64, p0: f64, sigma: f64) -> Vec<C64> {
        let mut v: Vec<C64> = (0..g.n())
            .map(|k| {
                let x = g.x(k);
                let amp = (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp();
                C64::from_polar(amp, p0 * (x - x0))
            })
            .collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        v
    }

    fn pure_state(g: &PhaseSpaceGrid, name: &str, ket: &[C64]) -> LabeledOperator {
        let n = g.n();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        LabeledOperator::new(vec![mode_label(g, name)], m).unwrap()
    }

    fn pseudo_random_hermitian(g: &PhaseSpaceGrid, name: &str, seed: u64) -> LabeledOperator {
        let n = g.n();
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(7);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c(next(), next());
            }
        }
        let herm = (&m + &m.t().mapv(|z: C64| z.conj())).mapv(|z| z * 0.5);
        LabeledOperator::new(vec![mode_label(g, name)], herm).unwrap()
    }

    #[test]
    fn identity_chi_is_delta_and_weyl_is_one() {
        let g = grid16();
        let id = LabeledOperator::identity(vec![mode_label(&g, "m")]);
        let chi = chi_of_operator(&id, &[g.clone()]).unwrap();
        let o = g.origin();
        assert!((chi.values[[o, o]] - c(16.0, 0.0)).norm() < 1e-12);
        let off: f64 = chi
            .values
            .indexed_iter()
            .filter(|(idx, _)| (idx[0], idx[1]) != (o, o))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-12);

        let w = inverse_chi(&chi);
        for v in w.values.iter() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ground_gaussian_matches_closed_form() {
        // |σ⟩⟨σ| has Weyl symbol 2 exp(−x²/σ² − σ²p²).
        let g = grid64();
        let sigma = 1.0;
        let rho = pure_state(&g, "m", &gaussian_ket(&g, 0.0, 0.0, sigma));
        let w = weyl_symbol(&rho, &[g.clone()]).unwrap();
        let mut worst = 0.0f64;
        for (idx, v) in w.values.indexed_iter() {
            let x = g.x(idx[0]);
            let p = g.p(idx[1]);
            let expect = 2.0 * (-(x * x) / (sigma * sigma) - sigma * sigma * p * p).exp();
            worst = worst.max((v - c(expect, 0.0)).norm());
        }
        // The grid ket is ℓ²-normalized, not L²: values match the continuum
        // up to wrap-around tails of the σ = 1 packet on [−8, 8).
        assert!(worst < 1e-6, "worst deviation {worst}");
        assert!(w.max_imag() < 1e-12);
        assert!((w.quasi_norm() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn moving_packet_wigner_center() {
        let g = grid64();
        let rho = pure_state(&g, "m", &gaussian_ket(&g, 1.5, 2.0, 1.0));
        let w = weyl_symbol(&rho, &[g.clone()]).unwrap();
        // mean position and momentum from the Wigner distribution
        let cell = g.cell() / (2.0 * std::f64::consts::PI);
        let mut mx = 0.0;
        let mut mp = 0.0;
        for (idx, v) in w.values.indexed_iter() {
            mx += g.x(idx[0]) * v.re * cell;
            mp += g.p(idx[1]) * v.re * cell;
        }
        assert!((mx - 1.5).abs() < 1e-8, "⟨x⟩ = {mx}");
        assert!((mp - 2.0).abs() < 1e-8, "⟨p⟩ = {mp}");
    }

    #[test]
    fn bin_projector_marginal_recovers_indicator() {
        // Quadrature oracle: the p-marginal (1/2π) Σ_j W Δp equals the
        // diagonal ⟨x|P|x⟩ = indicator/Δx exactly.
        let g = grid16();
        let n = g.n();
        let mut m = Array2::zeros((n, n));
        let in_bin = |k: usize| g.x(k) >= -2.0 && g.x(k) < 2.0;
        for k in 0..n {
            if in_bin(k) {
                m[(k, k)] = c(1.0, 0.0);
            }
        }
        let proj = LabeledOperator::new(vec![mode_label(&g, "m")], m).unwrap();
        let w = weyl_symbol(&proj, &[g.clone()]).unwrap();
        for a in 0..n {
            let marginal: C64 = (0..n).map(|j| w.values[[a, j]]).sum::<C64>() * g.dp()
                / (2.0 * std::f64::consts::PI);
            let expect = if in_bin(a) { 1.0 / g.dx() } else { 0.0 };
            assert!(
                (marginal - c(expect, 0.0)).norm() < 1e-10,
                "marginal at {a}: {marginal}"
            );
        }
        // sinc spread: the symbol is not supported on the bin alone in p
        let off_p = w.values[[g.origin(), g.origin() + 3]].norm();
        assert!(off_p > 1e-3);
    }

    #[test]
    fn trace_pairing_is_exact() {
        let g = grid64();
        for seed in 0..3u64 {
            let a = pseudo_random_hermitian(&g, "m", 100 + seed);
            let b = pseudo_random_hermitian(&g, "m", 200 + seed);
            let tr = a.matmul(&b).unwrap().trace();
            let wa = weyl_symbol(&a, &[g.clone()]).unwrap();
            let wb = weyl_symbol(&b, &[g.clone()]).unwrap();
            let pair: C64 = wa
                .values
                .iter()
                .zip(wb.values.iter())
                .map(|(x, y)| x * y)
                .sum::<C64>()
                * (g.cell() / (2.0 * std::f64::consts::PI));
            let scale = a.frobenius_norm() * b.frobenius_norm();
            assert!(
                (tr - pair).norm() <= 1e-10 * scale.max(1.0),
                "pairing error {} at seed {}",
                (tr - pair).norm(),
                seed
            );
        }
    }

    #[test]
    fn roundtrips_are_exact() {
        let g = grid16();
        let a = pseudo_random_hermitian(&g, "m", 5);
        let chi = chi_of_operator(&a, &[g.clone()]).unwrap();
        let back = operator_from_chi(&chi).unwrap();
        assert!(a.sub(&back).unwrap().frobenius_norm() < 1e-12);

        let w = inverse_chi(&chi);
        let chi2 = chi_transform(&w);
        let dev: f64 = chi
            .values
            .iter()
            .zip(chi2.values.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-11, "chi roundtrip deviation {dev}");

        let op2 = inverse_weyl(&w).unwrap();
        assert!(a.sub(&op2).unwrap().frobenius_norm() < 1e-11);
    }

    #[test]
    fn inverse_weyl_linear() {
        let g = grid16();
        let a = pseudo_random_hermitian(&g, "m", 8);
        let b = pseudo_random_hermitian(&g, "m", 9);
        let wa = weyl_symbol(&a, &[g.clone()]).unwrap();
        let wb = weyl_symbol(&b, &[g.clone()]).unwrap();
        let combo = WignerGrid::new(
            wa.grids.clone(),
            wa.mode_labels.clone(),
            &wa.values * c(2.0, 0.0) + &wb.values * c(0.0, 1.0),
        )
        .unwrap();
        let op = inverse_weyl(&combo).unwrap();
        let expect = a.scale(c(2.0, 0.0)).add(&b.scale(c(0.0, 1.0))).unwrap();
        assert!(op.sub(&expect).unwrap().frobenius_norm() < 1e-11);
    }

    #[test]
    fn hermitian_symmetry_of_chi() {
        let g = grid16();
        let a = pseudo_random_hermitian(&g, "m", 13);
        let chi = chi_of_operator(&a, &[g.clone()]).unwrap();
        assert!(chi.hermitian_symmetry_deviation() < 1e-11);
        let w = inverse_chi(&chi);
        assert!(w.max_imag() < 1e-11);
    }

    #[test]
    fn chi_gaussian_reciprocal_widths() {
        // χ of |σ⟩⟨σ| is exp(−(σ²κ² + ω²/σ²)/4).
        let g = grid64();
        let sigma = 1.3;
        let rho = pure_state(&g, "m", &gaussian_ket(&g, 0.0, 0.0, sigma));
        let chi = chi_of_operator(&rho, &[g.clone()]).unwrap();
        let mut worst = 0.0f64;
        for (idx, v) in chi.values.indexed_iter() {
            let kappa = g.kappa(idx[0]);
            let omega = g.omega(idx[1]);
            let expect =
                (-(sigma * sigma * kappa * kappa + omega * omega / (sigma * sigma)) / 4.0).exp();
            worst = worst.max((v - c(expect, 0.0)).norm());
        }
        assert!(worst < 1e-6, "worst chi deviation {worst}");
    }

    #[test]
    fn wigner_spike_transforms_to_constant() {
        let g = grid16();
        let n = g.n();
        let mut values = ArrayD::zeros(IxDyn(&[n, n]));
        values[IxDyn(&[g.origin(), g.origin()])] = c(1.0, 0.0);
        let w = WignerGrid::new(vec![g.clone()], vec!["m".into()], values).unwrap();
        let chi = chi_transform(&w);
        // (1/2π)² … a delta in ξ has constant |χ| across η
        let first = chi.values.iter().next().unwrap().norm();
        assert!(first > 0.0);
        for v in chi.values.iter() {
            assert!((v.norm() - first).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_under_chi_transform() {
        let g = grid16();
        let a = pseudo_random_hermitian(&g, "m", 21);
        let w = weyl_symbol(&a, &[g.clone()]).unwrap();
        let chi = chi_transform(&w);
        let sw: f64 = w.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell();
        let sc: f64 = chi.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
            * (g.dkappa() * g.domega());
        assert!((sw - sc).abs() < 1e-9 * sw.max(1.0));
    }

    #[test]
    fn two_mode_transform_factorizes() {
        let g = grid16();
        let a = pseudo_random_hermitian(&g, "m1", 31);
        let b = pseudo_random_hermitian(&g, "m2", 32);
        let ab = crate::operator_core::tensor(&a, &b).unwrap();
        let chi_ab = chi_of_operator(&ab, &[g.clone(), g.clone()]).unwrap();
        let chi_a = chi_of_operator(&a, &[g.clone()]).unwrap();
        let chi_b = chi_of_operator(&b, &[g.clone()]).unwrap();
        let prod = chi_a.tensor(&chi_b).unwrap();
        let dev: f64 = chi_ab
            .values
            .iter()
            .zip(prod.values.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "two-mode factorization deviation {dev}");

        let back = operator_from_chi(&chi_ab).unwrap();
        assert!(ab.sub(&back).unwrap().frobenius_norm() < 1e-10);
    }
}
