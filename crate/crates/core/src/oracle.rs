//! Brute-force reference computations used by the self-test machinery and
//! the test suites. These deliberately avoid the FFT path: the advection
//! reference is a direct O(M^2) convolution over retained mode triads, so it
//! exercises none of the pseudospectral code it checks.

use rustfft::num_complex::Complex64;

use crate::field::SpectralVelocity;
use crate::operators;

/// Advection term P[(u . grad) u] by direct convolution in wavenumber space,
/// convective form: N_i(k) = sum_{p+q=k} u_j(p) (i q_j) u_i(q), restricted
/// to retained p, q, k. Feasible only at small n.
pub fn advection_by_convolution(u: &SpectralVelocity) -> SpectralVelocity {
    let grid = u.grid().clone();
    let n = grid.n() as i32;
    let s = grid.k_scale();
    let kmax = grid.max_retained_mode();
    let range = || -kmax..=kmax;

    // Collect retained modes once.
    let mut modes: Vec<[i32; 3]> = Vec::with_capacity(grid.retained_mode_count());
    for kx in range() {
        for ky in range() {
            for kz in range() {
                modes.push([kx, ky, kz]);
            }
        }
    }

    let mut out = SpectralVelocity::zero(grid.clone());
    for &[kx, ky, kz] in &modes {
        let out_idx = grid.mode_idx(kx, ky, kz);
        let mut acc = [Complex64::default(); 3];
        for &[px, py, pz] in &modes {
            let (qx, qy, qz) = (kx - px, ky - py, kz - pz);
            if qx.abs() > kmax || qy.abs() > kmax || qz.abs() > kmax {
                continue;
            }
            debug_assert!(qx.abs() < n / 2 && qy.abs() < n / 2 && qz.abs() < n / 2);
            let p_idx = grid.mode_idx(px, py, pz);
            let q_idx = grid.mode_idx(qx, qy, qz);
            // u_j(p) q_j, scaled to physical wavenumbers.
            let dot = u.component(0)[p_idx] * (qx as f64)
                + u.component(1)[p_idx] * (qy as f64)
                + u.component(2)[p_idx] * (qz as f64);
            let iq_dot = Complex64::new(0.0, s) * dot;
            for (c, slot) in acc.iter_mut().enumerate() {
                *slot += iq_dot * u.component(c)[q_idx];
            }
        }
        for (c, &value) in acc.iter().enumerate() {
            out.component_mut(c)[out_idx] = value;
        }
    }
    operators::project_div_free_in_place(&mut out);
    out
}
