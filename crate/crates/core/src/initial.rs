//! Initial velocity fields, constructed directly in spectral space so the
//! field invariants hold exactly.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::field::SpectralVelocity;
use crate::grid::Grid;
use crate::operators;

/// Classical Taylor-Green vortex
/// u = A (sin sx cos sy cos sz, -cos sx sin sy cos sz, 0), s = 2 pi / period.
///
/// Built from its eight Fourier modes at k = (+-1, +-1, +-1), so it is
/// exactly divergence-free and exactly Hermitian on any grid.
pub fn taylor_green(grid: Arc<Grid>, amplitude: f64) -> SpectralVelocity {
    let mut u = SpectralVelocity::zero(grid.clone());
    // sin x cos y cos z = sum over signs sx,sy,sz of (-i sx / 8) e^{i k.x}
    for sx in [-1i32, 1] {
        for sy in [-1i32, 1] {
            for sz in [-1i32, 1] {
                let idx = grid.mode_idx(sx, sy, sz);
                u.component_mut(0)[idx] = Complex64::new(0.0, -amplitude * sx as f64 / 8.0);
                u.component_mut(1)[idx] = Complex64::new(0.0, amplitude * sy as f64 / 8.0);
            }
        }
    }
    u
}

/// Single-harmonic field u(x) = e cos(s k . x) for a real direction vector e.
/// Useful as Stokes-flow initial data when e is orthogonal to k.
pub fn single_mode(grid: &Arc<Grid>, k: [i32; 3], e: [f64; 3]) -> SpectralVelocity {
    let mut u = SpectralVelocity::zero(grid.clone());
    let plus = grid.mode_idx(k[0], k[1], k[2]);
    let minus = grid.mode_idx(-k[0], -k[1], -k[2]);
    for (c, &ec) in e.iter().enumerate() {
        u.component_mut(c)[plus] = Complex64::new(ec / 2.0, 0.0);
        u.component_mut(c)[minus] = Complex64::new(ec / 2.0, 0.0);
    }
    u
}

/// Random divergence-free field with an |k|^-2 amplitude falloff, seeded and
/// reproducible across platforms. Retained modes only; zero mean.
pub fn random_divergence_free(grid: Arc<Grid>, amplitude: f64, seed: u64) -> SpectralVelocity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut u = SpectralVelocity::zero(grid.clone());
    for c in 0..3 {
        let arr = u.component_mut(c);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !grid.retained(i, j, k) {
                        continue;
                    }
                    let (ki, kj, kk) = (grid.mode(i), grid.mode(j), grid.mode(k));
                    let ksq = (ki * ki + kj * kj + kk * kk) as f64;
                    if ksq == 0.0 {
                        continue;
                    }
                    let scale = amplitude / (1.0 + ksq);
                    arr[grid.idx(i, j, k)] = Complex64::new(
                        scale * rng.gen_range(-1.0..1.0),
                        scale * rng.gen_range(-1.0..1.0),
                    );
                }
            }
        }
    }
    // Conjugate-symmetrize, then remove the compressible part.
    for c in 0..3 {
        let arr = u.component_mut(c);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = grid.idx(i, j, k);
                    let nidx = grid.mode_idx(-grid.mode(i), -grid.mode(j), -grid.mode(k));
                    if nidx > idx {
                        let m = 0.5 * (arr[idx] + arr[nidx].conj());
                        arr[idx] = m;
                        arr[nidx] = m.conj();
                    } else if nidx == idx {
                        arr[idx].im = 0.0;
                    }
                }
            }
        }
    }
    let mut out = operators::project_div_free(&u);
    out.zero_mean();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn taylor_green_zero_amplitude_is_zero() {
        let grid = Grid::new(8, TAU).unwrap();
        let u = taylor_green(grid, 0.0);
        assert_eq!(u.l2_norm_sq(), 0.0);
    }

    #[test]
    fn taylor_green_is_exactly_divergence_free() {
        for n in [8, 16] {
            let grid = Grid::new(n, TAU).unwrap();
            let u = taylor_green(grid, 1.7);
            assert!(u.max_divergence() <= 1e-12, "{}", u.max_divergence());
            assert_eq!(u.hermitian_asymmetry(), 0.0);
            assert_eq!(u.component(0)[0], Complex64::default());
        }
    }

    /// Independent oracle: evaluate the trig formula at collocation points
    /// and integrate |u|^2 by collocation quadrature at n = 16. This froze
    /// ||u||^2 = 2 A^2 pi^3 for period 2 pi.
    #[test]
    fn taylor_green_energy_matches_quadrature_oracle() {
        let n = 16usize;
        let a = 1.3;
        let grid = Grid::new(n, TAU).unwrap();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (
                        TAU * i as f64 / n as f64,
                        TAU * j as f64 / n as f64,
                        TAU * k as f64 / n as f64,
                    );
                    let u1 = a * x.sin() * y.cos() * z.cos();
                    let u2 = -a * x.cos() * y.sin() * z.cos();
                    quad += u1 * u1 + u2 * u2;
                }
            }
        }
        quad *= grid.volume() / grid.len() as f64;
        let closed_form = 2.0 * a * a * PI.powi(3);
        assert!(
            (quad - closed_form).abs() < 1e-10 * closed_form,
            "quadrature {quad} vs closed form {closed_form}"
        );
        let u = taylor_green(grid, a);
        let spectral = u.l2_norm_sq();
        assert!(
            (spectral - closed_form).abs() < 1e-12 * closed_form,
            "spectral {spectral} vs closed form {closed_form}"
        );
        // Kinetic energy with the 1/2 factor: A^2 pi^3.
        assert!((0.5 * spectral - a * a * PI.powi(3)).abs() < 1e-12 * closed_form);
    }

    #[test]
    fn taylor_green_physical_values_match_formula() {
        let n = 8usize;
        let a = 0.9;
        let grid = Grid::new(n, TAU).unwrap();
        let phys = taylor_green(grid, a).to_physical();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (
                        TAU * i as f64 / n as f64,
                        TAU * j as f64 / n as f64,
                        TAU * k as f64 / n as f64,
                    );
                    let idx = (i * n + j) * n + k;
                    let expect = [
                        a * x.sin() * y.cos() * z.cos(),
                        -a * x.cos() * y.sin() * z.cos(),
                        0.0,
                    ];
                    for (c, &want) in expect.iter().enumerate() {
                        assert!(
                            (phys.component(c)[idx] - want).abs() < 1e-13,
                            "({i},{j},{k}) comp {c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn random_field_is_divergence_free_and_hermitian() {
        let grid = Grid::new(8, TAU).unwrap();
        let u = random_divergence_free(grid, 1.0, 123);
        assert!(u.l2_norm_sq() > 0.0);
        assert!(u.max_relative_divergence() <= 1e-10);
        assert!(u.hermitian_asymmetry() <= 1e-15);
        assert_eq!(u.component(0)[0], Complex64::default());
    }

    #[test]
    fn random_field_is_seed_deterministic() {
        let grid = Grid::new(8, TAU).unwrap();
        let a = random_divergence_free(grid.clone(), 1.0, 7);
        let b = random_divergence_free(grid, 1.0, 7);
        assert_eq!(a.max_coeff_diff(&b), 0.0);
    }
}
