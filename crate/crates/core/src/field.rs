use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::fft;
use crate::grid::Grid;

/// Divergence-free velocity field stored as Fourier coefficients on the full
/// n^3 lattice (masked modes are kept as explicit zeros).
///
/// Invariants maintained by every constructor and operator in this crate:
/// coeff(-k) = conj(coeff(k)), the k = 0 mode is zero (no mean flow), and
/// modes outside the two-thirds mask are zero.
#[derive(Clone)]
pub struct SpectralVelocity {
    grid: Arc<Grid>,
    coeffs: [Vec<Complex64>; 3],
}

impl std::fmt::Debug for SpectralVelocity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralVelocity")
            .field("grid", &self.grid)
            .field("l2_norm_sq", &self.l2_norm_sq())
            .finish()
    }
}

impl SpectralVelocity {
    pub fn zero(grid: Arc<Grid>) -> Self {
        let len = grid.len();
        SpectralVelocity {
            grid,
            coeffs: [
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
            ],
        }
    }

    /// Wrap raw coefficient arrays. The caller is responsible for the field
    /// invariants; `dealias` and `crate::operators::project_div_free` can
    /// restore them.
    pub fn from_coeffs(grid: Arc<Grid>, coeffs: [Vec<Complex64>; 3]) -> Self {
        for c in &coeffs {
            assert_eq!(c.len(), grid.len());
        }
        SpectralVelocity { grid, coeffs }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coeffs[c]
    }

    pub fn components_mut(&mut self) -> [&mut Vec<Complex64>; 3] {
        let [a, b, c] = &mut self.coeffs;
        [a, b, c]
    }

    /// Zero every mode outside the two-thirds mask.
    pub fn dealias(&mut self) {
        let g = self.grid.clone();
        let n = g.n();
        for c in 0..3 {
            let arr = &mut self.coeffs[c];
            for i in 0..n {
                for j in 0..n {
                    let keep_ij = g.keep(i) && g.keep(j);
                    let row = (i * n + j) * n;
                    for k in 0..n {
                        if !(keep_ij && g.keep(k)) {
                            arr[row + k] = Complex64::default();
                        }
                    }
                }
            }
        }
    }

    /// Zero the k = 0 mode (pins the mean flow).
    pub fn zero_mean(&mut self) {
        for c in 0..3 {
            self.coeffs[c][0] = Complex64::default();
        }
    }

    /// Parseval L2 norm squared: ||u||^2 = V * sum_k |u_hat(k)|^2 over all
    /// components, summed in fixed storage order.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut sum = 0.0;
        for c in 0..3 {
            for v in &self.coeffs[c] {
                sum += v.norm_sqr();
            }
        }
        sum * self.grid.volume()
    }

    pub fn is_finite(&self) -> bool {
        self.l2_norm_sq().is_finite()
    }

    /// Largest |k . u_hat(k)| over all modes, in physical wavenumber units.
    pub fn max_divergence(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let s = g.k_scale();
        let mut max = 0.0f64;
        for i in 0..n {
            let ki = g.mode(i) as f64;
            for j in 0..n {
                let kj = g.mode(j) as f64;
                let row = (i * n + j) * n;
                for k in 0..n {
                    let kk = g.mode(k) as f64;
                    let idx = row + k;
                    let d = ki * self.coeffs[0][idx]
                        + kj * self.coeffs[1][idx]
                        + kk * self.coeffs[2][idx];
                    max = max.max(d.norm());
                }
            }
        }
        max * s
    }

    /// Largest |k . u_hat(k)| / ||u_hat(k)|| over nonzero modes; the
    /// discrete incompressibility invariant bounds this by 1e-10.
    pub fn max_relative_divergence(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut max = 0.0f64;
        for i in 0..n {
            let ki = g.mode(i) as f64;
            for j in 0..n {
                let kj = g.mode(j) as f64;
                let row = (i * n + j) * n;
                for k in 0..n {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let kk = g.mode(k) as f64;
                    let idx = row + k;
                    let (c0, c1, c2) = (
                        self.coeffs[0][idx],
                        self.coeffs[1][idx],
                        self.coeffs[2][idx],
                    );
                    let norm = (c0.norm_sqr() + c1.norm_sqr() + c2.norm_sqr()).sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    let kmag = (ki * ki + kj * kj + kk * kk).sqrt();
                    let d = (ki * c0 + kj * c1 + kk * c2).norm();
                    max = max.max(d / (kmag * norm));
                }
            }
        }
        max
    }

    /// Largest |coeff(-k) - conj(coeff(k))| over all modes and components.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = g.idx(i, j, k);
                    let nidx = g.mode_idx(-g.mode(i), -g.mode(j), -g.mode(k));
                    for c in 0..3 {
                        max = max.max((self.coeffs[c][nidx] - self.coeffs[c][idx].conj()).norm());
                    }
                }
            }
        }
        max
    }

    /// Synthesize collocation values (real part of the inverse transform).
    pub fn to_physical(&self) -> PhysicalField {
        let (vx, vy) = fft::inverse_pair_real(&self.grid, &self.coeffs[0], &self.coeffs[1]);
        let vz = fft::inverse_single_real(&self.grid, &self.coeffs[2]);
        PhysicalField {
            grid: self.grid.clone(),
            values: [vx, vy, vz],
        }
    }

    /// Analyze collocation values into a dealiased spectral field. No
    /// projection is applied; compose with `project_div_free` when the
    /// input is not known to be divergence-free.
    pub fn from_physical(phys: &PhysicalField) -> Self {
        let (c0, c1) = fft::forward_pair_real(&phys.grid, &phys.values[0], &phys.values[1]);
        let c2 = fft::forward_single_real(&phys.grid, &phys.values[2]);
        let mut out = SpectralVelocity {
            grid: phys.grid.clone(),
            coeffs: [c0, c1, c2],
        };
        out.dealias();
        out
    }

    /// max |a - b| over modes and components.
    pub fn max_coeff_diff(&self, other: &SpectralVelocity) -> f64 {
        let mut max = 0.0f64;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                max = max.max((a - b).norm());
            }
        }
        max
    }

    /// Relative L2 distance ||a - b|| / ||b||; returns the absolute norm
    /// when ||b|| is zero.
    pub fn rel_l2_diff(&self, other: &SpectralVelocity) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                num += (a - b).norm_sqr();
                den += b.norm_sqr();
            }
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// Real-valued collocation samples of a vector field.
#[derive(Clone)]
pub struct PhysicalField {
    grid: Arc<Grid>,
    values: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn new(grid: Arc<Grid>, values: [Vec<f64>; 3]) -> Self {
        for v in &values {
            assert_eq!(v.len(), grid.len());
        }
        PhysicalField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Largest pointwise Euclidean norm |u(x_j)|.
    pub fn max_norm(&self) -> f64 {
        let mut max = 0.0f64;
        for idx in 0..self.grid.len() {
            let sq = self.values[0][idx] * self.values[0][idx]
                + self.values[1][idx] * self.values[1][idx]
                + self.values[2][idx] * self.values[2][idx];
            max = max.max(sq);
        }
        max.sqrt()
    }

    /// Collocation-quadrature L^q norm of |u(x)| for q >= 1.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let dv = self.grid.volume() / self.grid.len() as f64;
        let half_q = q / 2.0;
        let int_half_q = half_q.round();
        let even_q = q > 0.0 && (half_q - int_half_q).abs() < 1e-12;
        let mut sum = 0.0;
        for idx in 0..self.grid.len() {
            let sq = self.values[0][idx] * self.values[0][idx]
                + self.values[1][idx] * self.values[1][idx]
                + self.values[2][idx] * self.values[2][idx];
            if even_q {
                sum += sq.powi(int_half_q as i32);
            } else {
                sum += sq.sqrt().powf(q);
            }
        }
        (sum * dv).powf(1.0 / q)
    }

    /// Collocation-quadrature L2 norm squared (for Parseval cross-checks).
    pub fn l2_norm_sq(&self) -> f64 {
        let dv = self.grid.volume() / self.grid.len() as f64;
        let mut sum = 0.0;
        for c in 0..3 {
            for v in &self.values[c] {
                sum += v * v;
            }
        }
        sum * dv
    }
}
