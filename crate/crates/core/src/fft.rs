//! 3D complex-to-complex transforms on the n^3 lattice.
//!
//! Each pass transforms the contiguous axis, then the lattice is cyclically
//! permuted so the next axis becomes contiguous. Three passes plus three
//! permutations return the data to its original layout, so both transforms
//! are in place from the caller's point of view.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;

use crate::grid::Grid;

thread_local! {
    // Reused permutation scratch; contents are always fully overwritten.
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

fn with_scratch<R>(len: usize, f: impl FnOnce(&mut Vec<Complex64>) -> R) -> R {
    SCRATCH.with(|cell| {
        let mut buf = cell.borrow_mut();
        buf.resize(len, Complex64::default());
        f(&mut buf)
    })
}

/// dst[(c*n + a)*n + b] = src[(a*n + b)*n + c]
///
/// For each fixed a this is an n x n transpose; 8x8 tiles keep both sides
/// within a few cache lines.
fn permute_cycle(n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    debug_assert_eq!(src.len(), n * n * n);
    debug_assert_eq!(dst.len(), n * n * n);
    const B: usize = 8;
    if !n.is_multiple_of(B) {
        for a in 0..n {
            for b in 0..n {
                let row = (a * n + b) * n;
                for c in 0..n {
                    dst[(c * n + a) * n + b] = src[row + c];
                }
            }
        }
        return;
    }
    for a in 0..n {
        for b0 in (0..n).step_by(B) {
            for c0 in (0..n).step_by(B) {
                for c in c0..c0 + B {
                    let drow = (c * n + a) * n;
                    for b in b0..b0 + B {
                        dst[drow + b] = src[(a * n + b) * n + c];
                    }
                }
            }
        }
    }
}

fn transform(grid: &Grid, data: &mut Vec<Complex64>, forward: bool) {
    let n = grid.n();
    debug_assert_eq!(data.len(), n * n * n);
    let fft = if forward {
        grid.fft_forward().clone()
    } else {
        grid.fft_inverse().clone()
    };
    with_scratch(grid.len(), |scratch| {
        // rustfft processes the buffer in chunks of the planned length.
        fft.process(data);
        permute_cycle(n, data, scratch);
        fft.process(scratch);
        permute_cycle(n, scratch, data);
        fft.process(data);
        permute_cycle(n, data, scratch);
        std::mem::swap(data, scratch);
    });
}

/// In-place forward transform; output is normalized so the coefficients are
/// Fourier-series coefficients (synthesis carries no 1/n^3 factor).
pub fn forward3(grid: &Grid, data: &mut Vec<Complex64>) {
    transform(grid, data, true);
    let norm = 1.0 / grid.len() as f64;
    for v in data.iter_mut() {
        *v *= norm;
    }
}

/// In-place inverse (synthesis) transform, unnormalized.
pub fn inverse3(grid: &Grid, data: &mut Vec<Complex64>) {
    transform(grid, data, false);
}

#[inline]
fn neg_axis(n: usize, i: usize) -> usize {
    if i == 0 {
        0
    } else {
        n - i
    }
}

/// Synthesize two Hermitian spectra with one complex transform: the inverse
/// of `a_hat + i b_hat` carries `a` in its real part and `b` in its
/// imaginary part when both inputs are conjugate-symmetric.
pub fn inverse_pair_real(
    grid: &Grid,
    a_hat: &[Complex64],
    b_hat: &[Complex64],
) -> (Vec<f64>, Vec<f64>) {
    let mut z: Vec<Complex64> = a_hat
        .iter()
        .zip(b_hat)
        .map(|(a, b)| Complex64::new(a.re - b.im, a.im + b.re))
        .collect();
    inverse3(grid, &mut z);
    let a = z.iter().map(|v| v.re).collect();
    let b = z.iter().map(|v| v.im).collect();
    (a, b)
}

/// Synthesize one Hermitian spectrum to its real collocation values.
pub fn inverse_single_real(grid: &Grid, a_hat: &[Complex64]) -> Vec<f64> {
    let mut z = a_hat.to_vec();
    inverse3(grid, &mut z);
    z.iter().map(|v| v.re).collect()
}

/// Packed analysis of two real fields in one complex transform. The two
/// spectra stay interleaved: recover them per mode with
/// a_hat(k) = (z(k) + conj(z(-k))) / 2 and
/// b_hat(k) = (z(k) - conj(z(-k))) / (2i).
pub fn forward_packed(grid: &Grid, a: &[f64], b: &[f64]) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    forward3(grid, &mut z);
    z
}

/// Unpack one mode pair from a packed spectrum: (a_hat(k), b_hat(k)) given
/// z(k) and z(-k).
#[inline]
pub fn unpack_mode(zp: Complex64, zneg: Complex64) -> (Complex64, Complex64) {
    let zm = zneg.conj();
    (
        Complex64::new(0.5 * (zp.re + zm.re), 0.5 * (zp.im + zm.im)),
        Complex64::new(0.5 * (zp.im - zm.im), -0.5 * (zp.re - zm.re)),
    )
}

/// Analyze two real fields with one complex transform. The outputs are
/// conjugate-symmetrized exactly, so every spectrum built through this path
/// satisfies coeff(-k) = conj(coeff(k)) bitwise.
pub fn forward_pair_real(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.n();
    let z = forward_packed(grid, a, b);
    let mut a_hat = vec![Complex64::default(); grid.len()];
    let mut b_hat = vec![Complex64::default(); grid.len()];
    for i in 0..n {
        let ni = neg_axis(n, i);
        for j in 0..n {
            let nj = neg_axis(n, j);
            for k in 0..n {
                let nk = neg_axis(n, k);
                let idx = (i * n + j) * n + k;
                let nidx = (ni * n + nj) * n + nk;
                let (ah, bh) = unpack_mode(z[idx], z[nidx]);
                a_hat[idx] = ah;
                b_hat[idx] = bh;
            }
        }
    }
    (a_hat, b_hat)
}

/// Analyze one real field; the output is conjugate-symmetrized exactly.
pub fn forward_single_real(grid: &Grid, a: &[f64]) -> Vec<Complex64> {
    let n = grid.n();
    let mut z: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward3(grid, &mut z);
    for i in 0..n {
        let ni = neg_axis(n, i);
        for j in 0..n {
            let nj = neg_axis(n, j);
            for k in 0..n {
                let nk = neg_axis(n, k);
                let idx = (i * n + j) * n + k;
                let nidx = (ni * n + nj) * n + nk;
                if nidx > idx {
                    let m = 0.5 * (z[idx] + z[nidx].conj());
                    z[idx] = m;
                    z[nidx] = m.conj();
                } else if nidx == idx {
                    z[idx].im = 0.0;
                }
            }
        }
    }
    z
}
