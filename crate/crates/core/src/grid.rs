use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::GridError;

/// Collocation/wavenumber grid shared by all fields.
///
/// Modes are stored in FFT order along each axis: storage index `m` holds
/// integer mode `m` for `m <= n/2` and `m - n` otherwise. The dealias mask
/// follows the two-thirds rule with a sharp cutoff: a mode is retained iff
/// `3*|k_i| < n` on every axis, which keeps quadratic products alias-free
/// on the retained set.
pub struct Grid {
    n: usize,
    period: f64,
    /// Integer mode number per storage index along one axis.
    modes: Vec<i32>,
    /// Two-thirds-rule retention flag per storage index along one axis.
    keep: Vec<bool>,
    retained_per_axis: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("period", &self.period)
            .field("retained_per_axis", &self.retained_per_axis)
            .finish()
    }
}

impl Grid {
    /// Build a grid with `n` points per axis on a torus of the given period.
    pub fn new(n: usize, period: f64) -> Result<Arc<Grid>, GridError> {
        if !n.is_multiple_of(2) {
            return Err(GridError::OddSize(n));
        }
        if n < 8 {
            return Err(GridError::TooSmall(n));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(GridError::BadPeriod(format!("{period}")));
        }
        let modes: Vec<i32> = (0..n)
            .map(|m| {
                if m <= n / 2 {
                    m as i32
                } else {
                    m as i32 - n as i32
                }
            })
            .collect();
        let keep: Vec<bool> = modes
            .iter()
            .map(|&k| 3 * k.unsigned_abs() as usize)
            .map(|threek| threek < n)
            .collect();
        let retained_per_axis = keep.iter().filter(|&&b| b).count();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid {
            n,
            period,
            modes,
            keep,
            retained_per_axis,
            fwd,
            inv,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of storage points per field component.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical wavenumber scale: integer modes are multiplied by this.
    pub fn k_scale(&self) -> f64 {
        TAU / self.period
    }

    /// Volume of one periodic cell.
    pub fn volume(&self) -> f64 {
        self.period * self.period * self.period
    }

    /// Integer mode number at a storage index along one axis.
    pub fn mode(&self, idx: usize) -> i32 {
        self.modes[idx]
    }

    pub fn modes(&self) -> &[i32] {
        &self.modes
    }

    /// Per-axis retention flag of the two-thirds mask.
    pub fn keep(&self, idx: usize) -> bool {
        self.keep[idx]
    }

    /// True iff the mode at storage indices (i, j, k) is retained.
    pub fn retained(&self, i: usize, j: usize, k: usize) -> bool {
        self.keep[i] && self.keep[j] && self.keep[k]
    }

    /// Number of retained modes along one axis.
    pub fn retained_per_axis(&self) -> usize {
        self.retained_per_axis
    }

    /// Total number of retained modes (the dealias mask cardinality).
    pub fn retained_mode_count(&self) -> usize {
        self.retained_per_axis.pow(3)
    }

    /// Largest retained |k| along one axis.
    pub fn max_retained_mode(&self) -> i32 {
        self.modes
            .iter()
            .zip(&self.keep)
            .filter(|&(_, &b)| b)
            .map(|(&k, _)| k.abs())
            .max()
            .unwrap_or(0)
    }

    /// Storage index of the (i, j, k) lattice point; the last axis is fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Storage index of an integer mode triple (components in FFT order).
    pub fn mode_idx(&self, kx: i32, ky: i32, kz: i32) -> usize {
        let wrap = |k: i32| -> usize {
            if k >= 0 {
                k as usize
            } else {
                (k + self.n as i32) as usize
            }
        };
        self.idx(wrap(kx), wrap(ky), wrap(kz))
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.fwd
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.inv
    }
}
