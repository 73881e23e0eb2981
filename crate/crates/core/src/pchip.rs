//! Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slope
//! limiting). Strictly increasing data stays strictly increasing between
//! knots, linear data is reproduced exactly, and the interpolant is exact at
//! the knots, which is what the time-map inversion relies on.

use crate::error::LiftError;

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Limited endpoint slopes per knot.
    d: Vec<f64>,
}

/// Fritsch-Carlson slopes for monotone data.
fn slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let delta = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![delta, delta];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = y
        .windows(2)
        .zip(&h)
        .map(|(w, &h)| (w[1] - w[0]) / h)
        .collect();
    let mut d = vec![0.0; n];

    // Interior: weighted harmonic mean when the neighbor secants agree in
    // sign, zero otherwise.
    for i in 1..n - 1 {
        let (dp, dn) = (delta[i - 1], delta[i]);
        if dp == 0.0 || dn == 0.0 || dp.signum() != dn.signum() {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / dp + w2 / dn);
        }
    }

    // One-sided endpoint formulas with the standard limiter.
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| -> f64 {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            s = 0.0;
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl Pchip {
    /// Build from strictly increasing abscissae. Takes ownership; the data
    /// is borrowed by every evaluation.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Pchip, LiftError> {
        assert_eq!(x.len(), y.len());
        if x.len() < 2 {
            return Err(LiftError::BadParams(
                "interpolation needs at least 2 samples".into(),
            ));
        }
        for w in x.windows(2) {
            if w[1] <= w[0] {
                return Err(LiftError::BadParams(format!(
                    "abscissae not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let d = slopes(&x, &y);
        Ok(Pchip { x, y, d })
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, xq: f64) -> Result<usize, LiftError> {
        let (lo, hi) = self.x_range();
        if xq < lo || xq > hi {
            return Err(LiftError::OutOfRange { query: xq, lo, hi });
        }
        // partition_point returns the first knot > xq.
        let i = self.x.partition_point(|&v| v <= xq);
        Ok(i.clamp(1, self.x.len() - 1) - 1)
    }

    /// Interpolated value; exact at knots.
    pub fn eval(&self, xq: f64) -> Result<f64, LiftError> {
        let i = self.segment(xq)?;
        if xq == self.x[i] {
            return Ok(self.y[i]);
        }
        if xq == self.x[i + 1] {
            return Ok(self.y[i + 1]);
        }
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        Ok(h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1])
    }

    /// Derivative of the interpolant.
    pub fn eval_derivative(&self, xq: f64) -> Result<f64, LiftError> {
        let i = self.segment(xq)?;
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        Ok((dh00 * self.y[i] + dh01 * self.y[i + 1]) / h + dh10 * self.d[i] + dh11 * self.d[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_at_knots() {
        let x = vec![0.0, 0.4, 1.0, 1.5, 3.0];
        let y = vec![0.0, 0.3, 1.4, 2.0, 2.2];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(p.eval(*xi).unwrap(), *yi);
        }
    }

    #[test]
    fn linear_data_reproduced_exactly() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let p = Pchip::new(x, y).unwrap();
        for i in 0..490 {
            let xq = i as f64 * 0.01;
            let diff = (p.eval(xq).unwrap() - 2.0 * xq).abs();
            assert!(diff <= 1e-12 * (1.0 + 2.0 * xq), "x={xq} diff={diff}");
            let dd = (p.eval_derivative(xq).unwrap() - 2.0).abs();
            assert!(dd <= 1e-12, "derivative at {xq}: off by {dd}");
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        // Strictly increasing data with wildly uneven increments.
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let mut y = vec![0.0];
        for _ in 1..30 {
            let inc = 10f64.powf(rng.gen_range(-4.0..1.0));
            y.push(y.last().unwrap() + inc);
        }
        let p = Pchip::new(x, y).unwrap();
        let mut prev = p.eval(0.0).unwrap();
        for i in 1..2900 {
            let xq = i as f64 * 0.01;
            let v = p.eval(xq).unwrap();
            assert!(v >= prev - 1e-12, "not monotone at {xq}");
            prev = v;
        }
    }

    #[test]
    fn interpolation_error_is_high_order() {
        // Smooth monotone function sampled at h and h/2; max error should
        // shrink by at least ~8x (order >= 3).
        let f = |t: f64| t + 0.3 * (t * 0.9).sin();
        let build = |h: f64| {
            let x: Vec<f64> = (0..=(2.0 / h) as usize).map(|i| i as f64 * h).collect();
            let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
            Pchip::new(x, y).unwrap()
        };
        let err = |p: &Pchip| {
            (1..200)
                .map(|i| {
                    let xq = i as f64 * 0.01;
                    (p.eval(xq).unwrap() - f(xq)).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = err(&build(0.1));
        let e2 = err(&build(0.05));
        assert!(e2 < e1 / 7.0, "e(h)={e1}, e(h/2)={e2}");
    }

    #[test]
    fn out_of_range_is_rejected() {
        let p = Pchip::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(p.eval(-0.1), Err(LiftError::OutOfRange { .. })));
        assert!(matches!(p.eval(1.1), Err(LiftError::OutOfRange { .. })));
    }

    #[test]
    fn rejects_non_increasing_abscissae() {
        assert!(Pchip::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 1.0]).is_err());
    }
}
