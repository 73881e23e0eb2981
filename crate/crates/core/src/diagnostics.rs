//! Time-indexed diagnostics and the weighted quadratures that express the
//! change-of-variables identities between physical and lifted coordinates.
//!
//! All time integrals are trapezoid sums on the run's sample grid. On
//! aligned grids the lifted weighted sums are the physical sums with the
//! weights folded in multiplicatively, so the identities hold to roundoff
//! (exactly, for power-of-two rates).

use thiserror::Error;

use crate::field::SpectralVelocity;
use crate::operators;

/// Slack tolerance for the energy-inequality check.
pub const ENERGY_INEQUALITY_TOL: f64 = 1e-8;

/// Which time coordinate a quadrature runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    /// Integrate over t with unit weight.
    Physical,
    /// Integrate over tau, weighting integrands by dt/dtau.
    Lifted,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiagError {
    #[error("ps_norm was sampled with q = {sampled}, requested q = {requested}")]
    QMismatch { sampled: f64, requested: f64 },
    #[error("series alignment failed: {0}")]
    Alignment(String),
    #[error("series is empty")]
    Empty,
}

/// One sampled instant of a run, in both coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub tau: f64,
    /// dt/dtau at this sample (1 for physical runs).
    pub dt_dtau: f64,
    /// ||u||^2_{L2}.
    pub energy: f64,
    /// ||grad u||^2_{L2}.
    pub grad_sq: f64,
    /// Running weighted dissipation integral up to this sample.
    pub cum_dissipation: f64,
    /// ||omega||_{L infinity}.
    pub vort_sup: f64,
    /// ||u||_{L^q} for the series' configured q.
    pub ps_norm: f64,
}

/// Diagnostics sampled along one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSeries {
    pub rows: Vec<DiagnosticRow>,
    /// The q used for every row's ps_norm.
    pub ps_q: f64,
    pub coordinate: Coordinate,
}

impl DiagnosticSeries {
    pub fn new(ps_q: f64, coordinate: Coordinate) -> Self {
        DiagnosticSeries {
            rows: Vec::new(),
            ps_q,
            coordinate,
        }
    }

    /// Measure a new row from the field state and append it. The cumulative
    /// dissipation advances by one trapezoid panel from the previous row,
    /// using the series' native time coordinate and weight.
    pub fn push_sample(&mut self, u: &SpectralVelocity, t: f64, tau: f64, dt_dtau: f64) {
        let energy = u.l2_norm_sq();
        let grad_sq = operators::gradient_l2_sq(u);
        let phys = u.to_physical();
        let ps_norm = phys.lq_norm(self.ps_q);
        let vort_sup = operators::vorticity_sup(u);
        let cum_dissipation = match self.rows.last() {
            None => 0.0,
            Some(prev) => {
                prev.cum_dissipation
                    + trapezoid_panel(self.coordinate, prev, t, tau, grad_sq, prev.grad_sq)
            }
        };
        self.rows.push(DiagnosticRow {
            t,
            tau,
            dt_dtau,
            energy,
            grad_sq,
            cum_dissipation,
            vort_sup,
            ps_norm,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

/// One trapezoid panel between the previous row and the incoming sample.
///
/// Physical coordinate: (dt / 2) (f_prev + f). Lifted coordinate:
/// (dtau / 2) ((f_prev + f) w) with the panel-average weight
/// w = dt / dtau, which is the exact integral of dt/dtau over the panel.
/// With that weight the lifted weighted quadrature IS the physical
/// quadrature with the measure change folded in multiplicatively, so on
/// aligned grids the change-of-variables identity holds to roundoff
/// (exactly, for power-of-two rates).
fn trapezoid_panel(
    coord: Coordinate,
    prev: &DiagnosticRow,
    t: f64,
    tau: f64,
    f: f64,
    f_prev: f64,
) -> f64 {
    match coord {
        Coordinate::Physical => ((t - prev.t) * 0.5) * (f + f_prev),
        Coordinate::Lifted => {
            let dtau = tau - prev.tau;
            let w = (t - prev.t) / dtau;
            (dtau * 0.5) * ((f + f_prev) * w)
        }
    }
}

/// Trapezoid quadrature of a row quantity over the requested coordinate.
/// Physical: sum f dt. Lifted: sum (f w) dtau with the panel-average
/// weight w = dt/dtau (see `trapezoid_panel`).
fn weighted_trapezoid(
    series: &DiagnosticSeries,
    coord: Coordinate,
    f: impl Fn(&DiagnosticRow) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for pair in series.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        acc += trapezoid_panel(coord, a, b.t, b.tau, f(b), f(a));
    }
    acc
}

/// ||u||^2_{L2} of a field (Parseval over retained modes, volume factor
/// included). The 1/2 kinetic-energy convention is a reporting option and
/// is applied only inside the energy-inequality check.
pub fn kinetic_energy(u: &SpectralVelocity) -> f64 {
    u.l2_norm_sq()
}

/// Result of the energy-inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyInequality {
    pub ok: bool,
    /// slack = E(0)/2 - E(end)/2 - nu * Q; dissipativity makes this
    /// nonnegative up to quadrature error.
    pub slack: f64,
}

/// Check E(end)/2 + nu * Q <= E(0)/2 + tol, with Q the dissipation
/// quadrature weighted by dt/dtau in the lifted coordinate.
pub fn energy_inequality_check(
    series: &DiagnosticSeries,
    coord: Coordinate,
    nu: f64,
) -> EnergyInequality {
    let first = series.rows.first();
    let last = series.rows.last();
    match (first, last) {
        (Some(first), Some(last)) => {
            let q = weighted_trapezoid(series, coord, |r| r.grad_sq);
            let slack = 0.5 * first.energy - 0.5 * last.energy - nu * q;
            EnergyInequality {
                ok: slack >= -ENERGY_INEQUALITY_TOL,
                slack,
            }
        }
        _ => EnergyInequality {
            ok: false,
            slack: f64::NAN,
        },
    }
}

/// Beale-Kato-Majda integral: trapezoid of ||omega||_{L infinity} in dt
/// (physical) or of ||omega||_{L infinity} * dt/dtau in dtau (lifted).
pub fn bkm_integral(series: &DiagnosticSeries, coord: Coordinate) -> f64 {
    weighted_trapezoid(series, coord, |r| r.vort_sup)
}

/// Running BKM integral, one value per sample row (monotone nondecreasing).
pub fn bkm_cumulative(series: &DiagnosticSeries, coord: Coordinate) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in series.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        acc += trapezoid_panel(coord, a, b.t, b.tau, b.vort_sup, a.vort_sup);
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsIntegral {
    pub value: f64,
    /// True iff 2/p + 3/q <= 1.
    pub admissible: bool,
}

/// Prodi-Serrin integral of ||u||^p_{L^q} with the same weighting as
/// `bkm_integral`. Inadmissible (p, q) pairs are computed but flagged and
/// logged.
pub fn prodi_serrin_integral(
    series: &DiagnosticSeries,
    p: f64,
    q: f64,
    coord: Coordinate,
) -> Result<PsIntegral, DiagError> {
    if (q - series.ps_q).abs() > 1e-12 {
        return Err(DiagError::QMismatch {
            sampled: series.ps_q,
            requested: q,
        });
    }
    let admissible = 2.0 / p + 3.0 / q <= 1.0 + 1e-12;
    if !admissible {
        log::warn!("Prodi-Serrin pair (p={p}, q={q}) is inadmissible: 2/p + 3/q > 1");
    }
    let int_p = p.round();
    let use_powi = (p - int_p).abs() < 1e-12 && int_p > 0.0;
    let value = weighted_trapezoid(series, coord, |r| {
        if use_powi {
            r.ps_norm.powi(int_p as i32)
        } else {
            r.ps_norm.powf(p)
        }
    });
    Ok(PsIntegral { value, admissible })
}

/// One paired sample of the energy-structure comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    pub tau: f64,
    pub energy_physical: f64,
    pub energy_lifted: f64,
    pub dissipation_physical: f64,
    pub dissipation_lifted: f64,
}

/// Paired-run comparison: energy rows, the BKM
/// and Prodi-Serrin quadratures in both coordinates, and the energy
/// inequality per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub energy_rows: Vec<EnergyRow>,
    pub max_energy_rel_diff: f64,
    pub max_dissipation_rel_diff: f64,
    pub bkm_physical: f64,
    pub bkm_lifted: f64,
    pub bkm_diff: f64,
    pub ps_p: f64,
    pub ps_q: f64,
    pub ps_admissible: bool,
    pub ps_physical: f64,
    pub ps_lifted: f64,
    pub ps_diff: f64,
    pub energy_inequality_physical: EnergyInequality,
    pub energy_inequality_lifted: EnergyInequality,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Align a lifted series to a physical one row-by-row (the lifted sample
/// times must invert onto the physical ones through the map) and emit the
/// paired report.
pub fn compare_runs(
    physical: &DiagnosticSeries,
    lifted: &DiagnosticSeries,
    map: &crate::lift::LiftMap,
    nu: f64,
    ps_p: f64,
) -> Result<InvarianceReport, DiagError> {
    if physical.is_empty() || lifted.is_empty() {
        return Err(DiagError::Empty);
    }
    if physical.len() != lifted.len() {
        return Err(DiagError::Alignment(format!(
            "row counts differ: physical {} vs lifted {}",
            physical.len(),
            lifted.len()
        )));
    }
    let horizon = physical.rows.last().unwrap().t;
    let tol = 1e-9 * horizon.abs().max(1.0);
    // A zero-duration run has a single sample and nothing to interpolate;
    // alignment is then trivial.
    let interp = if physical.len() >= 2 {
        Some(
            map.interpolant()
                .map_err(|e| DiagError::Alignment(e.to_string()))?,
        )
    } else {
        None
    };
    let mut energy_rows = Vec::with_capacity(physical.len());
    let mut max_energy_rel_diff = 0.0f64;
    let mut max_dissipation_rel_diff = 0.0f64;
    for (p, l) in physical.rows.iter().zip(&lifted.rows) {
        let t_back = match &interp {
            Some(interp) => interp
                .t_at(l.tau)
                .map_err(|e| DiagError::Alignment(e.to_string()))?,
            None => p.t,
        };
        if (t_back - p.t).abs() > tol {
            return Err(DiagError::Alignment(format!(
                "lifted sample tau = {} maps to t = {}, expected {}",
                l.tau, t_back, p.t
            )));
        }
        energy_rows.push(EnergyRow {
            t: p.t,
            tau: l.tau,
            energy_physical: p.energy,
            energy_lifted: l.energy,
            dissipation_physical: p.cum_dissipation,
            dissipation_lifted: l.cum_dissipation,
        });
        max_energy_rel_diff = max_energy_rel_diff.max(rel_diff(p.energy, l.energy));
        max_dissipation_rel_diff =
            max_dissipation_rel_diff.max(rel_diff(p.cum_dissipation, l.cum_dissipation));
    }
    let bkm_physical = bkm_integral(physical, Coordinate::Physical);
    let bkm_lifted = bkm_integral(lifted, Coordinate::Lifted);
    let ps_q = physical.ps_q;
    let ps_phys = prodi_serrin_integral(physical, ps_p, ps_q, Coordinate::Physical)?;
    let ps_lift = prodi_serrin_integral(lifted, ps_p, ps_q, Coordinate::Lifted)?;
    Ok(InvarianceReport {
        energy_rows,
        max_energy_rel_diff,
        max_dissipation_rel_diff,
        bkm_physical,
        bkm_lifted,
        bkm_diff: (bkm_physical - bkm_lifted).abs(),
        ps_p,
        ps_q,
        ps_admissible: ps_phys.admissible,
        ps_physical: ps_phys.value,
        ps_lifted: ps_lift.value,
        ps_diff: (ps_phys.value - ps_lift.value).abs(),
        energy_inequality_physical: energy_inequality_check(physical, Coordinate::Physical, nu),
        energy_inequality_lifted: energy_inequality_check(lifted, Coordinate::Lifted, nu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Build a synthetic physical series and its exact relabeling under a
    /// given rate schedule; quantities are smooth functions of t.
    fn synthetic_pair(rates: &[f64], dt: f64) -> (DiagnosticSeries, DiagnosticSeries, Vec<f64>) {
        let mut phys = DiagnosticSeries::new(6.0, Coordinate::Physical);
        let mut lift = DiagnosticSeries::new(6.0, Coordinate::Lifted);
        let f = |t: f64| 1.0 + 0.5 * (1.3 * t).sin();
        let g = |t: f64| 2.0 * (-0.7 * t).exp();
        let mut t = 0.0;
        let mut tau = 0.0;
        let mut taus = vec![0.0];
        let push = |s: &mut DiagnosticSeries, t: f64, tau: f64, w: f64, f: f64, g: f64| {
            let prev = s.rows.last().copied();
            let cum = match prev {
                None => 0.0,
                Some(p) => {
                    p.cum_dissipation + trapezoid_panel(s.coordinate, &p, t, tau, f, p.grad_sq)
                }
            };
            s.rows.push(DiagnosticRow {
                t,
                tau,
                dt_dtau: w,
                energy: 2.0 * f,
                grad_sq: f,
                cum_dissipation: cum,
                vort_sup: g,
                ps_norm: f.sqrt(),
            });
        };
        push(&mut phys, 0.0, 0.0, 1.0, f(0.0), g(0.0));
        push(&mut lift, 0.0, 0.0, 1.0 / rates[0], f(0.0), g(0.0));
        for &r in rates {
            t += dt;
            tau += r * dt;
            taus.push(tau);
            push(&mut phys, t, t, 1.0, f(t), g(t));
            push(&mut lift, t, tau, 1.0 / r, f(t), g(t));
        }
        (phys, lift, taus)
    }

    #[test]
    fn aligned_weighted_quadratures_are_identities() {
        // Identity and constant-rate-2 relabelings reproduce the physical
        // quadratures to roundoff; random rates land within accumulation
        // noise of the same sums.
        for rates in [vec![1.0; 50], vec![2.0; 50]] {
            let (phys, lift, _) = synthetic_pair(&rates, 1e-2);
            let bp = bkm_integral(&phys, Coordinate::Physical);
            let bl = bkm_integral(&lift, Coordinate::Lifted);
            assert!((bp - bl).abs() <= 1e-15 * bp.abs().max(1.0), "{bp} vs {bl}");
            let pp = prodi_serrin_integral(&phys, 4.0, 6.0, Coordinate::Physical).unwrap();
            let pl = prodi_serrin_integral(&lift, 4.0, 6.0, Coordinate::Lifted).unwrap();
            assert!((pp.value - pl.value).abs() <= 1e-15 * pp.value.abs().max(1.0));
            assert!(pp.admissible);
            // Energy-inequality slack is the same computation in both
            // coordinates on these relabeled series.
            let ep = energy_inequality_check(&phys, Coordinate::Physical, 0.01);
            let el = energy_inequality_check(&lift, Coordinate::Lifted, 0.01);
            assert_eq!(ep.slack, el.slack);
        }
    }

    #[test]
    fn compare_runs_pairs_every_sample_and_rejects_mismatch() {
        use crate::lift::LiftMap;
        let rates = vec![2.0; 40];
        let (phys, lift, _) = synthetic_pair(&rates, 1e-2);
        let mut map = LiftMap::with_bounds(2.0, 0.1, 10.0).unwrap();
        for _ in 0..40 {
            map.advance(2.0, 1e-2).unwrap();
        }
        let report = compare_runs(&phys, &lift, &map, 0.01, 4.0).unwrap();
        assert_eq!(report.energy_rows.len(), phys.len());
        assert!(report.max_energy_rel_diff == 0.0);

        let truncated = DiagnosticSeries {
            rows: lift.rows[..lift.len() - 1].to_vec(),
            ps_q: lift.ps_q,
            coordinate: lift.coordinate,
        };
        let err = compare_runs(&phys, &truncated, &map, 0.01, 4.0).unwrap_err();
        assert!(matches!(err, DiagError::Alignment(_)));
    }

    #[test]
    fn random_rate_schedules_preserve_quadratures() {
        // The panel-average weight makes the identity exact, so roundoff
        // is all that is left of the nominal 1e-9 quadrature budget.
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let rates: Vec<f64> = (0..200).map(|_| rng.gen_range(0.5..3.0)).collect();
            let (phys, lift, _) = synthetic_pair(&rates, 1e-3);
            let bp = bkm_integral(&phys, Coordinate::Physical);
            let bl = bkm_integral(&lift, Coordinate::Lifted);
            assert!((bp - bl).abs() <= 1e-12, "trial {trial}: bkm {bp} vs {bl}");
            let pp = prodi_serrin_integral(&phys, 4.0, 6.0, Coordinate::Physical).unwrap();
            let pl = prodi_serrin_integral(&lift, 4.0, 6.0, Coordinate::Lifted).unwrap();
            assert!(
                (pp.value - pl.value).abs() <= 1e-12,
                "trial {trial}: ps {} vs {}",
                pp.value,
                pl.value
            );
        }
    }

    #[test]
    fn bkm_is_monotone_in_horizon() {
        let (phys, _, _) = synthetic_pair(&vec![1.0; 100], 1e-2);
        let mut prev = 0.0;
        for end in 2..=phys.len() {
            let prefix = DiagnosticSeries {
                rows: phys.rows[..end].to_vec(),
                ps_q: phys.ps_q,
                coordinate: phys.coordinate,
            };
            let v = bkm_integral(&prefix, Coordinate::Physical);
            assert!(v >= prev - 1e-15, "prefix {end}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn zero_series_has_zero_integrals() {
        let mut s = DiagnosticSeries::new(6.0, Coordinate::Physical);
        for i in 0..5 {
            s.rows.push(DiagnosticRow {
                t: i as f64,
                tau: i as f64,
                dt_dtau: 1.0,
                energy: 0.0,
                grad_sq: 0.0,
                cum_dissipation: 0.0,
                vort_sup: 0.0,
                ps_norm: 0.0,
            });
        }
        assert_eq!(bkm_integral(&s, Coordinate::Physical), 0.0);
        let ps = prodi_serrin_integral(&s, 4.0, 6.0, Coordinate::Physical).unwrap();
        assert_eq!(ps.value, 0.0);
    }

    #[test]
    fn inadmissible_pair_is_flagged_but_computed() {
        // (p, q) = (3, 6): 2/3 + 1/2 > 1.
        let (phys, _, _) = synthetic_pair(&[1.0; 10], 1e-2);
        let ps = prodi_serrin_integral(&phys, 3.0, 6.0, Coordinate::Physical).unwrap();
        assert!(!ps.admissible);
        assert!(ps.value.is_finite());
    }

    #[test]
    fn mismatched_q_is_rejected() {
        let (phys, _, _) = synthetic_pair(&[1.0; 10], 1e-2);
        let err = prodi_serrin_integral(&phys, 4.0, 8.0, Coordinate::Physical).unwrap_err();
        assert!(matches!(err, DiagError::QMismatch { .. }));
    }
}
