//! Adaptive temporal lifting: a strictly monotone sampled map between
//! physical time t and lifted time tau, and integration of the lifted
//! momentum system in the tau coordinate.
//!
//! Direction convention. The loop primitive is the rate r = dtau/dt produced
//! by the rate function; the map derivative dt/dtau = 1/r is what enters
//! every weighted diagnostic. Bounds are imposed on dt/dtau: clamping the
//! rate to [r_min, r_max] keeps dt/dtau inside [1/r_max, 1/r_min], so the
//! lifted system stays uniformly parabolic. Configurations with vanishing or
//! unbounded rates are rejected up front rather than supported.
//!
//! Two stepping modes exist:
//!
//! * Locked (the adaptive loop): each physical step dt computes a rate from
//!   the current field, advances the map by one linear segment, and steps
//!   the lifted state by dtau = r dt with the segment's constant rate. The
//!   identity and any power-of-two constant rate then reproduce the
//!   physical trajectory bit for bit.
//! * Replay (free-running): fixed dtau against a finalized map; the stage
//!   weights dt/dtau and the viscous-factor time increments come from
//!   monotone-cubic interpolation of the map, keeping the map the single
//!   source of truth mid-step.

use crate::diagnostics::{Coordinate, DiagnosticSeries};
use crate::error::{LiftError, SolverError};
use crate::field::SpectralVelocity;
use crate::operators::{self, GradDiag};
use crate::pchip::Pchip;
use crate::solver::{
    ifrk4_step, next_step, IntegrateOptions, Snapshot, SolverParams, SolverState, Trajectory,
    ViscousTables,
};

/// Shape of the rate function f applied to the gradient diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    /// r = r0 regardless of the field.
    Constant,
    /// r = clamp(r0 + r1 * norm, r_min, r_max).
    AffineGradient,
}

/// Which norm feeds the affine rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    GradL2,
    VortSup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub kind: RateKind,
    pub r0: f64,
    pub r1: f64,
    pub norm_kind: NormKind,
    pub r_min: f64,
    pub r_max: f64,
}

impl RateParams {
    pub fn new(
        kind: RateKind,
        r0: f64,
        r1: f64,
        norm_kind: NormKind,
        r_min: f64,
        r_max: f64,
    ) -> Result<RateParams, LiftError> {
        let p = RateParams {
            kind,
            r0,
            r1,
            norm_kind,
            r_min,
            r_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Constant rate with degenerate clamp bounds.
    pub fn constant(r0: f64) -> Result<RateParams, LiftError> {
        RateParams::new(RateKind::Constant, r0, 0.0, NormKind::GradL2, r0, r0)
    }

    pub fn identity() -> RateParams {
        RateParams::constant(1.0).unwrap()
    }

    pub fn validate(&self) -> Result<(), LiftError> {
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(LiftError::BadParams(format!(
                "r0 must be > 0, got {}",
                self.r0
            )));
        }
        if !(self.r_min.is_finite() && self.r_min > 0.0) {
            return Err(LiftError::BadParams(format!(
                "r_min must be > 0, got {}",
                self.r_min
            )));
        }
        if !(self.r_min <= self.r0 && self.r0 <= self.r_max) {
            return Err(LiftError::BadParams(format!(
                "need r_min <= r0 <= r_max, got {} / {} / {}",
                self.r_min, self.r0, self.r_max
            )));
        }
        if !self.r1.is_finite() {
            return Err(LiftError::BadParams("r1 must be finite".into()));
        }
        Ok(())
    }

    /// Evaluate the rate on gradient diagnostics; always strictly positive
    /// because clamping absorbs extremes.
    pub fn rate(&self, diag: &GradDiag) -> f64 {
        match self.kind {
            RateKind::Constant => self.r0,
            RateKind::AffineGradient => {
                let norm = match self.norm_kind {
                    NormKind::GradL2 => diag.grad_l2,
                    NormKind::VortSup => diag.vort_sup,
                };
                (self.r0 + self.r1 * norm).clamp(self.r_min, self.r_max)
            }
        }
    }

    /// The norm the affine mode consumes, computed only when needed.
    fn rate_from_field(&self, u: &SpectralVelocity) -> f64 {
        match self.kind {
            RateKind::Constant => self.r0,
            RateKind::AffineGradient => {
                let norm = match self.norm_kind {
                    NormKind::GradL2 => operators::gradient_l2(u),
                    NormKind::VortSup => operators::vorticity_sup(u),
                };
                (self.r0 + self.r1 * norm).clamp(self.r_min, self.r_max)
            }
        }
    }
}

/// One sample of the monotone time map. `rate` is the segment slope
/// dtau/dt that produced this sample (for the first sample, the initial
/// rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftSample {
    pub t: f64,
    pub tau: f64,
    pub rate: f64,
}

/// Monotone sampled time map, append-only during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftMap {
    samples: Vec<LiftSample>,
    /// Lower bound on dt/dtau (= 1 / r_max).
    dt_dtau_min: f64,
    /// Upper bound on dt/dtau (= 1 / r_min).
    dt_dtau_max: f64,
}

impl LiftMap {
    /// Start at (t, tau) = (0, 0) with the given initial rate; bounds come
    /// from the rate clamp.
    pub fn new(initial_rate: f64, params: &RateParams) -> Result<LiftMap, LiftError> {
        LiftMap::with_bounds(initial_rate, 1.0 / params.r_max, 1.0 / params.r_min)
    }

    pub fn with_bounds(
        initial_rate: f64,
        dt_dtau_min: f64,
        dt_dtau_max: f64,
    ) -> Result<LiftMap, LiftError> {
        if !(initial_rate.is_finite() && initial_rate > 0.0) {
            return Err(LiftError::NonPositiveRate(initial_rate));
        }
        let map = LiftMap {
            samples: vec![LiftSample {
                t: 0.0,
                tau: 0.0,
                rate: initial_rate,
            }],
            dt_dtau_min,
            dt_dtau_max,
        };
        map.check_rate(initial_rate)?;
        Ok(map)
    }

    fn check_rate(&self, rate: f64) -> Result<(), LiftError> {
        let w = 1.0 / rate;
        // Tiny headroom so 1/(1/x) roundoff never rejects a legal rate.
        let pad = 1.0 + 1e-12;
        if w < self.dt_dtau_min / pad || w > self.dt_dtau_max * pad {
            return Err(LiftError::RateOutOfBounds {
                rate,
                min: 1.0 / self.dt_dtau_max,
                max: 1.0 / self.dt_dtau_min,
            });
        }
        Ok(())
    }

    /// Append one segment: (t + dt, tau + rate dt, rate).
    pub fn advance(&mut self, rate: f64, dt: f64) -> Result<(), LiftError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(LiftError::NonPositiveRate(rate));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(LiftError::NonPositiveStep(dt));
        }
        self.check_rate(rate)?;
        let last = *self.samples.last().unwrap();
        self.samples.push(LiftSample {
            t: last.t + dt,
            tau: last.tau + rate * dt,
            rate,
        });
        Ok(())
    }

    pub fn samples(&self) -> &[LiftSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().unwrap().t
    }

    pub fn tau_end(&self) -> f64 {
        self.samples.last().unwrap().tau
    }

    pub fn dt_dtau_bounds(&self) -> (f64, f64) {
        (self.dt_dtau_min, self.dt_dtau_max)
    }

    /// Replace the final sample's coordinates (used to pin exact landings).
    pub(crate) fn pin_last(&mut self, t: f64, tau: f64) {
        let last = self.samples.last_mut().unwrap();
        last.t = t;
        last.tau = tau;
    }

    /// Monotone-cubic interpolants in both directions. Exact at samples;
    /// between samples the error is O(dt^4) for smooth rate schedules.
    pub fn interpolant(&self) -> Result<LiftInterp, LiftError> {
        if self.samples.len() < 2 {
            return Err(LiftError::BadParams(
                "map needs at least two samples to interpolate".into(),
            ));
        }
        let t: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let tau: Vec<f64> = self.samples.iter().map(|s| s.tau).collect();
        Ok(LiftInterp {
            forward: Pchip::new(t.clone(), tau.clone())?,
            backward: Pchip::new(tau, t)?,
        })
    }

    /// t = phi(tau) by monotone interpolation (the map inversion).
    pub fn t_at(&self, tau: f64) -> Result<f64, LiftError> {
        self.interpolant()?.t_at(tau)
    }

    /// tau as a function of t by monotone interpolation.
    pub fn tau_at(&self, t: f64) -> Result<f64, LiftError> {
        self.interpolant()?.tau_at(t)
    }

    /// Check monotonicity and rate bounds over every sample.
    pub fn validate_invariants(&self) -> Result<(), LiftError> {
        for w in self.samples.windows(2) {
            if w[1].t <= w[0].t || w[1].tau <= w[0].tau {
                return Err(LiftError::BadParams(format!(
                    "map not strictly increasing near t = {}",
                    w[0].t
                )));
            }
        }
        for s in &self.samples {
            self.check_rate(s.rate)?;
        }
        Ok(())
    }
}

/// Finalized interpolable view of a map.
#[derive(Debug, Clone)]
pub struct LiftInterp {
    forward: Pchip,
    backward: Pchip,
}

impl LiftInterp {
    pub fn t_at(&self, tau: f64) -> Result<f64, LiftError> {
        self.backward.eval(tau)
    }

    pub fn tau_at(&self, t: f64) -> Result<f64, LiftError> {
        self.forward.eval(t)
    }

    /// dt/dtau at a lifted time.
    pub fn dt_dtau_at(&self, tau: f64) -> Result<f64, LiftError> {
        self.backward.eval_derivative(tau)
    }

    pub fn tau_range(&self) -> (f64, f64) {
        self.backward.x_range()
    }
}

/// State of the lifted integration.
#[derive(Debug, Clone)]
pub struct LiftedState {
    pub u: SpectralVelocity,
    pub tau: f64,
    /// dt/dtau on the segment that produced this state.
    pub dt_dtau: f64,
}

impl LiftedState {
    pub fn new(u: SpectralVelocity) -> Self {
        LiftedState {
            u,
            tau: 0.0,
            dt_dtau: 1.0,
        }
    }
}

fn check_finite(u: SpectralVelocity, tau: f64, step: usize) -> Result<SpectralVelocity, LiftError> {
    if !u.is_finite() {
        let last = SolverState {
            u,
            t: tau,
            step_count: step,
        };
        return Err(LiftError::Solver(SolverError::Diverged {
            t: tau,
            step,
            last_valid: Box::new(last),
        }));
    }
    Ok(u)
}

/// One lifted step over a segment of constant rate (locked mode). The
/// viscous factors use the exact physical-time increments of the segment,
/// so identity and power-of-two rates reproduce physical steps bitwise.
pub fn step_lifted_const_rate(
    state: &LiftedState,
    rate: f64,
    dtau: f64,
    params: &SolverParams,
) -> Result<LiftedState, LiftError> {
    let mut tables = None;
    step_lifted_const_rate_cached(state, rate, dtau, params, &mut tables)
}

pub(crate) fn step_lifted_const_rate_cached(
    state: &LiftedState,
    rate: f64,
    dtau: f64,
    params: &SolverParams,
    tables: &mut Option<ViscousTables>,
) -> Result<LiftedState, LiftError> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(LiftError::NonPositiveRate(rate));
    }
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(LiftError::NonPositiveStep(dtau));
    }
    let w = 1.0 / rate;
    let m_half = (0.5 * dtau) * w;
    let m_full = dtau * w;
    let rebuild = match tables {
        Some(t) => !t.matches(m_half, m_full),
        None => true,
    };
    if rebuild {
        *tables = Some(ViscousTables::build(
            state.u.grid(),
            params.nu,
            m_half,
            m_full,
        ));
    }
    let t = tables.as_ref().unwrap();
    let u = ifrk4_step(&state.u, dtau, w, w, w, t);
    let u = check_finite(u, state.tau, 0)?;
    Ok(LiftedState {
        u,
        tau: state.tau + dtau,
        dt_dtau: w,
    })
}

/// One lifted step against a finalized map (replay mode). Stage weights and
/// viscous increments are interpolated from the map; stepping beyond the
/// map's coverage is a range error.
pub fn step_lifted(
    state: &LiftedState,
    interp: &LiftInterp,
    dtau: f64,
    params: &SolverParams,
) -> Result<LiftedState, LiftError> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(LiftError::NonPositiveStep(dtau));
    }
    let (_, tau_hi) = interp.tau_range();
    let tau_next = state.tau + dtau;
    if tau_next > tau_hi * (1.0 + 1e-12) + 1e-300 {
        return Err(LiftError::MapExhausted {
            tau: state.tau,
            dtau,
            hi: tau_hi,
        });
    }
    let tau_next = tau_next.min(tau_hi);
    let tau_mid = state.tau + 0.5 * dtau;
    let t0 = interp.t_at(state.tau)?;
    let t_mid = interp.t_at(tau_mid)?;
    let t1 = interp.t_at(tau_next)?;
    let w0 = interp.dt_dtau_at(state.tau)?;
    let wh = interp.dt_dtau_at(tau_mid)?;
    let w1 = interp.dt_dtau_at(tau_next)?;
    let tables = ViscousTables::build(state.u.grid(), params.nu, t_mid - t0, t1 - t0);
    let u = ifrk4_step(&state.u, dtau, w0, wh, w1, &tables);
    let u = check_finite(u, state.tau, 0)?;
    Ok(LiftedState {
        u,
        tau: tau_next,
        dt_dtau: w1,
    })
}

/// The adaptive lifting loop (locked mode): per physical step, evaluate the
/// rate on the current field, extend the map by one segment, and advance
/// the lifted state by dtau = rate * dt. Returns the map and the lifted
/// trajectory with diagnostics indexed by both coordinates.
pub fn run_lifted(
    u0: SpectralVelocity,
    rate_params: &RateParams,
    solver_params: &SolverParams,
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<(LiftMap, Trajectory), LiftError> {
    rate_params.validate()?;
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(LiftError::BadParams(format!(
            "t_final must be >= 0, got {t_final}"
        )));
    }
    if opts.sample_every == 0 {
        return Err(LiftError::BadParams("sample_every must be >= 1".into()));
    }
    let r0 = rate_params.rate_from_field(&u0);
    let mut map = LiftMap::new(r0, rate_params)?;
    let mut state = LiftedState {
        u: u0,
        tau: 0.0,
        dt_dtau: 1.0 / r0,
    };
    let mut series = DiagnosticSeries::new(opts.ps_q, Coordinate::Lifted);
    series.push_sample(&state.u, 0.0, 0.0, state.dt_dtau);
    let mut snapshots = Vec::new();
    if opts.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            u: state.u.clone(),
        });
    }
    let mut tables: Option<ViscousTables> = None;
    let mut step = 0usize;
    let mut t = 0.0f64;
    while let Some(h) = next_step(t, t_final, solver_params.dt) {
        let rate = rate_params.rate_from_field(&state.u);
        map.advance(rate, h)?;
        let dtau = rate * h;
        state = step_lifted_const_rate_cached(&state, rate, dtau, solver_params, &mut tables)
            .map_err(|e| at_step(e, t, step))?;
        step += 1;
        t += h;
        let is_final = next_step(t, t_final, solver_params.dt).is_none();
        if is_final {
            t = t_final;
            map.pin_last(t, map.tau_end());
        }
        state.tau = map.tau_end();
        if step.is_multiple_of(opts.sample_every) || is_final {
            series.push_sample(&state.u, t, state.tau, state.dt_dtau);
        }
        if let Some(every) = opts.snapshot_every {
            if step.is_multiple_of(every) || is_final {
                snapshots.push(Snapshot {
                    step,
                    t,
                    u: state.u.clone(),
                });
            }
        }
    }
    let final_state = SolverState {
        u: state.u,
        t,
        step_count: step,
    };
    Ok((
        map,
        Trajectory {
            final_state,
            series,
            snapshots,
        },
    ))
}

fn at_step(e: LiftError, t: f64, step: usize) -> LiftError {
    match e {
        LiftError::Solver(SolverError::Diverged { last_valid, .. }) => {
            LiftError::Solver(SolverError::Diverged {
                t,
                step,
                last_valid,
            })
        }
        other => other,
    }
}

/// Free-running replay: integrate the lifted system with a fixed dtau
/// against a finalized map. The trajectory is sampled on its own tau grid;
/// rows carry the interpolated physical time and dt/dtau.
pub fn run_lifted_replay(
    u0: SpectralVelocity,
    map: &LiftMap,
    dtau: f64,
    solver_params: &SolverParams,
    opts: &IntegrateOptions,
) -> Result<Trajectory, LiftError> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(LiftError::NonPositiveStep(dtau));
    }
    if opts.sample_every == 0 {
        return Err(LiftError::BadParams("sample_every must be >= 1".into()));
    }
    let interp = map.interpolant()?;
    let tau_end = map.tau_end();
    let w0 = interp.dt_dtau_at(0.0)?;
    let mut state = LiftedState {
        u: u0,
        tau: 0.0,
        dt_dtau: w0,
    };
    let mut series = DiagnosticSeries::new(opts.ps_q, Coordinate::Lifted);
    series.push_sample(&state.u, 0.0, 0.0, w0);
    let mut snapshots = Vec::new();
    if opts.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            u: state.u.clone(),
        });
    }
    let mut step = 0usize;
    while let Some(h) = next_step(state.tau, tau_end, dtau) {
        state = step_lifted(&state, &interp, h, solver_params)
            .map_err(|e| at_step(e, state.tau, step))?;
        step += 1;
        let is_final = next_step(state.tau, tau_end, dtau).is_none();
        if is_final {
            state.tau = tau_end;
        }
        if step.is_multiple_of(opts.sample_every) || is_final {
            let t = interp.t_at(state.tau)?;
            let w = interp.dt_dtau_at(state.tau)?;
            series.push_sample(&state.u, t, state.tau, w);
        }
        if let Some(every) = opts.snapshot_every {
            if step.is_multiple_of(every) || is_final {
                snapshots.push(Snapshot {
                    step,
                    t: interp.t_at(state.tau)?,
                    u: state.u.clone(),
                });
            }
        }
    }
    let t_end = map.t_end();
    let final_state = SolverState {
        u: state.u,
        t: t_end,
        step_count: step,
    };
    Ok(Trajectory {
        final_state,
        series,
        snapshots,
    })
}
