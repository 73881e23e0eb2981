//! Deterministic physical-time integration: classical four-stage Runge-Kutta
//! with the viscous term handled by an exact integrating factor, so pure
//! diffusion is integrated exactly and stiffness never limits the step.

use std::sync::Arc;

use crate::diagnostics::{Coordinate, DiagnosticSeries};
use crate::error::SolverError;
use crate::field::SpectralVelocity;
use crate::grid::Grid;
use crate::operators;

/// Integrator tag. A single scheme is shipped; the tag keeps the parameter
/// set explicit in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub nu: f64,
    pub dt: f64,
    pub scheme: Scheme,
}

impl SolverParams {
    pub fn new(nu: f64, dt: f64) -> Result<Self, SolverError> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(SolverError::BadParams(format!("nu must be > 0, got {nu}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SolverError::BadParams(format!("dt must be > 0, got {dt}")));
        }
        Ok(SolverParams {
            nu,
            dt,
            scheme: Scheme::IfRk4,
        })
    }

    /// Advective CFL number max|u| dt / dx. Checked as a warning, not an
    /// error: the lift layer owns adaptivity by design.
    pub fn cfl_number(&self, u: &SpectralVelocity) -> f64 {
        let grid = u.grid();
        let dx = grid.period() / grid.n() as f64;
        u.to_physical().max_norm() * self.dt / dx
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: SpectralVelocity,
    pub t: f64,
    pub step_count: usize,
}

impl SolverState {
    pub fn new(u: SpectralVelocity) -> Self {
        SolverState {
            u,
            t: 0.0,
            step_count: 0,
        }
    }
}

/// Per-mode exponential decay tables for one step shape. `m_half` and
/// `m_full` are the physical-time increments to the RK midpoint and to the
/// end of the step; for physical stepping they are dt/2 and dt.
pub(crate) struct ViscousTables {
    pub m_half: f64,
    pub m_full: f64,
    /// exp(-nu |k|^2 m_half)
    pub e_half: Vec<f64>,
    /// exp(-nu |k|^2 (m_full - m_half))
    pub e_mid: Vec<f64>,
    /// exp(-nu |k|^2 m_full)
    pub e_full: Vec<f64>,
}

impl ViscousTables {
    pub fn build(grid: &Arc<Grid>, nu: f64, m_half: f64, m_full: f64) -> ViscousTables {
        let n = grid.n();
        let s2 = grid.k_scale() * grid.k_scale();
        let len = grid.len();
        let mut e_half = vec![0.0; len];
        let mut e_mid = vec![0.0; len];
        let mut e_full = vec![0.0; len];
        let m_rest = m_full - m_half;
        for i in 0..n {
            let ki = grid.mode(i) as f64;
            for j in 0..n {
                let kj = grid.mode(j) as f64;
                let row = (i * n + j) * n;
                for k in 0..n {
                    let kk = grid.mode(k) as f64;
                    let lam = nu * ((ki * ki + kj * kj + kk * kk) * s2);
                    let idx = row + k;
                    e_half[idx] = (-lam * m_half).exp();
                    e_mid[idx] = (-lam * m_rest).exp();
                    e_full[idx] = (-lam * m_full).exp();
                }
            }
        }
        ViscousTables {
            m_half,
            m_full,
            e_half,
            e_mid,
            e_full,
        }
    }

    pub fn matches(&self, m_half: f64, m_full: f64) -> bool {
        self.m_half == m_half && self.m_full == m_full
    }
}

/// One integrating-factor RK4 step of size `h` in the integration variable.
///
/// Solves d u / d s = -w(s) [P (u.grad)u + nu |k|^2 u] where w is the
/// physical-time rate dt/ds sampled at the stage times (w0, wh, w1) and the
/// viscous decay over [s, s + h/2] and [s, s + h] amounts to the
/// physical-time increments m_half, m_full baked into `tables`. Physical
/// stepping is the special case w = 1, m_half = h/2, m_full = h.
pub(crate) fn ifrk4_step(
    u: &SpectralVelocity,
    h: f64,
    w0: f64,
    wh: f64,
    w1: f64,
    tables: &ViscousTables,
) -> SpectralVelocity {
    let grid = u.grid().clone();
    let len = grid.len();

    // Stage rates fold into the combination coefficients; the k's stay as
    // raw advection terms. The minus sign of the right-hand side lives in
    // the coefficients too.
    let k1 = operators::nonlinear_term(u);

    // ua = E_half (u - w0 h/2 k1)
    let a1 = -w0 * (h * 0.5);
    let mut ua = SpectralVelocity::zero(grid.clone());
    for c in 0..3 {
        let (uc, k1c) = (u.component(c), k1.component(c));
        let out = ua.component_mut(c);
        for idx in 0..len {
            out[idx] = tables.e_half[idx] * (uc[idx] + a1 * k1c[idx]);
        }
    }
    let k2 = operators::nonlinear_term(&ua);

    // ub = E_half u - wh h/2 k2
    let a2 = -wh * (h * 0.5);
    let mut ub = ua;
    for c in 0..3 {
        let (uc, k2c) = (u.component(c), k2.component(c));
        let out = ub.component_mut(c);
        for idx in 0..len {
            out[idx] = tables.e_half[idx] * uc[idx] + a2 * k2c[idx];
        }
    }
    let k3 = operators::nonlinear_term(&ub);

    // uc = E_full u - wh h E_mid k3
    let a3 = -wh * h;
    let mut ucv = ub;
    for c in 0..3 {
        let (uc_in, k3c) = (u.component(c), k3.component(c));
        let out = ucv.component_mut(c);
        for idx in 0..len {
            out[idx] = tables.e_full[idx] * uc_in[idx] + a3 * (tables.e_mid[idx] * k3c[idx]);
        }
    }
    let k4 = operators::nonlinear_term(&ucv);

    // u' = E_full u - h/6 (w0 E_full k1 + 2 wh E_mid (k2 + k3) + w1 k4)
    let h6 = h / 6.0;
    let b1 = -h6 * w0;
    let b23 = -h6 * wh * 2.0;
    let b4 = -h6 * w1;
    let mut out = ucv;
    for c in 0..3 {
        let uc_in = u.component(c);
        let (k1c, k2c, k3c, k4c) = (
            k1.component(c),
            k2.component(c),
            k3.component(c),
            k4.component(c),
        );
        let o = out.component_mut(c);
        for idx in 0..len {
            o[idx] = tables.e_full[idx] * uc_in[idx]
                + b1 * (tables.e_full[idx] * k1c[idx])
                + b23 * (tables.e_mid[idx] * (k2c[idx] + k3c[idx]))
                + b4 * k4c[idx];
        }
    }
    // Re-project after the full step to stop divergence drift accumulating.
    operators::project_div_free_in_place(&mut out);
    out
}

/// Advance one physical step of size params.dt.
pub fn step_physical(
    state: &SolverState,
    params: &SolverParams,
) -> Result<SolverState, SolverError> {
    let tables = ViscousTables::build(state.u.grid(), params.nu, 0.5 * params.dt, params.dt);
    step_physical_with_tables(state, params, &tables)
}

pub(crate) fn step_physical_with_tables(
    state: &SolverState,
    _params: &SolverParams,
    tables: &ViscousTables,
) -> Result<SolverState, SolverError> {
    let u = ifrk4_step(&state.u, tables.m_full, 1.0, 1.0, 1.0, tables);
    if !u.is_finite() {
        return Err(SolverError::Diverged {
            t: state.t,
            step: state.step_count,
            last_valid: Box::new(state.clone()),
        });
    }
    Ok(SolverState {
        u,
        t: state.t + tables.m_full,
        step_count: state.step_count + 1,
    })
}

/// Step-size policy shared by the physical and lifted loops: equal steps of
/// `dt`, with the final step stretched or shrunk (within [0.5 dt, 1.5 dt])
/// to land exactly on the horizon.
pub(crate) fn next_step(now: f64, end: f64, dt: f64) -> Option<f64> {
    let remaining = end - now;
    if remaining <= dt * 1e-12 {
        return None;
    }
    if remaining > 1.5 * dt {
        Some(dt)
    } else {
        Some(remaining)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Record a diagnostics row every this many steps (and always at the
    /// final step).
    pub sample_every: usize,
    /// Keep a full field snapshot every this many steps; None keeps only
    /// the final state.
    pub snapshot_every: Option<usize>,
    /// The q used for the sampled ||u||_{L^q} column.
    pub ps_q: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            sample_every: 1,
            snapshot_every: None,
            ps_q: 6.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: SpectralVelocity,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: SolverState,
    pub series: DiagnosticSeries,
    pub snapshots: Vec<Snapshot>,
}

/// Integrate from `u0` to `t_final`, sampling diagnostics along the way.
/// Deterministic: identical inputs produce identical outputs bit for bit.
pub fn integrate_physical(
    u0: SpectralVelocity,
    params: &SolverParams,
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, SolverError> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(SolverError::BadParams(format!(
            "t_final must be >= 0, got {t_final}"
        )));
    }
    if opts.sample_every == 0 {
        return Err(SolverError::BadParams("sample_every must be >= 1".into()));
    }
    let cfl = params.cfl_number(&u0);
    if cfl > 1.0 {
        log::warn!(
            "advective CFL number {cfl:.3} > 1; dt = {} may be too large",
            params.dt
        );
    }

    let grid = u0.grid().clone();
    let mut state = SolverState::new(u0);
    let mut series = DiagnosticSeries::new(opts.ps_q, Coordinate::Physical);
    series.push_sample(&state.u, state.t, state.t, 1.0);
    let mut snapshots = Vec::new();
    if opts.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            step: 0,
            t: state.t,
            u: state.u.clone(),
        });
    }
    let mut tables = ViscousTables::build(&grid, params.nu, 0.5 * params.dt, params.dt);
    while let Some(h) = next_step(state.t, t_final, params.dt) {
        if !tables.matches(0.5 * h, h) {
            tables = ViscousTables::build(&grid, params.nu, 0.5 * h, h);
        }
        state = step_physical_with_tables(&state, params, &tables)?;
        let is_final = next_step(state.t, t_final, params.dt).is_none();
        if is_final {
            // Landing is exact up to one rounding; pin it.
            state.t = t_final;
        }
        if state.step_count.is_multiple_of(opts.sample_every) || is_final {
            series.push_sample(&state.u, state.t, state.t, 1.0);
        }
        if let Some(every) = opts.snapshot_every {
            if state.step_count.is_multiple_of(every) || is_final {
                snapshots.push(Snapshot {
                    step: state.step_count,
                    t: state.t,
                    u: state.u.clone(),
                });
            }
        }
    }
    Ok(Trajectory {
        final_state: state,
        series,
        snapshots,
    })
}
