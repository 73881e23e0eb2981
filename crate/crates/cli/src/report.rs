//! Paired-run orchestration and the two-panel text report.

use std::fmt::Write as _;
use std::time::Instant;

use liftns_core::diagnostics::{self, Coordinate, EnergyInequality};
use liftns_core::solver::{self, IntegrateOptions};
use liftns_core::{lift, Grid, InvarianceReport, LiftError, SolverError};

use crate::config::{EnergyConvention, ExperimentConfig};

/// Tolerances pinned by the acceptance criteria.
pub mod tol {
    /// Energy and weighted-dissipation column agreement (relative).
    pub const ENERGY_REL: f64 = 1e-8;
    /// Weighted quadrature agreement on aligned sample grids (absolute).
    pub const QUADRATURE_ALIGNED: f64 = 1e-12;
    /// Weighted quadrature agreement for the free-running lifted mode with
    /// resampling (absolute).
    pub const QUADRATURE_REPLAY: f64 = 1e-6;
    /// Energy-inequality slack floor.
    pub const ENERGY_SLACK: f64 = -1e-8;
    /// Constant-rate map exactness |tau - r0 t| (absolute).
    pub const MAP_EXACTNESS: f64 = 1e-12;
    /// Identity-lift trajectory agreement, per coefficient (absolute).
    pub const IDENTITY_COEFF: f64 = 1e-12;
    /// Discrete incompressibility.
    pub const DIVERGENCE: f64 = 1e-10;
    /// Brute-force convolution oracle agreement (absolute, n = 8).
    pub const CONVOLUTION_ORACLE: f64 = 1e-10;
    /// Paired-run convergence study: minimum observed order.
    pub const CONVERGENCE_ORDER: f64 = 3.5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Grid(#[from] liftns_core::GridError),
    #[error("numerical divergence: {0}")]
    Diverged(String),
    #[error("{0}")]
    Lift(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Grid(_) | CliError::Io { .. } => 2,
            CliError::Diverged(_) => 3,
            CliError::Lift(_) => 2,
        }
    }
}

fn from_solver(e: SolverError) -> CliError {
    match e {
        SolverError::Diverged { t, step, .. } => {
            CliError::Diverged(format!("at t = {t} (step {step})"))
        }
        SolverError::BadParams(msg) => CliError::Lift(msg),
    }
}

fn from_lift(e: LiftError) -> CliError {
    match e {
        LiftError::Solver(inner) => from_solver(inner),
        other => CliError::Lift(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelARow {
    pub t: f64,
    pub u_l2sq: f64,
    pub cum_dissipation: f64,
    pub tau: f64,
    pub u_lifted_l2sq: f64,
    pub cum_dissipation_weighted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelBRow {
    pub t: f64,
    pub bkm_physical: f64,
    pub tau: f64,
    pub bkm_lifted_weighted: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckFlag {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckFlag {
    pub fn new(name: &str, pass: bool, detail: String) -> CheckFlag {
        CheckFlag {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Wall-clock timings. Reported on stdout only; never written to CSV so
/// repeated runs stay byte-identical.
#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub physical_secs: f64,
    pub lifted_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub panel_a: Vec<PanelARow>,
    pub panel_b: Vec<PanelBRow>,
    pub flags: Vec<CheckFlag>,
    pub timings: Timings,
    pub invariance: Option<InvarianceReport>,
    /// Full per-sample diagnostics of both runs, for the CSV emitter.
    pub physical_series: liftns_core::DiagnosticSeries,
    pub lifted_series: liftns_core::DiagnosticSeries,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// Run the paired physical/lifted experiment described by the config and
/// assemble panels, checks, and series.
pub fn run_validation(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let total_start = Instant::now();
    let grid = Grid::new(config.grid_n, config.period)?;
    let u0 = liftns_core::initial::taylor_green(grid, config.amplitude);
    let params = solver::SolverParams::new(config.nu, config.dt).map_err(from_solver)?;
    let rate_params = config.rate_params().map_err(from_lift)?;
    let opts = IntegrateOptions {
        sample_every: config.sample_every,
        snapshot_every: None,
        ps_q: config.ps_q(),
    };

    let t0 = Instant::now();
    let physical = solver::integrate_physical(u0.clone(), &params, config.t_final, &opts)
        .map_err(from_solver)?;
    let physical_secs = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (map, lifted) =
        lift::run_lifted(u0, &rate_params, &params, config.t_final, &opts).map_err(from_lift)?;
    let lifted_secs = t0.elapsed().as_secs_f64();

    let ps_p = config.ps_pairs[0].0;
    let invariance =
        diagnostics::compare_runs(&physical.series, &lifted.series, &map, config.nu, ps_p)
            .map_err(|e| CliError::Lift(e.to_string()))?;

    let panel_a: Vec<PanelARow> = invariance
        .energy_rows
        .iter()
        .map(|r| PanelARow {
            t: r.t,
            u_l2sq: r.energy_physical,
            cum_dissipation: r.dissipation_physical,
            tau: r.tau,
            u_lifted_l2sq: r.energy_lifted,
            cum_dissipation_weighted: r.dissipation_lifted,
        })
        .collect();

    let bkm_p = diagnostics::bkm_cumulative(&physical.series, Coordinate::Physical);
    let bkm_l = diagnostics::bkm_cumulative(&lifted.series, Coordinate::Lifted);
    let panel_b: Vec<PanelBRow> = physical
        .series
        .rows
        .iter()
        .zip(&lifted.series.rows)
        .zip(bkm_p.iter().zip(&bkm_l))
        .map(|((p, l), (bp, bl))| PanelBRow {
            t: p.t,
            bkm_physical: *bp,
            tau: l.tau,
            bkm_lifted_weighted: *bl,
            abs_diff: (bp - bl).abs(),
        })
        .collect();

    let mut flags = Vec::new();
    flags.push(CheckFlag::new(
        "energy_columns_match",
        invariance.max_energy_rel_diff <= tol::ENERGY_REL,
        format!(
            "max rel diff {:.3e} (tol {:.0e})",
            invariance.max_energy_rel_diff,
            tol::ENERGY_REL
        ),
    ));
    flags.push(CheckFlag::new(
        "dissipation_columns_match",
        invariance.max_dissipation_rel_diff <= tol::ENERGY_REL,
        format!(
            "max rel diff {:.3e} (tol {:.0e})",
            invariance.max_dissipation_rel_diff,
            tol::ENERGY_REL
        ),
    ));
    flags.push(CheckFlag::new(
        "bkm_invariance",
        invariance.bkm_diff <= tol::QUADRATURE_ALIGNED,
        format!(
            "|{:.6} - {:.6}| = {:.3e} (tol {:.0e})",
            invariance.bkm_physical,
            invariance.bkm_lifted,
            invariance.bkm_diff,
            tol::QUADRATURE_ALIGNED
        ),
    ));
    flags.push(CheckFlag::new(
        "prodi_serrin_invariance",
        invariance.ps_diff <= tol::QUADRATURE_ALIGNED,
        format!(
            "(p, q) = ({}, {}): diff {:.3e} (tol {:.0e})",
            invariance.ps_p,
            invariance.ps_q,
            invariance.ps_diff,
            tol::QUADRATURE_ALIGNED
        ),
    ));
    // Extra Prodi-Serrin pairs beyond the first.
    for &(p, q) in config.ps_pairs.iter().skip(1) {
        let pp = diagnostics::prodi_serrin_integral(&physical.series, p, q, Coordinate::Physical)
            .map_err(|e| CliError::Lift(e.to_string()))?;
        let pl = diagnostics::prodi_serrin_integral(&lifted.series, p, q, Coordinate::Lifted)
            .map_err(|e| CliError::Lift(e.to_string()))?;
        let diff = (pp.value - pl.value).abs();
        flags.push(CheckFlag::new(
            &format!("prodi_serrin_invariance_p{p}_q{q}"),
            diff <= tol::QUADRATURE_ALIGNED,
            format!("diff {:.3e} (tol {:.0e})", diff, tol::QUADRATURE_ALIGNED),
        ));
    }
    push_inequality_flag(
        &mut flags,
        "energy_inequality_physical",
        invariance.energy_inequality_physical,
    );
    push_inequality_flag(
        &mut flags,
        "energy_inequality_lifted",
        invariance.energy_inequality_lifted,
    );

    match config.rate_mode {
        liftns_core::RateKind::Constant => {
            let max_dev = map
                .samples()
                .iter()
                .map(|s| (s.tau - config.r0 * s.t).abs())
                .fold(0.0, f64::max);
            flags.push(CheckFlag::new(
                "constant_rate_map_exactness",
                max_dev <= tol::MAP_EXACTNESS,
                format!(
                    "max |tau - {} t| = {:.3e} (tol {:.0e})",
                    config.r0,
                    max_dev,
                    tol::MAP_EXACTNESS
                ),
            ));
        }
        liftns_core::RateKind::AffineGradient => {
            let ok = map.validate_invariants().is_ok();
            flags.push(CheckFlag::new(
                "map_invariants",
                ok,
                "monotone samples, rates within clamp".to_string(),
            ));
        }
    }
    let div = lifted.final_state.u.max_relative_divergence();
    flags.push(CheckFlag::new(
        "divergence_invariant",
        div <= tol::DIVERGENCE,
        format!(
            "final lifted field: {:.3e} (tol {:.0e})",
            div,
            tol::DIVERGENCE
        ),
    ));

    let timings = Timings {
        physical_secs,
        lifted_secs,
        total_secs: total_start.elapsed().as_secs_f64(),
    };
    Ok(RunReport {
        config: config.clone(),
        panel_a,
        panel_b,
        flags,
        timings,
        invariance: Some(invariance),
        physical_series: physical.series,
        lifted_series: lifted.series,
    })
}

fn push_inequality_flag(flags: &mut Vec<CheckFlag>, name: &str, e: EnergyInequality) {
    flags.push(CheckFlag::new(
        name,
        e.ok,
        format!("slack {:.3e} (floor {:.0e})", e.slack, tol::ENERGY_SLACK),
    ));
}

/// Single physical run (the `run` subcommand).
pub fn run_single(config: &ExperimentConfig) -> Result<liftns_core::Trajectory, CliError> {
    config.validate()?;
    let grid = Grid::new(config.grid_n, config.period)?;
    let u0 = liftns_core::initial::taylor_green(grid, config.amplitude);
    let params = solver::SolverParams::new(config.nu, config.dt).map_err(from_solver)?;
    let opts = IntegrateOptions {
        sample_every: config.sample_every,
        snapshot_every: None,
        ps_q: config.ps_q(),
    };
    solver::integrate_physical(u0, &params, config.t_final, &opts).map_err(from_solver)
}

/// Indices of up to `max_rows` evenly spaced panel rows (always includes
/// the first and last).
fn display_rows(len: usize, max_rows: usize) -> Vec<usize> {
    if len <= max_rows {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..max_rows)
        .map(|i| i * (len - 1) / (max_rows - 1))
        .collect();
    idx.dedup();
    idx
}

/// Plain-text report mirroring the two-panel validation table.
pub fn render_text(report: &RunReport) -> String {
    let mut s = String::new();
    let half = report.config.energy_convention == EnergyConvention::HalfL2Sq;
    let efac = if half { 0.5 } else { 1.0 };
    let (e_hdr_p, e_hdr_l) = if half {
        ("||u||_L2^2/2", "||U||_L2^2/2")
    } else {
        ("||u||_L2^2", "||U||_L2^2")
    };
    let _ = writeln!(s, "liftns validation report");
    let _ = writeln!(s, "========================");
    let _ = writeln!(s);
    for line in report.config.to_config_string().lines() {
        let _ = writeln!(s, "  {line}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Panel A: Energy Conservation");
    let _ = writeln!(
        s,
        "  {:>8}  {:>12}  {:>18} | {:>8}  {:>12}  {:>24}",
        "t", e_hdr_p, "int ||grad u||^2", "tau", e_hdr_l, "int ||grad U||^2 phi'"
    );
    let rows = display_rows(report.panel_a.len(), 11);
    for &i in &rows {
        let r = &report.panel_a[i];
        let _ = writeln!(
            s,
            "  {:>8.3}  {:>12.3}  {:>18.3} | {:>8.3}  {:>12.3}  {:>24.3}",
            r.t,
            efac * r.u_l2sq,
            r.cum_dissipation,
            r.tau,
            efac * r.u_lifted_l2sq,
            r.cum_dissipation_weighted
        );
    }
    if rows.len() < report.panel_a.len() {
        let _ = writeln!(
            s,
            "  ({} rows total; showing {}; full table in panel_a.csv)",
            report.panel_a.len(),
            rows.len()
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Panel B: Beale-Kato-Majda Criterion");
    let _ = writeln!(
        s,
        "  {:>8}  {:>18} | {:>8}  {:>26} | {:>9}",
        "t", "int ||omega||_Linf", "tau", "int ||Omega||_Linf phi'^-1", "|Diff|"
    );
    let rows = display_rows(report.panel_b.len(), 11);
    for &i in &rows {
        let r = &report.panel_b[i];
        let _ = writeln!(
            s,
            "  {:>8.3}  {:>18.3} | {:>8.3}  {:>26.3} | {:>9.1e}",
            r.t, r.bkm_physical, r.tau, r.bkm_lifted_weighted, r.abs_diff
        );
    }
    if rows.len() < report.panel_b.len() {
        let _ = writeln!(
            s,
            "  ({} rows total; showing {}; full table in panel_b.csv)",
            report.panel_b.len(),
            rows.len()
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Energy columns report {}; the energy-inequality check applies the kinetic 1/2 factor internally.",
        if half { "||u||^2/2" } else { "||u||^2_L2 (raw Parseval sum)" }
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "Checks");
    for f in &report.flags {
        let _ = writeln!(
            s,
            "  {} {} ({})",
            if f.pass { "PASS" } else { "FAIL" },
            f.name,
            f.detail
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Timings: physical {:.1} s, lifted {:.1} s, total {:.1} s",
        report.timings.physical_secs, report.timings.lifted_secs, report.timings.total_secs
    );
    let _ = writeln!(
        s,
        "RESULT: {}",
        if report.all_pass() { "PASS" } else { "FAIL" }
    );
    s
}
