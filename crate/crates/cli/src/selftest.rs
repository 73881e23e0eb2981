//! Built-in verification: quick desk checks at n = 8/16 and the full n = 32
//! paired-run acceptance experiment.

use std::f64::consts::TAU;
use std::time::Instant;

use liftns_core::diagnostics::{self, Coordinate};
use liftns_core::solver::{self, IntegrateOptions};
use liftns_core::{initial, lift, operators, oracle, Grid, RateParams, SolverParams};

use crate::config::ExperimentConfig;
use crate::report::tol;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

fn check(name: &str, f: impl FnOnce() -> (bool, String)) -> Check {
    let t0 = Instant::now();
    let (pass, detail) = f();
    Check {
        name: name.to_string(),
        pass,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn convolution_oracle_check(trials: u64) -> (bool, String) {
    let grid = Grid::new(8, TAU).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..trials {
        let u = initial::random_divergence_free(grid.clone(), 1.0, seed);
        let fast = operators::nonlinear_term(&u);
        let slow = oracle::advection_by_convolution(&u);
        worst = worst.max(fast.max_coeff_diff(&slow));
    }
    (
        worst <= tol::CONVOLUTION_ORACLE,
        format!(
            "{trials} random fields at n = 8, max |pseudospectral - convolution| = {worst:.3e} (tol {:.0e})",
            tol::CONVOLUTION_ORACLE
        ),
    )
}

fn projector_idempotency_check() -> (bool, String) {
    let grid = Grid::new(8, TAU).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut u = initial::random_divergence_free(grid.clone(), 1.0, seed);
        // Spoil the divergence, then project twice.
        let idx = grid.mode_idx(1, 2, 0);
        let nidx = grid.mode_idx(-1, -2, 0);
        u.component_mut(0)[idx] += liftns_core::Complex64::new(0.4, -0.2);
        u.component_mut(0)[nidx] += liftns_core::Complex64::new(0.4, 0.2);
        let p1 = operators::project_div_free(&u);
        let p2 = operators::project_div_free(&p1);
        worst = worst.max(p1.max_coeff_diff(&p2));
    }
    (
        worst <= 1e-14,
        format!("max |P(Pu) - Pu| = {worst:.3e} (tol 1e-14)"),
    )
}

fn stokes_exactness_check() -> (bool, String) {
    let grid = Grid::new(8, TAU).unwrap();
    let u0 = initial::single_mode(&grid, [1, 0, 0], [0.0, 1.0, 0.0]);
    let nu = 0.05;
    let dt = 1e-2;
    let params = SolverParams::new(nu, dt).unwrap();
    let mut state = solver::SolverState::new(u0);
    let mut worst = 0.0f64;
    for step in 1..=100 {
        state = match solver::step_physical(&state, &params) {
            Ok(s) => s,
            Err(e) => return (false, format!("solver error: {e}")),
        };
        let expect = 0.5 * (-nu * (step as f64) * dt).exp();
        let got = state.u.component(1)[grid.mode_idx(1, 0, 0)].re;
        worst = worst.max((got - expect).abs() / expect);
    }
    (
        worst <= 1e-12,
        format!("100 steps of pure diffusion, max rel err {worst:.3e} (tol 1e-12)"),
    )
}

fn identity_lift_check() -> (bool, String) {
    let grid = Grid::new(16, TAU).unwrap();
    let u0 = initial::taylor_green(grid, 1.0);
    let params = SolverParams::new(0.01, 1e-3).unwrap();
    let opts = IntegrateOptions::default();
    let phys = match solver::integrate_physical(u0.clone(), &params, 0.1, &opts) {
        Ok(t) => t,
        Err(e) => return (false, format!("solver error: {e}")),
    };
    let lifted = match lift::run_lifted(u0, &RateParams::identity(), &params, 0.1, &opts) {
        Ok((_, t)) => t,
        Err(e) => return (false, format!("lift error: {e}")),
    };
    let diff = lifted.final_state.u.max_coeff_diff(&phys.final_state.u);
    (
        diff <= tol::IDENTITY_COEFF,
        format!(
            "coefficientwise diff {diff:.3e} (tol {:.0e})",
            tol::IDENTITY_COEFF
        ),
    )
}

/// The n = 32 paired acceptance experiment: physical vs constant-rate-2
/// lifted run over the full default horizon, plus the free-running replay.
fn full_scale_checks(config: &ExperimentConfig) -> Vec<Check> {
    let mut checks = Vec::new();
    let grid = match Grid::new(config.grid_n, config.period) {
        Ok(g) => g,
        Err(e) => {
            checks.push(Check {
                name: "paired_runs".into(),
                pass: false,
                detail: format!("grid error: {e}"),
                seconds: 0.0,
            });
            return checks;
        }
    };
    let u0 = initial::taylor_green(grid, config.amplitude);
    let params = SolverParams::new(config.nu, config.dt).unwrap();
    let opts = IntegrateOptions {
        sample_every: config.sample_every,
        snapshot_every: None,
        ps_q: config.ps_q(),
    };
    let t0 = Instant::now();
    let phys = match solver::integrate_physical(u0.clone(), &params, config.t_final, &opts) {
        Ok(t) => t,
        Err(e) => {
            checks.push(Check {
                name: "paired_runs".into(),
                pass: false,
                detail: format!("physical run diverged: {e}"),
                seconds: t0.elapsed().as_secs_f64(),
            });
            return checks;
        }
    };
    let rp = RateParams::constant(2.0).unwrap();
    let (map, lifted) = match lift::run_lifted(u0.clone(), &rp, &params, config.t_final, &opts) {
        Ok(r) => r,
        Err(e) => {
            checks.push(Check {
                name: "paired_runs".into(),
                pass: false,
                detail: format!("lifted run failed: {e}"),
                seconds: t0.elapsed().as_secs_f64(),
            });
            return checks;
        }
    };
    let elapsed = t0.elapsed().as_secs_f64();

    let inv = match diagnostics::compare_runs(
        &phys.series,
        &lifted.series,
        &map,
        config.nu,
        config.ps_pairs[0].0,
    ) {
        Ok(i) => i,
        Err(e) => {
            checks.push(Check {
                name: "paired_runs".into(),
                pass: false,
                detail: format!("alignment failed: {e}"),
                seconds: elapsed,
            });
            return checks;
        }
    };
    checks.push(Check {
        name: "energy_structure_preserved".into(),
        pass: inv.max_energy_rel_diff <= tol::ENERGY_REL
            && inv.max_dissipation_rel_diff <= tol::ENERGY_REL,
        detail: format!(
            "energy rel diff {:.3e}, weighted dissipation rel diff {:.3e} (tol {:.0e})",
            inv.max_energy_rel_diff,
            inv.max_dissipation_rel_diff,
            tol::ENERGY_REL
        ),
        seconds: elapsed,
    });
    checks.push(Check {
        name: "bkm_invariance_aligned".into(),
        pass: inv.bkm_diff <= tol::QUADRATURE_ALIGNED,
        detail: format!(
            "BKM diff {:.3e} (tol {:.0e})",
            inv.bkm_diff,
            tol::QUADRATURE_ALIGNED
        ),
        seconds: 0.0,
    });
    checks.push(Check {
        name: "energy_inequality_both_coordinates".into(),
        pass: inv.energy_inequality_physical.ok && inv.energy_inequality_lifted.ok,
        detail: format!(
            "slack physical {:.3e}, lifted {:.3e} (floor {:.0e})",
            inv.energy_inequality_physical.slack,
            inv.energy_inequality_lifted.slack,
            tol::ENERGY_SLACK
        ),
        seconds: 0.0,
    });
    let max_dev = map
        .samples()
        .iter()
        .map(|s| (s.tau - 2.0 * s.t).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "constant_rate_map_exactness".into(),
        pass: max_dev <= tol::MAP_EXACTNESS,
        detail: format!(
            "max |tau - 2t| = {max_dev:.3e} (tol {:.0e})",
            tol::MAP_EXACTNESS
        ),
        seconds: 0.0,
    });

    // Free-running replay against the recorded map; the step is misaligned
    // with the map knots so the interpolated resampling path is exercised.
    let t0 = Instant::now();
    let dtau = 2.5 * config.dt;
    match lift::run_lifted_replay(u0, &map, dtau, &params, &opts) {
        Ok(replay) => {
            let bkm_phys = diagnostics::bkm_integral(&phys.series, Coordinate::Physical);
            let bkm_replay = diagnostics::bkm_integral(&replay.series, Coordinate::Lifted);
            let diff = (bkm_phys - bkm_replay).abs();
            checks.push(Check {
                name: "bkm_invariance_replay".into(),
                pass: diff <= tol::QUADRATURE_REPLAY,
                detail: format!(
                    "free-running BKM diff {:.3e} (tol {:.0e})",
                    diff,
                    tol::QUADRATURE_REPLAY
                ),
                seconds: t0.elapsed().as_secs_f64(),
            });
        }
        Err(e) => checks.push(Check {
            name: "bkm_invariance_replay".into(),
            pass: false,
            detail: format!("replay failed: {e}"),
            seconds: t0.elapsed().as_secs_f64(),
        }),
    }
    checks
}

/// Run the quick suite, optionally followed by the full n = 32 acceptance
/// experiment.
pub fn run(full: bool, config: &ExperimentConfig) -> Vec<Check> {
    let mut checks = vec![
        check("convolution_oracle", || convolution_oracle_check(20)),
        check("projector_idempotency", projector_idempotency_check),
        check("stokes_exactness", stokes_exactness_check),
        check("identity_lift_equivalence", identity_lift_check),
    ];
    if full {
        checks.extend(full_scale_checks(config));
    }
    checks
}
