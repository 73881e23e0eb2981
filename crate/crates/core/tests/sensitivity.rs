//! Fault injection: perturbing one spectral coefficient mid-run must trip
//! the paired-run equivalence checks while leaving the energy inequality
//! intact (a shrunk coefficient only dissipates).

use std::f64::consts::TAU;

use liftns_core::diagnostics::{self, Coordinate, DiagnosticSeries};
use liftns_core::lift::{step_lifted_const_rate, LiftMap, LiftedState};
use liftns_core::solver::{self, IntegrateOptions};
use liftns_core::{initial, Grid, RateParams, SolverParams};

#[test]
fn perturbed_run_fails_equivalence_but_keeps_energy_inequality() {
    let grid = Grid::new(16, TAU).unwrap();
    let u0 = initial::taylor_green(grid.clone(), 0.15);
    let params = SolverParams::new(0.01, 1e-2).unwrap();
    let t_final = 0.2;
    let opts = IntegrateOptions::default();
    let physical = solver::integrate_physical(u0.clone(), &params, t_final, &opts).unwrap();

    // Drive the lifted run by hand so one coefficient can be shrunk
    // mid-run (Hermitian partner included).
    let rate = 2.0;
    let rp = RateParams::constant(rate).unwrap();
    let mut map = LiftMap::new(rate, &rp).unwrap();
    let mut state = LiftedState::new(u0);
    state.dt_dtau = 1.0 / rate;
    let mut series = DiagnosticSeries::new(6.0, Coordinate::Lifted);
    series.push_sample(&state.u, 0.0, 0.0, state.dt_dtau);
    let n_steps = 20usize;
    for step in 1..=n_steps {
        state = step_lifted_const_rate(&state, rate, rate * params.dt, &params).unwrap();
        map.advance(rate, params.dt).unwrap();
        if step == n_steps / 2 {
            let idx = grid.mode_idx(1, 1, 1);
            let nidx = grid.mode_idx(-1, -1, -1);
            let damp = 1.0 - 1e-6;
            for c in 0..3 {
                state.u.component_mut(c)[idx] *= damp;
                state.u.component_mut(c)[nidx] *= damp;
            }
        }
        series.push_sample(&state.u, map.t_end(), map.tau_end(), state.dt_dtau);
    }

    let report =
        diagnostics::compare_runs(&physical.series, &series, &map, params.nu, 4.0).unwrap();
    assert!(
        report.max_energy_rel_diff > 1e-8,
        "perturbation should break the 1e-8 equivalence, got {}",
        report.max_energy_rel_diff
    );
    assert!(
        report.energy_inequality_lifted.ok,
        "a dissipative perturbation must not break the energy inequality: slack {}",
        report.energy_inequality_lifted.slack
    );
    assert!(report.energy_inequality_physical.ok);
}
