//! CSV schema details: the zero-duration run, render/CSV consistency, and
//! exact re-parsing of the 17-digit values.

use liftns_cli::config::ExperimentConfig;
use liftns_cli::{csvout, report};

fn tiny_config(t_final: f64) -> ExperimentConfig {
    ExperimentConfig {
        grid_n: 8,
        dt: 1e-2,
        t_final,
        ..Default::default()
    }
}

#[test]
fn zero_duration_run_emits_single_row() {
    let cfg = tiny_config(0.0);
    let rep = report::run_validation(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = csvout::emit_csv(&rep, dir.path()).unwrap();
    let panel_a = std::fs::read_to_string(&paths[0]).unwrap();
    let lines: Vec<&str> = panel_a.lines().collect();
    assert_eq!(lines.len(), 2, "header plus one t = 0 row:\n{panel_a}");
    assert!(lines[1].starts_with("0.0000000000000000e0,"));
}

#[test]
fn csv_values_reparse_to_exact_f64() {
    let cfg = tiny_config(0.05);
    let rep = report::run_validation(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = csvout::emit_csv(&rep, dir.path()).unwrap();
    let panel_a = std::fs::read_to_string(&paths[0]).unwrap();
    for (line, row) in panel_a.lines().skip(1).zip(&rep.panel_a) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols[0].to_bits(), row.t.to_bits());
        assert_eq!(cols[1].to_bits(), row.u_l2sq.to_bits());
        assert_eq!(cols[2].to_bits(), row.cum_dissipation.to_bits());
        assert_eq!(cols[3].to_bits(), row.tau.to_bits());
        assert_eq!(cols[4].to_bits(), row.u_lifted_l2sq.to_bits());
        assert_eq!(cols[5].to_bits(), row.cum_dissipation_weighted.to_bits());
    }
}

#[test]
fn rendered_panel_matches_csv_after_rounding() {
    // The 3-decimal rendered cells must equal the stored full-precision
    // values rounded to 3 decimals.
    let cfg = tiny_config(0.05);
    let rep = report::run_validation(&cfg).unwrap();
    let text = report::render_text(&rep);
    let mut in_panel_a = false;
    let mut row_iter = rep.panel_a.iter();
    for line in text.lines() {
        if line.starts_with("Panel A") {
            in_panel_a = true;
            continue;
        }
        if in_panel_a {
            let trimmed = line.trim_start();
            if trimmed.starts_with('t') || trimmed.is_empty() {
                continue;
            }
            if line.starts_with("Panel") || trimmed.starts_with('(') {
                break;
            }
            let row = match row_iter.next() {
                Some(r) => r,
                None => break,
            };
            let cells: Vec<&str> = line.split(['|', ' ']).filter(|s| !s.is_empty()).collect();
            assert_eq!(cells[0], format!("{:.3}", row.t));
            assert_eq!(cells[1], format!("{:.3}", row.u_l2sq));
            assert_eq!(cells[2], format!("{:.3}", row.cum_dissipation));
            assert_eq!(cells[3], format!("{:.3}", row.tau));
            assert_eq!(cells[4], format!("{:.3}", row.u_lifted_l2sq));
            assert_eq!(cells[5], format!("{:.3}", row.cum_dissipation_weighted));
            if trimmed.is_empty() {
                break;
            }
        }
    }
    assert!(in_panel_a, "panel A not found in rendered report");
}

#[test]
fn exit_code_mapping_follows_flags() {
    let cfg = tiny_config(0.05);
    let mut rep = report::run_validation(&cfg).unwrap();
    assert!(rep.all_pass());
    assert_eq!(rep.exit_code(), 0);
    rep.flags[0].pass = false;
    assert_eq!(rep.exit_code(), 1);
}

#[test]
fn identity_rate_validation_has_zero_diffs() {
    let mut cfg = tiny_config(0.1);
    cfg.r0 = 1.0;
    let rep = report::run_validation(&cfg).unwrap();
    assert!(rep.all_pass(), "flags: {:?}", rep.flags);
    let inv = rep.invariance.unwrap();
    assert!(inv.max_energy_rel_diff <= 1e-12);
    assert!(inv.bkm_diff <= 1e-12);
    assert!(inv.ps_diff <= 1e-12);
    for row in &rep.panel_a {
        assert_eq!(row.t, row.tau);
    }
}

#[test]
fn affine_rate_validation_passes_all_flags() {
    let cfg =
        ExperimentConfig::from_file(std::path::Path::new("../../configs/affine.cfg")).unwrap();
    let rep = report::run_validation(&cfg).unwrap();
    for flag in &rep.flags {
        assert!(flag.pass, "{} failed: {}", flag.name, flag.detail);
    }
    // Panel B diff column stays within the free-running budget (and far
    // inside it, since locked runs share sample grids).
    for row in &rep.panel_b {
        assert!(
            row.abs_diff <= 1e-6,
            "at t = {}: diff {}",
            row.t,
            row.abs_diff
        );
    }
    // tau is genuinely nonlinear in t for the affine rate.
    let last = rep.panel_a.last().unwrap();
    assert!(last.tau > 0.0 && (last.tau - cfg.r0 * last.t).abs() > 1e-6);
}
