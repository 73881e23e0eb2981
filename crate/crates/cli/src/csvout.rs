//! CSV emission. Values are written with 17 significant digits so binary64
//! numbers re-parse exactly in any language; files are newline-terminated
//! and locale-independent, and repeated runs emit byte-identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use liftns_core::DiagnosticSeries;

use crate::report::{CliError, RunReport};

/// 17 significant digits: exact round-trip for f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(content.as_bytes())
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn series_rows(out: &mut String, label: &str, series: &DiagnosticSeries) {
    for r in &series.rows {
        out.push_str(label);
        for v in [
            r.t,
            r.tau,
            r.dt_dtau,
            r.energy,
            r.grad_sq,
            r.cum_dissipation,
            r.vort_sup,
            r.ps_norm,
        ] {
            out.push(',');
            out.push_str(&format_f64(v));
        }
        out.push('\n');
    }
}

/// Write panel_a.csv, panel_b.csv, and diagnostics.csv; returns the paths.
pub fn emit_csv(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths = Vec::new();

    let mut a = String::from("t,u_l2sq,cum_dissipation,tau,U_l2sq,cum_dissipation_weighted\n");
    for r in &report.panel_a {
        let cols = [
            r.t,
            r.u_l2sq,
            r.cum_dissipation,
            r.tau,
            r.u_lifted_l2sq,
            r.cum_dissipation_weighted,
        ];
        let line: Vec<String> = cols.iter().map(|&v| format_f64(v)).collect();
        a.push_str(&line.join(","));
        a.push('\n');
    }
    let pa = dir.join("panel_a.csv");
    write_file(&pa, &a)?;
    paths.push(pa);

    let mut b = String::from("t,bkm_physical,tau,bkm_lifted_weighted,abs_diff\n");
    for r in &report.panel_b {
        let cols = [
            r.t,
            r.bkm_physical,
            r.tau,
            r.bkm_lifted_weighted,
            r.abs_diff,
        ];
        let line: Vec<String> = cols.iter().map(|&v| format_f64(v)).collect();
        b.push_str(&line.join(","));
        b.push('\n');
    }
    let pb = dir.join("panel_b.csv");
    write_file(&pb, &b)?;
    paths.push(pb);

    let mut d = String::from("run,t,tau,dt_dtau,energy,grad_sq,cum_dissipation,vort_sup,ps_norm\n");
    series_rows(&mut d, "physical", &report.physical_series);
    series_rows(&mut d, "lifted", &report.lifted_series);
    let pd = dir.join("diagnostics.csv");
    write_file(&pd, &d)?;
    paths.push(pd);

    Ok(paths)
}

/// diagnostics.csv for a single physical run.
pub fn emit_single_csv(series: &DiagnosticSeries, dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut d = String::from("run,t,tau,dt_dtau,energy,grad_sq,cum_dissipation,vort_sup,ps_norm\n");
    series_rows(&mut d, "physical", series);
    let pd = dir.join("diagnostics.csv");
    write_file(&pd, &d)?;
    Ok(pd)
}
