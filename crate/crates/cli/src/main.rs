use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use liftns_cli::config::ExperimentConfig;
use liftns_cli::{csvout, report, selftest};

/// Incompressible Navier-Stokes on the periodic 3-torus, integrated in
/// physical and adaptively lifted time, with invariance validation.
#[derive(Parser)]
#[command(name = "liftns", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a single physical-time experiment and write diagnostics.
    Run {
        /// Experiment configuration file (flat key = value).
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the paired physical/lifted experiment, print the two-panel
    /// report, and write CSV tables.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides output_dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the build: quick n = 8 suites, plus the full-scale paired
    /// acceptance experiment with --full.
    Selftest {
        #[arg(long)]
        full: bool,
        /// Optional configuration for the full-scale experiment.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, report::CliError> {
    Ok(ExperimentConfig::from_file(path)?)
}

fn cmd_run(config: &std::path::Path) -> Result<i32, report::CliError> {
    let cfg = load_config(config)?;
    let traj = report::run_single(&cfg)?;
    let out_dir = PathBuf::from(&cfg.output_dir);
    let path = csvout::emit_single_csv(&traj.series, &out_dir)?;
    let rows = &traj.series.rows;
    let first = rows.first().unwrap();
    let last = rows.last().unwrap();
    println!("physical run complete: t = 0 .. {}", last.t);
    println!("  steps:            {}", traj.final_state.step_count);
    println!("  energy:           {} -> {}", first.energy, last.energy);
    println!("  cum dissipation:  {}", last.cum_dissipation);
    println!(
        "  vorticity sup:    {} -> {}",
        first.vort_sup, last.vort_sup
    );
    println!("  diagnostics:      {}", path.display());
    Ok(0)
}

fn cmd_validate(config: &std::path::Path, out: &Option<PathBuf>) -> Result<i32, report::CliError> {
    let mut cfg = load_config(config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir.display().to_string();
    }
    match report::run_validation(&cfg) {
        Ok(rep) => {
            let out_dir = PathBuf::from(&cfg.output_dir);
            let paths = csvout::emit_csv(&rep, &out_dir)?;
            print!("{}", report::render_text(&rep));
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(rep.exit_code())
        }
        Err(report::CliError::Diverged(detail)) => {
            // Partial report: the run is flagged FAILED with the divergence
            // location; no panels exist to print.
            println!("liftns validation report");
            println!("========================");
            for line in cfg.to_config_string().lines() {
                println!("  {line}");
            }
            println!();
            println!("  FAIL solver_divergence ({detail})");
            println!("RESULT: FAILED (numerical divergence)");
            Err(report::CliError::Diverged(detail))
        }
        Err(e) => Err(e),
    }
}

fn cmd_selftest(full: bool, config: &Option<PathBuf>) -> Result<i32, report::CliError> {
    let cfg = match config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    let checks = selftest::run(full, &cfg);
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        println!(
            "{} {:<34} [{:>7.2} s]  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.seconds,
            c.detail
        );
    }
    println!(
        "selftest {}: {}/{} checks passed",
        if full { "full" } else { "quick" },
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    Ok(if all_pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Validate { config, out } => cmd_validate(config, out),
        Command::Selftest { full, config } => cmd_selftest(*full, config),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
