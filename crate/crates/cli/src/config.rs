//! Flat key = value experiment configuration. One key per line, `#` starts
//! a comment, unknown keys are errors, missing keys take the documented
//! defaults, and serialization round-trips losslessly.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use liftns_core::lift::{NormKind, RateKind};
use thiserror::Error;

/// Default Taylor-Green amplitude: reproduces an initial report energy
/// ||u0||^2_{L2} = 1.250 on the default 2-pi torus (||u0||^2 = 2 A^2 pi^3).
pub fn default_amplitude() -> f64 {
    (1.25 / (2.0 * PI.powi(3))).sqrt()
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("invalid {field}: {msg}")]
    Validation { field: &'static str, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyConvention {
    /// Report ||u||^2_{L2} (the Panel A header).
    L2Sq,
    /// Report kinetic energy ||u||^2 / 2.
    HalfL2Sq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid_n: usize,
    pub period: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_final: f64,
    pub amplitude: f64,
    pub rate_mode: RateKind,
    pub r0: f64,
    pub r1: f64,
    pub norm_kind: NormKind,
    pub r_min: f64,
    pub r_max: f64,
    pub sample_every: usize,
    pub output_dir: String,
    pub seed: u64,
    pub energy_convention: EnergyConvention,
    /// Prodi-Serrin exponent pairs; every q must match the first.
    pub ps_pairs: Vec<(f64, f64)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid_n: 32,
            period: TAU,
            nu: 0.01,
            dt: 1e-3,
            t_final: 5.0,
            amplitude: default_amplitude(),
            rate_mode: RateKind::Constant,
            r0: 2.0,
            r1: 0.0,
            norm_kind: NormKind::GradL2,
            r_min: 0.5,
            r_max: 4.0,
            sample_every: 1,
            output_dir: "out".to_string(),
            seed: 0,
            energy_convention: EnergyConvention::L2Sq,
            ps_pairs: vec![(4.0, 6.0)],
        }
    }
}

fn rate_mode_name(kind: RateKind) -> &'static str {
    match kind {
        RateKind::Constant => "constant",
        RateKind::AffineGradient => "affine-gradient",
    }
}

fn norm_kind_name(kind: NormKind) -> &'static str {
    match kind {
        NormKind::GradL2 => "grad-l2",
        NormKind::VortSup => "vort-sup",
    }
}

fn energy_convention_name(c: EnergyConvention) -> &'static str {
    match c {
        EnergyConvention::L2Sq => "l2sq",
        EnergyConvention::HalfL2Sq => "half-l2sq",
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str_named(&text, &path.display().to_string())
    }

    pub fn from_str_named(text: &str, path: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| ConfigError::Parse {
                path: path.to_string(),
                line,
                msg: format!("expected `key = value`, got `{stripped}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Parse {
                    path: path.to_string(),
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            seen.push(key.to_string());
            cfg.set(key, value).map_err(|msg| ConfigError::Parse {
                path: path.to_string(),
                line,
                msg,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("cannot parse `{value}` as a value for {key}"))
        }
        match key {
            "grid_n" => self.grid_n = num(key, value)?,
            "period" => self.period = num(key, value)?,
            "nu" => self.nu = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "amplitude" => self.amplitude = num(key, value)?,
            "rate_mode" => {
                self.rate_mode = match value {
                    "constant" => RateKind::Constant,
                    "affine-gradient" => RateKind::AffineGradient,
                    _ => {
                        return Err(format!(
                            "rate_mode must be `constant` or `affine-gradient`, got `{value}`"
                        ))
                    }
                }
            }
            "r0" => self.r0 = num(key, value)?,
            "r1" => self.r1 = num(key, value)?,
            "norm_kind" => {
                self.norm_kind = match value {
                    "grad-l2" => NormKind::GradL2,
                    "vort-sup" => NormKind::VortSup,
                    _ => {
                        return Err(format!(
                            "norm_kind must be `grad-l2` or `vort-sup`, got `{value}`"
                        ))
                    }
                }
            }
            "r_min" => self.r_min = num(key, value)?,
            "r_max" => self.r_max = num(key, value)?,
            "sample_every" => self.sample_every = num(key, value)?,
            "output_dir" => self.output_dir = value.to_string(),
            "seed" => self.seed = num(key, value)?,
            "energy_convention" => {
                self.energy_convention = match value {
                    "l2sq" => EnergyConvention::L2Sq,
                    "half-l2sq" => EnergyConvention::HalfL2Sq,
                    _ => {
                        return Err(format!(
                            "energy_convention must be `l2sq` or `half-l2sq`, got `{value}`"
                        ))
                    }
                }
            }
            "ps_pairs" => {
                let mut pairs = Vec::new();
                for item in value.split(',') {
                    let item = item.trim();
                    let (p, q) = item
                        .split_once(':')
                        .ok_or_else(|| format!("ps_pairs entries are `p:q`, got `{item}`"))?;
                    let p: f64 = p.trim().parse().map_err(|_| format!("bad p in `{item}`"))?;
                    let q: f64 = q.trim().parse().map_err(|_| format!("bad q in `{item}`"))?;
                    pairs.push((p, q));
                }
                if pairs.is_empty() {
                    return Err("ps_pairs must contain at least one p:q pair".to_string());
                }
                self.ps_pairs = pairs;
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &'static str, msg: String| Err(ConfigError::Validation { field, msg });
        if !self.grid_n.is_multiple_of(2) {
            return bad("grid_n", format!("must be even, got {}", self.grid_n));
        }
        if self.grid_n < 8 {
            return bad("grid_n", format!("must be >= 8, got {}", self.grid_n));
        }
        for (field, v) in [
            ("period", self.period),
            ("nu", self.nu),
            ("dt", self.dt),
            ("r0", self.r0),
            ("r_min", self.r_min),
            ("r_max", self.r_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(
                    match field {
                        "period" => "period",
                        "nu" => "nu",
                        "dt" => "dt",
                        "r0" => "r0",
                        "r_min" => "r_min",
                        _ => "r_max",
                    },
                    format!("must be positive and finite, got {v}"),
                );
            }
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return bad("t_final", format!("must be >= 0, got {}", self.t_final));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad("amplitude", format!("must be >= 0, got {}", self.amplitude));
        }
        if !(self.r_min <= self.r0 && self.r0 <= self.r_max) {
            return bad(
                "r0",
                format!(
                    "need r_min <= r0 <= r_max, got {} / {} / {}",
                    self.r_min, self.r0, self.r_max
                ),
            );
        }
        if !self.r1.is_finite() {
            return bad("r1", "must be finite".to_string());
        }
        if self.sample_every == 0 {
            return bad("sample_every", "must be >= 1".to_string());
        }
        let q0 = self.ps_pairs[0].1;
        for &(p, q) in &self.ps_pairs {
            if !(p.is_finite() && p > 0.0 && q.is_finite() && q > 0.0) {
                return bad(
                    "ps_pairs",
                    format!("exponents must be positive, got {p}:{q}"),
                );
            }
            if (q - q0).abs() > 1e-12 {
                return bad(
                    "ps_pairs",
                    format!("all pairs must share one q (sampled norm), got q = {q0} and {q}"),
                );
            }
        }
        Ok(())
    }

    pub fn rate_params(&self) -> Result<liftns_core::RateParams, liftns_core::LiftError> {
        liftns_core::RateParams::new(
            self.rate_mode,
            self.r0,
            self.r1,
            self.norm_kind,
            self.r_min,
            self.r_max,
        )
    }

    pub fn ps_q(&self) -> f64 {
        self.ps_pairs[0].1
    }

    /// Canonical serialization; parsing it back reproduces the config
    /// exactly (float formatting is shortest-round-trip).
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let pairs = self
            .ps_pairs
            .iter()
            .map(|(p, q)| format!("{p}:{q}"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(s, "grid_n = {}", self.grid_n);
        let _ = writeln!(s, "period = {}", self.period);
        let _ = writeln!(s, "nu = {}", self.nu);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "t_final = {}", self.t_final);
        let _ = writeln!(s, "amplitude = {}", self.amplitude);
        let _ = writeln!(s, "rate_mode = {}", rate_mode_name(self.rate_mode));
        let _ = writeln!(s, "r0 = {}", self.r0);
        let _ = writeln!(s, "r1 = {}", self.r1);
        let _ = writeln!(s, "norm_kind = {}", norm_kind_name(self.norm_kind));
        let _ = writeln!(s, "r_min = {}", self.r_min);
        let _ = writeln!(s, "r_max = {}", self.r_max);
        let _ = writeln!(s, "sample_every = {}", self.sample_every);
        let _ = writeln!(s, "output_dir = {}", self.output_dir);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(
            s,
            "energy_convention = {}",
            energy_convention_name(self.energy_convention)
        );
        let _ = writeln!(s, "ps_pairs = {pairs}");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_full_defaults() {
        let cfg = ExperimentConfig::from_str_named("", "test").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = ExperimentConfig::from_str_named("grid_n = 32\n", "test").unwrap();
        assert_eq!(cfg.nu, 0.01);
        assert_eq!(cfg.period, TAU);
        assert_eq!(cfg.rate_mode, RateKind::Constant);
        assert_eq!(cfg.r0, 2.0);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# full line comment\n\n  nu = 0.02  # trailing comment\n";
        let cfg = ExperimentConfig::from_str_named(text, "test").unwrap();
        assert_eq!(cfg.nu, 0.02);
    }

    #[test]
    fn odd_grid_is_a_validation_error() {
        let err = ExperimentConfig::from_str_named("grid_n = 31\n", "test").unwrap_err();
        match err {
            ConfigError::Validation { field, msg } => {
                assert_eq!(field, "grid_n");
                assert!(msg.contains("even"));
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_key_reports_line_number() {
        let err = ExperimentConfig::from_str_named("nu = 0.01\nbogus = 3\n", "cfg").unwrap_err();
        match err {
            ConfigError::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("bogus"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = ExperimentConfig::from_str_named("nu 0.01\n", "cfg").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = ExperimentConfig::from_str_named("nu = 0.01\nnu = 0.02\n", "cfg").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn round_trip_is_lossless() {
        let cfg = ExperimentConfig {
            dt: 1.0 / 3.0,
            amplitude: 0.123_456_789_012_345_68,
            rate_mode: RateKind::AffineGradient,
            norm_kind: NormKind::VortSup,
            ps_pairs: vec![(4.0, 6.0), (5.5, 6.0)],
            seed: u64::MAX,
            ..Default::default()
        };
        let text = cfg.to_config_string();
        let back = ExperimentConfig::from_str_named(&text, "round").unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_str_named(&cfg.to_config_string(), "round").unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rate_clamp_ordering_is_validated() {
        let err = ExperimentConfig::from_str_named("r0 = 10\n", "cfg").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { field: "r0", .. }));
    }

    #[test]
    fn ps_pairs_parse_and_must_share_q() {
        let cfg = ExperimentConfig::from_str_named("ps_pairs = 4:6, 8:6\n", "cfg").unwrap();
        assert_eq!(cfg.ps_pairs, vec![(4.0, 6.0), (8.0, 6.0)]);
        let err = ExperimentConfig::from_str_named("ps_pairs = 4:6, 4:8\n", "cfg").unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Validation {
                field: "ps_pairs",
                ..
            }
        ));
    }

    #[test]
    fn default_amplitude_reproduces_initial_energy() {
        // ||u0||^2 = 2 A^2 pi^3 = 1.250 for the default amplitude.
        let a = default_amplitude();
        let e0 = 2.0 * a * a * PI.powi(3);
        assert!((e0 - 1.25).abs() < 1e-14);
    }
}
