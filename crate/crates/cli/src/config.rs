//! Sweep configuration: a flat key = value text format plus CLI overrides.
//!
//! Every default mirrors the protocol's working point (alpha = sqrt(10),
//! N in {1, 2, 5}, r from 0 to 3 in steps of 0.005, phi = 0), so a bare
//! invocation reproduces the reference setting. Floats are serialized with
//! Rust's shortest round-trip formatting; parse -> serialize -> parse is the
//! identity.

use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::CliError;

/// Documented configuration keys, in serialization order.
pub const CONFIG_KEYS: &[&str] = &[
    "alpha_re",
    "alpha_im",
    "atoms",
    "r_min",
    "r_max",
    "r_step",
    "phi",
    "cutoff",
    "out_dir",
    "grid_re_min",
    "grid_re_max",
    "grid_re_points",
    "grid_im_min",
    "grid_im_max",
    "grid_im_points",
    "jobs",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha: Complex64,
    pub atoms: Vec<u32>,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub phi: f64,
    /// Fock cutoff override; `None` selects the default policy per alpha.
    pub cutoff: Option<usize>,
    pub out_dir: PathBuf,
    pub grid_re_min: f64,
    pub grid_re_max: f64,
    pub grid_re_points: usize,
    pub grid_im_min: f64,
    pub grid_im_max: f64,
    pub grid_im_points: usize,
    /// Worker threads; 0 picks the runtime default.
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha: Complex64::new(10.0f64.sqrt(), 0.0),
            atoms: vec![1, 2, 5],
            r_min: 0.0,
            r_max: 3.0,
            r_step: 0.005,
            phi: 0.0,
            cutoff: None,
            out_dir: PathBuf::from("out"),
            grid_re_min: -6.5,
            grid_re_max: 6.5,
            grid_re_points: 261,
            grid_im_min: -6.5,
            grid_im_max: 6.5,
            grid_im_points: 261,
            jobs: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let field_err =
            |field: &str, message: String| Err(CliError::Config(format!("{field}: {message}")));
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return field_err("alpha", "must be finite".into());
        }
        if self.atoms.is_empty() {
            return field_err("atoms", "at least one atom count required".into());
        }
        if let Some(&bad) = self.atoms.iter().find(|&&n| n == 0 || n > 64) {
            return field_err("atoms", format!("counts must be in 1..=64, got {bad}"));
        }
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return field_err("r_min", format!("must be finite and >= 0, got {}", self.r_min));
        }
        if !(self.r_max >= self.r_min && self.r_max.is_finite()) {
            return field_err("r_max", format!("must be finite and >= r_min, got {}", self.r_max));
        }
        if !(self.r_step > 0.0 && self.r_step.is_finite()) {
            return field_err("r_step", format!("must be finite and > 0, got {}", self.r_step));
        }
        if !self.phi.is_finite() {
            return field_err("phi", "must be finite".into());
        }
        if self.cutoff == Some(0) {
            return field_err("cutoff", "must be positive when set".into());
        }
        for (name, lo, hi, points) in [
            ("grid_re", self.grid_re_min, self.grid_re_max, self.grid_re_points),
            ("grid_im", self.grid_im_min, self.grid_im_max, self.grid_im_points),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return field_err(name, "bounds must be finite with min < max".into());
            }
            if points < 2 {
                return field_err(name, format!("at least 2 points required, got {points}"));
            }
        }
        Ok(())
    }

    /// Cutoff for a given alpha: the override when set, otherwise the
    /// default policy.
    pub fn effective_cutoff(&self) -> usize {
        self.cutoff.unwrap_or_else(|| cavity_ps::default_cutoff(self.alpha))
    }

    /// The coupling grid r_min, r_min + step, ... capped at r_max.
    pub fn r_grid(&self) -> Vec<f64> {
        let count = ((self.r_max - self.r_min) / self.r_step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.r_min + i as f64 * self.r_step).collect()
    }

    pub fn grid_spec(&self) -> Result<cavity_ps::GridSpec, CliError> {
        cavity_ps::GridSpec::new(
            self.grid_re_min,
            self.grid_re_max,
            self.grid_re_points,
            self.grid_im_min,
            self.grid_im_max,
            self.grid_im_points,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Parse the flat key = value format; unknown keys and malformed lines
    /// are field-level errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`, got `{line}`", line_no + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |field: &str, v: &str| -> Result<f64, CliError> {
                v.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("{field}: not a number: `{v}`")))
            };
            let parse_usize = |field: &str, v: &str| -> Result<usize, CliError> {
                v.parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{field}: not an integer: `{v}`")))
            };
            match key {
                "alpha_re" => config.alpha.re = parse_f64(key, value)?,
                "alpha_im" => config.alpha.im = parse_f64(key, value)?,
                "atoms" => config.atoms = parse_atoms(value)?,
                "r_min" => config.r_min = parse_f64(key, value)?,
                "r_max" => config.r_max = parse_f64(key, value)?,
                "r_step" => config.r_step = parse_f64(key, value)?,
                "phi" => config.phi = parse_f64(key, value)?,
                "cutoff" => {
                    config.cutoff = if value == "auto" {
                        None
                    } else {
                        Some(parse_usize(key, value)?)
                    }
                }
                "out_dir" => config.out_dir = PathBuf::from(value),
                "grid_re_min" => config.grid_re_min = parse_f64(key, value)?,
                "grid_re_max" => config.grid_re_max = parse_f64(key, value)?,
                "grid_re_points" => config.grid_re_points = parse_usize(key, value)?,
                "grid_im_min" => config.grid_im_min = parse_f64(key, value)?,
                "grid_im_max" => config.grid_im_max = parse_f64(key, value)?,
                "grid_im_points" => config.grid_im_points = parse_usize(key, value)?,
                "jobs" => config.jobs = parse_usize(key, value)?,
                unknown => {
                    return Err(CliError::Config(format!(
                        "line {}: unknown key `{unknown}` (known keys: {})",
                        line_no + 1,
                        CONFIG_KEYS.join(", ")
                    )))
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha_re = {}", self.alpha.re);
        let _ = writeln!(out, "alpha_im = {}", self.alpha.im);
        let atoms: Vec<String> = self.atoms.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "atoms = {}", atoms.join(","));
        let _ = writeln!(out, "r_min = {}", self.r_min);
        let _ = writeln!(out, "r_max = {}", self.r_max);
        let _ = writeln!(out, "r_step = {}", self.r_step);
        let _ = writeln!(out, "phi = {}", self.phi);
        match self.cutoff {
            Some(c) => {
                let _ = writeln!(out, "cutoff = {c}");
            }
            None => {
                let _ = writeln!(out, "cutoff = auto");
            }
        }
        let _ = writeln!(out, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(out, "grid_re_min = {}", self.grid_re_min);
        let _ = writeln!(out, "grid_re_max = {}", self.grid_re_max);
        let _ = writeln!(out, "grid_re_points = {}", self.grid_re_points);
        let _ = writeln!(out, "grid_im_min = {}", self.grid_im_min);
        let _ = writeln!(out, "grid_im_max = {}", self.grid_im_max);
        let _ = writeln!(out, "grid_im_points = {}", self.grid_im_points);
        let _ = writeln!(out, "jobs = {}", self.jobs);
        out
    }
}

pub fn parse_atoms(value: &str) -> Result<Vec<u32>, CliError> {
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Config(format!("atoms: not an integer: `{part}`")))
        })
        .collect()
}

/// Parse `RE` or `RE,IM` into a complex amplitude.
pub fn parse_alpha(value: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = value.split(',').collect();
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("alpha: not a number: `{v}`")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(CliError::Config(format!("alpha: expected RE or RE,IM, got `{value}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_reference_setting() {
        let config = SweepConfig::default();
        assert!((config.alpha.re - 10.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(config.atoms, vec![1, 2, 5]);
        assert_eq!(config.r_grid().len(), 601);
        assert_eq!(config.effective_cutoff(), 52);
        config.validate().unwrap();
    }

    #[test]
    fn round_trip_is_identity() {
        let config = SweepConfig {
            alpha: Complex64::new(1.7320508075688772, -0.125),
            r_step: 0.0125,
            cutoff: Some(48),
            jobs: 3,
            ..SweepConfig::default()
        };
        let text = config.serialize();
        let parsed = SweepConfig::parse(&text).unwrap();
        assert_eq!(parsed, config);
        assert_eq!(SweepConfig::parse(&parsed.serialize()).unwrap(), parsed);
    }

    #[test]
    fn field_errors_name_the_field() {
        let err = SweepConfig::parse("r_step = nope").unwrap_err();
        assert!(err.to_string().contains("r_step"));
        let err = SweepConfig::parse("mystery = 3").unwrap_err();
        assert!(err.to_string().contains("mystery"));
        let err = SweepConfig::parse("r_step = -0.1").unwrap_err();
        assert!(err.to_string().contains("r_step"));
        let err = SweepConfig::parse("atoms = 0").unwrap_err();
        assert!(err.to_string().contains("atoms"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let config = SweepConfig::parse("# comment\n\nr_max = 1.5\n").unwrap();
        assert_eq!(config.r_max, 1.5);
    }

    #[test]
    fn alpha_flag_accepts_both_forms() {
        assert_eq!(parse_alpha("2.5").unwrap(), Complex64::new(2.5, 0.0));
        assert_eq!(parse_alpha("1.0,-0.5").unwrap(), Complex64::new(1.0, -0.5));
        assert!(parse_alpha("1,2,3").is_err());
    }
}
