//! Flag and config-file parsing.
//!
//! The config file is plain `key = value` lines; keys are the long flag
//! names without dashes (`L`, `beta`, `ebn0`, `min-errors`, ...), `#` starts
//! a comment. Flags given on the command line override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ancss_core::{EnergyReference, ExtractionRule, LinkSettings, MapShape, RoundOptions, StopRule, SweepConfig};
use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("L must be even (got {0})")]
    OddUsers(usize),
    #[error("L must be at least 2 (got {0})")]
    TooFewUsers(usize),
    #[error("beta must be at least 1")]
    ZeroBeta,
    #[error("empty Eb/N0 grid: {0}")]
    EmptyGrid(String),
    #[error("min_errors ({min_errors}) exceeds max_trials ({max_trials})")]
    ErrorsExceedTrials { min_errors: u64, max_trials: u64 },
    #[error("min_errors must be at least 1")]
    ZeroMinErrors,
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{path}:{line}: {reason}")]
    BadFile { path: PathBuf, line: usize, reason: String },
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] ancss_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Simulate,
    Both,
    Verify,
}

/// Raw command-line flags. Everything is optional so that file values and
/// built-in defaults can fill the gaps.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "ancss",
    version,
    about = "BER of analog network coding over chaos-based spread spectrum"
)]
pub struct Args {
    /// User counts, comma separated (even, >= 2)
    #[arg(long = "L", value_name = "LIST")]
    pub users: Option<String>,
    /// Spreading factors, comma separated
    #[arg(long, value_name = "LIST")]
    pub beta: Option<String>,
    /// Eb/N0 grid in dB: start:step:stop (inclusive) or a comma list
    #[arg(long, value_name = "GRID")]
    pub ebn0: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long = "min-errors")]
    pub min_errors: Option<String>,
    #[arg(long = "max-trials")]
    pub max_trials: Option<String>,
    /// analytic | simulate | both | verify
    #[arg(long)]
    pub mode: Option<String>,
    /// Output CSV path; the run manifest goes next to it
    #[arg(long)]
    pub out: Option<String>,
    /// Decode thresholds from each symbol's code energy instead of beta
    #[arg(long = "per-bit-energy", num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub per_bit_energy: Option<String>,
    /// Analytic rows use the full ternary symbol error rate
    #[arg(long = "exact-ser", num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub exact_ser: Option<String>,
    /// Partner extraction: modular | clamp
    #[arg(long)]
    pub extraction: Option<String>,
    /// Bernoulli map slope G
    #[arg(long = "chaos-g")]
    pub chaos_g: Option<String>,
    /// Bernoulli map offset F
    #[arg(long = "chaos-f")]
    pub chaos_f: Option<String>,
    /// key = value file with defaults for any of the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "variance-scale", hide = true)]
    pub variance_scale: Option<String>,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub users: Vec<usize>,
    pub beta: Vec<usize>,
    pub ebn0_db: Vec<f64>,
    pub seed: u64,
    pub min_errors: u64,
    pub max_trials: u64,
    pub mode: Mode,
    pub out: PathBuf,
    pub per_bit_energy: bool,
    pub exact_ser: bool,
    pub extraction: String,
    pub chaos_g: f64,
    pub chaos_f: f64,
    /// Multiplies the analytic decision variance; 1 outside of tests.
    pub variance_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let shape = MapShape::default();
        RunConfig {
            users: vec![2, 4, 8],
            beta: vec![100, 200],
            ebn0_db: (0..=7).map(|i| 2.0 * i as f64).collect(),
            seed: 42,
            min_errors: 200,
            max_trials: 100_000_000,
            mode: Mode::Both,
            out: PathBuf::from("ber.csv"),
            per_bit_energy: true,
            exact_ser: false,
            extraction: "modular".into(),
            chaos_g: shape.slope,
            chaos_f: shape.offset,
            variance_scale: 1.0,
        }
    }
}

impl RunConfig {
    pub fn stop(&self) -> StopRule {
        StopRule {
            min_errors: self.min_errors,
            max_trials: self.max_trials,
        }
    }

    pub fn link(&self) -> LinkSettings {
        let extraction = if self.extraction == "clamp" {
            ExtractionRule::Clamp
        } else {
            ExtractionRule::Modular
        };
        let energy = if self.per_bit_energy {
            EnergyReference::PerSymbol
        } else {
            EnergyReference::Nominal
        };
        LinkSettings {
            shape: MapShape {
                slope: self.chaos_g,
                offset: self.chaos_f,
            },
            round: RoundOptions {
                energy,
                extraction,
                ..RoundOptions::default()
            },
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            ebn0_grid: self.ebn0_db.clone(),
            users_list: self.users.clone(),
            beta_list: self.beta.clone(),
            stop: self.stop(),
            seed: self.seed,
            link: self.link(),
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        let mut p = self.out.clone().into_os_string();
        p.push(".manifest.json");
        PathBuf::from(p)
    }
}

const KEYS: &[&str] = &[
    "L",
    "beta",
    "ebn0",
    "seed",
    "min-errors",
    "max-trials",
    "mode",
    "out",
    "per-bit-energy",
    "exact-ser",
    "extraction",
    "chaos-g",
    "chaos-f",
    "variance-scale",
];

/// Reads a `key = value` file.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config_text(&text, path)
}

fn parse_config_text(text: &str, path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| ConfigError::BadFile {
            path: path.to_owned(),
            line: i + 1,
            reason,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad("expected `key = value`".into()))?;
        let key = k.trim().trim_start_matches("--");
        if !KEYS.contains(&key) {
            return Err(bad(format!("unknown key {key:?}")));
        }
        out.insert(key.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Merges flags over the optional config file over the defaults and
/// validates the result.
pub fn parse_config(args: &Args) -> Result<RunConfig, ConfigError> {
    let mut values = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let flags = [
        ("L", &args.users),
        ("beta", &args.beta),
        ("ebn0", &args.ebn0),
        ("seed", &args.seed),
        ("min-errors", &args.min_errors),
        ("max-trials", &args.max_trials),
        ("mode", &args.mode),
        ("out", &args.out),
        ("per-bit-energy", &args.per_bit_energy),
        ("exact-ser", &args.exact_ser),
        ("extraction", &args.extraction),
        ("chaos-g", &args.chaos_g),
        ("chaos-f", &args.chaos_f),
        ("variance-scale", &args.variance_scale),
    ];
    for (key, v) in flags {
        if let Some(v) = v {
            values.insert(key.to_string(), v.clone());
        }
    }
    from_values(&values)
}

fn from_values(values: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::default();
    for (key, v) in values {
        match key.as_str() {
            "L" => c.users = parse_list(key, v)?,
            "beta" => c.beta = parse_list(key, v)?,
            "ebn0" => c.ebn0_db = parse_grid(v)?,
            "seed" => c.seed = parse_num(key, v)?,
            "min-errors" => c.min_errors = parse_count(key, v)?,
            "max-trials" => c.max_trials = parse_count(key, v)?,
            "mode" => {
                c.mode =
                    Mode::from_str(v, true).map_err(|_| bad(key, v, "expected analytic, simulate, both or verify"))?
            }
            "out" => c.out = PathBuf::from(v),
            "per-bit-energy" => c.per_bit_energy = parse_bool(key, v)?,
            "exact-ser" => c.exact_ser = parse_bool(key, v)?,
            "extraction" => {
                if v != "modular" && v != "clamp" {
                    return Err(bad(key, v, "expected modular or clamp"));
                }
                c.extraction = v.clone();
            }
            "chaos-g" => c.chaos_g = parse_num(key, v)?,
            "chaos-f" => c.chaos_f = parse_num(key, v)?,
            "variance-scale" => {
                c.variance_scale = parse_num(key, v)?;
                if !(c.variance_scale > 0.0 && c.variance_scale.is_finite()) {
                    return Err(bad(key, v, "must be positive"));
                }
            }
            _ => unreachable!("keys are checked on input"),
        }
    }
    validate(&c)?;
    Ok(c)
}

fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    if c.users.is_empty() {
        return Err(ConfigError::BadValue {
            key: "L".into(),
            value: String::new(),
            reason: "empty list".into(),
        });
    }
    if let Some(&l) = c.users.iter().find(|&&l| !l.is_multiple_of(2)) {
        return Err(ConfigError::OddUsers(l));
    }
    if let Some(&l) = c.users.iter().find(|&&l| l < 2) {
        return Err(ConfigError::TooFewUsers(l));
    }
    if c.beta.is_empty() || c.beta.contains(&0) {
        return Err(ConfigError::ZeroBeta);
    }
    if c.min_errors == 0 {
        return Err(ConfigError::ZeroMinErrors);
    }
    if c.min_errors > c.max_trials {
        return Err(ConfigError::ErrorsExceedTrials {
            min_errors: c.min_errors,
            max_trials: c.max_trials,
        });
    }
    MapShape::new(c.chaos_g, c.chaos_f)?;
    c.sweep().validate()?;
    Ok(())
}

fn bad(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse().map_err(|e: T::Err| bad(key, v, &e.to_string()))
}

/// Integer counts, also accepting `1e8`-style literals.
fn parse_count(key: &str, v: &str) -> Result<u64, ConfigError> {
    if let Ok(n) = v.trim().parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = parse_num(key, v)?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(bad(key, v, "not a non-negative integer"))
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(key, v, "expected true or false")),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<usize>, ConfigError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// `start:step:stop` (both ends included) or `a,b,c`.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let start: f64 = parse_num("ebn0", start)?;
            let step: f64 = parse_num("ebn0", step)?;
            let stop: f64 = parse_num("ebn0", stop)?;
            if !(start.is_finite() && step.is_finite() && stop.is_finite()) || step <= 0.0 {
                return Err(bad("ebn0", v, "range needs finite bounds and a positive step"));
            }
            if stop < start {
                return Err(ConfigError::EmptyGrid(format!("{v} (stop below start)")));
            }
            // Tolerate rounding in (stop - start) / step so the endpoint stays in.
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect()
        }
        [_] => v
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_num("ebn0", s))
            .collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(bad("ebn0", v, "expected start:step:stop or a comma list")),
    };
    if grid.is_empty() {
        return Err(ConfigError::EmptyGrid(format!("{v:?}")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ranges_include_both_ends() {
        assert_eq!(parse_grid("0:2:20").unwrap().len(), 11);
        assert_eq!(parse_grid("0:0.1:1").unwrap().len(), 11);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert!(matches!(parse_grid(""), Err(ConfigError::EmptyGrid(_))));
        assert!(matches!(parse_grid("5:1:0"), Err(ConfigError::EmptyGrid(_))));
        assert!(parse_grid("0:0:4").is_err());
    }

    #[test]
    fn file_syntax() {
        let text = "# sweep\nL = 2,4 # users\n\n--beta=100\n";
        let m = parse_config_text(text, Path::new("x.conf")).unwrap();
        assert_eq!(m["L"], "2,4");
        assert_eq!(m["beta"], "100");
        assert!(parse_config_text("nonsense\n", Path::new("x")).is_err());
        assert!(parse_config_text("colour = red\n", Path::new("x")).is_err());
    }

    #[test]
    fn counts_accept_exponent_literals() {
        assert_eq!(parse_count("max-trials", "1e8").unwrap(), 100_000_000);
        assert!(parse_count("max-trials", "1.5").is_err());
        assert!(parse_count("max-trials", "-3").is_err());
    }
}
