//! Run configuration: a TOML file with `[model]` and `[run]` tables,
//! overridden key by key from the command line.
//!
//! ```toml
//! kind = "fidelity"
//!
//! [model]
//! omega_m = 0.1
//! n_max = 2
//!
//! [run]
//! n_traj = 500
//! eta = [0.2, 0.5, 1.0]
//! t_wait = [0.5, 0.7, 1.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::trajectory::InitialState;

/// Environment variable consulted for the worker count when no flag is given.
pub const WORKERS_ENV: &str = "CAVITY_JUMPS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Analytic,
    Validate,
    Simulate,
    Telegraph,
    Fidelity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Analytic,
        ExperimentKind::Validate,
        ExperimentKind::Simulate,
        ExperimentKind::Telegraph,
        ExperimentKind::Fidelity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Analytic => "analytic",
            ExperimentKind::Validate => "validate",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Telegraph => "telegraph",
            ExperimentKind::Fidelity => "fidelity",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("kind", format!("unknown experiment kind {s:?}")))
    }
}

fn default_eta() -> Vec<f64> {
    vec![1.0]
}

fn default_t_wait() -> Vec<f64> {
    vec![0.7]
}

/// Everything except the physics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub n_traj: usize,
    /// Trajectory length in units of `T_dark`.
    pub horizon_tdark: f64,
    pub seed: u64,
    /// Detector efficiencies.
    pub eta: Vec<f64>,
    /// No-click windows in units of `T_dark`.
    pub t_wait: Vec<f64>,
    pub out: PathBuf,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    /// Initial state for `simulate`.
    pub initial: InitialState,
    /// Telegraph bin width in units of `T_dark`.
    pub bin_width_tdark: f64,
    /// Dark-period gap threshold in `1/g`; `10·T_cav/η` when absent.
    pub gap_threshold: Option<f64>,
    /// Let the detector see atomic fluorescence as well as the cavity output.
    pub detect_atomic: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            n_traj: 200,
            horizon_tdark: 20.0,
            seed: 1,
            eta: default_eta(),
            t_wait: default_t_wait(),
            out: PathBuf::from("out"),
            workers: 0,
            initial: InitialState::Ground,
            bin_width_tdark: 0.38,
            gap_threshold: None,
            detect_atomic: false,
        }
    }
}

/// File contents before the experiment kind is known.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub run: RunSettings,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub run: RunSettings,
}

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kind: Option<ExperimentKind>,
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
    pub omega_l: Option<f64>,
    pub omega_m: Option<f64>,
    pub delta: Option<f64>,
    pub n_max: Option<usize>,
    pub n_traj: Option<usize>,
    pub horizon_tdark: Option<f64>,
    pub seed: Option<u64>,
    pub eta: Option<Vec<f64>>,
    pub t_wait: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn toml_error(e: toml::de::Error) -> Error {
    // serde reports the offending key inside the message, e.g.
    // "unknown field `foo`, expected one of ...".
    let key = e
        .message()
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<file>".to_string());
    Error::Config {
        key,
        message: e.message().trim().to_string(),
    }
}

pub fn parse_config_file(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(toml_error)
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_file(&text)
}

/// Applies `overrides` on top of `file`, checks ranges and requires a kind.
pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<RunConfig> {
    let kind = overrides
        .kind
        .or(file.kind)
        .ok_or_else(|| Error::config("kind", "no experiment kind given"))?;
    let mut model = file.model;
    let mut run = file.run;
    macro_rules! take {
        ($target:expr, $value:expr) => {
            if let Some(v) = $value.clone() {
                $target = v;
            }
        };
    }
    take!(model.g, overrides.g);
    take!(model.kappa, overrides.kappa);
    take!(model.gamma0, overrides.gamma0);
    take!(model.gamma1, overrides.gamma1);
    take!(model.omega_l, overrides.omega_l);
    take!(model.omega_m, overrides.omega_m);
    take!(model.delta, overrides.delta);
    take!(model.n_max, overrides.n_max);
    take!(run.n_traj, overrides.n_traj);
    take!(run.horizon_tdark, overrides.horizon_tdark);
    take!(run.seed, overrides.seed);
    take!(run.eta, overrides.eta);
    take!(run.t_wait, overrides.t_wait);
    take!(run.out, overrides.out);
    take!(run.workers, overrides.workers);

    let config = RunConfig { kind, model, run };
    config.check()?;
    Ok(config)
}

/// Parses a config text and resolves it in one step.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<RunConfig> {
    resolve(parse_config_file(text)?, overrides)
}

impl RunConfig {
    pub fn new(kind: ExperimentKind) -> RunConfig {
        RunConfig {
            kind,
            model: ModelParams::default(),
            run: RunSettings::default(),
        }
    }

    pub fn check(&self) -> Result<()> {
        self.model.validate().map_err(|e| match e {
            Error::InvalidParameter { name, message } => Error::config(format!("model.{name}"), message),
            other => other,
        })?;
        let run = &self.run;
        if run.n_traj == 0 {
            return Err(Error::config("n_traj", "must be at least 1"));
        }
        if !(run.horizon_tdark > 0.0 && run.horizon_tdark.is_finite()) {
            return Err(Error::config(
                "horizon_tdark",
                format!("must be positive, got {}", run.horizon_tdark),
            ));
        }
        if run.eta.is_empty() {
            return Err(Error::config("eta", "needs at least one value"));
        }
        for &eta in &run.eta {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::config("eta", format!("must lie in (0, 1], got {eta}")));
            }
        }
        if run.t_wait.is_empty() {
            return Err(Error::config("t_wait", "needs at least one value"));
        }
        for &t in &run.t_wait {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::config(
                    "t_wait",
                    format!("must be finite and non-negative, got {t}"),
                ));
            }
        }
        if !(run.bin_width_tdark > 0.0 && run.bin_width_tdark.is_finite()) {
            return Err(Error::config(
                "bin_width_tdark",
                format!("must be positive, got {}", run.bin_width_tdark),
            ));
        }
        if let Some(th) = run.gap_threshold {
            if !(th > 0.0 && th.is_finite()) {
                return Err(Error::config("gap_threshold", format!("must be positive, got {th}")));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<serialize>", e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text).map_err(toml_error)?;
        config.check()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let over = Overrides {
            kind: Some(ExperimentKind::Analytic),
            ..Default::default()
        };
        let c = parse_config("", &over).unwrap();
        assert_eq!(c.model, ModelParams::default());
        assert_eq!(c.model.delta, 50.0);
        assert_eq!(c.model.gamma(), 0.1);
        assert_eq!(c.run, RunSettings::default());
    }

    #[test]
    fn missing_kind_names_key() {
        match parse_config("[run]\nseed = 3\n", &Overrides::default()) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "kind"),
            other => panic!("{other:?}"),
        }
        let c = parse_config("kind = \"simulate\"", &Overrides::default()).unwrap();
        assert_eq!(c.kind, ExperimentKind::Simulate);
    }

    #[test]
    fn unknown_key_rejected() {
        match parse_config("kind = \"analytic\"\n[model]\nomega = 1.0\n", &Overrides::default()) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "omega"),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("kind = \"analytic\"\nextra = 1\n", &Overrides::default()).is_err());
        assert!(parse_config("kind = \"plot\"\n", &Overrides::default()).is_err());
    }

    #[test]
    fn flags_override_file() {
        let text = "kind = \"analytic\"\n[model]\nomega_m = 0.2\n[run]\nseed = 9\n";
        let over = Overrides {
            omega_m: Some(0.1),
            ..Default::default()
        };
        let c = parse_config(text, &over).unwrap();
        assert_eq!(c.model.omega_m, 0.1);
        assert_eq!(c.run.seed, 9);
    }

    #[test]
    fn out_of_range_values_name_key() {
        let over = Overrides {
            kind: Some(ExperimentKind::Fidelity),
            eta: Some(vec![0.5, 1.5]),
            ..Default::default()
        };
        match parse_config("", &over) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "eta"),
            other => panic!("{other:?}"),
        }
        match parse_config("kind = \"analytic\"\n[model]\nkappa = -1.0\n", &Overrides::default()) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "model.kappa"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::new(ExperimentKind::Telegraph);
        c.model.omega_m = 0.025;
        c.run.eta = vec![0.2, 0.5];
        c.run.gap_threshold = Some(1234.5);
        c.run.initial = InitialState::Dark;
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }
}
