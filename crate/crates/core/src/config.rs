//! Run configuration: defaults, flat `key = value` files, overrides, validation.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{EvolutionParams, PhysiologyParams, WorldParams};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub world: WorldParams,
    pub physiology: PhysiologyParams,
    pub evolution: EvolutionParams,
    pub max_iterations: u64,
    /// Iterations between time-series rows.
    pub timeseries_interval: u64,
    /// Iterations between weight-statistics samples.
    pub weights_interval: u64,
    /// Iterations between intermediate snapshots; 0 disables them.
    pub snapshot_every: u64,
    pub seed: u64,
    pub output_directory: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            world: WorldParams::default(),
            physiology: PhysiologyParams::default(),
            evolution: EvolutionParams::default(),
            max_iterations: 50_000,
            timeseries_interval: 1,
            weights_interval: 100,
            snapshot_every: 0,
            seed: 0,
            output_directory: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Read { .. } => &[],
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub const KEYS: &[&str] = &[
    "n_cells",
    "grass_probability",
    "motivation",
    "cost_rest",
    "cost_eat",
    "cost_move",
    "cost_jump",
    "cost_mate",
    "child_transfer_total",
    "r0",
    "r1",
    "eat_gain",
    "grass_lifetime",
    "jump_distance",
    "mutation_intensity",
    "initial_population",
    "max_iterations",
    "timeseries_interval",
    "weights_interval",
    "snapshot_every",
    "seed",
    "output_directory",
];

/// Parses a real number, also accepting `a/b` fractions such as `1/200`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("not a number: {s:?}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("not a number: {s:?}"))?;
            num / den
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

fn parse_uint<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("not a non-negative integer: {:?}", s.trim()))
}

impl RunConfig {
    /// Applies one `key = value` setting. Range checks happen in `validate`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Violation> {
        let bad = |message: String| Violation {
            field: key.to_string(),
            message,
        };
        let real = || parse_real(value).map_err(bad);
        let ph = &mut self.physiology;
        match key {
            "n_cells" => self.world.n_cells = parse_uint(value).map_err(bad)?,
            "grass_probability" => self.world.grass_probability = real()?,
            "motivation" => self.world.motivation_mode = value.parse().map_err(bad)?,
            "cost_rest" => ph.cost_rest = real()?,
            "cost_eat" => ph.cost_eat = real()?,
            "cost_move" => ph.cost_move = real()?,
            "cost_jump" => ph.cost_jump = real()?,
            "cost_mate" => ph.cost_mate = real()?,
            "child_transfer_total" => ph.child_transfer_total = real()?,
            "r0" => ph.r0 = real()?,
            "r1" => ph.r1 = real()?,
            "eat_gain" => ph.eat_gain = real()?,
            "grass_lifetime" => ph.grass_lifetime = parse_uint(value).map_err(bad)?,
            "jump_distance" => ph.jump_distance = parse_uint(value).map_err(bad)?,
            "mutation_intensity" => self.evolution.mutation_intensity = real()?,
            "initial_population" => {
                self.evolution.initial_population = parse_uint(value).map_err(bad)?
            }
            "max_iterations" => self.max_iterations = parse_uint(value).map_err(bad)?,
            "timeseries_interval" => self.timeseries_interval = parse_uint(value).map_err(bad)?,
            "weights_interval" => self.weights_interval = parse_uint(value).map_err(bad)?,
            "snapshot_every" => self.snapshot_every = parse_uint(value).map_err(bad)?,
            "seed" => self.seed = parse_uint(value).map_err(bad)?,
            "output_directory" => self.output_directory = PathBuf::from(value.trim()),
            _ => return Err(bad("unknown key".to_string())),
        }
        Ok(())
    }

    /// Every setting as `(key, value)`, reals printed so they parse back exactly.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let ph = &self.physiology;
        let r = |x: f64| format!("{x:?}");
        vec![
            ("n_cells", self.world.n_cells.to_string()),
            ("grass_probability", r(self.world.grass_probability)),
            ("motivation", self.world.motivation_mode.to_string()),
            ("cost_rest", r(ph.cost_rest)),
            ("cost_eat", r(ph.cost_eat)),
            ("cost_move", r(ph.cost_move)),
            ("cost_jump", r(ph.cost_jump)),
            ("cost_mate", r(ph.cost_mate)),
            ("child_transfer_total", r(ph.child_transfer_total)),
            ("r0", r(ph.r0)),
            ("r1", r(ph.r1)),
            ("eat_gain", r(ph.eat_gain)),
            ("grass_lifetime", ph.grass_lifetime.to_string()),
            ("jump_distance", ph.jump_distance.to_string()),
            ("mutation_intensity", r(self.evolution.mutation_intensity)),
            (
                "initial_population",
                self.evolution.initial_population.to_string(),
            ),
            ("max_iterations", self.max_iterations.to_string()),
            ("timeseries_interval", self.timeseries_interval.to_string()),
            ("weights_interval", self.weights_interval.to_string()),
            ("snapshot_every", self.snapshot_every.to_string()),
            ("seed", self.seed.to_string()),
            (
                "output_directory",
                self.output_directory.display().to_string(),
            ),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &str, message: &str| {
            if !ok {
                out.push(Violation {
                    field: field.to_string(),
                    message: message.to_string(),
                });
            }
        };
        let ph = &self.physiology;
        check(self.world.n_cells >= 3, "n_cells", "must be at least 3");
        let pg = self.world.grass_probability;
        check(
            (0.0..=1.0).contains(&pg),
            "grass_probability",
            "must lie in [0, 1]",
        );
        for (field, cost) in [
            ("cost_rest", ph.cost_rest),
            ("cost_eat", ph.cost_eat),
            ("cost_move", ph.cost_move),
            ("cost_jump", ph.cost_jump),
            ("cost_mate", ph.cost_mate),
        ] {
            check(cost > 0.0 && cost.is_finite(), field, "must be positive");
        }
        check(
            ph.child_transfer_total >= 0.0 && ph.child_transfer_total.is_finite(),
            "child_transfer_total",
            "must be non-negative",
        );
        check(ph.r0 > 0.0 && ph.r0.is_finite(), "r0", "must be positive");
        check(ph.r1 > 0.0, "r1", "must be positive");
        check(ph.r1 <= ph.r0, "r1", "must not exceed r0");
        check(
            ph.eat_gain > 0.0 && ph.eat_gain.is_finite(),
            "eat_gain",
            "must be positive",
        );
        check(
            ph.grass_lifetime >= 1,
            "grass_lifetime",
            "must be at least 1",
        );
        check(ph.jump_distance >= 1, "jump_distance", "must be at least 1");
        let pm = self.evolution.mutation_intensity;
        check(
            pm >= 0.0 && pm.is_finite(),
            "mutation_intensity",
            "must be non-negative",
        );
        let pop = self.evolution.initial_population;
        check(pop >= 2, "initial_population", "must be at least 2");
        check(
            pop <= self.world.n_cells,
            "initial_population",
            "cannot exceed n_cells",
        );
        check(
            self.timeseries_interval >= 1,
            "timeseries_interval",
            "must be at least 1",
        );
        check(
            self.weights_interval >= 1,
            "weights_interval",
            "must be at least 1",
        );
        out
    }
}

/// Applies `key = value` lines on top of `base`, collecting every problem.
///
/// Blank lines and `#` comments are ignored. Does not range-check.
pub fn apply_text(base: &mut RunConfig, text: &str) -> Vec<Violation> {
    let mut errors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(Violation {
                field: format!("line {}", lineno + 1),
                message: format!("expected key = value, got {line:?}"),
            });
            continue;
        };
        if let Err(v) = base.set(key.trim(), value) {
            errors.push(v);
        }
    }
    errors
}

/// Defaults, then the optional file, then `overrides`; fully validated.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &[(&str, String)],
) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(
    text: &str,
    overrides: &[(&str, String)],
) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    let mut errors = apply_text(&mut config, text);
    for (key, value) in overrides {
        if let Err(v) = config.set(key, value) {
            errors.push(v);
        }
    }
    errors.extend(config.violations());
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}
