//! Domain geometry, model parameters, loads, initial conditions and the
//! TOML configuration document that ties them together.
//!
//! The document is flat apart from three sections:
//!
//! ```toml
//! L = 2.0
//! Nx = 256
//! T = 4.0
//! load.kind = "constant"
//! load.g0 = 0.5
//! ic.kind = "heaviside"
//! ic.x0 = 1.8
//! ic.amplitude = "b"
//! output.snapshots = 50
//! ```
//!
//! Every key is optional; missing physical keys take the reference values
//! (`T = 4, L = 2, H = 2, Nx = 256, Ny = 128, b = 0.06, eps = 0.04,
//! beta = 10, mu = 10, alpha = 0.01`).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};

/// Rectangle `(-L, L) x (0, H)` divided into `nx x ny` cells; unknowns live
/// on the `(nx + 1) x (ny + 1)` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    height: f64,
    nx: usize,
    ny: usize,
}

impl GridSpec {
    pub const MIN_CELLS: usize = 4;

    pub fn new(half_width: f64, height: f64, nx: usize, ny: usize) -> Result<Self, ConfigError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(ConfigError::invalid("L", "must be a positive number"));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(ConfigError::invalid("H", "must be a positive number"));
        }
        if nx < Self::MIN_CELLS {
            return Err(ConfigError::invalid("Nx", format!("must be at least {}", Self::MIN_CELLS)));
        }
        if ny < Self::MIN_CELLS {
            return Err(ConfigError::invalid("Ny", format!("must be at least {}", Self::MIN_CELLS)));
        }
        Ok(Self {
            half_width,
            height,
            nx,
            ny,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.height / self.ny as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Same rectangle with a different resolution.
    pub fn with_cells(&self, nx: usize, ny: usize) -> Result<Self, ConfigError> {
        Self::new(self.half_width, self.height, nx, ny)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 2.0,
            height: 2.0,
            nx: 256,
            ny: 128,
        }
    }
}

/// Physical and phase-field constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Mobility coefficient.
    pub alpha: f64,
    /// Interface (gradient) coefficient.
    pub eps: f64,
    /// Height of the double-well potential in phase variables.
    pub beta: f64,
    /// Shear modulus.
    pub mu: f64,
    /// Burgers vector magnitude.
    pub b: f64,
    /// Final time.
    pub final_time: f64,
}

impl ModelParams {
    /// Coupling coefficient `mu b^2 / 2` of the slip-plane traction.
    pub fn gamma(&self) -> f64 {
        self.mu * self.b * self.b / 2.0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("alpha", self.alpha),
            ("eps", self.eps),
            ("beta", self.beta),
            ("mu", self.mu),
            ("b", self.b),
            ("T", self.final_time),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(key, "must be a positive number"));
            }
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            eps: 0.04,
            beta: 10.0,
            mu: 10.0,
            b: 0.06,
            final_time: 4.0,
        }
    }
}

/// Spatially uniform traction `g(t)` on the top boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSpec {
    Constant { g0: f64 },
    Cosine { amplitude: f64, omega: f64 },
    /// Piecewise linear through `(times[k], values[k])`.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl LoadSpec {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ConfigError> {
        if times.len() != values.len() {
            return Err(ConfigError::invalid(
                "load.values",
                format!("has {} entries but load.times has {}", values.len(), times.len()),
            ));
        }
        if times.len() < 2 {
            return Err(ConfigError::invalid("load.times", "needs at least two samples"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(ConfigError::invalid("load.times", "must be finite"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid("load.values", "must be finite"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::invalid("load.times", "must be strictly increasing"));
        }
        Ok(LoadSpec::Tabulated { times, values })
    }

    /// Traction at time `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            LoadSpec::Constant { g0 } => Ok(*g0),
            LoadSpec::Cosine { amplitude, omega } => Ok(amplitude * (omega * t).cos()),
            LoadSpec::Tabulated { times, values } => {
                let (start, end) = (times[0], times[times.len() - 1]);
                if !(t >= start && t <= end) {
                    return Err(Error::LoadOutOfRange { t, start, end });
                }
                // first sample strictly greater than t, clamped so t == end uses the last segment
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                let w = (t - t0) / (t1 - t0);
                Ok(values[k - 1] + w * (values[k] - values[k - 1]))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, LoadSpec::Constant { .. })
    }

    fn validate(&self, final_time: f64) -> Result<(), ConfigError> {
        match self {
            LoadSpec::Constant { g0 } if !g0.is_finite() => {
                Err(ConfigError::invalid("load.g0", "must be finite"))
            }
            LoadSpec::Cosine { amplitude, .. } if !amplitude.is_finite() => {
                Err(ConfigError::invalid("load.amplitude", "must be finite"))
            }
            LoadSpec::Cosine { omega, .. } if !omega.is_finite() => {
                Err(ConfigError::invalid("load.omega", "must be finite"))
            }
            LoadSpec::Tabulated { times, .. }
                if times[0] > 0.0 || times[times.len() - 1] < final_time =>
            {
                Err(ConfigError::invalid(
                    "load.times",
                    format!("must cover [0, T] = [0, {final_time}]"),
                ))
            }
            _ => Ok(()),
        }
    }
}

impl Default for LoadSpec {
    fn default() -> Self {
        LoadSpec::Constant { g0: 0.0 }
    }
}

/// Height of the initial step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAmplitude {
    /// Full Burgers vector `b`.
    Full,
    /// `b / 2`, the second well of the potential.
    Half,
}

impl StepAmplitude {
    pub fn value(self, b: f64) -> f64 {
        match self {
            StepAmplitude::Full => b,
            StepAmplitude::Half => b / 2.0,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            StepAmplitude::Full => "b",
            StepAmplitude::Half => "b_half",
        }
    }
}

/// Initial slip profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `amplitude * H(x - x0)` with `H(0) = 1`.
    Heaviside { x0: f64, amplitude: StepAmplitude },
    /// Spatially constant profile.
    Uniform { value: f64 },
}

impl InitialCondition {
    pub fn value_at(&self, x: f64, b: f64) -> f64 {
        match *self {
            InitialCondition::Heaviside { x0, amplitude } => {
                if x >= x0 {
                    amplitude.value(b)
                } else {
                    0.0
                }
            }
            InitialCondition::Uniform { value } => value,
        }
    }

    fn validate(&self, grid: &GridSpec) -> Result<(), ConfigError> {
        match *self {
            InitialCondition::Heaviside { x0, .. } => {
                let l = grid.half_width();
                if !(x0 > -l && x0 < l) {
                    return Err(ConfigError::invalid("ic.x0", format!("must lie in (-{l}, {l})")));
                }
                Ok(())
            }
            InitialCondition::Uniform { value } if !value.is_finite() => {
                Err(ConfigError::invalid("ic.value", "must be finite"))
            }
            InitialCondition::Uniform { .. } => Ok(()),
        }
    }
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Heaviside {
            x0: 0.0,
            amplitude: StepAmplitude::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Number of uniformly spaced output times, including `0` and `T`.
    pub snapshots: usize,
    pub dir: Option<PathBuf>,
    /// Also dump the full 2D displacement at every snapshot.
    pub full_field: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            snapshots: 50,
            dir: None,
            full_field: false,
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub grid: GridSpec,
    pub params: ModelParams,
    pub load: LoadSpec,
    pub ic: InitialCondition,
    pub output: OutputSpec,
}

impl Config {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        RawConfig::parse(text)?.resolve()
    }

    /// Renders every key explicitly; `Config::parse(&cfg.render())` returns `cfg`.
    pub fn render(&self) -> String {
        let raw = RawConfig::from(self);
        toml::to_string(&raw).expect("configuration always serializes")
    }

    /// Output times `k T / (n - 1)` for `k = 0..n`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        uniform_times(self.params.final_time, self.output.snapshots)
    }
}

pub fn uniform_times(final_time: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|k| {
            if k + 1 == count {
                final_time
            } else {
                final_time * k as f64 / last
            }
        })
        .collect()
}

/// Configuration document as written, before defaults and validation.
///
/// Scenario presets operate on this layer so they can tell explicit keys
/// apart from defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(rename = "Nx", skip_serializing_if = "Option::is_none")]
    pub nx: Option<i64>,
    #[serde(rename = "Ny", skip_serializing_if = "Option::is_none")]
    pub ny: Option<i64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default)]
    pub load: RawLoad,
    #[serde(default)]
    pub ic: RawInitialCondition,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLoad {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitialCondition {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_field: Option<bool>,
}

const TOP_KEYS: &[&str] = &[
    "L", "H", "Nx", "Ny", "T", "alpha", "eps", "beta", "mu", "b", "load", "ic", "output",
];
const LOAD_KEYS: &[&str] = &["kind", "g0", "amplitude", "omega", "times", "values"];
const IC_KEYS: &[&str] = &["kind", "x0", "amplitude", "value"];
const OUTPUT_KEYS: &[&str] = &["snapshots", "dir", "full_field"];

fn check_keys(table: &toml::Table) -> Result<(), ConfigError> {
    for (key, value) in table {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        let allowed = match key.as_str() {
            "load" => LOAD_KEYS,
            "ic" => IC_KEYS,
            "output" => OUTPUT_KEYS,
            _ => continue,
        };
        let section = value.as_table().ok_or_else(|| {
            ConfigError::invalid(key, "must be a section of keys, e.g. `load.kind = ...`")
        })?;
        if let Some(sub) = section.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(format!("{key}.{sub}")));
        }
    }
    Ok(())
}

fn positive_count(key: &str, value: Option<i64>, default: usize) -> Result<usize, ConfigError> {
    match value {
        None => Ok(default),
        Some(v) if v > 0 => Ok(v as usize),
        Some(v) => Err(ConfigError::invalid(key, format!("must be a positive integer, got {v}"))),
    }
}

fn reject_unused(key: &str, present: bool, kind: &str) -> Result<(), ConfigError> {
    if present {
        Err(ConfigError::invalid(key, format!("is not used by kind \"{kind}\"")))
    } else {
        Ok(())
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError::Malformed(e.message().to_string()))?;
        check_keys(&table)?;
        RawConfig::deserialize(table).map_err(|e| ConfigError::Malformed(e.message().to_string()))
    }

    pub fn resolve(&self) -> Result<Config, ConfigError> {
        let defaults = GridSpec::default();
        let nx = positive_count("Nx", self.nx, defaults.nx())?;
        let ny = positive_count("Ny", self.ny, defaults.ny())?;
        let grid = GridSpec::new(
            self.half_width.unwrap_or(defaults.half_width()),
            self.height.unwrap_or(defaults.height()),
            nx,
            ny,
        )?;

        let d = ModelParams::default();
        let params = ModelParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            eps: self.eps.unwrap_or(d.eps),
            beta: self.beta.unwrap_or(d.beta),
            mu: self.mu.unwrap_or(d.mu),
            b: self.b.unwrap_or(d.b),
            final_time: self.final_time.unwrap_or(d.final_time),
        };
        params.validate()?;

        let load = self.resolve_load()?;
        load.validate(params.final_time)?;
        let ic = self.resolve_ic()?;
        ic.validate(&grid)?;

        let snapshots = positive_count("output.snapshots", self.output.snapshots, 50)?;
        if snapshots < 2 {
            return Err(ConfigError::invalid("output.snapshots", "must be at least 2"));
        }
        let output = OutputSpec {
            snapshots,
            dir: self.output.dir.as_ref().map(PathBuf::from),
            full_field: self.output.full_field.unwrap_or(false),
        };

        Ok(Config {
            grid,
            params,
            load,
            ic,
            output,
        })
    }

    fn resolve_load(&self) -> Result<LoadSpec, ConfigError> {
        let l = &self.load;
        let kind = l.kind.as_deref().unwrap_or("constant");
        match kind {
            "constant" => {
                reject_unused("load.amplitude", l.amplitude.is_some(), kind)?;
                reject_unused("load.omega", l.omega.is_some(), kind)?;
                reject_unused("load.times", l.times.is_some(), kind)?;
                reject_unused("load.values", l.values.is_some(), kind)?;
                Ok(LoadSpec::Constant {
                    g0: l.g0.unwrap_or(0.0),
                })
            }
            "cosine" => {
                reject_unused("load.g0", l.g0.is_some(), kind)?;
                reject_unused("load.times", l.times.is_some(), kind)?;
                reject_unused("load.values", l.values.is_some(), kind)?;
                Ok(LoadSpec::Cosine {
                    amplitude: l.amplitude.unwrap_or(1.0),
                    omega: l.omega.unwrap_or(0.5),
                })
            }
            "table" => {
                reject_unused("load.g0", l.g0.is_some(), kind)?;
                reject_unused("load.amplitude", l.amplitude.is_some(), kind)?;
                reject_unused("load.omega", l.omega.is_some(), kind)?;
                let times = l.times.clone().ok_or(ConfigError::Missing("load.times".into()))?;
                let values = l.values.clone().ok_or(ConfigError::Missing("load.values".into()))?;
                LoadSpec::tabulated(times, values)
            }
            other => Err(ConfigError::invalid(
                "load.kind",
                format!("expected \"constant\", \"cosine\" or \"table\", got \"{other}\""),
            )),
        }
    }

    fn resolve_ic(&self) -> Result<InitialCondition, ConfigError> {
        let ic = &self.ic;
        let kind = ic.kind.as_deref().unwrap_or("heaviside");
        match kind {
            "heaviside" => {
                reject_unused("ic.value", ic.value.is_some(), kind)?;
                let amplitude = match ic.amplitude.as_deref().unwrap_or("b") {
                    "b" => StepAmplitude::Full,
                    "b_half" => StepAmplitude::Half,
                    other => {
                        return Err(ConfigError::invalid(
                            "ic.amplitude",
                            format!("expected \"b\" or \"b_half\", got \"{other}\""),
                        ))
                    }
                };
                Ok(InitialCondition::Heaviside {
                    x0: ic.x0.unwrap_or(0.0),
                    amplitude,
                })
            }
            "uniform" => {
                reject_unused("ic.x0", ic.x0.is_some(), kind)?;
                reject_unused("ic.amplitude", ic.amplitude.is_some(), kind)?;
                Ok(InitialCondition::Uniform {
                    value: ic.value.unwrap_or(0.0),
                })
            }
            other => Err(ConfigError::invalid(
                "ic.kind",
                format!("expected \"heaviside\" or \"uniform\", got \"{other}\""),
            )),
        }
    }
}

impl From<&Config> for RawConfig {
    fn from(cfg: &Config) -> Self {
        let load = match &cfg.load {
            LoadSpec::Constant { g0 } => RawLoad {
                kind: Some("constant".into()),
                g0: Some(*g0),
                ..Default::default()
            },
            LoadSpec::Cosine { amplitude, omega } => RawLoad {
                kind: Some("cosine".into()),
                amplitude: Some(*amplitude),
                omega: Some(*omega),
                ..Default::default()
            },
            LoadSpec::Tabulated { times, values } => RawLoad {
                kind: Some("table".into()),
                times: Some(times.clone()),
                values: Some(values.clone()),
                ..Default::default()
            },
        };
        let ic = match cfg.ic {
            InitialCondition::Heaviside { x0, amplitude } => RawInitialCondition {
                kind: Some("heaviside".into()),
                x0: Some(x0),
                amplitude: Some(amplitude.as_str().into()),
                value: None,
            },
            InitialCondition::Uniform { value } => RawInitialCondition {
                kind: Some("uniform".into()),
                value: Some(value),
                ..Default::default()
            },
        };
        RawConfig {
            half_width: Some(cfg.grid.half_width()),
            height: Some(cfg.grid.height()),
            nx: Some(cfg.grid.nx() as i64),
            ny: Some(cfg.grid.ny() as i64),
            final_time: Some(cfg.params.final_time),
            alpha: Some(cfg.params.alpha),
            eps: Some(cfg.params.eps),
            beta: Some(cfg.params.beta),
            mu: Some(cfg.params.mu),
            b: Some(cfg.params.b),
            load,
            ic,
            output: RawOutput {
                snapshots: Some(cfg.output.snapshots as i64),
                dir: cfg.output.dir.as_ref().map(|p| p.to_string_lossy().into_owned()),
                full_field: Some(cfg.output.full_field),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_document_gives_reference_values() {
        let cfg = Config::parse("").unwrap();
        let g = cfg.grid;
        assert_eq!((g.half_width(), g.height(), g.nx(), g.ny()), (2.0, 2.0, 256, 128));
        let p = cfg.params;
        assert_eq!(p.final_time, 4.0);
        assert_eq!(p.b, 0.06);
        assert_eq!(p.eps, 0.04);
        assert_eq!(p.beta, 10.0);
        assert_eq!(p.mu, 10.0);
        assert_eq!(p.alpha, 0.01);
        assert_eq!(cfg.output.snapshots, 50);
    }

    #[test]
    fn zero_cells_is_rejected_by_name() {
        let err = Config::parse("Nx = 0").unwrap_err();
        assert_eq!(err.key(), Some("Nx"));
        let err = Config::parse("Ny = 3").unwrap_err();
        assert_eq!(err.key(), Some("Ny"));
    }

    #[test]
    fn overriding_final_time_only() {
        let cfg = Config::parse(&format!("T = {}", 8.0 * PI)).unwrap();
        assert!((cfg.params.final_time - 25.1327).abs() < 1e-4);
        assert_eq!(
            Config {
                params: ModelParams {
                    final_time: 8.0 * PI,
                    ..Default::default()
                },
                ..Default::default()
            },
            cfg
        );
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert_eq!(
            Config::parse("Nz = 3").unwrap_err(),
            ConfigError::UnknownKey("Nz".into())
        );
        assert_eq!(
            Config::parse("load.freq = 3.0").unwrap_err(),
            ConfigError::UnknownKey("load.freq".into())
        );
        assert!(matches!(Config::parse("L = ").unwrap_err(), ConfigError::Malformed(_)));
        assert!(matches!(Config::parse("L = \"two\"").unwrap_err(), ConfigError::Malformed(_)));
        assert_eq!(Config::parse("load = 3").unwrap_err().key(), Some("load"));
    }

    #[test]
    fn invariant_violations_name_the_key() {
        for (doc, key) in [
            ("L = -1.0", "L"),
            ("H = 0.0", "H"),
            ("alpha = 0.0", "alpha"),
            ("b = -0.06", "b"),
            ("T = 0.0", "T"),
            ("ic.x0 = 2.0", "ic.x0"),
            ("ic.amplitude = \"2b\"", "ic.amplitude"),
            ("load.kind = \"square\"", "load.kind"),
            ("load.kind = \"constant\"\nload.omega = 1.0", "load.omega"),
            ("load.kind = \"table\"\nload.times = [0.0, 4.0]", "load.values"),
            ("load.kind = \"table\"\nload.times = [0.0, 0.0, 4.0]\nload.values = [1.0, 1.0, 1.0]", "load.times"),
            ("load.kind = \"table\"\nload.times = [0.0, 1.0]\nload.values = [1.0, 1.0]", "load.times"),
            ("output.snapshots = 1", "output.snapshots"),
        ] {
            let err = Config::parse(doc).unwrap_err();
            assert_eq!(err.key(), Some(key), "{doc}: {err}");
        }
    }

    #[test]
    fn gamma_is_recomputed() {
        let p = ModelParams::default();
        let expected = 0.018_f64;
        assert!((p.gamma() - expected).abs() <= expected * f64::EPSILON);
    }

    #[test]
    fn load_evaluation() {
        assert_eq!(LoadSpec::Constant { g0: 0.5 }.eval(3.7).unwrap(), 0.5);
        let cosine = LoadSpec::Cosine {
            amplitude: 1.0,
            omega: 0.5,
        };
        assert_eq!(cosine.eval(0.0).unwrap(), 1.0);
        assert!((cosine.eval(2.0 * PI).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_load_interpolates_and_rejects_outside() {
        let load = LoadSpec::tabulated(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(load.eval(0.0).unwrap(), 0.0);
        assert_eq!(load.eval(0.5).unwrap(), 1.0);
        assert_eq!(load.eval(1.0).unwrap(), 2.0);
        assert_eq!(load.eval(2.0).unwrap(), 1.5);
        assert_eq!(load.eval(3.0).unwrap(), 1.0);
        assert!(matches!(load.eval(3.5), Err(Error::LoadOutOfRange { .. })));
        assert!(matches!(load.eval(-0.1), Err(Error::LoadOutOfRange { .. })));
    }

    #[test]
    fn snapshot_times_hit_both_ends() {
        let cfg = Config::default();
        let ts = cfg.snapshot_times();
        assert_eq!(ts.len(), 50);
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[49], 4.0);
    }

    fn arb_config() -> impl Strategy<Value = Config> {
        let grid = (0.1f64..10.0, 0.1f64..10.0, 4usize..600, 4usize..600)
            .prop_map(|(l, h, nx, ny)| GridSpec::new(l, h, nx, ny).unwrap());
        let params = (1e-4f64..1.0, 1e-3f64..1.0, 0.1f64..100.0, 0.1f64..100.0, 1e-3f64..1.0, 0.1f64..100.0)
            .prop_map(|(alpha, eps, beta, mu, b, final_time)| ModelParams {
                alpha,
                eps,
                beta,
                mu,
                b,
                final_time,
            });
        let load = prop_oneof![
            (-5.0f64..5.0).prop_map(|g0| LoadSpec::Constant { g0 }),
            (-5.0f64..5.0, 0.0f64..10.0).prop_map(|(amplitude, omega)| LoadSpec::Cosine { amplitude, omega }),
            proptest::collection::vec(-1.0f64..1.0, 2..6).prop_map(|values| {
                let n = values.len();
                let times = (0..n).map(|k| 1000.0 * k as f64 / (n - 1) as f64).collect();
                LoadSpec::tabulated(times, values).unwrap()
            }),
        ];
        let ic = prop_oneof![
            (-0.99f64..0.99, any::<bool>()).prop_map(|(s, half)| InitialCondition::Heaviside {
                x0: s * 0.1,
                amplitude: if half { StepAmplitude::Half } else { StepAmplitude::Full },
            }),
            (-1.0f64..1.0).prop_map(|value| InitialCondition::Uniform { value }),
        ];
        let output = (2usize..500, proptest::option::of("[a-z]{1,8}(/[a-z]{1,8})?"), any::<bool>())
            .prop_map(|(snapshots, dir, full_field)| OutputSpec {
                snapshots,
                dir: dir.map(PathBuf::from),
                full_field,
            });
        (grid, params, load, ic, output).prop_map(|(grid, params, load, ic, output)| Config {
            grid,
            params,
            load,
            ic,
            output,
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(cfg in arb_config()) {
            let text = cfg.render();
            let back = Config::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(back, cfg);
        }

        #[test]
        fn load_is_pure(t in 0.0f64..100.0, a in -3.0f64..3.0, w in 0.0f64..5.0) {
            let load = LoadSpec::Cosine { amplitude: a, omega: w };
            prop_assert_eq!(load.eval(t).unwrap().to_bits(), load.eval(t).unwrap().to_bits());
        }
    }
}
