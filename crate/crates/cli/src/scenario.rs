use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use disloc_core::config::{Config, RawConfig};
use disloc_core::ConfigError;

/// Named experiment presets.
///
/// - `constant`: traction `g = 0.5`, step at `x0 = 1.8`
/// - `periodic`: traction `g = cos(0.5 t)`, step at `x0 = 0`, horizon `T = 8π` unless set
/// - `custom`: the configuration document alone
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Constant,
    Periodic,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Constant => "constant",
            Scenario::Periodic => "periodic",
            Scenario::Custom => "custom",
        }
    }

    /// Fills the preset keys into `raw`. An explicit key with a different
    /// value is reported as a conflict instead of being overwritten.
    pub fn apply(self, raw: &mut RawConfig) -> Result<(), ConfigError> {
        let name = self.name();
        let conflict = |key: &str, wanted: String, found: String| ConfigError::ScenarioConflict {
            key: key.into(),
            scenario: name.into(),
            reason: format!("preset requires {wanted}, configuration sets {found}"),
        };
        let set_str = |slot: &mut Option<String>, key: &str, value: &str| match slot {
            Some(v) if v != value => Err(conflict(key, format!("\"{value}\""), format!("\"{v}\""))),
            _ => {
                *slot = Some(value.into());
                Ok(())
            }
        };
        let set_num = |slot: &mut Option<f64>, key: &str, value: f64| match slot {
            Some(v) if *v != value => Err(conflict(key, value.to_string(), v.to_string())),
            _ => {
                *slot = Some(value);
                Ok(())
            }
        };
        match self {
            Scenario::Custom => Ok(()),
            Scenario::Constant => {
                set_str(&mut raw.load.kind, "load.kind", "constant")?;
                set_num(&mut raw.load.g0, "load.g0", 0.5)?;
                set_str(&mut raw.ic.kind, "ic.kind", "heaviside")?;
                set_num(&mut raw.ic.x0, "ic.x0", 1.8)?;
                Ok(())
            }
            Scenario::Periodic => {
                set_str(&mut raw.load.kind, "load.kind", "cosine")?;
                set_num(&mut raw.load.amplitude, "load.amplitude", 1.0)?;
                set_num(&mut raw.load.omega, "load.omega", 0.5)?;
                set_str(&mut raw.ic.kind, "ic.kind", "heaviside")?;
                set_num(&mut raw.ic.x0, "ic.x0", 0.0)?;
                // two load periods unless the horizon is given explicitly
                raw.final_time.get_or_insert(8.0 * PI);
                Ok(())
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(Scenario::Constant),
            "periodic" => Ok(Scenario::Periodic),
            "custom" => Ok(Scenario::Custom),
            other => Err(format!("unknown scenario `{other}` (expected constant, periodic or custom)")),
        }
    }
}

/// Parses a configuration document and applies a scenario preset to it.
pub fn resolve_config(scenario: Scenario, text: &str) -> Result<Config, ConfigError> {
    let mut raw = RawConfig::parse(text)?;
    scenario.apply(&mut raw)?;
    raw.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use disloc_core::config::{InitialCondition, LoadSpec};

    #[test]
    fn constant_preset() {
        let cfg = resolve_config(Scenario::Constant, "").unwrap();
        assert_eq!(cfg.load, LoadSpec::Constant { g0: 0.5 });
        assert!(matches!(cfg.ic, InitialCondition::Heaviside { x0, .. } if x0 == 1.8));
        assert_eq!(cfg.params.final_time, 4.0);
    }

    #[test]
    fn periodic_preset_extends_horizon_unless_overridden() {
        let cfg = resolve_config(Scenario::Periodic, "").unwrap();
        assert_eq!(cfg.load, LoadSpec::Cosine { amplitude: 1.0, omega: 0.5 });
        assert_eq!(cfg.params.final_time, 8.0 * PI);
        let cfg = resolve_config(Scenario::Periodic, "T = 4.0").unwrap();
        assert_eq!(cfg.params.final_time, 4.0);
    }

    #[test]
    fn explicit_conflicting_keys_are_reported() {
        let err = resolve_config(Scenario::Constant, "load.g0 = 0.3").unwrap_err();
        assert!(matches!(err, ConfigError::ScenarioConflict { ref key, .. } if key == "load.g0"));
        let err = resolve_config(Scenario::Periodic, "load.kind = \"constant\"").unwrap_err();
        assert_eq!(err.key(), Some("load.kind"));
        // agreeing keys are fine
        assert!(resolve_config(Scenario::Constant, "load.g0 = 0.5\nic.x0 = 1.8").is_ok());
    }

    #[test]
    fn custom_leaves_document_alone() {
        let cfg = resolve_config(Scenario::Custom, "ic.kind = \"uniform\"").unwrap();
        assert_eq!(cfg.load, LoadSpec::Constant { g0: 0.0 });
        assert_eq!(cfg.ic, InitialCondition::Uniform { value: 0.0 });
    }

    #[test]
    fn parses_names() {
        assert_eq!("periodic".parse::<Scenario>().unwrap(), Scenario::Periodic);
        assert!("sawtooth".parse::<Scenario>().is_err());
    }
}
