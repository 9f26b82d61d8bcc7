//! Scenario files bundled with the binary.

use crate::config::{parse_config, LoadedConfig};
use crate::error::ConfigError;

const PRESETS: [(&str, &str); 6] = [
    ("baseline", include_str!("../presets/baseline.toml")),
    ("paper-3.1-coolants", include_str!("../presets/paper-3.1-coolants.toml")),
    ("paper-3.2-directions", include_str!("../presets/paper-3.2-directions.toml")),
    ("paper-3.3-heights", include_str!("../presets/paper-3.3-heights.toml")),
    ("paper-3.4-flow-rates", include_str!("../presets/paper-3.4-flow-rates.toml")),
    ("paper-3.5-schemes", include_str!("../presets/paper-3.5-schemes.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Raw TOML of a preset.
pub fn text(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| ConfigError::UnknownPreset {
            name: name.to_string(),
            available: names().collect::<Vec<_>>().join(", "),
        })
}

pub fn load(name: &str) -> Result<LoadedConfig, ConfigError> {
    parse_config(text(name)?)
}
