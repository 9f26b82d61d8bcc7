//! TOML scenario files.
//!
//! ```toml
//! direction = 4
//!
//! [battery]
//! internal_resistance = 0.084
//!
//! [coolant]
//! catalog = "Nf(Al)"
//!
//! [pcm]
//! latent_heat = 160000.0
//! ```
//!
//! Every other section falls back to defaults. `[coolant]` must name
//! exactly one of `catalog`, `custom` or `nanofluid`. Omitting `[pcm]`
//! leaves the gaps without PCM. A `[sweep]` section turns the file into a
//! grid over the listed axes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::control::{FlowMode, FlowSchedule};
use crate::error::{ConfigError, NetworkError, PropertyError, SolverError};
use crate::heatgen::{BatterySpec, DischargeSpec};
use crate::materials::{
    coolant_catalog, CompositeRule, CoolantProps, FoamProps, NanofluidSpec, NanoparticleProps, PcmProps, SolidProps,
};
use crate::metrics::{SweepCase, SweepGrid};
use crate::network::{CoolingDirection, MaterialSet, ModuleGeometry};
use crate::solver::{Scenario, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NanofluidSection {
    pub phi: f64,
    pub base: CoolantProps,
    pub particle: NanoparticleProps,
    /// Pa·s. Defaults to the base-fluid viscosity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolantSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CoolantProps>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nanofluid: Option<NanofluidSection>,
}

impl CoolantSection {
    pub fn catalog(name: &str) -> Self {
        CoolantSection {
            catalog: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn resolve(&self) -> Result<CoolantProps, ConfigError> {
        match (&self.catalog, &self.custom, &self.nanofluid) {
            (Some(name), None, None) => {
                coolant_catalog(name).map_err(|e| ConfigError::field("coolant.catalog", e.to_string()))
            }
            (None, Some(props), None) => {
                props
                    .validate()
                    .map_err(|e| ConfigError::field("coolant.custom", e.to_string()))?;
                Ok(*props)
            }
            (None, None, Some(nf)) => {
                let spec = NanofluidSpec {
                    phi: nf.phi,
                    base: nf.base,
                    particle: nf.particle,
                };
                spec.validate()
                    .and_then(|_| spec.props(nf.mu.unwrap_or(nf.base.mu)))
                    .map_err(|e| ConfigError::field("coolant.nanofluid", e.to_string()))
            }
            _ => Err(ConfigError::field(
                "coolant",
                "exactly one of `catalog`, `custom` or `nanofluid` is required",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoamSection {
    /// `false` leaves the gaps without metal foam.
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "foam_default::porosity")]
    pub porosity: f64,
    #[serde(default = "foam_default::k")]
    pub k: f64,
    #[serde(default = "foam_default::rho")]
    pub rho: f64,
    #[serde(default = "foam_default::c")]
    pub c: f64,
    #[serde(default)]
    pub rule: CompositeRule,
}

fn yes() -> bool {
    true
}

mod foam_default {
    use crate::materials::FoamProps;
    pub fn porosity() -> f64 {
        FoamProps::default().porosity
    }
    pub fn k() -> f64 {
        FoamProps::default().k
    }
    pub fn rho() -> f64 {
        FoamProps::default().rho
    }
    pub fn c() -> f64 {
        FoamProps::default().c
    }
}

impl Default for FoamSection {
    fn default() -> Self {
        let f = FoamProps::default();
        FoamSection {
            enabled: true,
            porosity: f.porosity,
            k: f.k,
            rho: f.rho,
            c: f.c,
            rule: f.rule,
        }
    }
}

impl FoamSection {
    pub fn props(&self) -> Option<FoamProps> {
        self.enabled.then_some(FoamProps {
            porosity: self.porosity,
            k: self.k,
            rho: self.rho,
            c: self.c,
            rule: self.rule,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default = "boundary_default::ambient_h")]
    pub ambient_h: f64,
    #[serde(default = "boundary_default::ambient_temperature")]
    pub ambient_temperature: f64,
    /// Defaults to the ambient temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inlet_temperature: Option<f64>,
    #[serde(default)]
    pub outlet_pressure: f64,
}

mod boundary_default {
    pub fn ambient_h() -> f64 {
        5.0
    }
    pub fn ambient_temperature() -> f64 {
        25.0
    }
}

impl Default for BoundarySection {
    fn default() -> Self {
        BoundarySection {
            ambient_h: boundary_default::ambient_h(),
            ambient_temperature: boundary_default::ambient_temperature(),
            inlet_temperature: None,
            outlet_pressure: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydraulicsSection {
    #[serde(default)]
    pub bend_loss_coefficient: f64,
    /// Overrides the aspect-ratio Nusselt number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nusselt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "solver_default::dt")]
    pub dt: f64,
    #[serde(default = "solver_default::linear_tolerance")]
    pub linear_tolerance: f64,
    #[serde(default = "solver_default::max_linear_iterations")]
    pub max_linear_iterations: usize,
    #[serde(default = "solver_default::phase_tolerance")]
    pub phase_tolerance: f64,
    #[serde(default = "solver_default::max_phase_iterations")]
    pub max_phase_iterations: usize,
}

mod solver_default {
    use crate::solver::SolverSettings;
    pub fn dt() -> f64 {
        1.0
    }
    pub fn linear_tolerance() -> f64 {
        SolverSettings::default().linear_tolerance
    }
    pub fn max_linear_iterations() -> usize {
        SolverSettings::default().max_linear_iterations
    }
    pub fn phase_tolerance() -> f64 {
        SolverSettings::default().phase_tolerance
    }
    pub fn max_phase_iterations() -> usize {
        SolverSettings::default().max_phase_iterations
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverSection {
            dt: solver_default::dt(),
            linear_tolerance: s.linear_tolerance,
            max_linear_iterations: s.max_linear_iterations,
            phase_tolerance: s.phase_tolerance,
            max_phase_iterations: s.max_phase_iterations,
        }
    }
}

/// Cooling scheme presets for comparison sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Water, no PCM or foam, constant flow.
    #[serde(rename = "WC")]
    Water,
    /// Configured coolant, no PCM or foam, constant flow.
    #[serde(rename = "NC")]
    Coolant,
    /// Configured coolant with PCM, constant flow.
    #[serde(rename = "NC+PCM")]
    CoolantPcm,
    /// Configured coolant with PCM and the enhanced flow schedule.
    #[serde(rename = "NC+PCM+EC")]
    CoolantPcmEnhanced,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Water => "WC",
            Scheme::Coolant => "NC",
            Scheme::CoolantPcm => "NC+PCM",
            Scheme::CoolantPcmEnhanced => "NC+PCM+EC",
        }
    }
}

/// Axes of a sweep; the grid is their Cartesian product in the order
/// coolant, direction, channel height, mass flow, scheme.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coolant: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<CoolingDirection>>,
    /// m
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_height: Option<Vec<f64>>,
    /// Keep channel height plus PCM height constant while sweeping the
    /// channel height.
    #[serde(default)]
    pub conserve_layer_pitch: bool,
    /// kg/s
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_flow: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Vec<Scheme>>,
    /// Index of the case used as the comparison baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub direction: CoolingDirection,
    #[serde(default)]
    pub geometry: ModuleGeometry,
    pub battery: BatterySpec,
    #[serde(default)]
    pub discharge: DischargeSpec,
    #[serde(default)]
    pub coolant: Option<CoolantSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcm: Option<PcmProps>,
    #[serde(default)]
    pub foam: FoamSection,
    #[serde(default)]
    pub housing: SolidProps,
    #[serde(default)]
    pub schedule: FlowSchedule,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub hydraulics: HydraulicsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
}

/// A parsed file together with the keys it actually set.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    given: toml::Table,
}

const SECTIONS: [&str; 12] = [
    "geometry",
    "battery",
    "discharge",
    "coolant",
    "pcm",
    "foam",
    "housing",
    "schedule",
    "boundary",
    "hydraulics",
    "solver",
    "sweep",
];

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let given: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let de = toml::Deserializer::new(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        let message = e.inner().message().to_string();
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.strip_suffix('`'))
        {
            path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
        }
        ConfigError::field(path, message)
    })?;
    let loaded = LoadedConfig { config, given };
    loaded.config.validate()?;
    Ok(loaded)
}

impl LoadedConfig {
    pub fn from_config(config: ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let given = toml::Table::try_from(&config).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        Ok(LoadedConfig { config, given })
    }

    /// Replaces the time step and records it as explicitly set.
    pub fn override_dt(&mut self, dt: f64) -> Result<(), ConfigError> {
        let mut config = self.config.clone();
        config.solver.dt = dt;
        config.validate()?;
        self.config = config;
        let solver = self
            .given
            .entry("solver")
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if let toml::Value::Table(t) = solver {
            t.insert("dt".into(), toml::Value::Float(dt));
        }
        Ok(())
    }

    /// The effective configuration as TOML. Values the input did not set
    /// are marked `# default`.
    pub fn effective_toml(&self) -> String {
        let full = toml::Table::try_from(&self.config).expect("config serializes");
        let mut out = String::from("# effective configuration; entries marked `default` were not set in the input\n");
        let direction = full.get("direction").expect("direction serializes");
        let mark = |given: bool| if given { "" } else { "  # default" };
        let _ = writeln!(out, "direction = {direction}{}", mark(self.given.contains_key("direction")));
        for section in SECTIONS {
            let Some(toml::Value::Table(values)) = full.get(section) else {
                continue;
            };
            let given = self.given.get(section).and_then(|v| v.as_table());
            let _ = writeln!(
                out,
                "\n[{section}]{}",
                if given.is_none() { "  # section not given, all defaults" } else { "" }
            );
            for (key, value) in values {
                let set = given.is_some_and(|g| g.contains_key(key));
                let _ = writeln!(out, "{key} = {value}{}", if given.is_none() { "" } else { mark(set) });
            }
        }
        out
    }
}

fn property_path(e: &PropertyError) -> String {
    match e {
        PropertyError::Domain { name, .. } => name.to_string(),
        PropertyError::UnknownCoolant { .. } => "coolant".into(),
        PropertyError::Degenerate(_) => "materials".into(),
    }
}

fn config_error(e: SolverError) -> ConfigError {
    let message = e.to_string();
    match &e {
        SolverError::Property(p) => ConfigError::field(property_path(p), message),
        SolverError::Network(NetworkError::Property(p)) => ConfigError::field(property_path(p), message),
        SolverError::Network(NetworkError::Direction(_)) | SolverError::Network(NetworkError::DirectionNeedsTwoLegs { .. }) => {
            ConfigError::field("direction", message)
        }
        SolverError::Network(NetworkError::Geometry(_)) => ConfigError::field("geometry", message),
        _ => ConfigError::field("scenario", message),
    }
}

impl ScenarioConfig {
    /// Minimal configuration with the given coolant, resistance and PCM
    /// latent heat; everything else at defaults.
    pub fn new(coolant: CoolantSection, internal_resistance: f64, latent_heat: Option<f64>) -> Self {
        ScenarioConfig {
            direction: CoolingDirection::default(),
            geometry: ModuleGeometry::default(),
            battery: BatterySpec::with_resistance(internal_resistance),
            discharge: DischargeSpec::default(),
            coolant: Some(coolant),
            pcm: latent_heat.map(PcmProps::rt35),
            foam: FoamSection::default(),
            housing: SolidProps::default(),
            schedule: FlowSchedule::default(),
            boundary: BoundarySection::default(),
            hydraulics: HydraulicsSection::default(),
            solver: SolverSection::default(),
            sweep: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid().map(|_| ())
    }

    /// The single scenario described by the file, ignoring `[sweep]`.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let coolant = self
            .coolant
            .as_ref()
            .ok_or_else(|| ConfigError::field("coolant", "section is required (no default coolant)"))?
            .resolve()?;
        let scenario = Scenario {
            geometry: self.geometry,
            direction: self.direction,
            materials: MaterialSet {
                battery: self.battery,
                coolant,
                pcm: self.pcm,
                foam: self.foam.props(),
                housing: self.housing,
                nusselt: self.hydraulics.nusselt,
            },
            discharge: self.discharge,
            schedule: self.schedule,
            ambient_h: self.boundary.ambient_h,
            ambient_temperature: self.boundary.ambient_temperature,
            inlet_temperature: self.boundary.inlet_temperature,
            dt: self.solver.dt,
            outlet_pressure: self.boundary.outlet_pressure,
            bend_loss_coefficient: self.hydraulics.bend_loss_coefficient,
            settings: SolverSettings {
                linear_tolerance: self.solver.linear_tolerance,
                max_linear_iterations: self.solver.max_linear_iterations,
                phase_tolerance: self.solver.phase_tolerance,
                max_phase_iterations: self.solver.max_phase_iterations,
            },
        };
        check(&scenario)?;
        Ok(scenario)
    }

    /// Every case of the sweep, or the single scenario when there is no
    /// `[sweep]` section. All cases are validated.
    pub fn grid(&self) -> Result<SweepGrid, ConfigError> {
        let base = self.scenario()?;
        let Some(axes) = &self.sweep else {
            return Ok(SweepGrid {
                cases: vec![SweepCase {
                    labels: Vec::new(),
                    scenario: base,
                }],
                baseline: None,
            });
        };
        let mut cases = vec![SweepCase {
            labels: Vec::new(),
            scenario: base.clone(),
        }];

        if let Some(names) = &axes.coolant {
            let mut props = Vec::new();
            for (i, n) in names.iter().enumerate() {
                let p = coolant_catalog(n).map_err(|e| ConfigError::field(format!("sweep.coolant[{i}]"), e.to_string()))?;
                props.push((n.clone(), p));
            }
            cases = expand(cases, "coolant", &props, |s, p| s.materials.coolant = *p);
        }
        if let Some(dirs) = &axes.direction {
            let values: Vec<(String, CoolingDirection)> = dirs.iter().map(|d| (d.id().to_string(), *d)).collect();
            cases = expand(cases, "direction", &values, |s, d| s.direction = *d);
        }
        if let Some(heights) = &axes.channel_height {
            let layer = base.geometry.channel_height + base.geometry.pcm_height;
            let mut values = Vec::new();
            for (i, &h) in heights.iter().enumerate() {
                let pcm = if axes.conserve_layer_pitch { layer - h } else { base.geometry.pcm_height };
                if !(h > 0.0 && pcm > 0.0) {
                    return Err(ConfigError::field(
                        format!("sweep.channel_height[{i}]"),
                        format!("channel height {h} m leaves PCM height {pcm} m"),
                    ));
                }
                values.push((format!("{h}"), (h, pcm)));
            }
            cases = expand(cases, "channel_height", &values, |s, &(h, pcm)| {
                s.geometry.channel_height = h;
                s.geometry.pcm_height = pcm;
            });
        }
        if let Some(flows) = &axes.mass_flow {
            let values: Vec<(String, f64)> = flows.iter().map(|m| (format!("{m}"), *m)).collect();
            cases = expand(cases, "mass_flow", &values, |s, m| s.schedule.mass_flow = *m);
        }
        if let Some(schemes) = &axes.scheme {
            if base.materials.pcm.is_none() && schemes.iter().any(|s| matches!(s, Scheme::CoolantPcm | Scheme::CoolantPcmEnhanced)) {
                return Err(ConfigError::field("sweep.scheme", "PCM schemes need a [pcm] section"));
            }
            let water = coolant_catalog("Water").expect("catalog has water");
            let values: Vec<(String, Scheme)> = schemes.iter().map(|s| (s.name().to_string(), *s)).collect();
            cases = expand(cases, "scheme", &values, |s, scheme| {
                let m = &mut s.materials;
                match scheme {
                    Scheme::Water | Scheme::Coolant => {
                        if *scheme == Scheme::Water {
                            m.coolant = water;
                        }
                        m.pcm = None;
                        m.foam = None;
                        s.schedule.mode = FlowMode::Constant;
                    }
                    Scheme::CoolantPcm => s.schedule.mode = FlowMode::Constant,
                    Scheme::CoolantPcmEnhanced => s.schedule.mode = FlowMode::Enhanced,
                }
            });
        }
        if let Some(b) = axes.baseline {
            if b >= cases.len() {
                return Err(ConfigError::field(
                    "sweep.baseline",
                    format!("index {b} is outside the {} cases", cases.len()),
                ));
            }
        }
        for case in &cases {
            check(&case.scenario).map_err(|e| match e {
                ConfigError::Field { path, message } => {
                    let at: Vec<String> = case.labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    ConfigError::field(path, format!("{message} (sweep case {})", at.join(", ")))
                }
                other => other,
            })?;
        }
        Ok(SweepGrid {
            cases,
            baseline: axes.baseline,
        })
    }
}

fn check(s: &Scenario) -> Result<(), ConfigError> {
    s.validate().map_err(config_error)?;
    s.build_network().map_err(config_error)?;
    Ok(())
}

fn expand<T>(cases: Vec<SweepCase>, axis: &str, values: &[(String, T)], apply: impl Fn(&mut Scenario, &T)) -> Vec<SweepCase> {
    let mut out = Vec::with_capacity(cases.len() * values.len());
    for case in cases {
        for (label, value) in values {
            let mut next = case.clone();
            apply(&mut next.scenario, value);
            next.labels.push((axis.to_string(), label.clone()));
            out.push(next);
        }
    }
    out
}
