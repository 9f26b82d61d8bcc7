//! Battery heat source and the field-validation correlations.

use serde::{Deserialize, Serialize};

use crate::error::PropertyError;

/// Offset between °C and K.
pub const KELVIN: f64 = 273.15;

/// One 18650 cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    #[serde(default = "defaults::c")]
    pub c: f64,
    #[serde(default = "defaults::k")]
    pub k: f64,
    /// Rated capacity, A·h.
    #[serde(default = "defaults::capacity")]
    pub capacity: f64,
    #[serde(default = "defaults::rated_voltage")]
    pub rated_voltage: f64,
    /// Ω. No default: it has to come from a calibration or a datasheet.
    pub internal_resistance: f64,
    /// dE/dT, V/K.
    #[serde(default)]
    pub entropy_coefficient: f64,
    #[serde(default = "defaults::cell_height")]
    pub cell_height: f64,
    #[serde(default = "defaults::cell_diameter")]
    pub cell_diameter: f64,
}

pub(crate) mod defaults {
    pub fn rho() -> f64 {
        2500.0
    }
    pub fn c() -> f64 {
        1108.0
    }
    pub fn k() -> f64 {
        28.0
    }
    pub fn capacity() -> f64 {
        2.6
    }
    pub fn rated_voltage() -> f64 {
        3.65
    }
    pub fn cell_height() -> f64 {
        0.068
    }
    pub fn cell_diameter() -> f64 {
        0.018
    }
}

impl BatterySpec {
    pub fn with_resistance(internal_resistance: f64) -> Self {
        BatterySpec {
            rho: defaults::rho(),
            c: defaults::c(),
            k: defaults::k(),
            capacity: defaults::capacity(),
            rated_voltage: defaults::rated_voltage(),
            internal_resistance,
            entropy_coefficient: 0.0,
            cell_height: defaults::cell_height(),
            cell_diameter: defaults::cell_diameter(),
        }
    }

    pub fn validate(&self) -> Result<(), PropertyError> {
        let positive = [
            ("battery.rho", self.rho),
            ("battery.c", self.c),
            ("battery.k", self.k),
            ("battery.capacity", self.capacity),
            ("battery.rated_voltage", self.rated_voltage),
            ("battery.internal_resistance", self.internal_resistance),
            ("battery.cell_height", self.cell_height),
            ("battery.cell_diameter", self.cell_diameter),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(PropertyError::Domain {
                    name,
                    value,
                    expected: "> 0",
                });
            }
        }
        if !self.entropy_coefficient.is_finite() {
            return Err(PropertyError::Domain {
                name: "battery.entropy_coefficient",
                value: self.entropy_coefficient,
                expected: "finite",
            });
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        let r = 0.5 * self.cell_diameter;
        std::f64::consts::PI * r * r * self.cell_height
    }

    pub fn heat_capacity(&self) -> f64 {
        self.rho * self.c * self.volume()
    }
}

/// Constant-rate discharge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DischargeSpec {
    #[serde(default = "default_c_rate")]
    pub c_rate: f64,
    /// s
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// °C
    #[serde(default = "default_initial")]
    pub initial_temperature: f64,
}

fn default_c_rate() -> f64 {
    3.0
}
fn default_duration() -> f64 {
    1200.0
}
fn default_initial() -> f64 {
    25.0
}

impl Default for DischargeSpec {
    fn default() -> Self {
        DischargeSpec {
            c_rate: default_c_rate(),
            duration: default_duration(),
            initial_temperature: default_initial(),
        }
    }
}

impl DischargeSpec {
    pub fn validate(&self) -> Result<(), PropertyError> {
        if !(self.c_rate.is_finite() && self.c_rate >= 0.0) {
            return Err(PropertyError::Domain {
                name: "discharge.c_rate",
                value: self.c_rate,
                expected: ">= 0",
            });
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(PropertyError::Domain {
                name: "discharge.duration",
                value: self.duration,
                expected: ">= 0",
            });
        }
        if !self.initial_temperature.is_finite() {
            return Err(PropertyError::Domain {
                name: "discharge.initial_temperature",
                value: self.initial_temperature,
                expected: "finite",
            });
        }
        Ok(())
    }
}

/// Cell current for a C-rate, A.
pub fn cell_current(c_rate: f64, capacity_ah: f64) -> f64 {
    c_rate * capacity_ah
}

/// Volumetric heat generation, W/m³, split into Joule and entropic parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatGeneration {
    pub irreversible: f64,
    pub reversible: f64,
}

impl HeatGeneration {
    pub fn total(&self) -> f64 {
        self.irreversible + self.reversible
    }
}

/// Q = (I²R − I·T·dE/dT)/V with T absolute.
pub fn heat_generation(current: f64, temperature_k: f64, spec: &BatterySpec) -> HeatGeneration {
    let v = spec.volume();
    HeatGeneration {
        irreversible: current * current * spec.internal_resistance / v,
        reversible: -current * temperature_k * spec.entropy_coefficient / v,
    }
}

/// Vehicle speed to discharge rate, C ≈ v/(α·v_rated).
pub fn speed_to_c_rate(speed: f64, rated_speed: f64, alpha: f64) -> Result<f64, PropertyError> {
    if !(rated_speed > 0.0) {
        return Err(PropertyError::Domain {
            name: "rated_speed",
            value: rated_speed,
            expected: "> 0",
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PropertyError::Domain {
            name: "alpha",
            value: alpha,
            expected: "(0, 1]",
        });
    }
    if !(speed >= 0.0) {
        return Err(PropertyError::Domain {
            name: "speed",
            value: speed,
            expected: ">= 0",
        });
    }
    Ok(speed / (alpha * rated_speed))
}

/// Measured to actual temperature through the thermal efficiency η.
pub fn corrected_temperature(measured: f64, eta: f64) -> Result<f64, PropertyError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(PropertyError::Domain {
            name: "eta",
            value: eta,
            expected: "(0, 1]",
        });
    }
    Ok(measured / eta)
}

/// Internal resistance giving `target_rise` K of adiabatic lumped heating
/// after `duration` s at `c_rate` with dE/dT = 0.
pub fn calibrate_internal_resistance(
    spec: &BatterySpec,
    c_rate: f64,
    duration: f64,
    target_rise: f64,
) -> Result<f64, PropertyError> {
    let current = cell_current(c_rate, spec.capacity);
    if !(current > 0.0 && duration > 0.0) {
        return Err(PropertyError::Degenerate(
            "calibration needs a positive current and duration".into(),
        ));
    }
    if !(target_rise > 0.0) {
        return Err(PropertyError::Domain {
            name: "target_rise",
            value: target_rise,
            expected: "> 0",
        });
    }
    Ok(target_rise * spec.heat_capacity() / (current * current * duration))
}
