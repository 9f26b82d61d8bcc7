//! Coolant flow scheduling: constant flow, or the three-stage enhanced
//! law (baseline, pulsed intensive stage, baseline again once the cells
//! have cooled back to the plateau temperature).

use serde::{Deserialize, Serialize};

use crate::error::PropertyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    #[default]
    Constant,
    Enhanced,
}

/// What starts the intensive stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensiveTrigger {
    /// At `intensive_onset` seconds.
    #[default]
    FixedTime,
    /// When the mean melt fraction first rises above zero.
    MeltOnset,
}

/// When the plateau latch engages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateauRule {
    /// After the mean cell temperature has been above the plateau
    /// temperature and comes back down to it.
    #[default]
    Crossing,
    /// The first time the mean cell temperature is at or below the plateau
    /// temperature once the intensive stage has begun.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSchedule {
    #[serde(default)]
    pub mode: FlowMode,
    /// Baseline flow v_m, kg/s.
    #[serde(default = "defaults::mass_flow")]
    pub mass_flow: f64,
    /// t_E, s.
    #[serde(default = "defaults::intensive_onset")]
    pub intensive_onset: f64,
    /// T_E, °C.
    #[serde(default = "defaults::plateau_temperature")]
    pub plateau_temperature: f64,
    /// s
    #[serde(default = "defaults::pulse_period")]
    pub pulse_period: f64,
    /// kg/s
    #[serde(default = "defaults::pulse_peak")]
    pub pulse_peak: f64,
    /// Gaussian standard deviation, s. Defaults to a sixth of the period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_sigma: Option<f64>,
    #[serde(default)]
    pub trigger: IntensiveTrigger,
    /// Rise time constant of the step into the intensive stage, s. Zero is a
    /// hard step.
    #[serde(default)]
    pub step_smoothing: f64,
    #[serde(default)]
    pub plateau_rule: PlateauRule,
}

pub(crate) mod defaults {
    pub fn mass_flow() -> f64 {
        0.6e-3
    }
    pub fn intensive_onset() -> f64 {
        250.0
    }
    pub fn plateau_temperature() -> f64 {
        40.0
    }
    pub fn pulse_period() -> f64 {
        6.0
    }
    pub fn pulse_peak() -> f64 {
        0.1e-3
    }
}

impl Default for FlowSchedule {
    fn default() -> Self {
        FlowSchedule {
            mode: FlowMode::Constant,
            mass_flow: defaults::mass_flow(),
            intensive_onset: defaults::intensive_onset(),
            plateau_temperature: defaults::plateau_temperature(),
            pulse_period: defaults::pulse_period(),
            pulse_peak: defaults::pulse_peak(),
            pulse_sigma: None,
            trigger: IntensiveTrigger::FixedTime,
            step_smoothing: 0.0,
            plateau_rule: PlateauRule::Crossing,
        }
    }
}

impl FlowSchedule {
    pub fn constant(mass_flow: f64) -> Self {
        FlowSchedule {
            mass_flow,
            ..Default::default()
        }
    }

    pub fn enhanced(mass_flow: f64) -> Self {
        FlowSchedule {
            mode: FlowMode::Enhanced,
            mass_flow,
            ..Default::default()
        }
    }

    pub fn sigma(&self) -> f64 {
        self.pulse_sigma.unwrap_or(self.pulse_period / 6.0)
    }

    pub fn validate(&self) -> Result<(), PropertyError> {
        let checks = [
            ("schedule.mass_flow", self.mass_flow, self.mass_flow > 0.0, "> 0"),
            ("schedule.pulse_peak", self.pulse_peak, self.pulse_peak >= 0.0, ">= 0"),
            ("schedule.intensive_onset", self.intensive_onset, self.intensive_onset >= 0.0, ">= 0"),
            ("schedule.pulse_period", self.pulse_period, self.pulse_period > 0.0, "> 0"),
            ("schedule.pulse_sigma", self.sigma(), self.sigma() > 0.0, "> 0"),
            ("schedule.step_smoothing", self.step_smoothing, self.step_smoothing >= 0.0, ">= 0"),
            (
                "schedule.plateau_temperature",
                self.plateau_temperature,
                self.plateau_temperature.is_finite(),
                "finite",
            ),
        ];
        for (name, value, ok, expected) in checks {
            if !(ok && value.is_finite()) {
                return Err(PropertyError::Domain { name, value, expected });
            }
        }
        Ok(())
    }

    /// Mean extra flow per period during the intensive stage for an
    /// untruncated Gaussian, kg/s.
    pub fn pulse_mean_excess(&self) -> f64 {
        self.pulse_peak * self.sigma() * (2.0 * std::f64::consts::PI).sqrt() / self.pulse_period
    }
}

/// Controller memory carried between steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    /// Start of the intensive stage once known, s.
    pub intensive_onset: Option<f64>,
    /// Mean temperature has been above the plateau temperature.
    pub armed: bool,
    /// Plateau latch; never released.
    pub plateau: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInputs {
    pub t: f64,
    /// Mean battery temperature, °C.
    pub t_avg: f64,
    /// Mean melt fraction.
    pub xi_mean: f64,
}

/// Pulse train with crests at `onset + k·period`, k ≥ 0. Only the nearest
/// crest contributes.
pub fn gaussian_train(t: f64, onset: f64, schedule: &FlowSchedule) -> f64 {
    if schedule.pulse_peak == 0.0 || t < onset - 0.5 * schedule.pulse_period {
        return 0.0;
    }
    let period = schedule.pulse_period;
    let k = ((t - onset) / period).round().max(0.0);
    let offset = t - (onset + k * period);
    let sigma = schedule.sigma();
    schedule.pulse_peak * (-offset * offset / (2.0 * sigma * sigma)).exp()
}

fn step_factor(t: f64, onset: f64, schedule: &FlowSchedule) -> f64 {
    if t < onset {
        0.0
    } else if schedule.step_smoothing > 0.0 {
        1.0 - (-(t - onset) / schedule.step_smoothing).exp()
    } else {
        1.0
    }
}

/// Mass flow for the current instant and the updated controller state.
pub fn flow_rate(inputs: ControlInputs, schedule: &FlowSchedule, state: ControllerState) -> (f64, ControllerState) {
    let base = schedule.mass_flow;
    if schedule.mode == FlowMode::Constant {
        return (base, state);
    }
    let mut next = state;
    if next.intensive_onset.is_none() {
        let started = match schedule.trigger {
            IntensiveTrigger::FixedTime => inputs.t >= schedule.intensive_onset,
            IntensiveTrigger::MeltOnset => inputs.xi_mean > 0.0,
        };
        if started {
            next.intensive_onset = Some(match schedule.trigger {
                IntensiveTrigger::FixedTime => schedule.intensive_onset,
                IntensiveTrigger::MeltOnset => inputs.t,
            });
        }
    }
    if inputs.t_avg > schedule.plateau_temperature {
        next.armed = true;
    }
    let Some(onset) = next.intensive_onset else {
        return (base, next);
    };
    if !next.plateau && inputs.t_avg <= schedule.plateau_temperature {
        next.plateau = match schedule.plateau_rule {
            PlateauRule::Crossing => next.armed,
            PlateauRule::Threshold => true,
        };
    }
    if next.plateau {
        return (base, next);
    }
    let extra = step_factor(inputs.t, onset, schedule) * gaussian_train(inputs.t, onset, schedule);
    (base + extra, next)
}
