//! Energy bookkeeping for a run. All terms are in J, measured from the
//! initial state.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyAudit {
    /// Heat released by the cells.
    pub generated: f64,
    pub battery_sensible: f64,
    pub housing_sensible: f64,
    /// PCM sensible heat plus the foam skeleton.
    pub pcm_sensible: f64,
    pub pcm_latent: f64,
    /// Change in coolant enthalpy held in the channels.
    pub coolant_stored: f64,
    /// Enthalpy carried out through the outlets, above inlet temperature.
    pub advected_out: f64,
    pub ambient_loss: f64,
}

impl EnergyAudit {
    pub fn absorbed(&self) -> f64 {
        self.battery_sensible
            + self.housing_sensible
            + self.pcm_sensible
            + self.pcm_latent
            + self.coolant_stored
            + self.advected_out
            + self.ambient_loss
    }

    pub fn residual(&self) -> f64 {
        self.generated - self.absorbed()
    }

    /// |residual| / |generated|, or the absolute residual when nothing was
    /// generated.
    pub fn relative_residual(&self) -> f64 {
        if self.generated.abs() > 0.0 {
            self.residual().abs() / self.generated.abs()
        } else {
            self.residual().abs()
        }
    }

    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("generated_J", self.generated),
            ("battery_sensible_J", self.battery_sensible),
            ("housing_sensible_J", self.housing_sensible),
            ("pcm_sensible_J", self.pcm_sensible),
            ("pcm_latent_J", self.pcm_latent),
            ("coolant_stored_J", self.coolant_stored),
            ("advected_out_J", self.advected_out),
            ("ambient_loss_J", self.ambient_loss),
        ]
    }

    /// `key=value` lines, closed by the residual.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k}={v:.9e}");
        }
        let _ = writeln!(out, "residual_J={:.9e}", self.residual());
        let _ = writeln!(out, "relative_residual={:.3e}", self.relative_residual());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_audit_closes() {
        let a = EnergyAudit::default();
        assert_eq!(a.residual(), 0.0);
        assert_eq!(a.relative_residual(), 0.0);
        assert_eq!(a.to_key_value().lines().count(), 10);
    }

    #[test]
    fn residual_is_generated_minus_absorbed() {
        let a = EnergyAudit {
            generated: 100.0,
            battery_sensible: 40.0,
            pcm_latent: 30.0,
            advected_out: 20.0,
            ambient_loss: 9.0,
            ..Default::default()
        };
        assert_eq!(a.residual(), 1.0);
        assert_eq!(a.relative_residual(), 0.01);
    }
}
