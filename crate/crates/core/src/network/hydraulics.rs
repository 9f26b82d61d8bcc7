//! Laminar rectangular-duct closures: constant-Nu wall convection and
//! fully developed friction.

use crate::materials::CoolantProps;

use super::geometry::ModuleGeometry;

/// Fully developed Nusselt number for a rectangular duct at constant wall
/// temperature, as a function of the short/long side ratio (Shah & London
/// polynomial fit; 7.541 for parallel plates, 2.98 for a square).
pub fn nusselt_constant_wall_temperature(aspect: f64) -> f64 {
    let a = aspect.clamp(0.0, 1.0);
    7.541 * (1.0 - 2.610 * a + 4.970 * a.powi(2) - 5.119 * a.powi(3) + 2.702 * a.powi(4) - 0.548 * a.powi(5))
}

/// Darcy friction constant f·Re for a rectangular duct (four times the
/// Fanning Poiseuille number of Shah & London; 96 for parallel plates).
pub fn darcy_friction_constant(aspect: f64) -> f64 {
    let a = aspect.clamp(0.0, 1.0);
    4.0 * 24.0
        * (1.0 - 1.3553 * a + 1.9467 * a.powi(2) - 1.7012 * a.powi(3) + 0.9564 * a.powi(4) - 0.2537 * a.powi(5))
}

/// Wall heat transfer coefficient, W/(m²·K).
///
/// `nusselt` overrides the aspect-ratio value when given. Stagnant fluid
/// (zero flow) falls back to Nu = 1.
pub fn convection_coefficient(mass_flow: f64, geom: &ModuleGeometry, coolant: &CoolantProps, nusselt: Option<f64>) -> f64 {
    let nu = if mass_flow > 0.0 {
        nusselt.unwrap_or_else(|| nusselt_constant_wall_temperature(geom.aspect_ratio()))
    } else {
        1.0
    };
    nu * coolant.k / geom.hydraulic_diameter()
}

/// A single channel circuit seen by the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydraulicPath {
    /// Total channel length, m.
    pub length: f64,
    /// Number of U-bends along the path.
    pub bends: usize,
}

/// Mean channel velocity for a mass flow through one channel, m/s.
pub fn mean_velocity(mass_flow: f64, geom: &ModuleGeometry, coolant: &CoolantProps) -> f64 {
    mass_flow / (coolant.rho * geom.channel_cross_section())
}

pub fn reynolds(mass_flow: f64, geom: &ModuleGeometry, coolant: &CoolantProps) -> f64 {
    coolant.rho * mean_velocity(mass_flow, geom, coolant) * geom.hydraulic_diameter() / coolant.mu
}

/// Pressure drop along `path` carrying `mass_flow`, Pa.
///
/// Friction: Δp = (f·Re)·μ·L·u / (2·D_h²). Each bend adds K·ρu²/2.
pub fn pressure_drop(
    mass_flow: f64,
    geom: &ModuleGeometry,
    coolant: &CoolantProps,
    path: HydraulicPath,
    bend_loss_coefficient: f64,
) -> f64 {
    if mass_flow <= 0.0 {
        return 0.0;
    }
    let u = mean_velocity(mass_flow, geom, coolant);
    let dh = geom.hydraulic_diameter();
    let friction = darcy_friction_constant(geom.aspect_ratio()) * coolant.mu * path.length * u / (2.0 * dh * dh);
    let minor = path.bends as f64 * bend_loss_coefficient * 0.5 * coolant.rho * u * u;
    friction + minor
}
