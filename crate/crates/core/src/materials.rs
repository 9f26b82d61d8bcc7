//! Thermophysical property models.
//!
//! Everything here is a pure function over immutable property bundles:
//!
//! - the coolant catalog (six working fluids),
//! - the nanofluid mixing rules for density, heat capacity and the
//!   Maxwell conductivity model,
//! - the PCM enthalpy / melt-fraction relations used by the enthalpy
//!   method, with their closed-form inverse,
//! - the effective conductivity of the PCM-filled aluminium foam.
//!
//! Properties are constant in temperature. Temperatures are in °C.

use serde::{Deserialize, Serialize};

use crate::error::PropertyError;

fn positive(name: &'static str, value: f64) -> Result<(), PropertyError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(PropertyError::Domain {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}

/// Density, heat capacity, conductivity and viscosity of a working fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolantProps {
    /// kg/m³
    pub rho: f64,
    /// J/(kg·K)
    pub c: f64,
    /// W/(m·K)
    pub k: f64,
    /// Pa·s
    pub mu: f64,
}

impl CoolantProps {
    pub fn new(rho: f64, c: f64, k: f64, mu: f64) -> Result<Self, PropertyError> {
        let props = CoolantProps { rho, c, k, mu };
        props.validate()?;
        Ok(props)
    }

    pub fn validate(&self) -> Result<(), PropertyError> {
        positive("rho", self.rho)?;
        positive("c", self.c)?;
        positive("k", self.k)?;
        positive("mu", self.mu)
    }

    /// Volumetric heat capacity ρ·c, J/(m³·K).
    pub fn volumetric_heat_capacity(&self) -> f64 {
        self.rho * self.c
    }

    pub fn prandtl(&self) -> f64 {
        self.c * self.mu / self.k
    }
}

/// Names accepted by [`coolant_catalog`], in catalog order.
pub const COOLANT_NAMES: [&str; 6] = ["Nf(Cu)", "Nf(Ti)", "Nf(Al)", "Kerosene", "Glycol", "Water"];

/// Looks up a catalog coolant. Names are case-sensitive.
pub fn coolant_catalog(name: &str) -> Result<CoolantProps, PropertyError> {
    let (rho, c, k, mu) = match name {
        "Nf(Cu)" => (1008.3, 4135.7, 0.6098, 0.00131),
        "Nf(Ti)" => (1003.3, 4154.9, 0.6090, 0.0009),
        "Nf(Al)" => (1002.91, 4157.79, 0.6099, 0.0009),
        "Kerosene" => (785.7, 2100.0, 0.15, 2.21),
        "Glycol" => (1071.1, 3300.0, 0.38, 3.39),
        "Water" => (998.2, 4182.0, 0.6, 0.001),
        _ => {
            return Err(PropertyError::UnknownCoolant {
                name: name.to_string(),
                valid: COOLANT_NAMES.join(", "),
            })
        }
    };
    Ok(CoolantProps { rho, c, k, mu })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NanoparticleProps {
    pub rho: f64,
    pub c: f64,
    pub k: f64,
}

impl NanoparticleProps {
    pub fn validate(&self) -> Result<(), PropertyError> {
        positive("particle.rho", self.rho)?;
        positive("particle.c", self.c)?;
        positive("particle.k", self.k)
    }
}

/// Base fluid plus suspended particles at volume fraction `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NanofluidSpec {
    pub phi: f64,
    pub base: CoolantProps,
    pub particle: NanoparticleProps,
}

impl NanofluidSpec {
    pub fn validate(&self) -> Result<(), PropertyError> {
        if !(self.phi.is_finite() && (0.0..1.0).contains(&self.phi)) {
            return Err(PropertyError::Domain {
                name: "phi",
                value: self.phi,
                expected: "0 <= phi < 1",
            });
        }
        self.base.validate()?;
        self.particle.validate()
    }

    /// Mixed properties. The mixing rules say nothing about viscosity, so
    /// the caller supplies it (typically the base-fluid value).
    pub fn props(&self, mu: f64) -> Result<CoolantProps, PropertyError> {
        let rho = nanofluid_density(self)?;
        let c = nanofluid_heat_capacity(self, rho)?;
        let k = nanofluid_conductivity(self)?;
        CoolantProps::new(rho, c, k, mu)
    }
}

/// ρ_nf = φ·ρ_np + (1−φ)·ρ_bf
pub fn nanofluid_density(spec: &NanofluidSpec) -> Result<f64, PropertyError> {
    spec.validate()?;
    Ok(spec.phi * spec.particle.rho + (1.0 - spec.phi) * spec.base.rho)
}

/// c_nf = [φ·ρ_np·c_np + (1−φ)·ρ_bf·c_bf] / ρ_nf
pub fn nanofluid_heat_capacity(spec: &NanofluidSpec, rho_nf: f64) -> Result<f64, PropertyError> {
    spec.validate()?;
    positive("rho_nf", rho_nf)?;
    let phi = spec.phi;
    Ok((phi * spec.particle.rho * spec.particle.c + (1.0 - phi) * spec.base.rho * spec.base.c) / rho_nf)
}

/// Maxwell effective-medium conductivity.
pub fn nanofluid_conductivity(spec: &NanofluidSpec) -> Result<f64, PropertyError> {
    spec.validate()?;
    let (phi, kb, kp) = (spec.phi, spec.base.k, spec.particle.k);
    let denominator = kp + 2.0 * kb + phi * (kb - kp);
    if !(denominator > 0.0) {
        return Err(PropertyError::Degenerate(format!(
            "Maxwell denominator k_np + 2k_bf + phi(k_bf - k_np) = {denominator} is not positive"
        )));
    }
    Ok(kb * (kp + 2.0 * kb - 2.0 * phi * (kb - kp)) / denominator)
}

/// Upper bound of the Maxwell model as k_np → ∞: k_bf·(1+2φ)/(1−φ).
pub fn maxwell_conductivity_limit(k_base: f64, phi: f64) -> f64 {
    k_base * (1.0 + 2.0 * phi) / (1.0 - phi)
}

/// Phase change material. Temperatures in °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcmProps {
    #[serde(default = "defaults::pcm_rho")]
    pub rho: f64,
    #[serde(default = "defaults::pcm_c")]
    pub c: f64,
    #[serde(default = "defaults::pcm_k_solid")]
    pub k_solid: f64,
    #[serde(default = "defaults::pcm_k_liquid")]
    pub k_liquid: f64,
    #[serde(default = "defaults::pcm_solidus")]
    pub solidus: f64,
    #[serde(default = "defaults::pcm_liquidus")]
    pub liquidus: f64,
    /// J/kg. No default: must be configured.
    pub latent_heat: f64,
    /// Zero of the sensible enthalpy, °C.
    #[serde(default = "defaults::pcm_reference")]
    pub reference_temperature: f64,
}

impl PcmProps {
    /// Paraffin RT35 with the given latent heat.
    pub fn rt35(latent_heat: f64) -> Self {
        PcmProps {
            rho: defaults::pcm_rho(),
            c: defaults::pcm_c(),
            k_solid: defaults::pcm_k_solid(),
            k_liquid: defaults::pcm_k_liquid(),
            solidus: defaults::pcm_solidus(),
            liquidus: defaults::pcm_liquidus(),
            latent_heat,
            reference_temperature: defaults::pcm_reference(),
        }
    }

    pub fn validate(&self) -> Result<(), PropertyError> {
        positive("pcm.rho", self.rho)?;
        positive("pcm.c", self.c)?;
        positive("pcm.k_solid", self.k_solid)?;
        positive("pcm.k_liquid", self.k_liquid)?;
        positive("pcm.latent_heat", self.latent_heat)?;
        if !(self.solidus.is_finite() && self.liquidus.is_finite() && self.solidus < self.liquidus) {
            return Err(PropertyError::Domain {
                name: "pcm.liquidus",
                value: self.liquidus,
                expected: "finite and strictly above pcm.solidus",
            });
        }
        if !self.reference_temperature.is_finite() {
            return Err(PropertyError::Domain {
                name: "pcm.reference_temperature",
                value: self.reference_temperature,
                expected: "finite",
            });
        }
        Ok(())
    }

    fn mushy_width(&self) -> f64 {
        self.liquidus - self.solidus
    }

    /// Conductivity of the PCM itself, interpolated linearly in ξ.
    pub fn conductivity(&self, xi: f64) -> f64 {
        self.k_solid + (self.k_liquid - self.k_solid) * xi
    }

    /// dH/dT on the branch that contains enthalpy `h`. At the solidus
    /// knee the mushy slope is returned.
    pub fn enthalpy_slope(&self, h: f64) -> f64 {
        let h_s = self.c * (self.solidus - self.reference_temperature);
        let h_l = self.c * (self.liquidus - self.reference_temperature) + self.latent_heat;
        if h >= h_s && h < h_l {
            self.c + self.latent_heat / self.mushy_width()
        } else {
            self.c
        }
    }
}

/// Melt fraction ξ: 0 at or below the solidus, linear across the mushy
/// zone, 1 above the liquidus.
pub fn melt_fraction(t: f64, props: &PcmProps) -> f64 {
    if t <= props.solidus {
        0.0
    } else if t <= props.liquidus {
        (t - props.solidus) / props.mushy_width()
    } else {
        1.0
    }
}

/// Specific enthalpy (J/kg) relative to the reference temperature:
/// sensible heat plus ξ·ΔH. Continuous and non-decreasing in `t`.
pub fn pcm_enthalpy(t: f64, props: &PcmProps) -> f64 {
    props.c * (t - props.reference_temperature) + melt_fraction(t, props) * props.latent_heat
}

/// Closed-form inverse of [`pcm_enthalpy`].
pub fn temperature_from_enthalpy(h: f64, props: &PcmProps) -> f64 {
    let t_ref = props.reference_temperature;
    let h_s = props.c * (props.solidus - t_ref);
    let h_l = props.c * (props.liquidus - t_ref) + props.latent_heat;
    if h <= h_s {
        t_ref + h / props.c
    } else if h <= h_l {
        let ramp = props.latent_heat / props.mushy_width();
        (h + props.c * t_ref + ramp * props.solidus) / (props.c + ramp)
    } else {
        t_ref + (h - props.latent_heat) / props.c
    }
}

/// Mutually consistent (H, T, ξ) triple for one PCM node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcmState {
    /// Specific enthalpy, J/kg.
    pub enthalpy: f64,
    /// °C
    pub temperature: f64,
    pub melt_fraction: f64,
}

impl PcmState {
    pub fn from_temperature(t: f64, props: &PcmProps) -> Self {
        PcmState {
            enthalpy: pcm_enthalpy(t, props),
            temperature: t,
            melt_fraction: melt_fraction(t, props),
        }
    }

    pub fn from_enthalpy(h: f64, props: &PcmProps) -> Self {
        let t = temperature_from_enthalpy(h, props);
        PcmState {
            enthalpy: h,
            temperature: t,
            melt_fraction: melt_fraction(t, props),
        }
    }
}

/// Rule combining PCM and foam conductivities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeRule {
    /// ε·k_pcm(ξ) + (1−ε)·k_foam
    #[default]
    Parallel,
    /// 1 / (ε/k_pcm(ξ) + (1−ε)/k_foam)
    Series,
    /// Treat the PCM conductivities as already including the foam.
    PcmOnly,
}

/// Open-cell aluminium foam hosting the PCM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoamProps {
    #[serde(default = "defaults::foam_porosity")]
    pub porosity: f64,
    #[serde(default = "defaults::aluminium_k")]
    pub k: f64,
    #[serde(default = "defaults::aluminium_rho")]
    pub rho: f64,
    #[serde(default = "defaults::aluminium_c")]
    pub c: f64,
    #[serde(default)]
    pub rule: CompositeRule,
}

impl Default for FoamProps {
    fn default() -> Self {
        FoamProps {
            porosity: defaults::foam_porosity(),
            k: defaults::aluminium_k(),
            rho: defaults::aluminium_rho(),
            c: defaults::aluminium_c(),
            rule: CompositeRule::Parallel,
        }
    }
}

impl FoamProps {
    pub fn validate(&self) -> Result<(), PropertyError> {
        if !(self.porosity > 0.0 && self.porosity <= 1.0) {
            return Err(PropertyError::Domain {
                name: "foam.porosity",
                value: self.porosity,
                expected: "0 < porosity <= 1",
            });
        }
        positive("foam.k", self.k)?;
        positive("foam.rho", self.rho)?;
        positive("foam.c", self.c)
    }
}

/// Effective conductivity of the PCM/foam composite at melt fraction `xi`.
pub fn effective_pcm_foam_conductivity(pcm: &PcmProps, foam: &FoamProps, xi: f64) -> f64 {
    let k_pcm = pcm.conductivity(xi.clamp(0.0, 1.0));
    composite_conductivity(k_pcm, foam)
}

/// Same combination rule with an explicit filler conductivity.
pub fn composite_conductivity(k_fill: f64, foam: &FoamProps) -> f64 {
    let eps = foam.porosity;
    match foam.rule {
        CompositeRule::Parallel => eps * k_fill + (1.0 - eps) * foam.k,
        CompositeRule::Series => {
            if k_fill <= 0.0 {
                0.0
            } else {
                1.0 / (eps / k_fill + (1.0 - eps) / foam.k)
            }
        }
        CompositeRule::PcmOnly => k_fill,
    }
}

/// Homogeneous solid (housing aluminium, cell jelly roll).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidProps {
    pub rho: f64,
    pub c: f64,
    pub k: f64,
}

impl SolidProps {
    pub fn aluminium() -> Self {
        SolidProps {
            rho: defaults::aluminium_rho(),
            c: defaults::aluminium_c(),
            k: defaults::aluminium_k(),
        }
    }

    pub fn validate(&self) -> Result<(), PropertyError> {
        positive("housing.rho", self.rho)?;
        positive("housing.c", self.c)?;
        positive("housing.k", self.k)
    }
}

impl Default for SolidProps {
    fn default() -> Self {
        Self::aluminium()
    }
}

pub(crate) mod defaults {
    pub fn pcm_rho() -> f64 {
        770.0
    }
    pub fn pcm_c() -> f64 {
        2460.0
    }
    pub fn pcm_k_solid() -> f64 {
        5.622
    }
    pub fn pcm_k_liquid() -> f64 {
        0.1505
    }
    pub fn pcm_solidus() -> f64 {
        35.0
    }
    pub fn pcm_liquidus() -> f64 {
        37.0
    }
    pub fn pcm_reference() -> f64 {
        25.0
    }
    pub fn foam_porosity() -> f64 {
        0.95
    }
    pub fn aluminium_rho() -> f64 {
        2719.0
    }
    pub fn aluminium_c() -> f64 {
        871.0
    }
    pub fn aluminium_k() -> f64 {
        202.4
    }
}

/// One property consistency check: `actual` against `expected` at a
/// relative tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
}

impl ConsistencyCheck {
    fn new(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        ConsistencyCheck {
            name: name.into(),
            expected,
            actual,
            tolerance,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.expected == 0.0 {
            self.actual.abs()
        } else {
            ((self.actual - self.expected) / self.expected).abs()
        }
    }

    pub fn passed(&self) -> bool {
        self.relative_error() <= self.tolerance
    }
}

/// Mixing rules against the Nf(Al) catalog row, the zero-fraction limit
/// of the mixing rules, and the RT35 melt fraction at the ends and middle
/// of its mushy zone.
pub fn consistency_checks() -> Vec<ConsistencyCheck> {
    let target = coolant_catalog("Nf(Al)").expect("catalog entry");
    let spec = fixtures::alumina_water();
    let rho = nanofluid_density(&spec).expect("valid fixture");
    let c = nanofluid_heat_capacity(&spec, rho).expect("valid fixture");
    let k = nanofluid_conductivity(&spec).expect("valid fixture");
    let mut checks = vec![
        ConsistencyCheck::new("Nf(Al) density from mixing rule", target.rho, rho, 1e-6),
        ConsistencyCheck::new("Nf(Al) heat capacity from mixing rule", target.c, c, 1e-6),
        ConsistencyCheck::new("Nf(Al) conductivity from Maxwell model", target.k, k, 1e-6),
    ];
    let pure = NanofluidSpec { phi: 0.0, ..spec };
    let props = pure.props(spec.base.mu).expect("valid fixture");
    for (name, base, mixed) in [
        ("density", spec.base.rho, props.rho),
        ("heat capacity", spec.base.c, props.c),
        ("conductivity", spec.base.k, props.k),
    ] {
        checks.push(ConsistencyCheck::new(format!("zero particle fraction keeps water {name}"), base, mixed, 0.0));
    }
    let pcm = PcmProps::rt35(fixtures::RT35_LATENT_HEAT);
    for (t, xi) in [(35.0, 0.0), (36.0, 0.5), (37.0, 1.0)] {
        checks.push(ConsistencyCheck::new(format!("RT35 melt fraction at {t} C"), xi, melt_fraction(t, &pcm), 0.0));
    }
    checks
}

/// Fixture values that are not catalog data.
pub mod fixtures {
    use super::{coolant_catalog, NanofluidSpec, NanoparticleProps};

    /// Latent heat used for RT35 when a number is needed, J/kg
    /// (manufacturer datasheet order of magnitude).
    pub const RT35_LATENT_HEAT: f64 = 160_000.0;

    /// Particle volume fraction of the catalog nanofluids.
    pub const NANOFLUID_PHI: f64 = 0.002;

    /// Alumina particle density back-solved from the Nf(Al) density with a
    /// water base at φ = 0.002.
    pub const ALUMINA_RHO: f64 = 3353.1999999999584;

    /// Alumina particle heat capacity back-solved from the Nf(Al) heat
    /// capacity, J/(kg·K).
    pub const ALUMINA_C: f64 = 561.5104527018635;

    /// Particle conductivity placeholder (bulk alumina). The Nf(Al)
    /// catalog conductivity lies above the Maxwell limit at φ = 0.002,
    /// so no back-solved value exists.
    pub const ALUMINA_K: f64 = 40.0;

    pub fn alumina_water() -> NanofluidSpec {
        NanofluidSpec {
            phi: NANOFLUID_PHI,
            base: coolant_catalog("Water").expect("catalog entry"),
            particle: NanoparticleProps {
                rho: ALUMINA_RHO,
                c: ALUMINA_C,
                k: ALUMINA_K,
            },
        }
    }

    /// Inverts the Maxwell relation for the particle conductivity giving
    /// `k_target` at `phi`. Returns `None` when no positive solution exists.
    pub fn invert_maxwell(k_base: f64, phi: f64, k_target: f64) -> Option<f64> {
        let r = k_target / k_base;
        let numerator = k_base * (r * (2.0 + phi) - 2.0 + 2.0 * phi);
        let denominator = 1.0 + 2.0 * phi - r * (1.0 - phi);
        let k_np = numerator / denominator;
        (denominator != 0.0 && k_np.is_finite() && k_np > 0.0).then_some(k_np)
    }

    /// Inverts the density rule for the particle density.
    pub fn invert_density(rho_base: f64, phi: f64, rho_target: f64) -> f64 {
        (rho_target - (1.0 - phi) * rho_base) / phi
    }

    /// Inverts the heat-capacity rule for the particle heat capacity.
    pub fn invert_heat_capacity(
        rho_base: f64,
        c_base: f64,
        rho_particle: f64,
        phi: f64,
        rho_target: f64,
        c_target: f64,
    ) -> f64 {
        (rho_target * c_target - (1.0 - phi) * rho_base * c_base) / (phi * rho_particle)
    }
}
