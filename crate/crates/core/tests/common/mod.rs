#![allow(dead_code)]

use hbtms::heatgen::BatterySpec;
use hbtms::materials::{coolant_catalog, PcmProps, SolidProps};
use hbtms::network::{AmbientLink, Link, LinkKind, LinkModel, MaterialSet, NodeKind, PcmNode, ThermalNetwork};
use hbtms::solver::{Scenario, Simulation};

/// Slab of PCM with equal solid and liquid properties and a narrow
/// mushy zone at 35 °C.
pub fn slab_pcm() -> PcmProps {
    PcmProps {
        rho: 770.0,
        c: 2000.0,
        k_solid: 0.2,
        k_liquid: 0.2,
        solidus: 35.0,
        liquidus: 35.02,
        latent_heat: 160_000.0,
        reference_temperature: 25.0,
    }
}

pub const WALL_TEMPERATURE: f64 = 45.0;

/// Root of λ·exp(λ²)·erf(λ) = St/√π by bisection.
pub fn neumann_lambda(stefan: f64) -> f64 {
    let target = stefan / std::f64::consts::PI.sqrt();
    let f = |l: f64| l * (l * l).exp() * libm::erf(l) - target;
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-phase melting of a slab at its solidus with the face held at
/// `WALL_TEMPERATURE`. Returns (numerical front, similarity front) in m,
/// the numerical front being Σξ·dx.
pub fn stefan_fronts(cells: usize, length: f64, dt: f64, duration: f64) -> (f64, f64) {
    let pcm = slab_pcm();
    let mats = MaterialSet {
        battery: BatterySpec::with_resistance(0.05),
        coolant: coolant_catalog("Water").unwrap(),
        pcm: Some(pcm),
        foam: None,
        housing: SolidProps::aluminium(),
        nusselt: None,
    };
    let dx = length / cells as f64;
    let mut net = ThermalNetwork::empty(mats);
    for i in 0..cells {
        let mass = pcm.rho * dx;
        let id = net.add_node(NodeKind::Pcm, format!("slab {i}"), mass * pcm.c, dx);
        net.pcm_nodes.push(PcmNode {
            node: id,
            pcm_mass: mass,
            foam_capacity: 0.0,
        });
    }
    for i in 1..cells {
        net.links.push(Link {
            a: i - 1,
            b: i,
            kind: LinkKind::Conduction,
            model: LinkModel::Composite {
                factor: 1.0 / dx,
                wall: None,
                pcm: [Some(i - 1), Some(i)],
            },
        });
    }
    // wall held at temperature through the half cell next to it
    net.ambient.push(AmbientLink {
        node: 0,
        conductance: pcm.k_liquid / (0.5 * dx),
    });

    let mut s = Scenario::new(mats);
    s.discharge.c_rate = 0.0;
    s.discharge.initial_temperature = pcm.solidus;
    s.discharge.duration = duration;
    s.ambient_temperature = WALL_TEMPERATURE;
    s.dt = dt;
    let r = Simulation::with_network(s, net).unwrap().run().unwrap();
    let numerical: f64 = r.final_state.pcm.iter().map(|p| p.melt_fraction * dx).sum();

    let stefan = pcm.c * (WALL_TEMPERATURE - pcm.solidus) / pcm.latent_heat;
    let alpha = pcm.k_liquid / (pcm.rho * pcm.c);
    let exact = 2.0 * neumann_lambda(stefan) * (alpha * duration).sqrt();
    (numerical, exact)
}
