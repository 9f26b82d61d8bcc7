//! Reduced-order thermal network of the module.
//!
//! Each cell is a single lumped node (Bi = h·r/2k stays far below 0.1 with
//! k_b = 28 W/(m·K) for any wall coefficient seen here). Each cell owns an
//! aluminium sleeve ("wall") node. Every layer carries one PCM node per
//! column and `segments_per_leg` channel segments per leg. Coolant
//! advects through the segments along the circuits chosen by the
//! [`CoolingDirection`].

mod geometry;
pub mod hydraulics;

use std::fmt::Write as _;

pub use geometry::{CoolingDirection, ModuleGeometry};
pub use hydraulics::{convection_coefficient, pressure_drop, HydraulicPath};

use crate::error::NetworkError;
use crate::heatgen::BatterySpec;
use crate::materials::{composite_conductivity, CoolantProps, FoamProps, PcmProps, SolidProps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Battery,
    Wall,
    Pcm,
    Channel,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Battery => "battery",
            NodeKind::Wall => "wall",
            NodeKind::Pcm => "pcm",
            NodeKind::Channel => "channel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
    /// Sensible heat capacity, J/K. For PCM nodes this is the solid-state
    /// slope (PCM sensible plus foam); latent heat lives in [`PcmNode`].
    pub capacity: f64,
    pub volume: f64,
}

/// PCM bookkeeping for one gap node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcmNode {
    pub node: usize,
    /// Mass of PCM in the node, kg (zero for an unfilled gap).
    pub pcm_mass: f64,
    /// Heat capacity of the foam skeleton, J/K.
    pub foam_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Conduction,
    ConvectionToCoolant,
    ConvectionToAmbient,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Conduction => "conduction",
            LinkKind::ConvectionToCoolant => "convection-to-coolant",
            LinkKind::ConvectionToAmbient => "convection-to-ambient",
        }
    }
}

/// How a link's conductance is evaluated for the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkModel {
    Fixed(f64),
    /// Wall conduction in series with channel convection over `area`.
    Coolant { area: f64, wall: f64, circuit: usize },
    /// Conduction through the PCM/foam composite: G = k_eff·`factor`,
    /// optionally in series with a wall conductance. `k_eff` is the
    /// harmonic mean of the listed PCM nodes' values.
    Composite {
        factor: f64,
        wall: Option<f64>,
        pcm: [Option<usize>; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub kind: LinkKind,
    pub model: LinkModel,
}

/// Convective loss from a node to the ambient, W/K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientLink {
    pub node: usize,
    pub conductance: f64,
}

/// One inlet→outlet path.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    /// Channel leg ids in flow order.
    pub legs: Vec<usize>,
    /// Channel node ids in flow order.
    pub path: Vec<usize>,
    pub hydraulics: HydraulicPath,
}

/// Materials needed to build a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSet {
    pub battery: BatterySpec,
    pub coolant: CoolantProps,
    pub pcm: Option<PcmProps>,
    /// Metal foam in the gaps; `None` leaves the gaps to the PCM alone.
    pub foam: Option<FoamProps>,
    pub housing: SolidProps,
    /// Nusselt override for the channel convection.
    pub nusselt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNetwork {
    pub geometry: ModuleGeometry,
    pub direction: CoolingDirection,
    pub materials: MaterialSet,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub ambient: Vec<AmbientLink>,
    pub pcm_nodes: Vec<PcmNode>,
    pub circuits: Vec<Circuit>,
}

impl ThermalNetwork {
    /// Empty network for hand-built test problems.
    pub fn empty(materials: MaterialSet) -> Self {
        ThermalNetwork {
            geometry: ModuleGeometry::minimal(),
            direction: CoolingDirection::default(),
            materials,
            nodes: Vec::new(),
            links: Vec::new(),
            ambient: Vec::new(),
            pcm_nodes: Vec::new(),
            circuits: Vec::new(),
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, label: impl Into<String>, capacity: f64, volume: f64) -> usize {
        self.nodes.push(Node {
            kind,
            label: label.into(),
            capacity,
            volume,
        });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.kind == kind)
            .map(|(i, _)| i)
    }

    pub fn battery_nodes(&self) -> Vec<usize> {
        self.nodes_of(NodeKind::Battery).collect()
    }

    pub fn volume_of(&self, kind: NodeKind) -> f64 {
        self.nodes.iter().filter(|n| n.kind == kind).map(|n| n.volume).sum()
    }

    pub fn total_pcm_mass(&self) -> f64 {
        self.pcm_nodes.iter().map(|p| p.pcm_mass).sum()
    }

    /// Total sensible heat capacity of all nodes, J/K.
    pub fn total_capacity(&self) -> f64 {
        self.nodes.iter().map(|n| n.capacity).sum()
    }

    /// Splits a total mass flow over the parallel circuits in proportion
    /// to their laminar conductance (inverse length).
    pub fn circuit_flows(&self, total: f64) -> Vec<f64> {
        let weights: Vec<f64> = self.circuits.iter().map(|c| 1.0 / c.hydraulics.length).collect();
        let sum: f64 = weights.iter().sum();
        weights.iter().map(|w| total * w / sum).collect()
    }

    /// Module pressure drop at a total mass flow, Pa. Circuits are in
    /// parallel, so the largest circuit drop sets the pump head.
    pub fn pressure_drop(&self, total_flow: f64, bend_loss_coefficient: f64) -> f64 {
        self.circuit_flows(total_flow)
            .iter()
            .zip(&self.circuits)
            .map(|(&m, c)| pressure_drop(m, &self.geometry, &self.materials.coolant, c.hydraulics, bend_loss_coefficient))
            .fold(0.0, f64::max)
    }

    /// Current conductance of every link, W/K.
    ///
    /// `circuit_flows` sets the convection regime per circuit; `melt` holds
    /// the melt fraction of each entry in `pcm_nodes`.
    pub fn conductances(&self, circuit_flows: &[f64], melt: &[f64]) -> Vec<f64> {
        let mats = &self.materials;
        let h: Vec<f64> = circuit_flows
            .iter()
            .map(|&m| convection_coefficient(m, &self.geometry, &mats.coolant, mats.nusselt))
            .collect();
        let k_eff = |pcm_index: usize| -> f64 {
            let fill = match &mats.pcm {
                Some(p) if self.pcm_nodes[pcm_index].pcm_mass > 0.0 => p.conductivity(melt[pcm_index]),
                _ => 0.0,
            };
            match &mats.foam {
                Some(f) => composite_conductivity(fill, f),
                None => fill,
            }
        };
        self.links
            .iter()
            .map(|link| match link.model {
                LinkModel::Fixed(g) => g,
                LinkModel::Coolant { area, wall, circuit } => series(h[circuit] * area, wall),
                LinkModel::Composite { factor, wall, pcm } => {
                    let ks: Vec<f64> = pcm.iter().flatten().map(|&i| k_eff(i)).collect();
                    let k = match ks.as_slice() {
                        [] => 0.0,
                        [k] => *k,
                        [a, b] => harmonic_mean(*a, *b),
                        _ => unreachable!(),
                    };
                    let g = k * factor;
                    match wall {
                        Some(w) => series(g, w),
                        None => g,
                    }
                }
            })
            .collect()
    }

    /// Node table as CSV.
    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("id,kind,label,capacity_J_per_K,volume_m3\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{},{:.9e},{:.9e}", n.kind.as_str(), n.label, n.capacity, n.volume);
        }
        out
    }

    /// Edge table as CSV, conductances evaluated with all circuits flowing
    /// and all PCM solid. Ambient links have an empty `b`.
    pub fn edges_csv(&self) -> String {
        let flows = vec![1.0; self.circuits.len()];
        let melt = vec![0.0; self.pcm_nodes.len()];
        let g = self.conductances(&flows, &melt);
        let mut out = String::from("a,b,kind,conductance_W_per_K\n");
        for (link, g) in self.links.iter().zip(g) {
            let _ = writeln!(out, "{},{},{},{:.9e}", link.a, link.b, link.kind.as_str(), g);
        }
        for amb in &self.ambient {
            let _ = writeln!(
                out,
                "{},,{},{:.9e}",
                amb.node,
                LinkKind::ConvectionToAmbient.as_str(),
                amb.conductance
            );
        }
        out
    }

    /// True when every node is reachable from node 0 through links.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for l in &self.links {
            adjacency[l.a].push(l.b);
            adjacency[l.b].push(l.a);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &m in &adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn series(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Leg ids per circuit, in flow order.
fn route(geom: &ModuleGeometry, direction: CoolingDirection) -> Result<Vec<Vec<usize>>, NetworkError> {
    let n = geom.n_legs();
    let legs_per_layer = geom.legs_per_layer();
    if n == 1 {
        return Ok(vec![vec![0]]);
    }
    if direction.is_interleaved() {
        if legs_per_layer != 2 {
            return Err(NetworkError::DirectionNeedsTwoLegs {
                direction: direction.id(),
                legs: legs_per_layer,
            });
        }
        let a: Vec<usize> = (0..geom.n_layers).map(|l| 2 * l).collect();
        let mut b: Vec<usize> = (0..geom.n_layers).map(|l| 2 * l + 1).collect();
        if direction.id() == 6 {
            b.reverse();
        }
        return Ok(vec![a, b]);
    }
    // banded: each list runs outer end → inner end
    let split = n.div_ceil(2);
    let mut a: Vec<usize> = (0..split).collect();
    let mut b: Vec<usize> = (split..n).rev().collect();
    let (a_outer, b_outer) = match direction.id() {
        1 => (false, false),
        2 => (true, false),
        3 => (false, true),
        _ => (true, true),
    };
    if !a_outer {
        a.reverse();
    }
    if !b_outer {
        b.reverse();
    }
    Ok(vec![a, b])
}

/// Assembles the network for a geometry, direction and material set.
/// `ambient_h` is the outer-surface convection coefficient, W/(m²·K).
pub fn build_network(
    geom: &ModuleGeometry,
    direction: CoolingDirection,
    mats: &MaterialSet,
    ambient_h: f64,
) -> Result<ThermalNetwork, NetworkError> {
    geom.validate()?;
    mats.coolant.validate()?;
    if let Some(f) = &mats.foam {
        f.validate()?;
    }
    mats.housing.validate()?;
    mats.battery.validate()?;
    if let Some(p) = &mats.pcm {
        p.validate()?;
    }
    if !(ambient_h.is_finite() && ambient_h >= 0.0) {
        return Err(NetworkError::Geometry(format!("ambient_h must be >= 0, got {ambient_h}")));
    }

    let mut net = ThermalNetwork::empty(*mats);
    net.geometry = *geom;
    net.direction = direction;

    let (rows, cols, layers) = (geom.rows, geom.cols, geom.n_layers);
    let pitch = geom.pitch();
    let height = geom.cell_height;
    let k_al = mats.housing.k;
    let al_vol_cap = mats.housing.rho * mats.housing.c;

    // batteries; `battery` holds the outer node of each cell
    let batt = &mats.battery;
    let v_node = geom.cell_volume() / geom.cell_nodes as f64;
    let mut cores = Vec::new();
    let battery: Vec<usize> = (0..rows * cols)
        .map(|i| {
            let label = format!("cell_r{}_c{}", i / cols, i % cols);
            let cap = batt.rho * batt.c * v_node;
            if geom.cell_nodes == 2 {
                let core = net.add_node(NodeKind::Battery, format!("{label}_core"), cap, v_node);
                let shell = net.add_node(NodeKind::Battery, format!("{label}_shell"), cap, v_node);
                cores.push((core, shell));
                shell
            } else {
                net.add_node(NodeKind::Battery, label, cap, v_node)
            }
        })
        .collect();

    // walls: sleeve plus a share of the adjacent layer ribs
    let mut wall_volume = vec![geom.sleeve_volume(); rows * cols];
    for l in 0..layers {
        let adjacent = geom.rows_adjacent_to_layer(l);
        let share = geom.layer_rib_volume() / (cols * adjacent.len()) as f64;
        for &r in &adjacent {
            for c in 0..cols {
                wall_volume[r * cols + c] += share;
            }
        }
    }
    let wall: Vec<usize> = wall_volume
        .iter()
        .enumerate()
        .map(|(i, &v)| net.add_node(NodeKind::Wall, format!("wall_r{}_c{}", i / cols, i % cols), al_vol_cap * v, v))
        .collect();

    // PCM/foam gaps, one node per (layer, column); empty gaps get no node
    let slots = geom.pcm_slots_per_layer() as f64;
    let gap_volume = slots * geom.channel_width * geom.pcm_height * pitch;
    let porosity = mats.foam.map_or(1.0, |f| f.porosity);
    let foam_capacity = mats
        .foam
        .map_or(0.0, |f| (1.0 - f.porosity) * gap_volume * f.rho * f.c);
    let filled_gaps = mats.pcm.is_some() || foam_capacity > 0.0;
    let mut pcm_ids = Vec::with_capacity(layers * cols);
    for l in (0..layers).filter(|_| filled_gaps) {
        for c in 0..cols {
            let pcm_mass = mats.pcm.map_or(0.0, |p| porosity * gap_volume * p.rho);
            let sensible = foam_capacity + mats.pcm.map_or(0.0, |p| pcm_mass * p.c);
            let id = net.add_node(NodeKind::Pcm, format!("gap_l{l}_c{c}"), sensible, gap_volume);
            net.pcm_nodes.push(PcmNode {
                node: id,
                pcm_mass,
                foam_capacity,
            });
            pcm_ids.push(id);
        }
    }

    // channel segments
    let n_seg = geom.segments_per_leg;
    let leg_len = geom.leg_length();
    let seg_len = leg_len / n_seg as f64;
    let seg_volume = geom.channel_cross_section() * seg_len;
    let coolant_cap = mats.coolant.volumetric_heat_capacity() * seg_volume;
    let legs_per_layer = geom.legs_per_layer();
    let mut channel = Vec::with_capacity(geom.n_legs());
    for leg in 0..geom.n_legs() {
        let segs: Vec<usize> = (0..n_seg)
            .map(|s| net.add_node(NodeKind::Channel, format!("leg{leg}_s{s}"), coolant_cap, seg_volume))
            .collect();
        channel.push(segs);
    }

    let conduction = |net: &mut ThermalNetwork, a: usize, b: usize, model: LinkModel| {
        net.links.push(Link {
            a,
            b,
            kind: LinkKind::Conduction,
            model,
        });
    };

    // cell interior, from the steady profile of a uniformly heated
    // cylinder: 8πkH mean-to-surface for one node; with a core of radius
    // R/√2, 4πkH core-to-shell and 16πkH shell-to-surface
    let g_cell = 8.0 * std::f64::consts::PI * batt.k * height;
    let g_surface = if cores.is_empty() { g_cell } else { 2.0 * g_cell };
    for i in 0..rows * cols {
        conduction(&mut net, battery[i], wall[i], LinkModel::Fixed(g_surface));
    }
    for &(core, shell) in &cores {
        conduction(&mut net, core, shell, LinkModel::Fixed(0.5 * g_cell));
    }

    // sleeve-to-sleeve along a row and across rows
    let web = geom.pitch() - geom.cell_diameter;
    let g_web = k_al * web * height / pitch;
    let rib_height = height - geom.stack_height();
    let g_rib = k_al * rib_height * pitch / (geom.layer_thickness() + web);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                conduction(&mut net, wall[i], wall[i + 1], LinkModel::Fixed(g_web));
            }
            if r + 1 < rows {
                let g = if r < layers { g_rib } else { g_web };
                if g > 0.0 {
                    conduction(&mut net, wall[i], wall[i + cols], LinkModel::Fixed(g));
                }
            }
        }
    }

    // sleeves to gaps, and gap to gap along the layer
    let face = slots * geom.pcm_height * pitch;
    for l in (0..layers).filter(|_| filled_gaps) {
        let adjacent = geom.rows_adjacent_to_layer(l);
        for c in 0..cols {
            let p = l * cols + c;
            for &r in &adjacent {
                conduction(
                    &mut net,
                    wall[r * cols + c],
                    pcm_ids[p],
                    LinkModel::Composite {
                        factor: face / (0.5 * geom.channel_width),
                        wall: Some(k_al * face / geom.wall_thickness),
                        pcm: [Some(p), None],
                    },
                );
            }
            if c + 1 < cols {
                conduction(
                    &mut net,
                    pcm_ids[p],
                    pcm_ids[p + 1],
                    LinkModel::Composite {
                        factor: slots * geom.channel_width * geom.pcm_height / pitch,
                        wall: None,
                        pcm: [Some(p), Some(p + 1)],
                    },
                );
            }
        }
    }

    // circuits
    let routes = route(geom, direction)?;
    let mut circuit_of_leg = vec![0usize; geom.n_legs()];
    for (ci, legs) in routes.iter().enumerate() {
        let mut path = Vec::with_capacity(legs.len() * n_seg);
        for (k, &leg) in legs.iter().enumerate() {
            circuit_of_leg[leg] = ci;
            if k % 2 == 0 {
                path.extend(channel[leg].iter().copied());
            } else {
                path.extend(channel[leg].iter().rev().copied());
            }
        }
        net.circuits.push(Circuit {
            legs: legs.clone(),
            path,
            hydraulics: HydraulicPath {
                length: legs.len() as f64 * leg_len,
                bends: legs.len() - 1,
            },
        });
    }

    // sleeves to coolant
    let perimeter = geom.wetted_perimeter();
    for (leg, segs) in channel.iter().enumerate() {
        let layer = leg / legs_per_layer;
        let adjacent = geom.rows_adjacent_to_layer(layer);
        for (s, &node) in segs.iter().enumerate() {
            let (x0, x1) = (s as f64 * seg_len, (s + 1) as f64 * seg_len);
            for c in 0..cols {
                let overlap = (x1.min((c + 1) as f64 * pitch) - x0.max(c as f64 * pitch)).max(0.0);
                if overlap <= 1e-12 * leg_len {
                    continue;
                }
                for &r in &adjacent {
                    net.links.push(Link {
                        a: wall[r * cols + c],
                        b: node,
                        kind: LinkKind::ConvectionToCoolant,
                        model: LinkModel::Coolant {
                            area: perimeter * overlap / adjacent.len() as f64,
                            wall: k_al * geom.channel_height * overlap / geom.wall_thickness,
                            circuit: circuit_of_leg[leg],
                        },
                    });
                }
            }
        }
    }

    // outer surfaces
    if ambient_h > 0.0 {
        let end_area = geom.cell_end_area();
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                net.ambient.push(AmbientLink {
                    node: battery[i],
                    conductance: ambient_h * 2.0 * end_area,
                });
                let mut area = 2.0 * (pitch * pitch - end_area);
                let exposed_sides = [c == 0, c + 1 == cols, r == 0, r + 1 == rows]
                    .iter()
                    .filter(|&&e| e)
                    .count();
                area += exposed_sides as f64 * pitch * height;
                for l in 0..layers {
                    let adjacent = geom.rows_adjacent_to_layer(l);
                    if adjacent.contains(&r) {
                        area += 2.0 * geom.layer_thickness() * pitch / adjacent.len() as f64;
                    }
                }
                net.ambient.push(AmbientLink {
                    node: wall[i],
                    conductance: ambient_h * area,
                });
            }
        }
    }

    if !net.is_connected() {
        return Err(NetworkError::Geometry("network is not connected".into()));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{coolant_catalog, fixtures, PcmProps};
    use approx::assert_relative_eq;

    pub(crate) fn materials() -> MaterialSet {
        MaterialSet {
            battery: BatterySpec::with_resistance(0.03),
            coolant: coolant_catalog("Nf(Al)").unwrap(),
            pcm: Some(PcmProps::rt35(fixtures::RT35_LATENT_HEAT)),
            foam: Some(FoamProps::default()),
            housing: SolidProps::aluminium(),
            nusselt: None,
        }
    }

    #[test]
    fn default_network_counts_and_volumes() {
        let g = ModuleGeometry::default();
        let net = build_network(&g, CoolingDirection::OUTER_INLETS, &materials(), 5.0).unwrap();
        assert_eq!(net.battery_nodes().len(), 36);
        assert_eq!(net.nodes_of(NodeKind::Pcm).count(), 30);
        assert_eq!(net.nodes_of(NodeKind::Channel).count(), 60);
        assert!(net.is_connected());

        // 5 × 3 × 0.002 × 0.007 × 0.12 m³ of gap, 95 % of it PCM
        let pcm_volume: f64 = net.pcm_nodes.iter().map(|p| p.pcm_mass).sum::<f64>() / 770.0;
        assert_relative_eq!(pcm_volume, 2.52e-5 * 0.95, max_relative = 1e-12);
        assert_relative_eq!(net.total_pcm_mass(), 770.0 * 2.52e-5 * 0.95, max_relative = 1e-12);

        assert_relative_eq!(net.volume_of(NodeKind::Battery), 36.0 * g.cell_volume(), max_relative = 1e-12);
        assert_relative_eq!(net.volume_of(NodeKind::Wall), g.total_housing_volume(), max_relative = 1e-12);
        assert_relative_eq!(net.volume_of(NodeKind::Pcm), g.total_gap_volume(), max_relative = 1e-12);
        assert_relative_eq!(net.volume_of(NodeKind::Channel), g.total_channel_volume(), max_relative = 1e-12);
    }

    #[test]
    fn every_battery_touches_a_wall_and_every_segment_one_path() {
        let g = ModuleGeometry::default();
        for d in CoolingDirection::ALL {
            let net = build_network(&g, d, &materials(), 5.0).unwrap();
            for b in net.battery_nodes() {
                assert!(net
                    .links
                    .iter()
                    .any(|l| (l.a == b && net.nodes[l.b].kind == NodeKind::Wall)
                        || (l.b == b && net.nodes[l.a].kind == NodeKind::Wall)));
            }
            let mut count = vec![0; net.len()];
            for c in &net.circuits {
                for &n in &c.path {
                    count[n] += 1;
                }
            }
            for n in net.nodes_of(NodeKind::Channel) {
                assert_eq!(count[n], 1, "segment {n} direction {d}");
            }
        }
    }

    #[test]
    fn two_node_cells_keep_capacity_and_series_conductance() {
        let mut g = ModuleGeometry::default();
        let one = build_network(&g, CoolingDirection::default(), &materials(), 5.0).unwrap();
        g.cell_nodes = 2;
        let two = build_network(&g, CoolingDirection::default(), &materials(), 5.0).unwrap();
        assert_eq!(two.battery_nodes().len(), 72);
        assert_relative_eq!(two.total_capacity(), one.total_capacity(), max_relative = 1e-12);
        assert_relative_eq!(two.volume_of(NodeKind::Battery), one.volume_of(NodeKind::Battery), max_relative = 1e-12);
        assert!(two.is_connected());
        let fixed = |net: &ThermalNetwork, a: usize, b: usize| -> f64 {
            net.links
                .iter()
                .find(|l| (l.a, l.b) == (a, b))
                .map(|l| match l.model {
                    LinkModel::Fixed(g) => g,
                    _ => panic!("cell links are fixed"),
                })
                .unwrap()
        };
        let lumped = fixed(&one, 0, 36);
        let core_shell = fixed(&two, 0, 1);
        let shell_wall = fixed(&two, 1, 72);
        // steady uniform heating Q: the volume-mean excess over the wall matches
        let shell_excess = 1.0 / shell_wall;
        let core_excess = shell_excess + 0.5 / core_shell;
        assert_relative_eq!(0.5 * (shell_excess + core_excess), 1.0 / lumped, max_relative = 1e-12);
        g.cell_nodes = 3;
        assert!(build_network(&g, CoolingDirection::default(), &materials(), 5.0).is_err());
    }

    #[test]
    fn minimal_network_has_four_nodes() {
        let net = build_network(&ModuleGeometry::minimal(), CoolingDirection::default(), &materials(), 5.0).unwrap();
        let kinds: Vec<NodeKind> = net.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(kinds, vec![NodeKind::Battery, NodeKind::Wall, NodeKind::Pcm, NodeKind::Channel]);
        assert!(net.is_connected());
        assert_eq!(net.circuits.len(), 1);
    }

    #[test]
    fn directions_share_nodes_but_not_paths() {
        let g = ModuleGeometry::default();
        let one = build_network(&g, CoolingDirection::new(1).unwrap(), &materials(), 5.0).unwrap();
        let four = build_network(&g, CoolingDirection::new(4).unwrap(), &materials(), 5.0).unwrap();
        assert_eq!(one.nodes, four.nodes);
        assert_ne!(one.circuits[0].path, four.circuits[0].path);
        let capacity = one.total_capacity();
        for d in CoolingDirection::ALL {
            let net = build_network(&g, d, &materials(), 5.0).unwrap();
            assert_eq!(net.total_capacity(), capacity);
            assert_eq!(net.circuits.len(), 2);
            assert!(net.circuits.iter().all(|c| c.legs.len() == 5));
        }
    }

    #[test]
    fn outer_inlets_start_at_the_edge_layers() {
        let g = ModuleGeometry::default();
        let net = build_network(&g, CoolingDirection::OUTER_INLETS, &materials(), 5.0).unwrap();
        assert_eq!(net.circuits[0].legs, vec![0, 1, 2, 3, 4]);
        assert_eq!(net.circuits[1].legs, vec![9, 8, 7, 6, 5]);
        let inner = build_network(&g, CoolingDirection::new(1).unwrap(), &materials(), 5.0).unwrap();
        assert_eq!(inner.circuits[0].legs, vec![4, 3, 2, 1, 0]);
        assert_eq!(inner.circuits[1].legs, vec![5, 6, 7, 8, 9]);
    }

    #[test]
    fn interleaved_needs_two_legs() {
        let mut g = ModuleGeometry::default();
        g.composite_number = 4;
        let err = build_network(&g, CoolingDirection::new(5).unwrap(), &materials(), 5.0).unwrap_err();
        assert!(matches!(err, NetworkError::DirectionNeedsTwoLegs { .. }));
    }

    #[test]
    fn coolant_conductance_drops_to_floor_without_flow() {
        let g = ModuleGeometry::default();
        let net = build_network(&g, CoolingDirection::default(), &materials(), 5.0).unwrap();
        let melt = vec![0.0; net.pcm_nodes.len()];
        let flowing = net.conductances(&[1e-3, 1e-3], &melt);
        let stagnant = net.conductances(&[0.0, 0.0], &melt);
        for (i, link) in net.links.iter().enumerate() {
            if link.kind == LinkKind::ConvectionToCoolant {
                assert!(stagnant[i] < flowing[i]);
            } else {
                assert_eq!(stagnant[i], flowing[i]);
            }
        }
    }

    #[test]
    fn csv_dump_has_every_node_and_edge() {
        let net = build_network(&ModuleGeometry::minimal(), CoolingDirection::default(), &materials(), 5.0).unwrap();
        assert_eq!(net.nodes_csv().lines().count(), 1 + net.len());
        assert_eq!(net.edges_csv().lines().count(), 1 + net.links.len() + net.ambient.len());
    }

    #[test]
    fn empty_gaps_have_no_nodes() {
        let mats = MaterialSet {
            pcm: None,
            foam: None,
            ..materials()
        };
        let net = build_network(&ModuleGeometry::default(), CoolingDirection::default(), &mats, 5.0).unwrap();
        assert_eq!(net.nodes_of(NodeKind::Pcm).count(), 0);
        assert!(net.is_connected());
        let foam_only = MaterialSet { pcm: None, ..materials() };
        let net = build_network(&ModuleGeometry::default(), CoolingDirection::default(), &foam_only, 5.0).unwrap();
        assert_eq!(net.nodes_of(NodeKind::Pcm).count(), 30);
        assert_eq!(net.total_pcm_mass(), 0.0);
    }

    #[test]
    fn rejects_negative_geometry() {
        let mut g = ModuleGeometry::default();
        g.cell_diameter = -0.018;
        assert!(build_network(&g, CoolingDirection::default(), &materials(), 5.0).is_err());
    }
}
