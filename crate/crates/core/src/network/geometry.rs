use serde::{Deserialize, Serialize};

use crate::error::NetworkError;

/// Module layout: `rows × cols` cylindrical cells in an aluminium housing,
/// with `n_layers` channel/PCM layers running along the rows.
///
/// A layer sits between cell rows `k` and `k + 1` and spans the whole
/// cell height. Inside a layer, `composite_number` PCM slots of height
/// `pcm_height` alternate with `composite_number − 1` channel legs of
/// height `channel_height`; all slots are `channel_width` wide. The rest
/// of the layer is aluminium rib.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleGeometry {
    #[serde(default = "d::rows")]
    pub rows: usize,
    #[serde(default = "d::cols")]
    pub cols: usize,
    #[serde(default = "d::cell_height")]
    pub cell_height: f64,
    #[serde(default = "d::cell_diameter")]
    pub cell_diameter: f64,
    #[serde(default = "d::channel_height")]
    pub channel_height: f64,
    #[serde(default = "d::pcm_height")]
    pub pcm_height: f64,
    #[serde(default = "d::channel_width")]
    pub channel_width: f64,
    #[serde(default = "d::wall_thickness")]
    pub wall_thickness: f64,
    #[serde(default = "d::n_layers")]
    pub n_layers: usize,
    #[serde(default = "d::composite_number")]
    pub composite_number: usize,
    #[serde(default = "d::segments_per_leg")]
    pub segments_per_leg: usize,
    /// Thermal nodes per cell: 1 (lumped) or 2 (core and outer shell of
    /// equal volume).
    #[serde(default = "d::cell_nodes")]
    pub cell_nodes: usize,
}

mod d {
    pub fn rows() -> usize {
        6
    }
    pub fn cols() -> usize {
        6
    }
    pub fn cell_height() -> f64 {
        0.068
    }
    pub fn cell_diameter() -> f64 {
        0.018
    }
    pub fn channel_height() -> f64 {
        0.007
    }
    pub fn pcm_height() -> f64 {
        0.007
    }
    pub fn channel_width() -> f64 {
        0.002
    }
    pub fn wall_thickness() -> f64 {
        0.001
    }
    pub fn n_layers() -> usize {
        5
    }
    pub fn composite_number() -> usize {
        3
    }
    pub fn segments_per_leg() -> usize {
        6
    }
    pub fn cell_nodes() -> usize {
        1
    }
}

impl Default for ModuleGeometry {
    fn default() -> Self {
        ModuleGeometry {
            rows: d::rows(),
            cols: d::cols(),
            cell_height: d::cell_height(),
            cell_diameter: d::cell_diameter(),
            channel_height: d::channel_height(),
            pcm_height: d::pcm_height(),
            channel_width: d::channel_width(),
            wall_thickness: d::wall_thickness(),
            n_layers: d::n_layers(),
            composite_number: d::composite_number(),
            segments_per_leg: d::segments_per_leg(),
            cell_nodes: d::cell_nodes(),
        }
    }
}

impl ModuleGeometry {
    /// Single cell, single layer with one one-segment leg.
    pub fn minimal() -> Self {
        ModuleGeometry {
            rows: 1,
            cols: 1,
            n_layers: 1,
            composite_number: 2,
            segments_per_leg: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let err = |m: String| Err(NetworkError::Geometry(m));
        for (name, v) in [
            ("cell_height", self.cell_height),
            ("cell_diameter", self.cell_diameter),
            ("channel_height", self.channel_height),
            ("pcm_height", self.pcm_height),
            ("channel_width", self.channel_width),
            ("wall_thickness", self.wall_thickness),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return err(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.rows == 0 || self.cols == 0 {
            return err("rows and cols must be at least 1".into());
        }
        if self.n_layers == 0 || self.n_layers > self.rows {
            return err(format!(
                "n_layers must be in 1..={} (one layer per row gap), got {}",
                self.rows, self.n_layers
            ));
        }
        if self.composite_number < 2 {
            return err("composite_number must be at least 2 (one channel leg)".into());
        }
        if self.segments_per_leg == 0 {
            return err("segments_per_leg must be at least 1".into());
        }
        if !(1..=2).contains(&self.cell_nodes) {
            return err(format!("cell_nodes must be 1 or 2, got {}", self.cell_nodes));
        }
        if self.stack_height() > self.cell_height {
            return err(format!(
                "channel/PCM stack ({:.4} m) does not fit in the cell height ({:.4} m)",
                self.stack_height(),
                self.cell_height
            ));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Channel legs per layer.
    pub fn legs_per_layer(&self) -> usize {
        self.composite_number - 1
    }

    /// PCM slots per layer.
    pub fn pcm_slots_per_layer(&self) -> usize {
        self.composite_number
    }

    pub fn n_legs(&self) -> usize {
        self.n_layers * self.legs_per_layer()
    }

    /// Cell centre-to-centre spacing along a row.
    pub fn pitch(&self) -> f64 {
        self.cell_diameter + 2.0 * self.wall_thickness
    }

    /// Length of one channel leg (the row length).
    pub fn leg_length(&self) -> f64 {
        self.cols as f64 * self.pitch()
    }

    /// Height of the channel/PCM stack inside one layer.
    pub fn stack_height(&self) -> f64 {
        self.legs_per_layer() as f64 * self.channel_height + self.pcm_slots_per_layer() as f64 * self.pcm_height
    }

    /// Layer thickness between rows: slot width plus a wall on each side.
    pub fn layer_thickness(&self) -> f64 {
        self.channel_width + 2.0 * self.wall_thickness
    }

    pub fn cell_volume(&self) -> f64 {
        let r = 0.5 * self.cell_diameter;
        std::f64::consts::PI * r * r * self.cell_height
    }

    pub fn cell_lateral_area(&self) -> f64 {
        std::f64::consts::PI * self.cell_diameter * self.cell_height
    }

    pub fn cell_end_area(&self) -> f64 {
        let r = 0.5 * self.cell_diameter;
        std::f64::consts::PI * r * r
    }

    pub fn channel_cross_section(&self) -> f64 {
        self.channel_width * self.channel_height
    }

    pub fn hydraulic_diameter(&self) -> f64 {
        2.0 * self.channel_width * self.channel_height / (self.channel_width + self.channel_height)
    }

    /// Short-to-long side ratio of the channel cross-section, in (0, 1].
    pub fn aspect_ratio(&self) -> f64 {
        let (a, b) = (self.channel_width, self.channel_height);
        a.min(b) / a.max(b)
    }

    pub fn wetted_perimeter(&self) -> f64 {
        2.0 * (self.channel_width + self.channel_height)
    }

    pub fn total_channel_volume(&self) -> f64 {
        self.n_legs() as f64 * self.channel_cross_section() * self.leg_length()
    }

    /// Volume of the PCM/foam gaps (PCM plus foam skeleton).
    pub fn total_gap_volume(&self) -> f64 {
        (self.n_layers * self.pcm_slots_per_layer()) as f64 * self.channel_width * self.pcm_height * self.leg_length()
    }

    /// Aluminium around one cell, excluding any layer.
    pub fn sleeve_volume(&self) -> f64 {
        let p = self.pitch();
        (p * p - std::f64::consts::PI * 0.25 * self.cell_diameter * self.cell_diameter) * self.cell_height
    }

    /// Aluminium rib volume inside one layer.
    pub fn layer_rib_volume(&self) -> f64 {
        let l = self.leg_length();
        let slots = self.legs_per_layer() as f64 * self.channel_width * self.channel_height * l
            + self.pcm_slots_per_layer() as f64 * self.channel_width * self.pcm_height * l;
        self.layer_thickness() * l * self.cell_height - slots
    }

    pub fn total_housing_volume(&self) -> f64 {
        self.n_cells() as f64 * self.sleeve_volume() + self.n_layers as f64 * self.layer_rib_volume()
    }

    /// Rows touching layer `layer` (one or two).
    pub fn rows_adjacent_to_layer(&self, layer: usize) -> Vec<usize> {
        [Some(layer), (layer + 1 < self.rows).then_some(layer + 1)]
            .into_iter()
            .flatten()
            .collect()
    }
}

/// One of the six inlet/outlet assignments of the two circuits.
///
/// The channel legs are ordered layer by layer (top layer first, and
/// within a layer in stack order). Banded patterns give the first half of
/// that list to circuit A and the second half to circuit B, so each circuit
/// has an outer end (an edge layer) and an inner end (the middle layer).
/// Interleaved patterns give the first leg of every layer to A and the
/// second leg of every layer to B.
///
/// | id | pattern | A inlet | B inlet |
/// |----|---------|---------|---------|
/// | 1 | banded | inner | inner |
/// | 2 | banded | outer | inner |
/// | 3 | banded | inner | outer |
/// | 4 | banded | outer | outer |
/// | 5 | interleaved | top | top |
/// | 6 | interleaved | top | bottom |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CoolingDirection(u8);

impl CoolingDirection {
    pub const ALL: [CoolingDirection; 6] = [
        CoolingDirection(1),
        CoolingDirection(2),
        CoolingDirection(3),
        CoolingDirection(4),
        CoolingDirection(5),
        CoolingDirection(6),
    ];

    /// Both inlets on the outer sides.
    pub const OUTER_INLETS: CoolingDirection = CoolingDirection(4);

    pub fn new(id: u8) -> Result<Self, NetworkError> {
        if (1..=6).contains(&id) {
            Ok(CoolingDirection(id))
        } else {
            Err(NetworkError::Direction(id))
        }
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn is_interleaved(self) -> bool {
        self.0 >= 5
    }

    pub fn describe(self) -> &'static str {
        match self.0 {
            1 => "banded, both inlets at the middle layer",
            2 => "banded, A inlet outer, B inlet middle",
            3 => "banded, A inlet middle, B inlet outer",
            4 => "banded, both inlets on the outer sides",
            5 => "interleaved, both inlets at the top layer",
            _ => "interleaved, A inlet top, B inlet bottom",
        }
    }
}

impl Default for CoolingDirection {
    fn default() -> Self {
        Self::OUTER_INLETS
    }
}

impl TryFrom<u8> for CoolingDirection {
    type Error = NetworkError;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        CoolingDirection::new(id)
    }
}

impl From<CoolingDirection> for u8 {
    fn from(d: CoolingDirection) -> u8 {
        d.0
    }
}

impl std::fmt::Display for CoolingDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_volumes_by_hand() {
        let g = ModuleGeometry::default();
        g.validate().unwrap();
        assert_eq!(g.n_cells(), 36);
        assert_relative_eq!(g.pitch(), 0.020, max_relative = 1e-15);
        assert_relative_eq!(g.leg_length(), 0.12, max_relative = 1e-15);
        // 5 layers × 3 slots × 2 mm × 7 mm × 120 mm
        assert_relative_eq!(g.total_gap_volume(), 2.52e-5, max_relative = 1e-12);
        // 10 legs × 2 mm × 7 mm × 120 mm
        assert_relative_eq!(g.total_channel_volume(), 1.68e-5, max_relative = 1e-12);
        assert_relative_eq!(g.hydraulic_diameter(), 2.0 * 0.002 * 0.007 / 0.009, max_relative = 1e-15);
        assert_relative_eq!(g.stack_height(), 0.035, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut g = ModuleGeometry::default();
        g.channel_height = -1.0;
        assert!(g.validate().is_err());
        let mut g = ModuleGeometry::default();
        g.segments_per_leg = 0;
        assert!(g.validate().is_err());
        let mut g = ModuleGeometry::default();
        g.pcm_height = 0.02;
        assert!(g.validate().is_err(), "stack exceeds cell height");
        let mut g = ModuleGeometry::default();
        g.n_layers = 7;
        assert!(g.validate().is_err());
    }

    #[test]
    fn directions() {
        assert!(CoolingDirection::new(0).is_err());
        assert!(CoolingDirection::new(7).is_err());
        assert_eq!(CoolingDirection::ALL.len(), 6);
        assert_eq!(CoolingDirection::OUTER_INLETS.id(), 4);
    }

    #[test]
    fn adjacent_rows() {
        let g = ModuleGeometry::default();
        assert_eq!(g.rows_adjacent_to_layer(0), vec![0, 1]);
        assert_eq!(g.rows_adjacent_to_layer(4), vec![4, 5]);
        assert_eq!(ModuleGeometry::minimal().rows_adjacent_to_layer(0), vec![0]);
    }
}
