//! Time integration of the module network.
//!
//! Each step first advects the coolant explicitly (first-order upwind,
//! sub-stepped so the Courant number stays at or below one), then solves
//! conduction, wall convection, ambient loss and the PCM enthalpy balance
//! with backward Euler. PCM nodes are linearised around the current
//! enthalpy branch and iterated until the recovered temperature agrees with
//! the linear solution. Heat generation is evaluated at the start of the
//! step.

mod audit;
pub mod linear;

use rayon::prelude::*;

pub use audit::EnergyAudit;
use linear::{conjugate_gradient, CsrMatrix};

use crate::control::{flow_rate, ControlInputs, ControllerState, FlowSchedule};
use crate::error::SolverError;
use crate::heatgen::{cell_current, heat_generation, DischargeSpec, KELVIN};
use crate::materials::{temperature_from_enthalpy, PcmState};
use crate::network::{build_network, CoolingDirection, MaterialSet, ModuleGeometry, NodeKind, ThermalNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Relative residual for each linear solve.
    pub linear_tolerance: f64,
    pub max_linear_iterations: usize,
    /// Agreement between linearised and recovered PCM temperature, K.
    pub phase_tolerance: f64,
    pub max_phase_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            linear_tolerance: 1e-12,
            max_linear_iterations: 2000,
            phase_tolerance: 1e-10,
            max_phase_iterations: 50,
        }
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ModuleGeometry,
    pub direction: CoolingDirection,
    pub materials: MaterialSet,
    pub discharge: DischargeSpec,
    pub schedule: FlowSchedule,
    /// W/(m²·K)
    pub ambient_h: f64,
    /// °C
    pub ambient_temperature: f64,
    /// Coolant inlet temperature, °C. Ambient when unset.
    pub inlet_temperature: Option<f64>,
    /// s
    pub dt: f64,
    /// Gauge pressure at the outlets, Pa. Pressure drops do not depend on it.
    pub outlet_pressure: f64,
    /// Minor-loss coefficient per U-bend.
    pub bend_loss_coefficient: f64,
    pub settings: SolverSettings,
}

impl Scenario {
    pub fn new(materials: MaterialSet) -> Self {
        Scenario {
            geometry: ModuleGeometry::default(),
            direction: CoolingDirection::default(),
            materials,
            discharge: DischargeSpec::default(),
            schedule: FlowSchedule::default(),
            ambient_h: 5.0,
            ambient_temperature: 25.0,
            inlet_temperature: None,
            dt: 1.0,
            outlet_pressure: 0.0,
            bend_loss_coefficient: 0.0,
            settings: SolverSettings::default(),
        }
    }

    pub fn inlet(&self) -> f64 {
        self.inlet_temperature.unwrap_or(self.ambient_temperature)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SolverError::Scenario(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.ambient_h.is_finite() && self.ambient_h >= 0.0) {
            return Err(SolverError::Scenario(format!("ambient_h must be >= 0, got {}", self.ambient_h)));
        }
        if !self.ambient_temperature.is_finite() || !self.inlet().is_finite() {
            return Err(SolverError::Scenario("ambient and inlet temperatures must be finite".into()));
        }
        if !(self.bend_loss_coefficient >= 0.0) {
            return Err(SolverError::Scenario("bend_loss_coefficient must be >= 0".into()));
        }
        let b = &self.materials.battery;
        let g = &self.geometry;
        if (b.cell_height - g.cell_height).abs() > 1e-12 || (b.cell_diameter - g.cell_diameter).abs() > 1e-12 {
            return Err(SolverError::Scenario(format!(
                "battery cell size {}×{} m differs from geometry cell size {}×{} m",
                b.cell_height, b.cell_diameter, g.cell_height, g.cell_diameter
            )));
        }
        self.discharge.validate()?;
        self.schedule.validate()?;
        Ok(())
    }

    pub fn build_network(&self) -> Result<ThermalNetwork, SolverError> {
        Ok(build_network(&self.geometry, self.direction, &self.materials, self.ambient_h)?)
    }
}

/// Full solution state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// °C per network node.
    pub temperatures: Vec<f64>,
    /// One entry per PCM-filled gap node, aligned with `ThermalNetwork::pcm_nodes`.
    pub pcm: Vec<PcmState>,
    pub controller: ControllerState,
    /// Flow used over the last step, kg/s.
    pub mass_flow: f64,
    /// Pa
    pub dp: f64,
}

/// One recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub t_max: f64,
    pub t_avg: f64,
    pub xi_mean: f64,
    pub mass_flow: f64,
    pub dp: f64,
    pub pump_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub series: Vec<SeriesRow>,
    pub final_state: SimState,
    pub audit: EnergyAudit,
}

impl SimResult {
    /// ∫ Δp·ṁ/ρ dt over the recorded steps, J.
    pub fn pump_energy(&self) -> f64 {
        let mut previous = 0.0;
        let mut total = 0.0;
        for row in &self.series {
            total += row.pump_power * (row.t - previous);
            previous = row.t;
        }
        total
    }

    pub fn t_max_peak(&self) -> Option<f64> {
        self.series.iter().map(|r| r.t_max).reduce(f64::max)
    }

    pub fn last(&self) -> Option<&SeriesRow> {
        self.series.last()
    }

    pub fn series_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("t,T_max,T_avg,xi_mean,mass_flow,dp,pump_power_W\n");
        for r in &self.series {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6e},{:.6e},{:.6e}",
                r.t, r.t_max, r.t_avg, r.xi_mean, r.mass_flow, r.dp, r.pump_power
            );
        }
        out
    }
}

/// A run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub network: ThermalNetwork,
    pub state: SimState,
    pub audit: EnergyAudit,
    initial: SimState,
    ambient: Vec<f64>,
    pcm_of_node: Vec<Option<usize>>,
    battery: Vec<usize>,
    matrix: CsrMatrix,
    positions: Vec<(usize, usize)>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, SolverError> {
        scenario.validate()?;
        let network = scenario.build_network()?;
        Self::with_network(scenario, network)
    }

    /// Runs `scenario` on a network built elsewhere.
    pub fn with_network(scenario: Scenario, network: ThermalNetwork) -> Result<Self, SolverError> {
        if !(scenario.dt > 0.0) {
            return Err(SolverError::Scenario(format!("dt must be > 0, got {}", scenario.dt)));
        }
        let n = network.len();
        let mut ambient = vec![0.0; n];
        for a in &network.ambient {
            ambient[a.node] += a.conductance;
        }
        let mut pcm_of_node = vec![None; n];
        let pcm_props = network.materials.pcm;
        let t0 = scenario.discharge.initial_temperature;
        let mut pcm = Vec::new();
        if let Some(props) = &pcm_props {
            for (i, p) in network.pcm_nodes.iter().enumerate() {
                pcm_of_node[p.node] = Some(i);
                pcm.push(PcmState::from_temperature(t0, props));
            }
        }
        let pairs: Vec<(usize, usize)> = network.links.iter().map(|l| (l.a, l.b)).collect();
        let (matrix, positions) = CsrMatrix::from_pairs(n, &pairs);
        let state = SimState {
            t: 0.0,
            temperatures: vec![t0; n],
            pcm,
            controller: ControllerState::default(),
            mass_flow: 0.0,
            dp: 0.0,
        };
        let battery = network.battery_nodes();
        Ok(Simulation {
            scenario,
            initial: state.clone(),
            state,
            audit: EnergyAudit::default(),
            ambient,
            pcm_of_node,
            battery,
            matrix,
            positions,
            network,
        })
    }

    pub fn battery_stats(&self, temps: &[f64]) -> (f64, f64) {
        if self.battery.is_empty() {
            return (f64::NAN, f64::NAN);
        }
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &b in &self.battery {
            max = max.max(temps[b]);
            sum += temps[b];
        }
        (max, sum / self.battery.len() as f64)
    }

    /// Mass-weighted mean melt fraction; zero without PCM.
    pub fn mean_melt_fraction(&self) -> f64 {
        let mut mass = 0.0;
        let mut melted = 0.0;
        for (p, s) in self.network.pcm_nodes.iter().zip(&self.state.pcm) {
            mass += p.pcm_mass;
            melted += p.pcm_mass * s.melt_fraction;
        }
        if mass > 0.0 {
            melted / mass
        } else {
            0.0
        }
    }

    /// Advances by `dt` seconds and returns the recorded row.
    pub fn step(&mut self, dt: f64) -> Result<SeriesRow, SolverError> {
        let t0 = self.state.t;
        let t1 = t0 + dt;
        let net = &self.network;
        let mats = &net.materials;
        let n = net.len();

        let (_, t_avg) = self.battery_stats(&self.state.temperatures);
        let xi_mean = self.mean_melt_fraction();
        let (mass_flow, controller) = flow_rate(
            ControlInputs { t: t0, t_avg, xi_mean },
            &self.scenario.schedule,
            self.state.controller,
        );
        let flows = net.circuit_flows(mass_flow);
        let melt: Vec<f64> = if self.state.pcm.is_empty() {
            vec![0.0; net.pcm_nodes.len()]
        } else {
            self.state.pcm.iter().map(|s| s.melt_fraction).collect()
        };
        let conductance = net.conductances(&flows, &melt);

        // advection
        let inlet = self.scenario.inlet();
        let c_l = mats.coolant.c;
        let mut temps = self.state.temperatures.clone();
        let mut advected = 0.0;
        for (circuit, &m) in net.circuits.iter().zip(&flows) {
            if m <= 0.0 || circuit.path.is_empty() {
                continue;
            }
            let c_min = circuit
                .path
                .iter()
                .map(|&i| net.nodes[i].capacity)
                .fold(f64::INFINITY, f64::min);
            let courant = m * c_l * dt / c_min;
            let substeps = courant.ceil().max(1.0) as usize;
            let h = dt / substeps as f64;
            for _ in 0..substeps {
                let mut upstream = inlet;
                for &i in &circuit.path {
                    let old = temps[i];
                    temps[i] = old + m * c_l * h / net.nodes[i].capacity * (upstream - old);
                    upstream = old;
                }
                advected += m * c_l * h * (upstream - inlet);
            }
        }

        // heat sources at the start-of-step temperature
        let battery = &mats.battery;
        let current = cell_current(self.scenario.discharge.c_rate, battery.capacity);
        let mut source = vec![0.0; n];
        let mut generated = 0.0;
        for &b in &self.battery {
            let q = heat_generation(current, self.state.temperatures[b] + KELVIN, battery).total() * net.nodes[b].volume;
            source[b] = q;
            generated += q * dt;
        }

        // implicit conduction with PCM linearisation
        let t_amb = self.scenario.ambient_temperature;
        let settings = self.scenario.settings;
        let pcm_props = mats.pcm;
        let mut e_k: Vec<f64> = self.state.pcm.iter().map(|s| s.enthalpy).collect();
        let mut t_k: Vec<f64> = self.state.pcm.iter().map(|s| s.temperature).collect();
        let mut x = temps.clone();
        let mut rhs = vec![0.0; n];
        let mut converged = false;
        for _ in 0..settings.max_phase_iterations.max(1) {
            self.matrix.clear();
            for (link, (&g, &(ab, ba))) in net.links.iter().zip(conductance.iter().zip(&self.positions)) {
                self.matrix.values[ab] -= g;
                self.matrix.values[ba] -= g;
                self.matrix.add_diagonal(link.a, g);
                self.matrix.add_diagonal(link.b, g);
            }
            for i in 0..n {
                let node = &net.nodes[i];
                let (cap, stored) = match (self.pcm_of_node[i], &pcm_props) {
                    (Some(p), Some(props)) => {
                        let pn = &net.pcm_nodes[p];
                        let slope = props.enthalpy_slope(e_k[p]);
                        let cap = pn.pcm_mass * slope + pn.foam_capacity;
                        let stored = pn.foam_capacity * temps[i]
                            + pn.pcm_mass * (self.state.pcm[p].enthalpy - e_k[p] + slope * t_k[p]);
                        (cap, stored)
                    }
                    _ => (node.capacity, node.capacity * temps[i]),
                };
                self.matrix.add_diagonal(i, cap / dt + self.ambient[i]);
                rhs[i] = stored / dt + source[i] + self.ambient[i] * t_amb;
            }
            conjugate_gradient(
                &self.matrix,
                &rhs,
                &mut x,
                settings.linear_tolerance,
                settings.max_linear_iterations,
            )
            .map_err(|stats| SolverError::LinearSolve {
                time: t1,
                residual: stats.relative_residual,
            })?;
            if let Some(i) = x.iter().position(|v| !v.is_finite()) {
                return Err(self.divergence(t1, i));
            }
            let Some(props) = &pcm_props else {
                converged = true;
                break;
            };
            let mut worst: f64 = 0.0;
            for (p, pn) in net.pcm_nodes.iter().enumerate() {
                let slope = props.enthalpy_slope(e_k[p]);
                let e_next = e_k[p] + slope * (x[pn.node] - t_k[p]);
                let t_next = if e_next == e_k[p] {
                    t_k[p]
                } else {
                    temperature_from_enthalpy(e_next, props)
                };
                worst = worst.max((t_next - x[pn.node]).abs());
                e_k[p] = e_next;
                t_k[p] = t_next;
            }
            if worst <= settings.phase_tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SolverError::PhaseChangeStalled {
                time: t1,
                iterations: settings.max_phase_iterations,
            });
        }

        let ambient_loss: f64 = (0..n).map(|i| self.ambient[i] * (x[i] - t_amb)).sum::<f64>() * dt;
        let mut pcm = Vec::with_capacity(self.state.pcm.len());
        if let Some(props) = &pcm_props {
            for (p, pn) in net.pcm_nodes.iter().enumerate() {
                let s = PcmState::from_enthalpy(e_k[p], props);
                x[pn.node] = s.temperature;
                pcm.push(s);
            }
        }

        let dp = net.pressure_drop(mass_flow, self.scenario.bend_loss_coefficient);
        let pump_power = dp * mass_flow / mats.coolant.rho;
        self.state = SimState {
            t: t1,
            temperatures: x,
            pcm,
            controller,
            mass_flow,
            dp,
        };
        self.audit.generated += generated;
        self.audit.advected_out += advected;
        self.audit.ambient_loss += ambient_loss;
        self.refresh_stored_energy();

        let (t_max, t_avg) = self.battery_stats(&self.state.temperatures);
        Ok(SeriesRow {
            t: t1,
            t_max,
            t_avg,
            xi_mean: self.mean_melt_fraction(),
            mass_flow,
            dp,
            pump_power,
        })
    }

    fn divergence(&self, time: f64, node: usize) -> SolverError {
        let n = &self.network.nodes[node];
        SolverError::Divergence {
            time,
            node,
            kind: format!("{} {}", n.kind.as_str(), n.label),
        }
    }

    fn refresh_stored_energy(&mut self) {
        let net = &self.network;
        let now = &self.state;
        let start = &self.initial;
        let mut battery = 0.0;
        let mut housing = 0.0;
        let mut gap = 0.0;
        let mut latent = 0.0;
        let mut coolant = 0.0;
        for (i, node) in net.nodes.iter().enumerate() {
            let dt = now.temperatures[i] - start.temperatures[i];
            match node.kind {
                NodeKind::Battery => battery += node.capacity * dt,
                NodeKind::Wall => housing += node.capacity * dt,
                NodeKind::Channel => coolant += node.capacity * dt,
                NodeKind::Pcm => match (self.pcm_of_node[i], &net.materials.pcm) {
                    (Some(p), Some(props)) => {
                        let pn = &net.pcm_nodes[p];
                        gap += (pn.foam_capacity + pn.pcm_mass * props.c) * dt;
                        latent += pn.pcm_mass
                            * props.latent_heat
                            * (now.pcm[p].melt_fraction - start.pcm[p].melt_fraction);
                    }
                    _ => gap += node.capacity * dt,
                },
            }
        }
        self.audit.battery_sensible = battery;
        self.audit.housing_sensible = housing;
        self.audit.pcm_sensible = gap;
        self.audit.pcm_latent = latent;
        self.audit.coolant_stored = coolant;
    }

    /// Integrates to the discharge duration. On failure the rows recorded
    /// so far are returned with the error.
    pub fn run_partial(mut self) -> (SimResult, Option<SolverError>) {
        let duration = self.scenario.discharge.duration;
        let dt = self.scenario.dt;
        let mut series = Vec::new();
        let mut k: u64 = 0;
        let mut error = None;
        let eps = 1e-9 * dt;
        while self.state.t < duration - eps {
            let target = ((k + 1) as f64 * dt).min(duration);
            match self.step(target - self.state.t) {
                Ok(mut row) => {
                    // keep the clock on the exact grid
                    self.state.t = target;
                    row.t = target;
                    series.push(row);
                }
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
            k += 1;
        }
        (
            SimResult {
                series,
                final_state: self.state,
                audit: self.audit,
            },
            error,
        )
    }

    pub fn run(self) -> Result<SimResult, SolverError> {
        match self.run_partial() {
            (result, None) => Ok(result),
            (_, Some(e)) => Err(e),
        }
    }
}

pub fn simulate(scenario: &Scenario) -> Result<SimResult, SolverError> {
    Simulation::new(scenario.clone())?.run()
}

/// Like [`simulate`] but keeps whatever was computed before a failure.
/// Configuration errors still return no result.
pub fn simulate_partial(scenario: &Scenario) -> Result<(SimResult, Option<SolverError>), SolverError> {
    Ok(Simulation::new(scenario.clone())?.run_partial())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub final_t_avg: Vec<f64>,
    /// |T_avg(dt[i+1]) − T_avg(dt[i])|
    pub deltas: Vec<f64>,
    /// Deltas do not grow as the step shrinks.
    pub monotone: bool,
}

/// Runs `scenario` at each step size (descending) and compares the final
/// mean cell temperature.
pub fn time_step_convergence(scenario: &Scenario, dts: &[f64]) -> Result<ConvergenceReport, SolverError> {
    if dts.len() < 2 {
        return Err(SolverError::Scenario("convergence study needs at least two step sizes".into()));
    }
    if dts.windows(2).any(|w| w[1] > w[0]) {
        return Err(SolverError::Scenario("step sizes must be in descending order".into()));
    }
    let finals = dts
        .par_iter()
        .map(|&dt| {
            let s = Scenario { dt, ..scenario.clone() };
            let result = simulate(&s)?;
            Ok(result.last().map_or(s.discharge.initial_temperature, |r| r.t_avg))
        })
        .collect::<Result<Vec<f64>, SolverError>>()?;
    let deltas: Vec<f64> = finals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let monotone = deltas.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        final_t_avg: finals,
        deltas,
        monotone,
    })
}
