//! KPIs, pumping energy and the parallel sweep harness.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{MetricsError, SolverError};
use crate::materials::CoolantProps;
use crate::solver::{simulate, Scenario, SimResult};

/// Hydraulic pumping energy Σ Δp·(ṁ/ρ)·dt, J.
pub fn pump_energy(dp: &[f64], flow: &[f64], coolant: &CoolantProps, dt: f64) -> Result<f64, MetricsError> {
    if dp.len() != flow.len() {
        return Err(MetricsError::LengthMismatch {
            left: dp.len(),
            right: flow.len(),
        });
    }
    Ok(dp.iter().zip(flow).map(|(p, m)| p * m / coolant.rho * dt).sum())
}

/// As [`pump_energy`] with a step length per sample.
pub fn pump_energy_steps(dp: &[f64], flow: &[f64], coolant: &CoolantProps, steps: &[f64]) -> Result<f64, MetricsError> {
    if dp.len() != flow.len() {
        return Err(MetricsError::LengthMismatch {
            left: dp.len(),
            right: flow.len(),
        });
    }
    if steps.len() != dp.len() {
        return Err(MetricsError::LengthMismatch {
            left: dp.len(),
            right: steps.len(),
        });
    }
    Ok(dp
        .iter()
        .zip(flow)
        .zip(steps)
        .map(|((p, m), dt)| p * m / coolant.rho * dt)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpiSummary {
    pub t_max_final: f64,
    pub t_max_peak: f64,
    pub t_avg_final: f64,
    pub xi_mean_final: f64,
    /// J
    pub pump_energy: f64,
    /// (E − E_base)/E_base
    pub pump_energy_delta: Option<f64>,
    /// T_max,base − T_max, K. Positive when this run is cooler.
    pub t_max_reduction: Option<f64>,
    pub audit_relative_residual: f64,
}

/// Final and peak values of a run, compared with `baseline` when given.
/// A run with no steps reports its initial temperature.
pub fn summarize(result: &SimResult, baseline: Option<&SimResult>) -> KpiSummary {
    let initial = result
        .final_state
        .temperatures
        .first()
        .copied()
        .unwrap_or(f64::NAN);
    let last = result.last();
    let t_max_final = last.map_or(initial, |r| r.t_max);
    let pump = result.pump_energy();
    let (pump_energy_delta, t_max_reduction) = match baseline {
        Some(b) => {
            let base = summarize(b, None);
            let delta = if base.pump_energy > 0.0 {
                (pump - base.pump_energy) / base.pump_energy
            } else {
                0.0
            };
            (Some(delta), Some(base.t_max_final - t_max_final))
        }
        None => (None, None),
    };
    KpiSummary {
        t_max_final,
        t_max_peak: result.t_max_peak().unwrap_or(initial),
        t_avg_final: last.map_or(initial, |r| r.t_avg),
        xi_mean_final: last.map_or(0.0, |r| r.xi_mean),
        pump_energy: pump,
        pump_energy_delta,
        t_max_reduction,
        audit_relative_residual: result.audit.relative_residual(),
    }
}

/// One scenario in a sweep with the axis values that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub labels: Vec<(String, String)>,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub cases: Vec<SweepCase>,
    /// Case used as the comparison baseline for deltas.
    pub baseline: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub labels: Vec<(String, String)>,
    pub outcome: Result<(KpiSummary, SimResult), SolverError>,
}

impl SweepRow {
    pub fn kpi(&self) -> Option<&KpiSummary> {
        self.outcome.as_ref().ok().map(|(k, _)| k)
    }

    pub fn result(&self) -> Option<&SimResult> {
        self.outcome.as_ref().ok().map(|(_, r)| r)
    }

    pub fn label(&self, axis: &str) -> Option<&str> {
        self.labels.iter().find(|(k, _)| k == axis).map(|(_, v)| v.as_str())
    }
}

/// Runs every case on up to `jobs` threads. Rows come back in input order;
/// a failed run is reported in its row.
pub fn sweep(grid: &SweepGrid, jobs: usize) -> Result<Vec<SweepRow>, MetricsError> {
    if grid.cases.is_empty() {
        return Err(MetricsError::EmptyGrid);
    }
    let run_all = || -> Vec<Result<SimResult, SolverError>> {
        grid.cases.par_iter().map(|c| simulate(&c.scenario)).collect()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(run_all),
        Err(_) => run_all(),
    };
    let baseline = grid
        .baseline
        .and_then(|i| results.get(i))
        .and_then(|r| r.as_ref().ok())
        .cloned();
    Ok(grid
        .cases
        .iter()
        .zip(results)
        .map(|(case, outcome)| SweepRow {
            labels: case.labels.clone(),
            outcome: outcome.map(|r| (summarize(&r, baseline.as_ref()), r)),
        })
        .collect())
}

const KPI_COLUMNS: [&str; 9] = [
    "T_max_final",
    "T_max_peak",
    "T_avg_final",
    "xi_mean_final",
    "pump_energy_J",
    "pump_energy_delta",
    "T_max_reduction",
    "audit_residual",
    "status",
];

fn axes(rows: &[SweepRow]) -> Vec<String> {
    rows.first()
        .map(|r| r.labels.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default()
}

fn kpi_cells(row: &SweepRow) -> Vec<String> {
    let opt = |v: Option<f64>, digits: usize| v.map_or(String::new(), |v| format!("{v:.digits$}"));
    match &row.outcome {
        Ok((k, _)) => vec![
            format!("{:.4}", k.t_max_final),
            format!("{:.4}", k.t_max_peak),
            format!("{:.4}", k.t_avg_final),
            format!("{:.4}", k.xi_mean_final),
            format!("{:.6e}", k.pump_energy),
            opt(k.pump_energy_delta, 5),
            opt(k.t_max_reduction, 4),
            format!("{:.1e}", k.audit_relative_residual),
            "ok".into(),
        ],
        Err(e) => {
            let mut cells = vec![String::new(); KPI_COLUMNS.len() - 1];
            cells.push(format!("failed: {e}"));
            cells
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// KPI table as CSV: one column per varied parameter, then the KPIs.
pub fn kpi_csv(rows: &[SweepRow]) -> String {
    let mut header = axes(rows);
    header.extend(KPI_COLUMNS.iter().map(|s| s.to_string()));
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut cells: Vec<String> = row.labels.iter().map(|(_, v)| csv_field(v)).collect();
        cells.extend(kpi_cells(row).iter().map(|c| csv_field(c)));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Aligned plain-text rendering of the KPI table, with notes.
pub fn kpi_report(rows: &[SweepRow]) -> String {
    let mut header = axes(rows);
    header.extend(KPI_COLUMNS.iter().map(|s| s.to_string()));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells: Vec<String> = r.labels.iter().map(|(_, v)| v.clone()).collect();
            cells.extend(kpi_cells(r));
            cells
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            body.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for line in std::iter::once(&header).chain(&body) {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    if let Some(note) = direction_note(rows) {
        let _ = writeln!(out, "\n{note}");
    }
    out
}

/// For sweeps over the cooling direction: which direction gives the lowest
/// final T_max, and whether that is the outer-inlet pattern.
pub fn direction_note(rows: &[SweepRow]) -> Option<String> {
    let best = rows
        .iter()
        .filter_map(|r| Some((r.label("direction")?, r.kpi()?.t_max_final)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let outer = crate::network::CoolingDirection::OUTER_INLETS.id().to_string();
    Some(if best.0 == outer {
        format!(
            "note: direction {} (both inlets on the outer layers) gives the lowest final T_max ({:.4} °C)",
            best.0, best.1
        )
    } else {
        format!(
            "note: direction {} gives the lowest final T_max ({:.4} °C); the outer-inlet direction {} is not the \
             minimum in this reduced network model",
            best.0, best.1, outer
        )
    })
}
