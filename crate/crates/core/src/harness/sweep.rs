//! Parameter sweeps over grids of experiment specs, with table-shaped
//! CSV output. A cell whose trials mostly diverge prints as the literal
//! string NaN, matching the convention of the benchmark tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{run_experiment, ExperimentReport, ExperimentSpec, NoiseLevel};
use crate::solver::StepRule;

/// Step sizes probed by the step sweep; the last two diverge on the
/// benchmark family.
pub const STEP_SWEEP_VALUES: [f64; 7] = [0.001, 0.01, 0.1, 1.0, 1.5, 2.0, 3.0];

/// Surrogate weights probed by the lambda sweep.
pub const LAMBDA_SWEEP_VALUES: [f64; 18] = [
    2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 7.5, 10.0, 12.5, 15.0, 20.0, 25.0, 30.0, 35.0,
    40.0, 45.0,
];

/// (noise level, penalty weight) rows of the noise sweep.
pub const NOISE_SWEEP_ROWS: [(NoiseLevel, f64); 6] = [
    (NoiseLevel::None, 0.015),
    (NoiseLevel::Db(50.0), 0.031),
    (NoiseLevel::Db(40.0), 0.062),
    (NoiseLevel::Db(30.0), 0.125),
    (NoiseLevel::Db(20.0), 0.125),
    (NoiseLevel::Db(10.0), 0.25),
];

pub const NOISE_SWEEP_ETAS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

pub const NONLINEARITY_SWEEP_CS: [u32; 9] = [1, 2, 3, 4, 5, 6, 15, 20, 50];
pub const NONLINEARITY_SWEEP_DS: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// One cell of a sweep: a spec plus its position in the output table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepCell {
    pub row_label: String,
    pub col_label: String,
    pub spec: ExperimentSpec,
}

/// A named grid of cells.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sweep {
    pub name: String,
    /// Header of the row-label column in the CSV.
    pub row_header: String,
    pub cells: Vec<SweepCell>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellReport {
    pub row_label: String,
    pub col_label: String,
    pub report: ExperimentReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub row_header: String,
    pub cells: Vec<CellReport>,
}

/// Run every cell (cells and their trials in parallel). Per-cell
/// divergence lands in the cell's status fields; only caller bugs
/// (invalid specs) abort the sweep.
pub fn run_sweep(sweep: &Sweep) -> Result<SweepReport> {
    for cell in &sweep.cells {
        cell.spec.validate()?;
    }
    let cells: Vec<Result<CellReport>> = sweep
        .cells
        .par_iter()
        .map(|cell| {
            Ok(CellReport {
                row_label: cell.row_label.clone(),
                col_label: cell.col_label.clone(),
                report: run_experiment(&cell.spec)?,
            })
        })
        .collect();
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        name: sweep.name.clone(),
        row_header: sweep.row_header.clone(),
        cells,
    })
}

impl SweepReport {
    /// Median SNR of a cell, or `None` when most trials diverged.
    pub fn cell_value(&self, row: &str, col: &str) -> Option<f64> {
        let cell = self
            .cells
            .iter()
            .find(|c| c.row_label == row && c.col_label == col)?;
        cell_median(&cell.report)
    }
}

fn cell_median(report: &ExperimentReport) -> Option<f64> {
    if 2 * report.success_count <= report.spec.trials {
        None
    } else {
        report.median_snr_db
    }
}

/// Render the sweep as a rows x columns CSV of median SNR values, with
/// NaN for divergent cells.
pub fn sweep_table_csv(report: &SweepReport) -> String {
    let mut rows: Vec<&str> = Vec::new();
    let mut cols: Vec<&str> = Vec::new();
    for cell in &report.cells {
        if !rows.contains(&cell.row_label.as_str()) {
            rows.push(&cell.row_label);
        }
        if !cols.contains(&cell.col_label.as_str()) {
            cols.push(&cell.col_label);
        }
    }
    let mut out = String::new();
    out.push_str(&report.row_header);
    for c in &cols {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in &rows {
        out.push_str(r);
        for c in &cols {
            out.push(',');
            match report.cell_value(r, c) {
                Some(v) => out.push_str(&format!("{v}")),
                None => out.push_str("NaN"),
            }
        }
        out.push('\n');
    }
    out
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Single-row sweep over fixed step sizes.
pub fn step_size_sweep(base: &ExperimentSpec, steps: &[f64]) -> Sweep {
    Sweep {
        name: "step_size".into(),
        row_header: "metric".into(),
        cells: steps
            .iter()
            .map(|&s| SweepCell {
                row_label: "snr".into(),
                col_label: fmt_num(s),
                spec: ExperimentSpec {
                    step: StepRule::Fixed(s),
                    ..base.clone()
                },
            })
            .collect(),
    }
}

/// Single-row sweep over the surrogate weight lambda.
pub fn lambda_sweep(base: &ExperimentSpec, lambdas: &[f64]) -> Sweep {
    Sweep {
        name: "lambda".into(),
        row_header: "metric".into(),
        cells: lambdas
            .iter()
            .map(|&l| SweepCell {
                row_label: "snr".into(),
                col_label: fmt_num(l),
                spec: ExperimentSpec {
                    lambda: l,
                    ..base.clone()
                },
            })
            .collect(),
    }
}

/// Noise level (rows, each with its own fixed alpha) against eta (columns).
pub fn noise_eta_sweep(
    base: &ExperimentSpec,
    rows: &[(NoiseLevel, f64)],
    etas: &[f64],
) -> Sweep {
    let mut cells = Vec::new();
    for &(noise, alpha) in rows {
        let row_label = match noise {
            NoiseLevel::None => "noise_free".to_string(),
            NoiseLevel::Db(db) => format!("{db}dB"),
        };
        for &eta in etas {
            cells.push(SweepCell {
                row_label: row_label.clone(),
                col_label: format!("eta={eta}"),
                spec: ExperimentSpec {
                    noise_db: noise,
                    alpha: super::AlphaRule::Fixed(alpha),
                    eta,
                    ..base.clone()
                },
            });
        }
    }
    Sweep {
        name: "noise_eta".into(),
        row_header: "noise".into(),
        cells,
    }
}

/// Outer power c (rows) against inner power d (columns).
pub fn nonlinearity_sweep(base: &ExperimentSpec, cs: &[u32], ds: &[u32]) -> Sweep {
    let mut cells = Vec::new();
    for &c in cs {
        for &d in ds {
            cells.push(SweepCell {
                row_label: format!("c={c}"),
                col_label: format!("d={d}"),
                spec: ExperimentSpec {
                    c,
                    d,
                    ..base.clone()
                },
            });
        }
    }
    Sweep {
        name: "nonlinearity".into(),
        row_header: "c".into(),
        cells,
    }
}
