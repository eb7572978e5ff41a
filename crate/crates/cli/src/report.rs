//! JSON report written next to the CSV artifacts.

use forge_core::{PMatrixSummary, RadialGrid, ResidualReport};
use serde::Serialize;

use crate::config::{JobConfig, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceSource {
    Config,
    Environment,
    Default,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEntry {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub step: f64,
}

impl From<&RadialGrid> for GridEntry {
    fn from(g: &RadialGrid) -> Self {
        GridEntry {
            a: g.a(),
            b: g.b(),
            n: g.len(),
            step: g.step(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualEntry {
    pub label: String,
    pub file: String,
    /// One value per channel; a single value outside multichannel mode.
    pub gamma_sq: Vec<f64>,
    pub max_abs: f64,
    pub max_rel: f64,
    pub argmax_node: usize,
    pub argmax_r: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualEntry {
    pub fn new(label: String, file: String, gamma_sq: Vec<f64>, rep: &ResidualReport, grid: &RadialGrid) -> Self {
        ResidualEntry {
            label,
            file,
            gamma_sq,
            max_abs: rep.max_abs,
            max_rel: rep.max_rel,
            argmax_node: rep.argmax_node,
            argmax_r: grid.node(rep.argmax_node),
            tol: rep.tol,
            pass: rep.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PMatrixEntry {
    pub order: usize,
    pub det_sign: f64,
    pub min_abs_det: f64,
    pub max_abs_det: f64,
    pub max_condition: f64,
    /// Largest gap between Wronskian-form off-diagonal entries and their
    /// quadrature counterparts.
    pub quadrature_defect: f64,
}

impl PMatrixEntry {
    pub fn new(order: usize, s: PMatrixSummary, quadrature_defect: f64) -> Self {
        PMatrixEntry {
            order,
            det_sign: s.det_sign,
            min_abs_det: s.min_abs_det,
            max_abs_det: s.max_abs_det,
            max_condition: s.max_condition,
            quadrature_defect,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub config: JobConfig,
    pub mode: Mode,
    pub grid: GridEntry,
    pub tolerance: f64,
    pub tolerance_source: ToleranceSource,
    pub potential_file: String,
    pub residuals: Vec<ResidualEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmatrix: Option<PMatrixEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_vs_bargmann_supnorm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry_defect: Option<f64>,
    pub passed: bool,
}
