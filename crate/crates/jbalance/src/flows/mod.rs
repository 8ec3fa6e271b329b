//! The balancing flow on Hermitian forms, the continuum J-flow on a grid, and
//! the harness comparing them.

mod balancing;
mod compare;
mod jflow;

pub use balancing::{balancing_flow, matched_time, FlowConfig};
pub use compare::{
    comparison_run, cone_condition_check, critical_residual, donaldson_necessary_check, quantization_comparison, ComparisonConfig,
    ComparisonRow, ComparisonRun, ConeCheck, DonaldsonCheck, Residual,
};
pub use jflow::{jflow_run, jflow_step, Boundary, GridFlow, BOX_DELTA};

use crate::error::Result;
use crate::geometry::PotentialField;
use crate::quantisation::HermitianForm;

#[derive(Debug, Clone)]
pub enum FlowPayload {
    Form(HermitianForm),
    Potential(PotentialField),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowDiagnostics {
    pub mu0_sq: Option<f64>,
    pub i_value: Option<f64>,
    /// `sup |γ − χ∧ω^{n−1}/ωⁿ|` on the grid interior
    pub residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub payload: FlowPayload,
    pub diagnostics: FlowDiagnostics,
}

/// CSV with columns `t, mu0_sq, i_value, residual`; absent values are empty.
pub fn write_trajectory<W: std::io::Write>(states: &[FlowState], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "mu0_sq", "i_value", "residual"])?;
    let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for s in states {
        let d = s.diagnostics;
        out.write_record([format!("{:e}", s.t), f(d.mu0_sq), f(d.i_value), f(d.residual)])?;
    }
    out.flush()?;
    Ok(())
}
