use serde::{Deserialize, Serialize};

use super::hermitian::HermitianForm;
use super::maps::moment_map_mu0;
use super::problem::Problem;
use crate::error::{Error, Result};
use crate::functionals::i_mu0;
use crate::geometry::LatticeSectionBasis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    pub mu0_frob: f64,
    pub mu0_op: f64,
    pub i_mu0: f64,
    pub det_h: f64,
}

#[derive(Debug, Clone)]
pub struct BalanceOutcome {
    /// Last iterate, normalised to `det H = 1`.
    pub h: HermitianForm,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
}

impl BalanceOutcome {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_log(&self.log, w)
    }

    /// Largest increase of `I_{μ⁰}` between consecutive steps (≤ 0 for a monotone log).
    pub fn max_increase(&self) -> f64 {
        self.log.windows(2).map(|w| w[1].i_mu0 - w[0].i_mu0).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn write_log<W: std::io::Write>(log: &[IterationRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in log {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Iterates `H ↦ Hilb_χ(FS(H))` until `‖μ⁰‖_op < tol`.
///
/// Returns `Ok` with `converged = false` when `maxiter` is reached; the log
/// then tells whether `‖μ⁰‖` was still decreasing or had stalled.
pub fn iterate_to_balance(
    problem: &Problem,
    basis: &LatticeSectionBasis,
    h0: &HermitianForm,
    tol: f64,
    maxiter: usize,
) -> Result<BalanceOutcome> {
    if !(tol > 0.0) {
        return Err(Error::Input("tolerance must be positive".into()));
    }
    let mut h = h0.clone();
    let mut log = Vec::new();
    for step in 0..=maxiter {
        let mm = moment_map_mu0(problem, basis, &h)?;
        let rec = IterationRecord {
            step,
            mu0_frob: mm.frobenius(),
            mu0_op: mm.operator_norm(),
            i_mu0: i_mu0(problem, basis, &h)?,
            det_h: h.log_det()?.exp(),
        };
        log.push(rec);
        if rec.mu0_op < tol {
            return Ok(BalanceOutcome { h: h.det_normalised()?, log, converged: true });
        }
        if step == maxiter {
            break;
        }
        h = mm.image;
    }
    Ok(BalanceOutcome { h: h.det_normalised()?, log, converged: false })
}

/// Human-readable reason for a non-converged run.
pub fn divergence_diagnosis(outcome: &BalanceOutcome) -> String {
    let n = outcome.log.len();
    if n < 2 {
        return "no iterations recorded".into();
    }
    let first = outcome.log[0].mu0_op;
    let last = outcome.log[n - 1].mu0_op;
    let tail = &outcome.log[n.saturating_sub(10)..];
    let ratio = tail.last().unwrap().mu0_op / tail[0].mu0_op;
    if ratio < 0.999 {
        format!("‖μ⁰‖ still decreasing ({first:e} → {last:e}); raise maxiter")
    } else {
        format!("‖μ⁰‖ stalled at {last:e}; no balanced metric at this level or quadrature too coarse")
    }
}
