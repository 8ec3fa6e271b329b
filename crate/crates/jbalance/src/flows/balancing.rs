use num_complex::Complex64;

use super::{FlowDiagnostics, FlowPayload, FlowState};
use crate::error::{Error, Result};
use crate::functionals::i_mu0;
use crate::geometry::LatticeSectionBasis;
use crate::quantisation::{t_map, CMatrix, HermitianForm, Problem};

/// Halvings allowed within one step before giving up.
const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    /// A state (with `I_{μ⁰}`) is recorded every this many steps and at the end.
    pub record_every: usize,
}

impl FlowConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || self.record_every == 0 {
            return Err(Error::Input("flow needs dt > 0, t_end ≥ 0 and record_every ≥ 1".into()));
        }
        Ok(())
    }
}

/// `Ḣ = k²(μ⁰H + Hμ⁰)` in matrix coordinates, i.e. `2k²(V/(N+1))(G − cH)` with
/// `G = Hilb_χ(FS(H))` and `c = tr(G·H⁻¹)/(N+1)`; also returns `‖μ⁰‖²_F`.
fn velocity(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm) -> Result<(CMatrix, f64)> {
    let g = t_map(problem, basis, h)?;
    let n1 = basis.len() as f64;
    let k = basis.k as f64;
    let c = h.trace_against(g.matrix())? / n1;
    let scale = problem.volume / n1;
    let mu0 = crate::quantisation::mu0_from(problem.volume, h, &g)?;
    let rhs = (g.matrix() - h.matrix() * Complex64::new(c, 0.0)) * Complex64::new(2.0 * k * k * scale, 0.0);
    Ok((rhs, mu0.norm_squared()))
}

fn shifted(h: &HermitianForm, d: &CMatrix, s: f64) -> Result<HermitianForm> {
    HermitianForm::with_hash(h.k, h.basis_hash.clone(), h.matrix() + d * Complex64::new(s, 0.0))
}

fn rk4(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm, k1: &CMatrix, dt: f64) -> Result<HermitianForm> {
    let (k2, _) = velocity(problem, basis, &shifted(h, k1, dt / 2.0)?)?;
    let (k3, _) = velocity(problem, basis, &shifted(h, &k2, dt / 2.0)?)?;
    let (k4, _) = velocity(problem, basis, &shifted(h, &k3, dt)?)?;
    let incr = (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(1.0 / 6.0, 0.0);
    shifted(h, &incr, dt)
}

/// One step of size `dt`, split into halves while positivity fails.
fn step(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm, k1: &CMatrix, dt: f64, depth: u32) -> Result<HermitianForm> {
    match rk4(problem, basis, h, k1, dt) {
        Ok(next) => Ok(next),
        Err(Error::NotPositiveDefinite(_) | Error::Convexity(_)) if depth < MAX_HALVINGS => {
            let mid = step(problem, basis, h, k1, dt / 2.0, depth + 1)?;
            let (k1m, _) = velocity(problem, basis, &mid)?;
            step(problem, basis, &mid, &k1m, dt / 2.0, depth + 1)
        }
        Err(Error::NotPositiveDefinite(m) | Error::Convexity(m)) => {
            Err(Error::NotPositiveDefinite(format!("balancing flow lost positivity after {MAX_HALVINGS} halvings: {m}")))
        }
        Err(e) => Err(e),
    }
}

fn record(problem: &Problem, basis: &LatticeSectionBasis, t: f64, h: &HermitianForm, mu0_sq: f64) -> Result<FlowState> {
    Ok(FlowState {
        t,
        payload: FlowPayload::Form(h.clone()),
        diagnostics: FlowDiagnostics { mu0_sq: Some(mu0_sq), i_value: Some(i_mu0(problem, basis, h)?), residual: None },
    })
}

/// RK4 integration of the balancing flow from `h0` over `[0, t_end]`.
///
/// The step is `t_end / ⌈t_end/dt⌉`; steps that leave the positive cone are
/// split in halves.  `‖μ⁰‖²` is recorded at every step in the returned log.
pub fn balancing_flow(
    problem: &Problem,
    basis: &LatticeSectionBasis,
    h0: &HermitianForm,
    cfg: &FlowConfig,
) -> Result<(Vec<FlowState>, Vec<(f64, f64)>)> {
    cfg.validate()?;
    h0.check_basis(basis)?;
    let steps = (cfg.t_end / cfg.dt).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let mut h = h0.clone();
    let (mut k1, mut m2) = velocity(problem, basis, &h)?;
    let mut states = vec![record(problem, basis, 0.0, &h, m2)?];
    let mut log = vec![(0.0, m2)];
    for s in 1..=steps {
        h = step(problem, basis, &h, &k1, dt, 0)?;
        (k1, m2) = velocity(problem, basis, &h)?;
        let t = s as f64 * dt;
        log.push((t, m2));
        if s % cfg.record_every == 0 || s == steps {
            states.push(record(problem, basis, t, &h, m2)?);
        }
    }
    Ok((states, log))
}

/// Balancing-flow time corresponding to J-flow time `t`.
///
/// With `FS` normalised by `(N+1)/V`, `(1/k)·` the balancing-flow potential moves
/// at `2kV/(γ(N+1))` times the J-flow speed to leading order.
pub fn matched_time(problem: &Problem, basis: &LatticeSectionBasis, t: f64) -> f64 {
    t * problem.gamma * basis.len() as f64 / (2.0 * basis.k as f64 * problem.volume)
}
