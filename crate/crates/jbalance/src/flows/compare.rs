use serde::{Deserialize, Serialize};

use super::balancing::{balancing_flow, matched_time, FlowConfig};
use super::jflow::{jflow_run, Boundary, GridFlow};
use super::{FlowPayload, FlowState};
use crate::error::{Error, Result};
use crate::geometry::{PotentialField, QuadratureRule};
use crate::quantisation::{fs_map, hilb_map, Problem};
use crate::stability::{donaldson_margin, Q, SurfaceClassData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub sup: f64,
    /// `L²` norm against `ωⁿ/V`
    pub l2: f64,
}

/// Norms of `χ∧ω^{n−1}/ωⁿ − γ` over the nodes of `rule`, both forms normalised
/// so that the ratio averages to `γ` on the critical metric.
pub fn critical_residual(u: &PotentialField, v: &PotentialField, gamma: f64, rule: &QuadratureRule) -> Result<Residual> {
    let n = rule.dim;
    let (mut sup, mut num, mut den): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let (hu, hv) = (u.eval(*x).hess, v.eval(*x).hess);
        if !hu.is_positive_definite(n) || !(hu.det(n) > 0.0) {
            return Err(Error::Convexity(format!("potential not strictly convex at {x:?}")));
        }
        let r = hu.mixed(&hv, n) / hu.det(n) - gamma;
        sup = sup.max(r.abs());
        num += w * r * r * hu.det(n);
        den += w * hu.det(n);
    }
    Ok(Residual { sup, l2: (num / den).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    /// `min` over nodes of the smallest eigenvalue of `nγU − (n−1)V` relative to `U`
    pub min_eigenvalue: f64,
    pub at: [f64; 2],
}

/// Pointwise cone condition `nγω − (n−1)χ > 0` on the sampled metric.
pub fn cone_condition_check(u: &PotentialField, v: &PotentialField, gamma: f64, rule: &QuadratureRule) -> Result<ConeCheck> {
    let n = rule.dim;
    if n != 2 {
        return Err(Error::Input("cone condition is checked on surfaces".into()));
    }
    let mut best = ConeCheck { min_eigenvalue: f64::INFINITY, at: [0.0; 2] };
    for x in &rule.nodes {
        let (hu, hv) = (u.eval(*x).hess, v.eval(*x).hess);
        if !hu.is_positive_definite(n) {
            return Err(Error::Convexity(format!("potential not strictly convex at {x:?}")));
        }
        let lam = hu.relative_eigenvalues(&hv, n)[1];
        let e = n as f64 * gamma - (n as f64 - 1.0) * lam;
        if e < best.min_eigenvalue {
            best = ConeCheck { min_eigenvalue: e, at: *x };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonaldsonCheck {
    pub passes: bool,
    #[serde(with = "crate::stability::serde_q")]
    pub margin: Q,
}

/// `2γL₁ − L₂` pairs strictly positively with every curve generator.
pub fn donaldson_necessary_check(data: &SurfaceClassData) -> Result<DonaldsonCheck> {
    let margin = donaldson_margin(data)?;
    Ok(DonaldsonCheck { passes: margin > Q::from_integer(0.into()), margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub k: u32,
    /// J-flow time
    pub t: f64,
    /// balancing-flow time matched to `t`
    pub t_quantum: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub t_end: f64,
    pub grid_nodes: usize,
    pub boundary: Boundary,
    /// balancing-flow step in its own time
    pub dt_quantum: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig { t_end: 0.25, grid_nodes: 48, boundary: Boundary::Outflow, dt_quantum: 0.05 }
    }
}

/// `sup |Δ − mean Δ|` over interior grid nodes, `Δ = u_quantum − u_continuum`.
fn distance(grid: &GridFlow, u_continuum: &PotentialField, u_quantum: &PotentialField) -> f64 {
    let idx: Vec<usize> = (0..grid.positions().len()).filter(|&i| grid.is_interior(i)).collect();
    let d: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let x = grid.positions()[i];
            u_quantum.value(x) - u_continuum.value(x)
        })
        .collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    d.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

/// Both trajectories behind a comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub rows: Vec<ComparisonRow>,
    /// J-flow states at `t ∈ {0, T/2, T}`
    pub continuum: Vec<FlowState>,
    pub final_grid: GridFlow,
    /// balancing-flow states per `k`, at the matched times
    pub quantum: Vec<(u32, Vec<FlowState>)>,
}

/// Runs the J-flow once and the balancing flow for every `k`, both started from
/// `u0` (the quantum start is `Hilb_χ(e^{−ku0})`).
pub fn comparison_run(problem: &Problem, u0: &PotentialField, k_list: &[u32], cfg: &ComparisonConfig) -> Result<ComparisonRun> {
    if !(cfg.t_end > 0.0) || !(cfg.dt_quantum > 0.0) {
        return Err(Error::Input("comparison needs T > 0 and a positive step".into()));
    }
    let grid = GridFlow::new(problem, u0, cfg.grid_nodes, cfg.boundary)?;
    let (continuum, final_grid) = jflow_run(&grid, cfg.t_end, 2)?;
    let mut rows = Vec::new();
    let mut quantum = Vec::new();
    for &k in k_list {
        let basis = problem.basis(k)?;
        let h0 = hilb_map(problem, &basis, u0)?;
        let tq = matched_time(problem, &basis, cfg.t_end);
        let steps = 2 * ((tq / (2.0 * cfg.dt_quantum)).ceil().max(1.0) as usize);
        let fcfg = FlowConfig { dt: tq / steps as f64, t_end: tq, record_every: steps / 2 };
        let (states, _) = balancing_flow(problem, &basis, &h0, &fcfg)?;
        for (qs, cs) in states.iter().zip(&continuum) {
            let (FlowPayload::Form(h), FlowPayload::Potential(uc)) = (&qs.payload, &cs.payload) else {
                return Err(Error::Input("unexpected flow payloads".into()));
            };
            let uq = fs_map(problem, &basis, h)?;
            rows.push(ComparisonRow { k, t: cs.t, t_quantum: qs.t, distance: distance(&grid, uc, &uq) });
        }
        quantum.push((k, states));
    }
    Ok(ComparisonRun { rows, continuum, final_grid, quantum })
}

/// Distances between `(1/k)·` the balancing-flow potential and the J-flow at
/// `t ∈ {0, T/2, T}`.
pub fn quantization_comparison(
    problem: &Problem,
    u0: &PotentialField,
    k_list: &[u32],
    cfg: &ComparisonConfig,
) -> Result<Vec<ComparisonRow>> {
    Ok(comparison_run(problem, u0, k_list, cfg)?.rows)
}
