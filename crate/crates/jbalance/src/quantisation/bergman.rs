use serde::{Deserialize, Serialize};

use super::hermitian::HermitianForm;
use super::maps::hilb_map;
use super::problem::Problem;
use crate::error::{Error, Result};
use crate::geometry::{LatticeSectionBasis, PotentialField};

/// `ρ_H(x) = Σ_{αβ} (H⁻¹)_{βα} e^{⟨α+β,x⟩/2}` restricted to torus-invariant `H`.
#[derive(Debug, Clone)]
pub struct BergmanDensity {
    pub form: HermitianForm,
    pub basis: LatticeSectionBasis,
}

impl BergmanDensity {
    pub fn new(form: HermitianForm, basis: LatticeSectionBasis) -> Result<Self> {
        form.check_basis(&basis)?;
        if !form.is_diagonal() {
            return Err(Error::Input("Bergman density evaluation needs a diagonal form".into()));
        }
        Ok(BergmanDensity { form, basis })
    }

    /// `log ρ_H(x)`, evaluated with a max-shift.
    pub fn log_density(&self, x: [f64; 2]) -> f64 {
        let d = self.form.diagonal_entries();
        let z: Vec<f64> = self
            .basis
            .points
            .iter()
            .zip(&d)
            .map(|(p, h)| p[0] as f64 * x[0] + p[1] as f64 * x[1] - h.ln())
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }

    /// `ρ_H·e^{−ku}` at `x`: the pointwise norm of an `H`-orthonormal basis in the metric `e^{−ku}`.
    pub fn weighted(&self, x: [f64; 2], u: &PotentialField) -> f64 {
        (self.log_density(x) - self.basis.k as f64 * u.value(x)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BergmanRow {
    pub k: u32,
    pub n_plus_1: usize,
    pub deviation: f64,
}

/// Deviation `sup_x |(V/(N+1))·ρ_k·(χ∧ω^{n−1})/(γωⁿ) − 1|` of the density of states at each level.
///
/// `ρ_k` uses a basis orthonormal for `Hilb_χ(e^{−ku})`.  The normalisation
/// `V/(N+1)` is the exact average of the density of states, and tends to `n!/kⁿ`.
pub fn bergman_check(problem: &Problem, u: &PotentialField, k_list: &[u32]) -> Result<Vec<BergmanRow>> {
    let n = problem.dim();
    let mut rows = Vec::new();
    for &k in k_list {
        let basis = problem.basis(k)?;
        let g = hilb_map(problem, &basis, u)?;
        let dens = BergmanDensity::new(g, basis.clone())?;
        let norm = problem.volume / basis.len() as f64;
        let mut dev: f64 = 0.0;
        for (i, x) in problem.rule.nodes.iter().enumerate() {
            let s = u.eval(*x);
            let vol = s.hess.det(n);
            if !(vol > 0.0) {
                return Err(Error::Convexity(format!("potential degenerate at {x:?}")));
            }
            let ratio = norm * dens.weighted(*x, u) * problem.mixed_density(i, &s.hess)
                / (problem.gamma * problem.volume_density(&s.hess));
            dev = dev.max((ratio - 1.0).abs());
        }
        rows.push(BergmanRow { k, n_plus_1: basis.len(), deviation: dev });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct QkResult {
    /// `Q_k(f)` at the quadrature nodes
    pub values: Vec<f64>,
    /// `sup |Q_k(f) − (ωⁿ/Ω)·f|` over nodes
    pub deviation: f64,
}

/// `Q_k(f)(p) = (V/(N+1))∫|B_k(p, q)|² f(q) Ω(q)` for torus-invariant `u`, `f` and `Ω`.
///
/// `omega` is the density of `Ω` against `dx`, in the same units as `det D²u·c_vol`.
pub fn qk_operator(
    problem: &Problem,
    u: &PotentialField,
    omega: &dyn Fn([f64; 2]) -> f64,
    k: u32,
    f: &dyn Fn([f64; 2]) -> f64,
) -> Result<QkResult> {
    if !u.is_invariant() {
        return Err(Error::Input("Q_k needs a torus-invariant potential".into()));
    }
    let basis = problem.basis(k)?;
    let kf = k as f64;
    let rule = &problem.rule;
    let pts: Vec<[f64; 2]> = basis.points.iter().map(|p| [p[0] as f64, p[1] as f64]).collect();
    let samples: Vec<_> = rule.nodes.iter().map(|&x| u.eval(x)).collect();
    let weight = |a: &[f64; 2], i: usize| {
        let x = rule.nodes[i];
        (a[0] * x[0] + a[1] * x[1] - kf * samples[i].value).exp()
    };
    let om: Vec<f64> = rule.nodes.iter().map(|&x| omega(x)).collect();
    let fv: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
    let mut gram = vec![0.0; pts.len()];
    let mut proj = vec![0.0; pts.len()];
    for (a, pa) in pts.iter().enumerate() {
        for i in 0..rule.len() {
            let c = rule.weights[i] * weight(pa, i) * om[i];
            gram[a] += c;
            proj[a] += c * fv[i];
        }
    }
    if gram.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::NonFinite("Q_k Gram entries".into()));
    }
    let norm = problem.volume / pts.len() as f64;
    let mut values = Vec::with_capacity(rule.len());
    let mut dev: f64 = 0.0;
    for i in 0..rule.len() {
        let q: f64 = pts.iter().enumerate().map(|(a, pa)| weight(pa, i) * proj[a] / (gram[a] * gram[a])).sum::<f64>() * norm;
        let target = problem.volume_density(&samples[i].hess) / om[i] * fv[i];
        dev = dev.max((q - target).abs());
        values.push(q);
    }
    Ok(QkResult { values, deviation: dev })
}
