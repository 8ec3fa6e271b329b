use nalgebra::DVector;
use num_complex::Complex64;

use super::hermitian::{hermitian_op_norm, CMatrix, HermitianForm};
use super::problem::Problem;
use crate::error::{Error, Result};
use crate::geometry::{BergmanPotential, LatticeSectionBasis, LogSumExp, PotentialField};

fn exps(basis: &LatticeSectionBasis) -> Vec<[f64; 2]> {
    basis.points.iter().map(|p| [p[0] as f64, p[1] as f64]).collect()
}

/// Potential `u_H` on `L₁` with `k·u_H = log ρ_H − log((N+1)/V)`.
pub fn fs_map(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm) -> Result<PotentialField> {
    h.check_basis(basis)?;
    let k = basis.k as f64;
    let shift = -((basis.len() as f64) / problem.volume).ln() / k;
    if h.is_diagonal() {
        let logc = h.diagonal_entries().iter().map(|d| -d.ln()).collect();
        Ok(PotentialField::LogSumExp(LogSumExp::new(basis.dim, exps(basis), logc, 1.0 / k, shift)?))
    } else {
        Ok(PotentialField::Bergman(BergmanPotential { dim: basis.dim, exps: exps(basis), hinv: h.inverse()?, k, shift }))
    }
}

/// Gram matrix `(1/γ)∫ s_α s̄_β e^{−ku} χ∧ω_u^{n−1}` of the monomials at level `k`.
pub fn hilb_map(problem: &Problem, basis: &LatticeSectionBasis, u: &PotentialField) -> Result<HermitianForm> {
    let g = if u.is_invariant() { hilb_diagonal(problem, basis, u)? } else { hilb_angular(problem, basis, u)? };
    HermitianForm::new(basis, g)
}

fn check_node(x: [f64; 2], m: f64, hess_pd: bool) -> Result<()> {
    if !hess_pd {
        return Err(Error::Convexity(format!("potential not strictly convex at {x:?}")));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite(format!("mixed density at {x:?}")));
    }
    Ok(())
}

fn hilb_diagonal(problem: &Problem, basis: &LatticeSectionBasis, u: &PotentialField) -> Result<CMatrix> {
    let k = basis.k as f64;
    let n = basis.dim;
    let e = exps(basis);
    let mut g = vec![0.0; e.len()];
    for (i, (x, w)) in problem.rule.nodes.iter().zip(&problem.rule.weights).enumerate() {
        let s = u.eval(*x);
        let m = problem.mixed_density(i, &s.hess);
        check_node(*x, m, s.hess.is_positive_definite(n))?;
        let c = w * m / problem.gamma;
        for (a, ea) in e.iter().enumerate() {
            g[a] += c * (ea[0] * x[0] + ea[1] * x[1] - k * s.value).exp();
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Gram matrix entries".into()));
    }
    let z = Complex64::new(0.0, 0.0);
    Ok(CMatrix::from_fn(e.len(), e.len(), |i, j| if i == j { Complex64::new(g[i], 0.0) } else { z }))
}

fn hilb_angular(problem: &Problem, basis: &LatticeSectionBasis, u: &PotentialField) -> Result<CMatrix> {
    let k = basis.k as f64;
    let n = basis.dim;
    let e = exps(basis);
    let span = (0..n)
        .map(|a| {
            let lo = basis.points.iter().map(|p| p[a]).min().unwrap();
            let hi = basis.points.iter().map(|p| p[a]).max().unwrap();
            (hi - lo) as usize
        })
        .max()
        .unwrap_or(0);
    // the integrand is not a trigonometric polynomial; 8·span+1 points give ~1e-10 at k ≤ 2
    let mut rule = problem.rule.clone();
    rule.angular = rule.angular.max(8 * span.max(1) + 1);
    let angles = rule.angles();
    let mut g = CMatrix::zeros(e.len(), e.len());
    let one = Complex64::new(1.0, 0.0);
    for (i, (x, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for (theta, wt) in &angles {
            let s = u.eval_at(*x, *theta);
            let m = problem.mixed_density(i, &s.hess);
            check_node(*x, m, s.hess.is_positive_definite(n))?;
            let c = (w * wt * m / problem.gamma).sqrt();
            let a = DVector::from_iterator(
                e.len(),
                e.iter().map(|ea| {
                    let r = ((ea[0] * x[0] + ea[1] * x[1] - k * s.value) / 2.0).exp() * c;
                    Complex64::from_polar(r, ea[0] * theta[0] + ea[1] * theta[1])
                }),
            );
            g.gerc(one, &a, &a, one);
        }
    }
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Gram matrix entries".into()));
    }
    Ok(g)
}

/// `H ↦ Hilb_χ(FS(H))`.
pub fn t_map(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm) -> Result<HermitianForm> {
    hilb_map(problem, basis, &fs_map(problem, basis, h)?)
}

#[derive(Debug, Clone)]
pub struct MomentMap {
    /// traceless, in the Cholesky gauge of `H`
    pub mu0: CMatrix,
    /// `Hilb_χ(FS(H))`
    pub image: HermitianForm,
}

impl MomentMap {
    pub fn frobenius(&self) -> f64 {
        self.mu0.norm()
    }

    pub fn operator_norm(&self) -> f64 {
        hermitian_op_norm(&self.mu0)
    }
}

/// `μ⁰ = (V/(N+1))·(M − tr M/(N+1)·Id)` with `M = L⁻¹·G·L^{−*}`, `H = LL*`.
pub fn moment_map_mu0(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm) -> Result<MomentMap> {
    let g = t_map(problem, basis, h)?;
    let mu0 = mu0_from(problem.volume, h, &g)?;
    Ok(MomentMap { mu0, image: g })
}

pub fn mu0_from(volume: f64, h: &HermitianForm, g: &HermitianForm) -> Result<CMatrix> {
    let n1 = h.dim();
    let mut m = if h.is_diagonal() && g.is_diagonal() {
        let (hd, gd) = (h.diagonal_entries(), g.diagonal_entries());
        CMatrix::from_fn(n1, n1, |i, j| if i == j { Complex64::new(gd[i] / hd[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    } else {
        let l = h.cholesky()?.l();
        let li = l
            .clone()
            .solve_lower_triangular(&CMatrix::identity(n1, n1))
            .ok_or_else(|| Error::NotPositiveDefinite("triangular solve".into()))?;
        &li * g.matrix() * li.adjoint()
    };
    let tr = m.trace() / n1 as f64;
    for i in 0..n1 {
        m[(i, i)] -= tr;
    }
    Ok(m * Complex64::new(volume / n1 as f64, 0.0))
}
