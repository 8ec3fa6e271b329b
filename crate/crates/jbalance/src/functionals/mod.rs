//! Energy functionals on potentials and on Hermitian forms.
//!
//! All functionals are anchored: `J` and `I_{μ_J}` take explicit endpoints,
//! while `I_{μ⁰}`, `Î_k` and `P̂` use `FS(Id)` at the same level as basepoint.
//! Potentials are on `L₁`; a metric on `L₁ᵏ` is `e^{−ku}`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatticeSectionBasis, PotentialField, Sample};
use crate::quantisation::{fs_map, hilb_map, CMatrix, HermitianForm, Problem};

pub const DEFAULT_SAMPLES: usize = 16;

/// A path of potentials parameterised by `t ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub enum PotentialPath {
    /// `u_t = (1−t)u₀ + t·u₁`
    Linear { start: PotentialField, end: PotentialField, samples: usize },
    /// `u_t = FS(H^{1/2} e^{tA} H^{1/2})` with `A` Hermitian
    Bergman { start: HermitianForm, direction: CMatrix, basis: LatticeSectionBasis, samples: usize },
}

impl PotentialPath {
    pub fn linear(start: PotentialField, end: PotentialField) -> Self {
        PotentialPath::Linear { start, end, samples: DEFAULT_SAMPLES }
    }

    pub fn samples(&self) -> usize {
        match self {
            PotentialPath::Linear { samples, .. } | PotentialPath::Bergman { samples, .. } => *samples,
        }
    }

    fn validate(&self) -> Result<()> {
        let m = self.samples();
        if m < 4 || m % 2 == 1 {
            return Err(Error::Input(format!("path sampling {m} must be even and at least 4")));
        }
        if let PotentialPath::Bergman { start, direction, basis, .. } = self {
            start.check_basis(basis)?;
            if direction.nrows() != start.dim() || (direction - direction.adjoint()).norm() > 1e-12 * (1.0 + direction.norm()) {
                return Err(Error::Input("geodesic direction must be Hermitian of matching size".into()));
            }
        }
        Ok(())
    }

    /// Hermitian form at time `t` on a Bergman path.
    pub fn form_at(&self, t: f64) -> Result<HermitianForm> {
        match self {
            PotentialPath::Bergman { start, direction, .. } => bergman_geodesic(start, direction, t),
            _ => Err(Error::Input("not a Bergman path".into())),
        }
    }
}

fn hermitian_sqrt(h: &CMatrix) -> CMatrix {
    let e = SymmetricEigen::new(h.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

fn hermitian_exp(a: &CMatrix, t: f64) -> CMatrix {
    let e = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|v| Complex64::new((t * v).exp(), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

/// `H^{1/2} e^{tA} H^{1/2}`; exactly diagonal when `H` and `A` are.
pub fn bergman_geodesic(h: &HermitianForm, a: &CMatrix, t: f64) -> Result<HermitianForm> {
    let n = h.dim();
    let a_diag = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == Complex64::new(0.0, 0.0)));
    if h.is_diagonal() && a_diag {
        let d = h.diagonal_entries();
        let mat = CMatrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(d[i] * (t * a[(i, i)].re).exp(), 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        return HermitianForm::with_hash(h.k, h.basis_hash.clone(), mat);
    }
    let s = hermitian_sqrt(h.matrix());
    HermitianForm::with_hash(h.k, h.basis_hash.clone(), &s * hermitian_exp(a, t) * &s)
}

fn simpson_weights(m: usize) -> Vec<f64> {
    let h = 1.0 / m as f64;
    (0..=m)
        .map(|i| {
            let c = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            c * h / 3.0
        })
        .collect()
}

fn samples(problem: &Problem, u: &PotentialField) -> Result<Vec<Sample>> {
    if !u.is_invariant() {
        return Err(Error::Input("functionals are evaluated on torus-invariant potentials".into()));
    }
    Ok(problem.rule.nodes.iter().map(|&x| u.eval(x)).collect())
}

/// Per-node `(φ̇, m(u_t), det-density(u_t))` at time `t`, with strict convexity checked.
fn path_slice(problem: &Problem, path: &PotentialPath, cache: &LinearCache, t: f64) -> Result<Vec<(f64, f64, f64)>> {
    let n = problem.dim();
    let out = match path {
        PotentialPath::Linear { .. } => cache
            .0
            .iter()
            .zip(&cache.1)
            .enumerate()
            .map(|(i, (s0, s1))| {
                let h = s0.hess.lin(1.0 - t, s1.hess, t);
                (s1.value - s0.value, h, i)
            })
            .collect::<Vec<_>>(),
        PotentialPath::Bergman { basis, direction, start, .. } => {
            let eps = 1e-4;
            let field = |s: f64| -> Result<Vec<Sample>> {
                let hf = bergman_geodesic(start, direction, s)?;
                samples(problem, &fs_map(problem, basis, &hf)?)
            };
            let (a, b, c) = (field(t - eps)?, field(t)?, field(t + eps)?);
            a.iter()
                .zip(&b)
                .zip(&c)
                .enumerate()
                .map(|(i, ((sa, sb), sc))| ((sc.value - sa.value) / (2.0 * eps), sb.hess, i))
                .collect()
        }
    };
    out.into_iter()
        .map(|(phidot, h, i)| {
            if !h.is_positive_definite(n) {
                return Err(Error::Convexity(format!("path leaves the convex cone at t = {t}")));
            }
            Ok((phidot, problem.mixed_density(i, &h), problem.volume_density(&h)))
        })
        .collect()
}

struct LinearCache(Vec<Sample>, Vec<Sample>);

fn integrate_path(problem: &Problem, path: &PotentialPath, mix: f64, vol: f64) -> Result<f64> {
    path.validate()?;
    let cache = match path {
        PotentialPath::Linear { start, end, .. } => LinearCache(samples(problem, start)?, samples(problem, end)?),
        PotentialPath::Bergman { .. } => LinearCache(Vec::new(), Vec::new()),
    };
    let m = path.samples();
    let mut total = 0.0;
    for (j, wt) in simpson_weights(m).into_iter().enumerate() {
        let t = j as f64 / m as f64;
        let slice = path_slice(problem, path, &cache, t)?;
        let inner: f64 = slice
            .iter()
            .zip(&problem.rule.weights)
            .map(|((phidot, md, vd), w)| w * phidot * (mix * md / problem.gamma + vol * vd))
            .sum();
        total += wt * inner;
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("path integral".into()));
    }
    Ok(total)
}

/// `J(u₁) − J(u₀) = ∫₀¹ (1/γ)∫ φ̇ χ∧ω_t^{n−1} dt` along the path.
pub fn j_energy(problem: &Problem, path: &PotentialPath) -> Result<f64> {
    integrate_path(problem, path, 1.0, 0.0)
}

/// `J` between two potentials along the straight path.
pub fn j_between(problem: &Problem, u0: &PotentialField, u1: &PotentialField) -> Result<f64> {
    j_energy(problem, &PotentialPath::linear(u0.clone(), u1.clone()))
}

/// `I_{μ_J}(u₀, u₁) = ∫₀¹∫ φ̇ ((1/γ)χ∧ω_t^{n−1} − ω_tⁿ) dt` along the straight path.
pub fn i_mu_j(problem: &Problem, u0: &PotentialField, u1: &PotentialField) -> Result<f64> {
    integrate_path(problem, &PotentialPath::linear(u0.clone(), u1.clone()), 1.0, -1.0)
}

/// `−∫₀¹∫ φ̇ ω_tⁿ dt`, the Aubin–Yau part of `I_{μ_J}`.
pub fn aubin_yau(problem: &Problem, path: &PotentialPath) -> Result<f64> {
    integrate_path(problem, path, 0.0, -1.0)
}

/// Basepoint `FS(Id)` at the level of `basis`.
pub fn basepoint(problem: &Problem, basis: &LatticeSectionBasis) -> Result<PotentialField> {
    fs_map(problem, basis, &HermitianForm::identity(basis))
}

/// `I_{μ⁰}(H) = k·J(FS(Id), FS(H)) + (V/(N+1))·log det H`.
pub fn i_mu0(problem: &Problem, basis: &LatticeSectionBasis, h: &HermitianForm) -> Result<f64> {
    let k = basis.k as f64;
    let j = j_between(problem, &basepoint(problem, basis)?, &fs_map(problem, basis, h)?)?;
    Ok(k * j + problem.volume / basis.len() as f64 * h.log_det()?)
}

/// `Î_k(e^{−ku}) = k·J(FS(Id), u) + (V/(N+1))·log det Hilb_χ(e^{−ku})`.
pub fn i_hat(problem: &Problem, basis: &LatticeSectionBasis, u: &PotentialField) -> Result<f64> {
    let k = basis.k as f64;
    let j = j_between(problem, &basepoint(problem, basis)?, u)?;
    let g = hilb_map(problem, basis, u)?;
    Ok(k * j + problem.volume / basis.len() as f64 * g.log_det()?)
}

/// `P̂(e^{−ku}, H) = (N+1)·log(tr(Hilb_χ(u)·H⁻¹)/(N+1)) + log det H + ((N+1)/V)·k·J(FS(Id), u)`.
pub fn p_hat(problem: &Problem, basis: &LatticeSectionBasis, u: &PotentialField, h: &HermitianForm) -> Result<f64> {
    let n1 = basis.len() as f64;
    let k = basis.k as f64;
    let g = hilb_map(problem, basis, u)?;
    let tr = h.trace_against(g.matrix())?;
    let j = j_between(problem, &basepoint(problem, basis)?, u)?;
    Ok(n1 * (tr / n1).ln() + h.log_det()? + n1 / problem.volume * k * j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalId {
    LogDet,
    JOfFs,
    IMu0,
    AubinYau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityProbe {
    pub functional: FunctionalId,
    pub values: Vec<f64>,
    pub min_second_difference: f64,
}

/// Smallest second central difference over interior samples.
pub fn min_second_difference(values: &[f64]) -> f64 {
    values.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min)
}

/// Samples a functional at the `m + 1` points of a path.
pub fn convexity_probe(problem: &Problem, functional: FunctionalId, path: &PotentialPath) -> Result<ConvexityProbe> {
    path.validate()?;
    let m = path.samples();
    let mut values = Vec::with_capacity(m + 1);
    match (functional, path) {
        (FunctionalId::AubinYau, PotentialPath::Linear { start, end, .. }) => {
            for j in 0..=m {
                let t = j as f64 / m as f64;
                let sub = PotentialPath::linear(start.clone(), start.interpolate(end, t));
                values.push(aubin_yau(problem, &sub)?);
            }
        }
        (_, PotentialPath::Bergman { basis, .. }) => {
            let base = basepoint(problem, basis)?;
            for j in 0..=m {
                let h = path.form_at(j as f64 / m as f64)?;
                values.push(match functional {
                    FunctionalId::LogDet => h.log_det()?,
                    FunctionalId::JOfFs => j_between(problem, &base, &fs_map(problem, basis, &h)?)?,
                    FunctionalId::IMu0 => i_mu0(problem, basis, &h)?,
                    FunctionalId::AubinYau => {
                        aubin_yau(problem, &PotentialPath::linear(base.clone(), fs_map(problem, basis, &h)?))?
                    }
                });
            }
        }
        _ => return Err(Error::Input("functional not defined on this path type".into())),
    }
    Ok(ConvexityProbe { functional, min_second_difference: min_second_difference(&values), values })
}
