//! Potentials on logarithmic coordinates.
//!
//! A torus-invariant metric on `L₁` is `h = e^{-u}` with `u` convex on `ℝⁿ`;
//! its curvature is represented by the Hessian `D²u`.  For non-invariant data
//! the Hessian is the complex Hessian `∂∂̄u` in the coordinate
//! `w = x/2 + iθ`, which reduces to `D²u` on invariant functions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermitian `n×n` matrix (`n ≤ 2`) stored as `[[a, c],[c̄, b]]`, `c = cr + i·ci`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hess {
    pub a: f64,
    pub b: f64,
    pub cr: f64,
    pub ci: f64,
}

impl Hess {
    pub fn real(a: f64, b: f64, c: f64) -> Self {
        Hess { a, b, cr: c, ci: 0.0 }
    }

    pub fn scale(self, s: f64) -> Self {
        Hess { a: s * self.a, b: s * self.b, cr: s * self.cr, ci: s * self.ci }
    }

    pub fn add(self, o: Hess) -> Self {
        Hess { a: self.a + o.a, b: self.b + o.b, cr: self.cr + o.cr, ci: self.ci + o.ci }
    }

    /// `s·self + t·o`.
    pub fn lin(self, s: f64, o: Hess, t: f64) -> Self {
        self.scale(s).add(o.scale(t))
    }

    pub fn det(&self, n: usize) -> f64 {
        if n == 1 {
            self.a
        } else {
            self.a * self.b - self.cr * self.cr - self.ci * self.ci
        }
    }

    pub fn trace(&self, n: usize) -> f64 {
        if n == 1 {
            self.a
        } else {
            self.a + self.b
        }
    }

    /// `(1/n)·tr(adj(self)·v)`, the mixed discriminant.
    pub fn mixed(&self, v: &Hess, n: usize) -> f64 {
        if n == 1 {
            v.a
        } else {
            0.5 * (self.b * v.a + self.a * v.b - 2.0 * (self.cr * v.cr + self.ci * v.ci))
        }
    }

    /// Positive definite up to roundoff in the determinant.
    pub fn is_positive_definite(&self, n: usize) -> bool {
        self.a > 0.0 && (n == 1 || (self.b > 0.0 && self.det(2) > -1e-12 * self.a * self.b))
    }

    /// Eigenvalues of `self⁻¹·v`, ascending; `self` positive definite.
    pub fn relative_eigenvalues(&self, v: &Hess, n: usize) -> [f64; 2] {
        if n == 1 {
            let l = v.a / self.a;
            return [l, l];
        }
        // det(v − λ·self) = 0
        let qa = self.det(2);
        let qb = -(self.a * v.b + self.b * v.a - 2.0 * (self.cr * v.cr + self.ci * v.ci));
        let qc = v.det(2);
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let (l1, l2) = ((-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa));
        [l1.min(l2), l1.max(l2)]
    }
}

/// `u(x) = scale·log Σᵢ exp(logcᵢ + ⟨eᵢ, x⟩) + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExp {
    pub dim: usize,
    pub exps: Vec<[f64; 2]>,
    pub logc: Vec<f64>,
    pub scale: f64,
    pub shift: f64,
}

impl LogSumExp {
    pub fn new(dim: usize, exps: Vec<[f64; 2]>, logc: Vec<f64>, scale: f64, shift: f64) -> Result<Self> {
        if exps.is_empty() || exps.len() != logc.len() {
            return Err(Error::Input("log-sum-exp needs matching nonempty terms".into()));
        }
        if !(scale > 0.0) || logc.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("log-sum-exp coefficients must be finite, scale > 0".into()));
        }
        Ok(LogSumExp { dim, exps, logc, scale, shift })
    }

    fn softmax(&self, x: [f64; 2]) -> (f64, Vec<f64>) {
        let z: Vec<f64> = self
            .exps
            .iter()
            .zip(&self.logc)
            .map(|(e, c)| c + e[0] * x[0] + e[1] * x[1])
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = w.iter().sum();
        (m + s.ln(), w.into_iter().map(|v| v / s).collect())
    }

    pub fn eval(&self, x: [f64; 2]) -> Sample {
        let (lse, p) = self.softmax(x);
        let mut g = [0.0; 2];
        for (e, &pi) in self.exps.iter().zip(&p) {
            g[0] += pi * e[0];
            g[1] += pi * e[1];
        }
        // two-pass covariance: no cancellation where one term dominates
        let mut h = [0.0; 3];
        for (e, &pi) in self.exps.iter().zip(&p) {
            let d = [e[0] - g[0], e[1] - g[1]];
            h[0] += pi * d[0] * d[0];
            h[1] += pi * d[1] * d[1];
            h[2] += pi * d[0] * d[1];
        }
        let s = self.scale;
        Sample {
            value: s * lse + self.shift,
            grad: [s * g[0], s * g[1]],
            hess: Hess::real(s * h[0], s * h[1], s * h[2]),
        }
    }
}

/// Potential sampled on a rectangular grid in the logistic variable `t = 1/(1+e^{-x})`.
///
/// Values, gradients and Hessians are stored at the nodes and interpolated bilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    pub dim: usize,
    /// node coordinates in `t`, per axis, increasing
    pub t: [Vec<f64>; 2],
    pub samples: Vec<Sample>,
}

impl GridPotential {
    fn locate(axis: &[f64], t: f64) -> (usize, f64) {
        if axis.len() == 1 {
            return (0, 0.0);
        }
        let t = t.clamp(axis[0], axis[axis.len() - 1]);
        let i = match axis.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(axis.len() - 2),
            Err(i) => i.saturating_sub(1).min(axis.len() - 2),
        };
        (i, (t - axis[i]) / (axis[i + 1] - axis[i]))
    }

    pub fn eval(&self, x: [f64; 2]) -> Sample {
        let lg = |v: f64| 1.0 / (1.0 + (-v).exp());
        let (i, fx) = Self::locate(&self.t[0], lg(x[0]));
        let (j, fy) = if self.dim == 2 { Self::locate(&self.t[1], lg(x[1])) } else { (0, 0.0) };
        let ny = self.t[1].len();
        let at = |a: usize, b: usize| &self.samples[a * ny + b];
        let corners: Vec<(f64, &Sample)> = if self.dim == 2 {
            vec![
                ((1.0 - fx) * (1.0 - fy), at(i, j)),
                (fx * (1.0 - fy), at(i + 1, j)),
                ((1.0 - fx) * fy, at(i, j + 1)),
                (fx * fy, at(i + 1, j + 1)),
            ]
        } else {
            let i1 = (i + 1).min(self.t[0].len() - 1);
            vec![(1.0 - fx, at(i, 0)), (fx, at(i1, 0))]
        };
        let mut out = Sample::default();
        for (w, s) in corners {
            out.value += w * s.value;
            out.grad[0] += w * s.grad[0];
            out.grad[1] += w * s.grad[1];
            out.hess = out.hess.add(s.hess.scale(w));
        }
        out
    }
}

/// `u = (1/k)·log Σ_{αβ} (H⁻¹)_{βα} s_α s̄_β + shift` for a general Hermitian `H`.
///
/// Not torus-invariant unless `H` is diagonal, so it is evaluated at `(x, θ)`
/// and reports the complex Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct BergmanPotential {
    pub dim: usize,
    pub exps: Vec<[f64; 2]>,
    pub hinv: DMatrix<Complex64>,
    pub k: f64,
    pub shift: f64,
}

impl BergmanPotential {
    pub fn eval_at(&self, x: [f64; 2], theta: [f64; 2]) -> Sample {
        let n = self.exps.len();
        let m = self.exps.iter().map(|e| e[0] * x[0] + e[1] * x[1]).fold(f64::NEG_INFINITY, f64::max);
        let a = DVector::from_iterator(
            n,
            self.exps.iter().map(|e| {
                Complex64::from_polar(((e[0] * x[0] + e[1] * x[1] - m) / 2.0).exp(), e[0] * theta[0] + e[1] * theta[1])
            }),
        );
        let ai: Vec<DVector<Complex64>> = (0..2)
            .map(|i| DVector::from_iterator(n, a.iter().zip(&self.exps).map(|(v, e)| v * e[i])))
            .collect();
        let b = &self.hinv * &a;
        let bi: Vec<DVector<Complex64>> = ai.iter().map(|v| &self.hinv * v).collect();
        let rho = a.dotc(&b).re;
        let r: Vec<Complex64> = bi.iter().map(|v| a.dotc(v)).collect();
        let rbar: Vec<Complex64> = ai.iter().map(|v| v.dotc(&b)).collect();
        let h = |i: usize, j: usize| (ai[j].dotc(&bi[i]) / rho - r[i] * rbar[j] / (rho * rho)) / self.k;
        let (h11, h22, h12) = (h(0, 0), h(1, 1), h(0, 1));
        Sample {
            value: (m + rho.ln()) / self.k + self.shift,
            grad: [r[0].re / (rho * self.k), r[1].re / (rho * self.k)],
            hess: Hess { a: h11.re, b: h22.re, cr: h12.re, ci: h12.im },
        }
    }
}

/// Value, gradient and Hessian of a potential at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: Hess,
}

/// A convex potential on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialField {
    LogSumExp(LogSumExp),
    /// `Σ cᵢ uᵢ`
    Combination(Vec<(f64, PotentialField)>),
    Grid(GridPotential),
    Bergman(BergmanPotential),
}

impl PotentialField {
    pub fn dim(&self) -> usize {
        match self {
            PotentialField::LogSumExp(l) => l.dim,
            PotentialField::Combination(v) => v[0].1.dim(),
            PotentialField::Grid(g) => g.dim,
            PotentialField::Bergman(b) => b.dim,
        }
    }

    pub fn is_invariant(&self) -> bool {
        match self {
            PotentialField::Combination(v) => v.iter().all(|(_, u)| u.is_invariant()),
            PotentialField::Bergman(_) => false,
            _ => true,
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> Sample {
        self.eval_at(x, [0.0; 2])
    }

    /// Evaluation at `(x, θ)`; `θ` is ignored by torus-invariant potentials.
    pub fn eval_at(&self, x: [f64; 2], theta: [f64; 2]) -> Sample {
        match self {
            PotentialField::LogSumExp(l) => l.eval(x),
            PotentialField::Bergman(b) => b.eval_at(x, theta),
            PotentialField::Combination(terms) => {
                let mut out = Sample::default();
                for (c, u) in terms {
                    let s = u.eval_at(x, theta);
                    out.value += c * s.value;
                    out.grad[0] += c * s.grad[0];
                    out.grad[1] += c * s.grad[1];
                    out.hess = out.hess.add(s.hess.scale(*c));
                }
                out
            }
            PotentialField::Grid(g) => g.eval(x),
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.eval(x).value
    }

    pub fn scaled(self, c: f64) -> PotentialField {
        PotentialField::Combination(vec![(c, self)])
    }

    /// `(1−t)·self + t·other`.
    pub fn interpolate(&self, other: &PotentialField, t: f64) -> PotentialField {
        PotentialField::Combination(vec![(1.0 - t, self.clone()), (t, other.clone())])
    }

    /// Adds the affine function `⟨a, x⟩ + c`.
    pub fn plus_affine(self, a: [f64; 2], c: f64) -> PotentialField {
        let dim = self.dim();
        let lin = LogSumExp { dim, exps: vec![a], logc: vec![0.0], scale: 1.0, shift: c };
        PotentialField::Combination(vec![(1.0, self), (1.0, PotentialField::LogSumExp(lin))])
    }
}

/// Potential of the metric defined by the lattice points of `P` with unit weights.
pub fn reference_potential(p: &crate::geometry::DelzantPolytope) -> PotentialField {
    let pts = crate::geometry::enumerate_lattice_points(p, 1).expect("k = 1 is valid");
    let exps = pts.points.iter().map(|q| [q[0] as f64, q[1] as f64]).collect::<Vec<_>>();
    let n = exps.len();
    PotentialField::LogSumExp(LogSumExp { dim: p.dim(), exps, logc: vec![0.0; n], scale: 1.0, shift: 0.0 })
}

/// Sum of per-axis potentials: `Σₐ log Σ_{j ≤ dₐ} C(dₐ, j)·e^{j·xₐ}`, the round product metric
/// on `O(d₁, d₂)`.
pub fn round_product_potential(degrees: &[i64]) -> PotentialField {
    let dim = degrees.len();
    let terms = degrees
        .iter()
        .enumerate()
        .map(|(axis, &d)| {
            let mut e = [0.0; 2];
            e[axis] = 1.0;
            let l = LogSumExp { dim, exps: vec![[0.0; 2], e], logc: vec![0.0, 0.0], scale: d as f64, shift: 0.0 };
            (1.0, PotentialField::LogSumExp(l))
        })
        .collect();
    PotentialField::Combination(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_derivatives_match_finite_differences() {
        let u = LogSumExp::new(
            2,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 2.0]],
            vec![0.3, -0.2, 0.5, 0.1],
            0.5,
            0.2,
        )
        .unwrap();
        let h = 1e-4;
        for x in [[0.3, -0.7], [2.0, 1.0], [-3.0, 4.0]] {
            let s = u.eval(x);
            for a in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += h;
                xm[a] -= h;
                let g = (u.eval(xp).value - u.eval(xm).value) / (2.0 * h);
                assert!((g - s.grad[a]).abs() < 1e-7);
            }
            let mut xp = x;
            let mut xm = x;
            xp[0] += h;
            xm[0] -= h;
            let d2 = (u.eval(xp).value - 2.0 * s.value + u.eval(xm).value) / (h * h);
            assert!((d2 - s.hess.a).abs() < 1e-5);
            let mixed = (u.eval(xp).grad[1] - u.eval(xm).grad[1]) / (2.0 * h);
            assert!((mixed - s.hess.cr).abs() < 1e-7);
        }
    }

    #[test]
    fn no_overflow_far_out() {
        let u = LogSumExp::new(1, vec![[0.0, 0.0], [5.0, 0.0]], vec![0.0, 0.0], 1.0, 0.0).unwrap();
        let s = u.eval([400.0, 0.0]);
        assert!((s.value - 2000.0).abs() < 1e-9);
        assert!(s.hess.a.is_finite());
    }

    #[test]
    fn relative_eigenvalues_of_scaled_identity() {
        let h = Hess::real(2.0, 3.0, 0.5);
        let ev = h.relative_eigenvalues(&h.scale(1.5), 2);
        assert!((ev[0] - 1.5).abs() < 1e-12 && (ev[1] - 1.5).abs() < 1e-12);
        let v = Hess::real(1.0, 0.0, 0.0);
        let e = Hess::real(1.0, 1.0, 0.0).relative_eigenvalues(&v, 2);
        assert!((e[0]).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_of_self_is_det() {
        let h = Hess::real(2.0, 3.0, 0.5);
        assert!((h.mixed(&h, 2) - h.det(2)).abs() < 1e-12);
    }
}
