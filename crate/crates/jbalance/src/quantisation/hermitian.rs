use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticeSectionBasis;

pub type CMatrix = DMatrix<Complex64>;

/// Positive-definite Hermitian form on `H⁰(L₁ᵏ)` in the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    pub k: u32,
    pub basis_hash: String,
    mat: CMatrix,
    diagonal: bool,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianForm {
    /// Validates Hermitian symmetry and positive definiteness; the diagonal
    /// flag is set when every off-diagonal entry is exactly zero.
    pub fn new(basis: &LatticeSectionBasis, mat: CMatrix) -> Result<Self> {
        Self::with_hash(basis.k, basis.hash(), mat)
    }

    pub fn with_hash(k: u32, basis_hash: String, mut mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || mat.ncols() != n {
            return Err(Error::Input("Hermitian form must be square and nonempty".into()));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian form entries".into()));
        }
        let scale = mat.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..=i {
                let (a, b) = (mat[(i, j)], mat[(j, i)].conj());
                if (a - b).norm() > HERMITIAN_TOL * scale.max(1.0) {
                    return Err(Error::Input(format!("matrix not Hermitian at ({i}, {j})")));
                }
                let avg = (a + b) * 0.5;
                mat[(i, j)] = avg;
                mat[(j, i)] = avg.conj();
            }
        }
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || mat[(i, j)] == Complex64::new(0.0, 0.0)));
        let h = HermitianForm { k, basis_hash, mat, diagonal };
        h.cholesky()?;
        Ok(h)
    }

    pub fn identity(basis: &LatticeSectionBasis) -> Self {
        Self::from_diagonal(basis, &vec![1.0; basis.len()]).expect("identity is positive definite")
    }

    pub fn from_diagonal(basis: &LatticeSectionBasis, d: &[f64]) -> Result<Self> {
        if d.len() != basis.len() {
            return Err(Error::Input("diagonal length differs from basis size".into()));
        }
        let mat = CMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { Complex64::new(d[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        Self::new(basis, mat)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Fails unless every pivot is real and positive (a complex square root of a
    /// negative pivot would otherwise pass).
    pub fn cholesky(&self) -> Result<Cholesky<Complex64, Dyn>> {
        let fail = || {
            let min = (0..self.dim()).map(|i| self.mat[(i, i)].re).fold(f64::INFINITY, f64::min);
            Error::NotPositiveDefinite(format!("Cholesky failed (n = {}, min diagonal {min:e})", self.dim()))
        };
        let c = Cholesky::new(self.mat.clone()).ok_or_else(fail)?;
        let l = c.l_dirty();
        if (0..self.dim()).all(|i| l[(i, i)].re > 0.0 && l[(i, i)].im.abs() <= 1e-12 * l[(i, i)].re) {
            Ok(c)
        } else {
            Err(fail())
        }
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        if self.diagonal {
            return Ok(CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                if i == j { Complex64::new(1.0 / self.mat[(i, i)].re, 0.0) } else { Complex64::new(0.0, 0.0) }
            }));
        }
        Ok(self.cholesky()?.inverse())
    }

    pub fn log_det(&self) -> Result<f64> {
        if self.diagonal {
            return Ok(self.diagonal_entries().iter().map(|d| d.ln()).sum());
        }
        let l = self.cholesky()?;
        Ok(2.0 * l.l_dirty().diagonal().iter().map(|z| z.re.ln()).sum::<f64>())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Input("scale must be positive".into()));
        }
        Self::with_hash(self.k, self.basis_hash.clone(), self.mat.map(|z| z * c))
    }

    /// Rescaled to `det H = 1`.
    pub fn det_normalised(&self) -> Result<Self> {
        let c = (-self.log_det()? / self.dim() as f64).exp();
        self.scaled(c)
    }

    /// `tr(A·H⁻¹)`.
    pub fn trace_against(&self, a: &CMatrix) -> Result<f64> {
        Ok((a * self.inverse()?).trace().re)
    }

    pub fn to_record(&self) -> HermitianRecord {
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.mat[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        HermitianRecord { level: self.k, basis_hash: self.basis_hash.clone(), dim: n, diagonal: self.diagonal, entries }
    }

    pub fn from_record(r: &HermitianRecord) -> Result<Self> {
        if r.entries.len() != r.dim * r.dim {
            return Err(Error::Input("entry count differs from dim²".into()));
        }
        let mat = CMatrix::from_fn(r.dim, r.dim, |i, j| {
            let e = r.entries[i * r.dim + j];
            Complex64::new(e[0], e[1])
        });
        let h = Self::with_hash(r.level, r.basis_hash.clone(), mat)?;
        if r.diagonal && !h.diagonal {
            return Err(Error::Input("record flagged diagonal has off-diagonal entries".into()));
        }
        Ok(h)
    }

    pub fn check_basis(&self, basis: &LatticeSectionBasis) -> Result<()> {
        if basis.hash() != self.basis_hash || basis.len() != self.dim() {
            return Err(Error::Input("Hermitian form belongs to a different section basis".into()));
        }
        Ok(())
    }
}

/// Serialised form: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianRecord {
    pub level: u32,
    pub basis_hash: String,
    pub dim: usize,
    pub diagonal: bool,
    pub entries: Vec<[f64; 2]>,
}

/// `d_k(H₀, H₁) = ‖H₀ − H₁‖_F / k`.
pub fn metric_distance(h0: &HermitianForm, h1: &HermitianForm, k: u32) -> Result<f64> {
    if h0.dim() != h1.dim() {
        return Err(Error::Input("forms of different size".into()));
    }
    Ok((h0.matrix() - h1.matrix()).norm() / k as f64)
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_op_norm(a: &CMatrix) -> f64 {
    a.clone().symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
