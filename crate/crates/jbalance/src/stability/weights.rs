use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::classes::SurfaceClassData;
use super::rational::{frac, q, serde_q, Poly, Q};
use super::table::{Class, IntersectionTable};
use crate::error::{Error, Result};

fn test_class(table: &IntersectionTable, r: &Q) -> Result<Class> {
    if !r.is_positive() {
        return Err(Error::Input(format!("exponent r = {r} must be positive")));
    }
    table.class(&[("L1", r.clone()), ("E", q(-1))])
}

/// `(rL₁ − E)²·(−(2/3)(γ/r)(rL₁ − E) + L)` for the class named `l2_label`.
pub fn j_weight_for(table: &IntersectionTable, l2_label: &str, gamma: &Q, r: &Q) -> Result<Q> {
    let x = test_class(table, r)?;
    let l2 = table.basis(l2_label)?;
    let slope = -frac(2, 3) * gamma / r;
    Ok(slope * table.cube(&x) + table.product(&x, &x, &l2))
}

/// J-weight of `(B, rL₁ − E)` with respect to `L₂`.
pub fn j_weight(table: &IntersectionTable, gamma: &Q, r: &Q) -> Result<Q> {
    j_weight_for(table, "L2", gamma, r)
}

/// Donaldson–Futaki invariant, with `K_{B/M×ℙ¹} = E`.
pub fn df_weight(table: &IntersectionTable, data: &SurfaceClassData, r: &Q) -> Result<Q> {
    let gamma_k = frac(data.kl1, data.l1l1);
    let x = test_class(table, r)?;
    let slope = -frac(2, 3) * &gamma_k / r;
    let k = table.basis("K")?;
    let e = table.basis("E")?;
    let twist: Class = x
        .iter()
        .zip(k.iter().zip(&e))
        .map(|(xi, (ki, ei))| &slope * xi + ki + ei)
        .collect();
    let df = table.product(&x, &x, &twist);
    let split = j_weight_for(table, "K", &gamma_k, r)? + table.product(&x, &x, &e);
    if df != split {
        return Err(Error::Input(format!("DF decomposition mismatch: {df} vs {split}")));
    }
    Ok(df)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedValue {
    pub name: String,
    #[serde(with = "serde_q")]
    pub value: Q,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    #[serde(with = "serde_q")]
    pub r: Q,
    /// `(rL₁ − E)²·R ≤ 0` for each supplied nef `R`
    pub nef_pairings: Vec<SignedValue>,
    /// `(rL₁ − E)²·E > 0`
    pub exceptional: SignedValue,
    /// `(rL₁ − E)²·(rL₁ + 2E) > 0`
    pub mixed: SignedValue,
    /// `(rL₁ − E)²·(rL₁ + E) ≥ 0`
    pub surface: SignedValue,
    pub admissible: bool,
}

/// Signs of the positivity inequalities; `nef` lists labels of the table asserted nef.
pub fn inequality_checks(table: &IntersectionTable, r: &Q, nef: &[&str]) -> Result<InequalityReport> {
    let x = test_class(table, r)?;
    let sq = |c: &Class| table.product(&x, &x, c);
    let mut nef_pairings = Vec::new();
    for name in nef {
        let v = sq(&table.basis(name)?);
        nef_pairings.push(SignedValue { name: format!("(rL1-E)^2.{name}"), holds: !v.is_positive(), value: v });
    }
    let e2 = sq(&table.basis("E")?);
    let mixed_v = sq(&table.class(&[("L1", r.clone()), ("E", q(2))])?);
    let surf_v = sq(&table.class(&[("L1", r.clone()), ("E", q(1))])?);
    let exceptional = SignedValue { name: "(rL1-E)^2.E".into(), holds: e2.is_positive(), value: e2 };
    let mixed = SignedValue { name: "(rL1-E)^2.(rL1+2E)".into(), holds: mixed_v.is_positive(), value: mixed_v };
    let surface = SignedValue { name: "(rL1-E)^2.(rL1+E)".into(), holds: !surf_v.is_negative(), value: surf_v };
    let admissible = nef_pairings.iter().all(|s| s.holds) && exceptional.holds && mixed.holds && surface.holds;
    Ok(InequalityReport { r: r.clone(), nef_pairings, exceptional, mixed, surface, admissible })
}

/// Hilbert and weight polynomials of a test configuration and of the restricted divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPolynomials {
    /// `dim M`
    pub n: usize,
    /// `dim Y`
    pub m: usize,
    pub h: Poly,
    pub w: Poly,
    pub h_hat: Poly,
    pub w_hat: Poly,
}

impl WeightPolynomials {
    pub fn new(n: usize, m: usize, h: Poly, w: Poly, h_hat: Poly, w_hat: Poly) -> Result<Self> {
        let wp = WeightPolynomials { n, m, h, w, h_hat, w_hat };
        wp.validate()?;
        Ok(wp)
    }

    pub fn validate(&self) -> Result<()> {
        let within = |p: &Poly, d: usize| p.degree().is_none_or(|x| x <= d);
        if self.h.degree() != Some(self.n) || self.h_hat.degree() != Some(self.m) {
            return Err(Error::Input("Hilbert polynomials must have degrees n and m".into()));
        }
        if !within(&self.w, self.n + 1) || !within(&self.w_hat, self.m + 1) {
            return Err(Error::Input("weight polynomials exceed degrees n+1 and m+1".into()));
        }
        if !self.a0().is_positive() || !self.a0_hat().is_positive() {
            return Err(Error::Input("leading Hilbert coefficients must be positive".into()));
        }
        Ok(())
    }

    pub fn a0(&self) -> Q {
        self.h.coeff(self.n)
    }
    pub fn a1(&self) -> Q {
        if self.n == 0 { Q::zero() } else { self.h.coeff(self.n - 1) }
    }
    pub fn b0(&self) -> Q {
        self.w.coeff(self.n + 1)
    }
    pub fn b1(&self) -> Q {
        self.w.coeff(self.n)
    }
    pub fn a0_hat(&self) -> Q {
        self.h_hat.coeff(self.m)
    }
    pub fn b0_hat(&self) -> Q {
        self.w_hat.coeff(self.m + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChowHilbertWeight {
    /// `ŵ_{r,k}` as a polynomial in `k`
    pub in_k: Poly,
    /// coefficient of `k^{m+1}` at this `r`
    pub top: Q,
    /// `e_{m+1}` as a polynomial in `r`
    pub e_top: Poly,
    /// coefficient of `r^{n+1}` in `e_{m+1}`
    pub leading: Q,
}

/// `ŵ_{r,k} = ŵ(k)·r·h(r) − k·w(r)·ĥ(k)`.
pub fn chow_hilbert_weight(wp: &WeightPolynomials, r: &Q) -> Result<ChowHilbertWeight> {
    wp.validate()?;
    let rh = r * wp.h.eval(r);
    let wr = wp.w.eval(r);
    let in_k = wp.w_hat.scale(&rh).sub(&Poly::x().mul(&wp.h_hat).scale(&wr));
    let top = in_k.coeff(wp.m + 1);
    let e_top = Poly::x().mul(&wp.h).scale(&wp.b0_hat()).sub(&wp.w.scale(&wp.a0_hat()));
    let leading = e_top.coeff(wp.n + 1);
    let expected = wp.b0_hat() * wp.a0() - wp.b0() * wp.a0_hat();
    if leading != expected || e_top.eval(r) != top {
        return Err(Error::Input("Chow weight expansion inconsistent".into()));
    }
    Ok(ChowHilbertWeight { in_k, top, e_top, leading })
}

/// J-weight read off the polynomials: `(b̂₀a₀ − b₀â₀)/a₀`.
pub fn j_weight_from_polynomials(wp: &WeightPolynomials) -> Q {
    (wp.b0_hat() * wp.a0() - wp.b0() * wp.a0_hat()) / wp.a0()
}
