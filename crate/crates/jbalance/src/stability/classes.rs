use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{frac, q, serde_q, Q};
use super::table::IntersectionTable;
use crate::error::{Error, Result};
use crate::geometry::{intersection_numbers, mori_generators, DelzantPolytope, DivisorData};

/// Degrees of `L₁`, `L₂`, `K` on one curve class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveDegrees {
    pub name: String,
    pub l1: i64,
    pub l2: i64,
    pub k: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceClassData {
    pub l1l1: i64,
    pub l1l2: i64,
    pub l2l2: i64,
    pub kl1: i64,
    pub kl2: i64,
    pub kk: i64,
    pub generators: Vec<CurveDegrees>,
    /// Asserted by the caller; smooth surfaces are klt.
    pub klt: bool,
}

impl SurfaceClassData {
    pub fn validate(&self) -> Result<()> {
        if self.l1l1 <= 0 {
            return Err(Error::Input("L1^2 must be positive".into()));
        }
        if self.generators.is_empty() {
            return Err(Error::Input("no curve generators".into()));
        }
        if let Some(g) = self.generators.iter().find(|g| g.l1 <= 0) {
            return Err(Error::Input(format!("L1 is not positive on curve {}", g.name)));
        }
        Ok(())
    }

    /// Class data of `(X_P, L_P, L₂)` with `L₂ = Σ cᵢ Dᵢ`.
    pub fn from_toric(p: &DelzantPolytope, l2: &[i64]) -> Result<Self> {
        let t = intersection_numbers(p, &DivisorData::Facets(l2.to_vec()))?;
        let l1 = p.offsets();
        let kc = vec![-1; l1.len()];
        let generators = mori_generators(p)?
            .into_iter()
            .map(|c| CurveDegrees { name: format!("D{}", c.facet), l1: c.degree(&l1), l2: c.degree(l2), k: c.degree(&kc) })
            .collect();
        let d = SurfaceClassData {
            l1l1: t.l1l1,
            l1l2: t.l1l2,
            l2l2: t.l2l2,
            kl1: t.kl1,
            kl2: t.kl2,
            kk: t.kk,
            generators,
            klt: true,
        };
        d.validate()?;
        Ok(d)
    }

    /// The same data with `L₂` replaced by `K`.
    pub fn with_l2_canonical(&self) -> Self {
        let mut d = self.clone();
        d.l1l2 = self.kl1;
        d.l2l2 = self.kk;
        d.kl2 = self.kk;
        for g in &mut d.generators {
            g.l2 = g.k;
        }
        d
    }
}

/// `γ = L₁·L₂ / L₁²`.
pub fn j_constant(data: &SurfaceClassData) -> Result<Q> {
    data.validate()?;
    Ok(frac(data.l1l2, data.l1l1))
}

/// Deformation to the normal cone of a curve `D`, with exponent `r` for `rL₁ − E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalConeConfig {
    pub d_d: i64,
    pub l1_d: i64,
    pub l2_d: i64,
    pub k_d: i64,
    /// Smallest exponent for which the caller asserts `rL₁ − E` is relatively semi-ample.
    #[serde(with = "serde_q")]
    pub r_min: Q,
}

impl NormalConeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l1_d <= 0 {
            return Err(Error::Input("L1.D must be positive".into()));
        }
        // adjunction: D² + K·D = 2p_a − 2 is even
        if (self.d_d + self.k_d).rem_euclid(2) != 0 {
            return Err(Error::Input("D^2 + K.D must be even".into()));
        }
        if !self.r_min.is_positive() {
            return Err(Error::Input("r_min must be positive".into()));
        }
        Ok(())
    }

    /// Centre the blow-up on the facet divisor `D_i` of a toric surface.
    pub fn toric_facet(p: &DelzantPolytope, l2: &[i64], facet: usize) -> Result<Self> {
        let d = crate::geometry::facet_intersection_matrix(p)?;
        if facet >= d.len() {
            return Err(Error::Input(format!("no facet {facet}")));
        }
        let dot = |c: &[i64]| c.iter().zip(&d[facet]).map(|(a, b)| a * b).sum::<i64>();
        let kc = vec![-1; d.len()];
        let cfg = NormalConeConfig {
            d_d: d[facet][facet],
            l1_d: dot(&p.offsets()),
            l2_d: dot(l2),
            k_d: dot(&kc),
            r_min: q(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub const BLOWUP_LABELS: [&str; 4] = ["L1", "L2", "K", "E"];

/// Triple products on the blow-up of `M × ℙ¹` along `D × {0}`.
pub fn blowup_table(data: &SurfaceClassData, cfg: &NormalConeConfig) -> Result<IntersectionTable> {
    data.validate()?;
    cfg.validate()?;
    let mut t = IntersectionTable::new(&BLOWUP_LABELS);
    // pulled-back triples and pb·pb·E vanish; pb α·E² = −α·D; E³ = −D²
    for (i, ad) in [cfg.l1_d, cfg.l2_d, cfg.k_d].into_iter().enumerate() {
        for j in 0..3 {
            for l in 0..3 {
                t.set(i, j, l, Q::zero())?;
            }
            t.set(i, j, 3, Q::zero())?;
        }
        t.set(i, 3, 3, q(-ad))?;
    }
    t.set(3, 3, 3, q(-cfg.d_d))?;
    Ok(t)
}
