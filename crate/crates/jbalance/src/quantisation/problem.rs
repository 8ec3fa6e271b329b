use crate::error::{Error, Result};
use crate::geometry::{
    build_quadrature, enumerate_lattice_points, intersection_numbers, reference_potential, DelzantPolytope,
    DivisorData, Hess, LatticeSectionBasis, PotentialField, QuadratureRule, DEFAULT_RESOLUTION,
};

/// Polarised toric data `(M, L₁)` with a closed form `χ ∈ c₁(L₂)` and a calibrated quadrature rule.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub polytope: DelzantPolytope,
    pub chi: PotentialField,
    /// `γ = L₂·L₁^{n−1} / L₁ⁿ`
    pub gamma: f64,
    /// `V = L₁ⁿ`
    pub volume: f64,
    pub rule: QuadratureRule,
    chi_hess: Vec<Hess>,
}

fn hessians(chi: &PotentialField, rule: &QuadratureRule) -> Result<Vec<Hess>> {
    let n = rule.dim;
    rule.nodes
        .iter()
        .map(|&x| {
            let h = chi.eval(x).hess;
            if h.trace(n).is_finite() && h.a >= 0.0 && (n == 1 || h.det(2) >= -1e-14 * h.trace(2).powi(2)) {
                Ok(h)
            } else {
                Err(Error::Convexity(format!("χ potential is not convex at {x:?}")))
            }
        })
        .collect()
}

impl Problem {
    /// `χ` is the reference form of `L₂ = Σ cᵢ Dᵢ`, which must be ample.
    pub fn toric(polytope: DelzantPolytope, l2_offsets: &[i64], resolution: usize) -> Result<Self> {
        let l2 = polytope.with_offsets(l2_offsets)?;
        let n = polytope.dim();
        let gamma = if n == 2 {
            let t = intersection_numbers(&polytope, &DivisorData::Facets(l2_offsets.to_vec()))?;
            t.l1l2 as f64 / t.l1l1 as f64
        } else {
            l2.degree() as f64 / polytope.degree() as f64
        };
        let rule = build_quadrature(&polytope, resolution)?;
        Self::with_chi(
            format!("{:?}/{:?}", polytope.offsets(), l2_offsets),
            polytope,
            reference_potential(&l2),
            gamma,
            rule,
        )
    }

    pub fn with_chi(name: String, polytope: DelzantPolytope, chi: PotentialField, gamma: f64, rule: QuadratureRule) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Input(format!("γ = {gamma} must be positive for the J-flow setting")));
        }
        let chi_hess = hessians(&chi, &rule)?;
        let volume = polytope.degree() as f64;
        Ok(Problem { name, polytope, chi, gamma, volume, rule, chi_hess })
    }

    /// Named problems `<surface>-<L₁>-<L₂>`.
    pub fn preset(name: &str, resolution: usize) -> Result<Self> {
        let (p, l2) = Self::preset_classes(name)?;
        let mut pr = Self::toric(p, &l2, resolution)?;
        pr.name = name.to_string();
        Ok(pr)
    }

    /// Polytope of `L₁` and facet coefficients of `L₂` for a named problem.
    pub fn preset_classes(name: &str) -> Result<(DelzantPolytope, Vec<i64>)> {
        Ok(match name {
            "P1-O1-O1" => (DelzantPolytope::interval(1)?, vec![0, 1]),
            "P1-O1-O2" => (DelzantPolytope::interval(1)?, vec![0, 2]),
            "P2-O1-O1" => (DelzantPolytope::simplex(1)?, vec![0, 0, 1]),
            "P2-O1-O2" => (DelzantPolytope::simplex(1)?, vec![0, 0, 2]),
            "P1xP1-O11-O11" => (DelzantPolytope::rectangle(1, 1)?, vec![0, 0, 1, 1]),
            "P1xP1-O11-O21" => (DelzantPolytope::rectangle(1, 1)?, vec![0, 0, 2, 1]),
            "P1xP1-O11-O31" => (DelzantPolytope::rectangle(1, 1)?, vec![0, 0, 3, 1]),
            "F1-AC-AC" => {
                let f = DelzantPolytope::hirzebruch1()?;
                let o = f.offsets();
                (f, o)
            }
            _ => return Err(Error::Input(format!("unknown problem preset {name:?}"))),
        })
    }

    pub fn preset_default(name: &str) -> Result<Self> {
        Self::preset(name, DEFAULT_RESOLUTION)
    }

    /// The same data on another quadrature rule.
    pub fn with_rule(&self, rule: QuadratureRule) -> Result<Self> {
        Self::with_chi(self.name.clone(), self.polytope.clone(), self.chi.clone(), self.gamma, rule)
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    pub fn basis(&self, k: u32) -> Result<LatticeSectionBasis> {
        enumerate_lattice_points(&self.polytope, k)
    }

    pub fn chi_hessian(&self, node: usize) -> &Hess {
        &self.chi_hess[node]
    }

    /// Density of `χ∧ω_u^{n−1}` against `dx` at a node, for `u` a potential on `L₁`.
    pub fn mixed_density(&self, node: usize, u_hess: &Hess) -> f64 {
        u_hess.mixed(&self.chi_hess[node], self.dim()) * self.rule.c_vol
    }

    /// Density of `ω_uⁿ` against `dx`.
    pub fn volume_density(&self, u_hess: &Hess) -> f64 {
        u_hess.det(self.dim()) * self.rule.c_vol
    }

    /// `γ` recomputed as `∫χ∧ω^{n−1} / ∫ωⁿ` for the reference form.
    pub fn gamma_by_quadrature(&self) -> f64 {
        let u = reference_potential(&self.polytope);
        let (mut a, mut b) = (0.0, 0.0);
        for (i, (x, w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            let h = u.eval(*x).hess;
            a += w * self.mixed_density(i, &h);
            b += w * self.volume_density(&h);
        }
        a / b
    }
}
