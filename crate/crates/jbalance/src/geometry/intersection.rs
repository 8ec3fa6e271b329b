//! Intersection numbers of torus-invariant divisors on a smooth toric surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DelzantPolytope;

/// How the second class `L₂` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorData {
    /// `L₂ = Σ cᵢ Dᵢ` in the facet order of the polytope.
    Facets(Vec<i64>),
    /// Symmetric pairing matrix on `(L₁, L₂, K)`.
    Pairings([[i64; 3]; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfacePairings {
    pub l1l1: i64,
    pub l1l2: i64,
    pub l2l2: i64,
    pub kl1: i64,
    pub kl2: i64,
    pub kk: i64,
}

impl SurfacePairings {
    pub fn rows(&self) -> Vec<(&'static str, i64)> {
        vec![
            ("L1.L1", self.l1l1),
            ("L1.L2", self.l1l2),
            ("L2.L2", self.l2l2),
            ("K.L1", self.kl1),
            ("K.L2", self.kl2),
            ("K.K", self.kk),
        ]
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["pairing", "value"])?;
        for (name, v) in self.rows() {
            out.write_record([name.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Facet indices in counter-clockwise order of their normals.
fn cyclic_order(p: &DelzantPolytope) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.facets().len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (p.normal(i), p.normal(j));
        let ta = (a[1] as f64).atan2(a[0] as f64);
        let tb = (b[1] as f64).atan2(b[0] as f64);
        ta.partial_cmp(&tb).unwrap()
    });
    idx
}

/// Intersection matrix `Dᵢ·Dⱼ` of the facet divisors of a smooth toric surface.
pub fn facet_intersection_matrix(p: &DelzantPolytope) -> Result<Vec<Vec<i64>>> {
    if p.dim() != 2 {
        return Err(Error::Input("intersection matrix needs a surface".into()));
    }
    let m = p.facets().len();
    let order = cyclic_order(p);
    let mut d = vec![vec![0i64; m]; m];
    for pos in 0..m {
        let i = order[pos];
        let prev = order[(pos + m - 1) % m];
        let next = order[(pos + 1) % m];
        let (vp, vi, vn) = (p.normal(prev), p.normal(i), p.normal(next));
        let s = [vp[0] + vn[0], vp[1] + vn[1]];
        // s = a·vᵢ by smoothness
        let a = if vi[0] != 0 { s[0] / vi[0] } else { s[1] / vi[1] };
        if s[0] != a * vi[0] || s[1] != a * vi[1] {
            return Err(Error::Polytope("neighbouring normals do not satisfy the smooth fan relation".into()));
        }
        d[i][i] = -a;
        d[i][prev] = 1;
        d[i][next] = 1;
    }
    Ok(d)
}

fn pair(d: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    let mut s = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * d[i][j] * b[j];
        }
    }
    s
}

/// Pairings among `L₁` (from the polytope offsets), `L₂` and the canonical class.
pub fn intersection_numbers(p: &DelzantPolytope, aux: &DivisorData) -> Result<SurfacePairings> {
    let d = facet_intersection_matrix(p)?;
    let l1 = p.offsets();
    let k: Vec<i64> = vec![-1; l1.len()];
    let out = match aux {
        DivisorData::Facets(l2) => {
            if l2.len() != l1.len() {
                return Err(Error::Input("L2 coefficient count differs from facet count".into()));
            }
            SurfacePairings {
                l1l1: pair(&d, &l1, &l1),
                l1l2: pair(&d, &l1, l2),
                l2l2: pair(&d, l2, l2),
                kl1: pair(&d, &k, &l1),
                kl2: pair(&d, &k, l2),
                kk: pair(&d, &k, &k),
            }
        }
        DivisorData::Pairings(m) => {
            for i in 0..3 {
                for j in 0..3 {
                    if m[i][j] != m[j][i] {
                        return Err(Error::Input(format!("pairing table not symmetric at ({i}, {j})")));
                    }
                }
            }
            SurfacePairings { l1l1: m[0][0], l1l2: m[0][1], l2l2: m[1][1], kl1: m[2][0], kl2: m[2][1], kk: m[2][2] }
        }
    };
    if out.l1l1 != p.degree() {
        return Err(Error::Input(format!("L1^2 = {} but the polytope has degree {}", out.l1l1, p.degree())));
    }
    Ok(out)
}

/// A torus-invariant curve with its intersection numbers against every facet divisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClass {
    pub facet: usize,
    pub pairings: Vec<i64>,
}

impl CurveClass {
    /// Degree of `Σ cᵢ Dᵢ` on this curve.
    pub fn degree(&self, divisor: &[i64]) -> i64 {
        self.pairings.iter().zip(divisor).map(|(a, b)| a * b).sum()
    }
}

/// `c = λa + μb` with `λ, μ ≥ 0` (rational), checked exactly.
fn in_pair_cone(c: &[i64], a: &[i64], b: &[i64]) -> bool {
    let m = c.len();
    for i in 0..m {
        for j in (i + 1)..m {
            let det = a[i] * b[j] - a[j] * b[i];
            if det == 0 {
                continue;
            }
            let ln = c[i] * b[j] - c[j] * b[i];
            let mn = a[i] * c[j] - a[j] * c[i];
            let ok = (0..m).all(|r| ln * a[r] + mn * b[r] == det * c[r]);
            return ok && ln * det >= 0 && mn * det >= 0;
        }
    }
    false
}

/// Boundary curves generating the cone of curves, one per distinct class.
pub fn mori_generators(p: &DelzantPolytope) -> Result<Vec<CurveClass>> {
    let d = facet_intersection_matrix(p)?;
    let mut curves: Vec<CurveClass> = Vec::new();
    for (i, row) in d.iter().enumerate() {
        if !curves.iter().any(|c| &c.pairings == row) {
            curves.push(CurveClass { facet: i, pairings: row.clone() });
        }
    }
    let redundant: Vec<bool> = (0..curves.len())
        .map(|c| {
            (0..curves.len()).any(|a| {
                (a + 1..curves.len()).any(|b| {
                    a != c && b != c && in_pair_cone(&curves[c].pairings, &curves[a].pairings, &curves[b].pairings)
                })
            })
        })
        .collect();
    Ok(curves.into_iter().zip(redundant).filter(|(_, r)| !r).map(|(c, _)| c).collect())
}

/// `Σ cᵢ Dᵢ` pairs nonnegatively with every generator.
pub fn is_nef(generators: &[CurveClass], divisor: &[i64]) -> bool {
    generators.iter().all(|c| c.degree(divisor) >= 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_plane() {
        let p = DelzantPolytope::simplex(1).unwrap();
        let t = intersection_numbers(&p, &DivisorData::Facets(vec![0, 0, 3])).unwrap();
        assert_eq!((t.l1l1, t.l1l2, t.l2l2, t.kl1, t.kk), (1, 3, 9, -3, 9));
        let g = mori_generators(&p).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].degree(&[0, 0, 4]), 4);
    }

    #[test]
    fn quadric_pairings() {
        let p = DelzantPolytope::rectangle(1, 1).unwrap();
        // facets x≥0, y≥0, x≤a, y≤b; O(a,b) = a·D₂ + b·D₃
        for (a, b) in [(1, 1), (2, 1), (3, 5)] {
            let t = intersection_numbers(&p, &DivisorData::Facets(vec![0, 0, a, b])).unwrap();
            assert_eq!(t.l1l1, 2);
            assert_eq!(t.l1l2, a + b);
            assert_eq!(t.l2l2, 2 * a * b);
            assert_eq!(t.kl1, -4);
        }
        let g = mori_generators(&p).unwrap();
        assert_eq!(g.len(), 2);
        for (a, b, nef) in [(1, 0, true), (0, 0, true), (-1, 2, false), (2, -1, false)] {
            assert_eq!(is_nef(&g, &[0, 0, a, b]), nef);
        }
    }

    #[test]
    fn hirzebruch_generators_are_fibre_and_negative_section() {
        let p = DelzantPolytope::hirzebruch1().unwrap();
        let d = facet_intersection_matrix(&p).unwrap();
        let mut selfint: Vec<i64> = (0..4).map(|i| d[i][i]).collect();
        selfint.sort();
        assert_eq!(selfint, vec![-1, 0, 0, 1]);
        let g = mori_generators(&p).unwrap();
        let mut s: Vec<i64> = g.iter().map(|c| d[c.facet][c.facet]).collect();
        s.sort();
        assert_eq!(s, vec![-1, 0]);
        assert_eq!(intersection_numbers(&p, &DivisorData::Facets(p.offsets())).unwrap().kk, 8);
    }

    #[test]
    fn asymmetric_table_rejected() {
        let p = DelzantPolytope::simplex(1).unwrap();
        let bad = DivisorData::Pairings([[1, 2, -3], [1, 4, -6], [-3, -6, 9]]);
        assert!(intersection_numbers(&p, &bad).is_err());
        let good = DivisorData::Pairings([[1, 2, -3], [2, 4, -6], [-3, -6, 9]]);
        assert_eq!(intersection_numbers(&p, &good).unwrap().l1l2, 2);
    }

    #[test]
    fn csv_export() {
        let p = DelzantPolytope::simplex(1).unwrap();
        let t = intersection_numbers(&p, &DivisorData::Facets(vec![0, 0, 1])).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("pairing,value\nL1.L1,1\n"));
    }
}
