use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-space `⟨normal, m⟩ + offset ≥ 0` with an inward primitive normal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

/// Smooth lattice polytope of dimension 1 or 2.
///
/// Points are stored as `[i64; 2]`; in dimension 1 the second coordinate is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<[i64; 2]>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl DelzantPolytope {
    pub fn new(facets: Vec<Facet>) -> Result<Self> {
        let dim = facets
            .first()
            .map(|f| f.normal.len())
            .ok_or_else(|| Error::Polytope("no facets".into()))?;
        if !(1..=2).contains(&dim) {
            return Err(Error::Polytope(format!("dimension {dim} unsupported")));
        }
        for f in &facets {
            if f.normal.len() != dim {
                return Err(Error::Polytope("normals of mixed dimension".into()));
            }
            let g = f.normal.iter().fold(0, |g, &c| gcd(g, c));
            if g != 1 {
                return Err(Error::Polytope(format!("normal {:?} is not primitive", f.normal)));
            }
        }
        let mut p = DelzantPolytope { dim, facets, vertices: Vec::new() };
        p.vertices = p.compute_vertices()?;
        p.validate()?;
        Ok(p)
    }

    /// `{x ≥ 0, y ≥ 0, x + y ≤ d}`: the polytope of `(ℙ², O(d))`.
    pub fn simplex(d: i64) -> Result<Self> {
        Self::new(vec![
            Facet { normal: vec![1, 0], offset: 0 },
            Facet { normal: vec![0, 1], offset: 0 },
            Facet { normal: vec![-1, -1], offset: d },
        ])
    }

    /// `[0, a] × [0, b]`: the polytope of `(ℙ¹×ℙ¹, O(a, b))`.
    pub fn rectangle(a: i64, b: i64) -> Result<Self> {
        Self::new(vec![
            Facet { normal: vec![1, 0], offset: 0 },
            Facet { normal: vec![0, 1], offset: 0 },
            Facet { normal: vec![-1, 0], offset: a },
            Facet { normal: vec![0, -1], offset: b },
        ])
    }

    /// `[0, d]`: the polytope of `(ℙ¹, O(d))`.
    pub fn interval(d: i64) -> Result<Self> {
        Self::new(vec![
            Facet { normal: vec![1], offset: 0 },
            Facet { normal: vec![-1], offset: d },
        ])
    }

    /// Hirzebruch surface `F₁` with vertices (0,0), (2,0), (1,1), (0,1).
    pub fn hirzebruch1() -> Result<Self> {
        Self::new(vec![
            Facet { normal: vec![0, 1], offset: 0 },
            Facet { normal: vec![1, 0], offset: 0 },
            Facet { normal: vec![0, -1], offset: 1 },
            Facet { normal: vec![-1, -1], offset: 2 },
        ])
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "P1" => Self::interval(1),
            "P2" => Self::simplex(1),
            "P1xP1" => Self::rectangle(1, 1),
            "F1" => Self::hirzebruch1(),
            _ => Err(Error::Input(format!("unknown polytope preset {name:?}"))),
        }
    }

    /// Same normal fan with new offsets, i.e. another divisor `Σ cᵢ Dᵢ`.
    pub fn with_offsets(&self, offsets: &[i64]) -> Result<Self> {
        if offsets.len() != self.facets.len() {
            return Err(Error::Input("offset count differs from facet count".into()));
        }
        let facets = self
            .facets
            .iter()
            .zip(offsets)
            .map(|(f, &c)| Facet { normal: f.normal.clone(), offset: c })
            .collect();
        Self::new(facets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn vertices(&self) -> &[[i64; 2]] {
        &self.vertices
    }

    pub fn offsets(&self) -> Vec<i64> {
        self.facets.iter().map(|f| f.offset).collect()
    }

    pub(crate) fn normal(&self, i: usize) -> [i64; 2] {
        let v = &self.facets[i].normal;
        [v[0], if self.dim == 2 { v[1] } else { 0 }]
    }

    fn pairing(&self, i: usize, m: [i64; 2]) -> i64 {
        let v = self.normal(i);
        v[0] * m[0] + v[1] * m[1] + self.facets[i].offset
    }

    pub fn contains(&self, m: [i64; 2]) -> bool {
        (0..self.facets.len()).all(|i| self.pairing(i, m) >= 0)
    }

    /// Facets tight at a vertex.
    pub fn facets_at(&self, vertex: [i64; 2]) -> Vec<usize> {
        (0..self.facets.len()).filter(|&i| self.pairing(i, vertex) == 0).collect()
    }

    fn compute_vertices(&self) -> Result<Vec<[i64; 2]>> {
        let nf = self.facets.len();
        let mut out: Vec<[i64; 2]> = Vec::new();
        let push = |m: [i64; 2], out: &mut Vec<[i64; 2]>| {
            if self.contains(m) && !out.contains(&m) {
                out.push(m);
            }
        };
        if self.dim == 1 {
            for i in 0..nf {
                let a = self.normal(i)[0];
                let b = self.facets[i].offset;
                if (-b) % a == 0 {
                    push([-b / a, 0], &mut out);
                } else {
                    return Err(Error::Polytope("vertex is not integral".into()));
                }
            }
        } else {
            for i in 0..nf {
                for j in (i + 1)..nf {
                    let (a, b) = (self.normal(i), self.normal(j));
                    let det = a[0] * b[1] - a[1] * b[0];
                    if det == 0 {
                        continue;
                    }
                    let (ci, cj) = (-self.facets[i].offset, -self.facets[j].offset);
                    let xn = ci * b[1] - a[1] * cj;
                    let yn = a[0] * cj - ci * b[0];
                    if xn % det != 0 || yn % det != 0 {
                        // a non-integral intersection is only fatal if it is a vertex
                        let (x, y) = (xn as f64 / det as f64, yn as f64 / det as f64);
                        let inside = (0..nf).all(|f| {
                            let v = self.normal(f);
                            v[0] as f64 * x + v[1] as f64 * y + self.facets[f].offset as f64 >= -1e-12
                        });
                        if inside {
                            return Err(Error::Polytope("vertex is not integral".into()));
                        }
                        continue;
                    }
                    push([xn / det, yn / det], &mut out);
                }
            }
        }
        if out.len() < self.dim + 1 {
            return Err(Error::Polytope("polytope is empty or unbounded".into()));
        }
        if self.dim == 2 {
            // counter-clockwise around the vertex centroid
            let cx = out.iter().map(|v| v[0] as f64).sum::<f64>() / out.len() as f64;
            let cy = out.iter().map(|v| v[1] as f64).sum::<f64>() / out.len() as f64;
            out.sort_by(|p, q| {
                let ap = (p[1] as f64 - cy).atan2(p[0] as f64 - cx);
                let aq = (q[1] as f64 - cy).atan2(q[0] as f64 - cx);
                ap.partial_cmp(&aq).unwrap()
            });
        } else {
            out.sort();
        }
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        if self.volume() <= 0.0 {
            return Err(Error::Polytope("empty interior".into()));
        }
        for &v in &self.vertices {
            let tight = self.facets_at(v);
            if tight.len() != self.dim {
                return Err(Error::Polytope(format!("vertex {v:?} is not simple")));
            }
            let det = if self.dim == 1 {
                self.normal(tight[0])[0]
            } else {
                let (a, b) = (self.normal(tight[0]), self.normal(tight[1]));
                a[0] * b[1] - a[1] * b[0]
            };
            if det.abs() != 1 {
                return Err(Error::Polytope(format!("vertex {v:?} is not smooth")));
            }
        }
        // every facet must support an edge (no redundant inequalities)
        for i in 0..self.facets.len() {
            let on = self.vertices.iter().filter(|&&v| self.pairing(i, v) == 0).count();
            if on != self.dim {
                return Err(Error::Polytope(format!("facet {i} does not support a face")));
            }
        }
        // unboundedness: the normals must positively span
        let mut s = [0i64; 2];
        for i in 0..self.facets.len() {
            let v = self.normal(i);
            s[0] += v[0].abs();
            s[1] += v[1].abs();
        }
        if s[0] == 0 || (self.dim == 2 && s[1] == 0) {
            return Err(Error::Polytope("unbounded".into()));
        }
        Ok(())
    }

    /// Euclidean volume.
    pub fn volume(&self) -> f64 {
        let v = &self.vertices;
        if self.dim == 1 {
            return (v[v.len() - 1][0] - v[0][0]) as f64;
        }
        let mut twice = 0i64;
        for i in 0..v.len() {
            let (p, q) = (v[i], v[(i + 1) % v.len()]);
            twice += p[0] * q[1] - p[1] * q[0];
        }
        twice.abs() as f64 / 2.0
    }

    /// `L₁ⁿ = n!·vol(P)`, an integer for lattice polytopes.
    pub fn degree(&self) -> i64 {
        let f = if self.dim == 2 { 2.0 } else { 1.0 };
        (f * self.volume()).round() as i64
    }

    /// Indices of the facets adjacent to facet `i` (sharing a vertex).
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &v in &self.vertices {
            let t = self.facets_at(v);
            if t.contains(&i) {
                out.extend(t.into_iter().filter(|&j| j != i));
            }
        }
        out
    }

    /// Width of the polytope along each coordinate axis.
    pub fn widths(&self) -> [i64; 2] {
        let mut w = [0; 2];
        for a in 0..self.dim {
            let lo = self.vertices.iter().map(|v| v[a]).min().unwrap();
            let hi = self.vertices.iter().map(|v| v[a]).max().unwrap();
            w[a] = hi - lo;
        }
        w
    }
}

/// Polytope given either by preset name or explicit facets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolytopeSpec {
    Preset { preset: String },
    Facets { facets: Vec<Facet> },
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<DelzantPolytope> {
        match self {
            PolytopeSpec::Preset { preset } => DelzantPolytope::preset(preset),
            PolytopeSpec::Facets { facets } => DelzantPolytope::new(facets.clone()),
        }
    }
}

pub fn polytope_from_json(text: &str) -> Result<DelzantPolytope> {
    let spec: PolytopeSpec = serde_json::from_str(text)?;
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_volumes() {
        assert_eq!(DelzantPolytope::simplex(1).unwrap().degree(), 1);
        assert_eq!(DelzantPolytope::rectangle(1, 1).unwrap().degree(), 2);
        assert_eq!(DelzantPolytope::rectangle(2, 3).unwrap().degree(), 12);
        assert_eq!(DelzantPolytope::hirzebruch1().unwrap().degree(), 3);
        assert_eq!(DelzantPolytope::interval(3).unwrap().degree(), 3);
    }

    #[test]
    fn vertices_reproduce_facets() {
        let p = DelzantPolytope::hirzebruch1().unwrap();
        assert_eq!(p.vertices().len(), 4);
        for &v in p.vertices() {
            assert_eq!(p.facets_at(v).len(), 2);
        }
    }

    #[test]
    fn rejects_singular_and_redundant() {
        // the vertex cone at (0,1) has determinant -2
        let sing = DelzantPolytope::new(vec![
            Facet { normal: vec![1, 0], offset: 0 },
            Facet { normal: vec![0, 1], offset: 0 },
            Facet { normal: vec![-1, -2], offset: 2 },
        ]);
        assert!(sing.is_err());
        let redundant = DelzantPolytope::new(vec![
            Facet { normal: vec![1, 0], offset: 0 },
            Facet { normal: vec![0, 1], offset: 0 },
            Facet { normal: vec![-1, 0], offset: 1 },
            Facet { normal: vec![0, -1], offset: 1 },
            Facet { normal: vec![-1, -1], offset: 5 },
        ]);
        assert!(redundant.is_err());
        let non_primitive = DelzantPolytope::new(vec![
            Facet { normal: vec![2, 0], offset: 0 },
            Facet { normal: vec![0, 1], offset: 0 },
            Facet { normal: vec![-1, -1], offset: 1 },
        ]);
        assert!(non_primitive.is_err());
    }

    #[test]
    fn json_presets_and_facets() {
        let p = polytope_from_json(r#"{"preset":"P2"}"#).unwrap();
        assert_eq!(p.degree(), 1);
        let q = polytope_from_json(
            r#"{"facets":[{"normal":[1,0],"offset":0},{"normal":[0,1],"offset":0},
                {"normal":[-1,0],"offset":2},{"normal":[0,-1],"offset":1}]}"#,
        )
        .unwrap();
        assert_eq!(q.degree(), 4);
        assert!(polytope_from_json(r#"{"preset":"P7"}"#).is_err());
    }
}
