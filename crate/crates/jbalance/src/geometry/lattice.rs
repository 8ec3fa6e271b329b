use crate::error::{Error, Result};
use crate::geometry::DelzantPolytope;

/// Monomial basis of `H⁰(L₁ᵏ)`: the lattice points of `kP` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSectionBasis {
    pub k: u32,
    pub dim: usize,
    pub points: Vec<[i64; 2]>,
}

impl LatticeSectionBasis {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `N + 1 = dim H⁰(L₁ᵏ)`.
    pub fn n_plus_1(&self) -> usize {
        self.points.len()
    }

    /// Deterministic 64-bit FNV-1a digest of `(k, points)`, stored in serialised forms.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: i64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.k as i64);
        feed(self.dim as i64);
        for p in &self.points {
            feed(p[0]);
            feed(p[1]);
        }
        format!("{h:016x}")
    }

    pub fn index_of(&self, p: [i64; 2]) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }
}

pub fn enumerate_lattice_points(p: &DelzantPolytope, k: u32) -> Result<LatticeSectionBasis> {
    if k == 0 {
        return Err(Error::Input("level k must be positive".into()));
    }
    let k = k as i64;
    let scaled = p.with_offsets(&p.offsets().iter().map(|&c| c * k).collect::<Vec<_>>())?;
    let dim = p.dim();
    let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
    for v in scaled.vertices() {
        for a in 0..2 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    let mut points = Vec::new();
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            if scaled.contains([x, y]) {
                points.push([x, y]);
            }
        }
    }
    points.sort();
    Ok(LatticeSectionBasis { k: k as u32, dim, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_h0() {
        let p2 = DelzantPolytope::simplex(1).unwrap();
        let b = enumerate_lattice_points(&p2, 1).unwrap();
        assert_eq!(b.points, vec![[0, 0], [0, 1], [1, 0]]);
        assert_eq!(enumerate_lattice_points(&p2, 5).unwrap().len(), 21);
        let q = DelzantPolytope::rectangle(1, 1).unwrap();
        assert_eq!(enumerate_lattice_points(&q, 3).unwrap().len(), 16);
        let l = DelzantPolytope::interval(1).unwrap();
        assert_eq!(enumerate_lattice_points(&l, 4).unwrap().len(), 5);
    }

    #[test]
    fn ehrhart_polynomial_has_volume_as_leading_coefficient() {
        for p in [
            DelzantPolytope::simplex(1).unwrap(),
            DelzantPolytope::rectangle(2, 1).unwrap(),
            DelzantPolytope::hirzebruch1().unwrap(),
        ] {
            let c: Vec<f64> =
                (1..=6).map(|k| enumerate_lattice_points(&p, k).unwrap().len() as f64).collect();
            // constant second difference of a quadratic equals twice its leading coefficient
            for i in 0..4 {
                let d2 = c[i + 2] - 2.0 * c[i + 1] + c[i];
                assert_eq!(d2, 2.0 * p.volume());
            }
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let p = DelzantPolytope::simplex(1).unwrap();
        let a = enumerate_lattice_points(&p, 2).unwrap();
        let b = enumerate_lattice_points(&p, 3).unwrap();
        assert_eq!(a.hash(), enumerate_lattice_points(&p, 2).unwrap().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
