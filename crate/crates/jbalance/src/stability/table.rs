use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::rational::{q, serde_q, Q};
use crate::error::{Error, Result};

/// A linear combination of the labels of an [`IntersectionTable`].
pub type Class = Vec<Q>;

/// Symmetric trilinear form on the span of labelled divisor classes of a threefold.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionTable {
    labels: Vec<String>,
    entries: BTreeMap<[usize; 3], Q>,
}

fn key(i: usize, j: usize, l: usize) -> [usize; 3] {
    let mut k = [i, j, l];
    k.sort_unstable();
    k
}

impl IntersectionTable {
    pub fn new(labels: &[&str]) -> Self {
        IntersectionTable { labels: labels.iter().map(|s| s.to_string()).collect(), entries: BTreeMap::new() }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Input(format!("intersection table has no class {label:?}")))
    }

    /// Sets a triple product; a conflicting value for any permutation is rejected.
    pub fn set(&mut self, i: usize, j: usize, l: usize, v: Q) -> Result<()> {
        let n = self.labels.len();
        if i >= n || j >= n || l >= n {
            return Err(Error::Input("triple product index out of range".into()));
        }
        let k = key(i, j, l);
        if let Some(old) = self.entries.get(&k) {
            if *old != v {
                return Err(Error::Input(format!(
                    "conflicting values {old} and {v} for {}·{}·{}",
                    self.labels[i], self.labels[j], self.labels[l]
                )));
            }
        }
        self.entries.insert(k, v);
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> Q {
        self.entries.get(&key(i, j, l)).cloned().unwrap_or_else(Q::zero)
    }

    /// Class `Σ cᵢ·labelᵢ` from named coefficients.
    pub fn class(&self, terms: &[(&str, Q)]) -> Result<Class> {
        let mut c = vec![Q::zero(); self.labels.len()];
        for (name, v) in terms {
            c[self.index(name)?] += v;
        }
        Ok(c)
    }

    pub fn basis(&self, label: &str) -> Result<Class> {
        self.class(&[(label, q(1))])
    }

    pub fn product(&self, a: &Class, b: &Class, c: &Class) -> Q {
        let mut s = Q::zero();
        for (k, v) in &self.entries {
            // sum over the distinct orderings of the sorted key
            let [i, j, l] = *k;
            let perms: Vec<[usize; 3]> = {
                let mut p = vec![[i, j, l], [i, l, j], [j, i, l], [j, l, i], [l, i, j], [l, j, i]];
                p.sort_unstable();
                p.dedup();
                p
            };
            for [x, y, z] in perms {
                if !a[x].is_zero() && !b[y].is_zero() && !c[z].is_zero() {
                    s += &a[x] * &b[y] * &c[z] * v;
                }
            }
        }
        s
    }

    pub fn cube(&self, a: &Class) -> Q {
        self.product(a, a, a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub classes: [String; 3],
    #[serde(with = "serde_q")]
    pub value: Q,
}

/// Serialised form: labels plus the nonzero products.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRecord {
    pub labels: Vec<String>,
    pub entries: Vec<TableEntry>,
}

impl IntersectionTable {
    pub fn to_record(&self) -> TableRecord {
        TableRecord {
            labels: self.labels.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(k, v)| TableEntry {
                    classes: [self.labels[k[0]].clone(), self.labels[k[1]].clone(), self.labels[k[2]].clone()],
                    value: v.clone(),
                })
                .collect(),
        }
    }

    pub fn from_record(r: &TableRecord) -> Result<Self> {
        let labels: Vec<&str> = r.labels.iter().map(|s| s.as_str()).collect();
        let mut t = IntersectionTable::new(&labels);
        for e in &r.entries {
            let i = t.index(&e.classes[0])?;
            let j = t.index(&e.classes[1])?;
            let l = t.index(&e.classes[2])?;
            t.set(i, j, l, e.value.clone())?;
        }
        Ok(t)
    }
}
