use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::classes::SurfaceClassData;
use super::rational::{frac, q, serde_q, Q};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub status: Status,
    /// Minimum pairing of the tested class with the curve generators.
    #[serde(with = "serde_opt_q")]
    pub margin: Option<Q>,
    pub note: String,
}

mod serde_opt_q {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let v: Option<String> = Option::deserialize(d)?;
        v.map(|s| super::super::rational::parse_q(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    #[serde(with = "serde_q")]
    pub gamma: Q,
    #[serde(with = "serde_q")]
    pub gamma_k: Q,
    pub klt: bool,
    pub verdicts: Vec<Verdict>,
}

/// Minimum over generators of `(c·L₁ − L₂)·C`; `use_k` substitutes `K` for `L₂`.
fn min_pairing(data: &SurfaceClassData, c: &Q, use_k: bool) -> Q {
    data.generators
        .iter()
        .map(|g| c * q(g.l1) - q(if use_k { g.k } else { g.l2 }))
        .min()
        .unwrap_or_else(Q::zero)
}

/// Minimum pairing of `2γL₁ − L₂` with the curve generators; positivity is necessary for a critical metric.
pub fn donaldson_margin(data: &SurfaceClassData) -> Result<Q> {
    let gamma = super::classes::j_constant(data)?;
    Ok(min_pairing(data, &(q(2) * gamma), false))
}

fn nef_verdict(criterion: &str, data: &SurfaceClassData, gamma: &Q, factor: Q, use_k: bool, strict: bool) -> Verdict {
    if !gamma.is_positive() {
        return Verdict {
            criterion: criterion.into(),
            status: Status::Inapplicable,
            margin: None,
            note: format!("constant {gamma} is not positive"),
        };
    }
    let m = min_pairing(data, &(factor * gamma), use_k);
    let ok = if strict { m.is_positive() } else { !m.is_negative() };
    Verdict {
        criterion: criterion.into(),
        status: if ok { Status::Pass } else { Status::Fail },
        margin: Some(m),
        note: if strict { "pairing > 0 on all generators".into() } else { "nef on all generators".into() },
    }
}

pub fn cone_criteria(data: &SurfaceClassData) -> Result<CriteriaReport> {
    let gamma = super::classes::j_constant(data)?;
    let gamma_k = frac(data.kl1, data.l1l1);
    let mut verdicts = vec![
        nef_verdict("j_stable", data, &gamma, q(1), false, false),
        nef_verdict("j_semistable_surface", data, &gamma, frac(4, 3), false, false),
    ];
    for (name, f) in [("k_stable", q(1)), ("k_stable_surface", frac(4, 3))] {
        let mut v = nef_verdict(name, data, &gamma_k, f, true, false);
        if !data.klt && v.status != Status::Inapplicable {
            v.status = Status::Inapplicable;
            v.note = "klt not asserted".into();
        }
        verdicts.push(v);
    }
    verdicts.push(nef_verdict("donaldson_necessary", data, &gamma, q(2), false, true));
    Ok(CriteriaReport { gamma, gamma_k, klt: data.klt, verdicts })
}

impl CriteriaReport {
    pub fn get(&self, criterion: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }
}
