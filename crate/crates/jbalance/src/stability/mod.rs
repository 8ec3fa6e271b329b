//! J-weights, Donaldson–Futaki invariants and Chow weights in exact rational arithmetic.
//!
//! Test configurations are deformations to the normal cone of a curve `D ⊂ M`:
//! the blow-up `B` of `M × ℙ¹` along `D × {0}` polarised by `rL₁ − E`.
//! Positive dimensional constants are dropped throughout.

mod classes;
mod criteria;
mod rational;
mod table;
mod weights;

pub use classes::{blowup_table, j_constant, CurveDegrees, NormalConeConfig, SurfaceClassData, BLOWUP_LABELS};
pub use criteria::{cone_criteria, donaldson_margin, CriteriaReport, Status, Verdict};
pub use rational::{frac, parse_q, q, serde_q, sign, to_f64, Poly, Q};
pub use table::{Class, IntersectionTable, TableEntry, TableRecord};
pub use weights::{
    chow_hilbert_weight, df_weight, inequality_checks, j_weight, j_weight_for, j_weight_from_polynomials,
    ChowHilbertWeight, InequalityReport, SignedValue, WeightPolynomials,
};
