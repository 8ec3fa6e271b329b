//! The maps `FS` and `Hilb_χ` between metrics and Hermitian forms, the moment
//! map `μ⁰`, the fixed-point iteration, and density-of-states checks.
//!
//! Normalisations: `FS(H)` is scaled so that an `H`-orthonormal basis has
//! pointwise norm `(N+1)/V`, and `Hilb_χ` carries `1/γ`.  Together they make
//! `tr(Hilb_χ(FS(H))·H⁻¹) = N + 1` an identity up to quadrature error.

mod bergman;
mod hermitian;
mod iteration;
mod maps;
mod problem;

pub use bergman::{bergman_check, qk_operator, BergmanDensity, BergmanRow, QkResult};
pub use hermitian::{hermitian_op_norm, metric_distance, CMatrix, HermitianForm, HermitianRecord};
pub use iteration::{divergence_diagnosis, iterate_to_balance, write_log, BalanceOutcome, IterationRecord};
pub use maps::{fs_map, hilb_map, moment_map_mu0, mu0_from, t_map, MomentMap};
pub use problem::Problem;

#[cfg(test)]
mod tests;
