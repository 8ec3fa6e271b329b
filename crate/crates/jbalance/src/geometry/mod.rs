//! Toric backend: polytopes, section bases, quadrature, potentials and intersection numbers.

mod intersection;
mod lattice;
mod polytope;
mod potential;
mod quadrature;

pub use intersection::{
    facet_intersection_matrix, intersection_numbers, is_nef, mori_generators, CurveClass, DivisorData,
    SurfacePairings,
};
pub use lattice::{enumerate_lattice_points, LatticeSectionBasis};
pub use polytope::{polytope_from_json, DelzantPolytope, Facet, PolytopeSpec};
pub use potential::{
    reference_potential, round_product_potential, BergmanPotential, GridPotential, Hess, LogSumExp,
    PotentialField, Sample,
};
pub use quadrature::{
    build_quadrature, calibrate, QuadratureRule, DEFAULT_RESOLUTION,
    MIN_ACCURATE_RESOLUTION, MIN_RESOLUTION,
};
