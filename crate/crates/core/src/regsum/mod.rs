//! Regularized sums of exponentials over lattice points of rational
//! polyhedra.

pub mod cdelta;
pub mod geometry;
pub mod linalg;
pub mod sum;

pub use geometry::{
    decompose, decompose_coords, AffineLattice, Constraint, LatticeSector, Polytope,
    PolytopeFunction, Rel, SimpleSector,
};
pub use sum::{
    regularized_sum, s_sigma, ExpLaurent, FormalExpFraction, RatFunc, RationalField,
    RationalFunctions, RegRing, RegSumSpec, RegValue,
};
pub use cdelta::{
    c_alpha, c_delta, c_delta_indicator_decomposition, c_delta_of_degrees, c_delta_on_degrees,
    jigsaw_check, permutation_identity_check, valley_permutations, wallcross_coefficient_identities,
};
