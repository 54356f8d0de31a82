//! Finite-section verification of the wandering-subspace property for the
//! multiplicity-`N` shift `f -> z^N f` on the weighted Bergman spaces
//! `A^2_alpha`.
//!
//! The crate represents `A^2_alpha` by its truncations
//! `V_D = span{1, z, ..., z^{D-1}}` with the weighted inner product
//! `<f, g> = sum w_n a_n conj(b_n)`, builds the shift as an exact graded map
//! `V_D -> V_{D+N}`, and checks, in floating point or exact rational
//! arithmetic, every operator identity behind the statement that a reducing
//! subspace `H` is generated by `H ⊖ SH`.

pub mod cli;
pub mod error;
pub mod matrix;
pub mod operators;
pub mod scalar;
pub mod space;
pub mod subspaces;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use operators::{build_a, restrict, shift, shift_adjoint, LinearMap, Restriction, ShiftLadder};
pub use scalar::{Alpha, Real, ScalarMode, C};
pub use space::{inner, norm, random_vector, CoefficientVector, TruncatedSpace};
pub use subspaces::{
    invariant_closure, is_invariant, is_reducing, kernel, reducing_census, residue_subspace,
    subspace_distance, wandering, Residues, Subspace,
};
pub use weights::{iterated_coeff, lower_bound, shift_coeff, weight_sequence, WeightParams, WeightSequence};
