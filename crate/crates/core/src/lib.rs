//! Quasi-Banach function spaces on finite atomic measure spaces.
//!
//! The crate evaluates lattice quasi-norms built from weighted `ℓᵖ` leaves
//! and vector-measure spaces through p-powers, sums, intersections and
//! q-concave cores; estimates concavity, convexity and power-concavity
//! constants with replayable witnesses; and checks the factorization and
//! representation results of the theory on concrete instances.

pub mod budget;
pub mod codomain;
pub mod concavity;
pub mod error;
pub mod measure;
pub mod operator;
pub mod optimize;
pub mod space;
pub mod theorems;
pub mod vector_measure;

pub use budget::Budget;
pub use codomain::NormedCodomain;
pub use error::{Error, Result};
pub use measure::{ae_equal, delta_ring, is_null, sigma_property, FnVec, MSet, MeasureSpace};
pub use operator::Operator;
pub use space::{
    core_norm, eval_norm, eval_norm_with, quasinorm_profile, simplify, sum_norm, CoreNorm, Decomposition, Node,
    SpaceExpr, SumNorm,
};
pub use vector_measure::{measure_from_operator, variation, ScalarMeasure, VectorMeasure};
