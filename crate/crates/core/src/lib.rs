//! Exact arithmetic for modal quantum theory over prime fields.
//!
//! The crate builds up from exact scalars (prime-field residues and
//! arbitrary-precision rationals) through dense linear algebra to the modal
//! theory itself: states, effects and measurements over GF(p), bipartite
//! possibility tables, hidden-variable searches (hypergraph colorings and
//! deterministic local models), and an exact rational linear-programming
//! analysis of no-signaling probability assignments.

pub mod error;
pub mod field;
mod grid;
pub mod linalg;
pub mod mqt;
pub mod nosignal;
pub mod rational;
pub mod scalar;
pub mod scenarios;
mod simplex;
pub mod verifiers;

pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use linalg::{AffineSolutionSpace, Matrix, Rref, Vector, det, is_basis, rref, solve_affine, tensor_vec};
pub use mqt::{
    DEFAULT_ENUM_CAP, Effect, Evolution, MEASUREMENT_CANDIDATE_CAP, Measurement, State,
    canonicalize, compose, enumerate_effects, enumerate_effects_capped, enumerate_measurements,
    enumerate_measurements_capped, evolve, is_possible, joint_effect, pair, possible_outcomes,
};
pub use nosignal::{
    Anchor, CellId, LpOptimum, LpOutcome, NoSignalingSystem, PrBoxReport, ProbabilityTable,
    RequirementIvVerdict, SymbolicCell, SymbolicTable, build_system, cell_forms, chsh,
    forced_zero_cells, lp_maximize, mobit_anchors, pr_box_check, relaxed_unique_table,
    requirement_iv_verdict, solve, symbolic_cells,
};
pub use rational::Rational;
pub use scalar::Scalar;
pub use scenarios::{LabelGroup, MobitScenario, PossibilityTable, mobit_bases, possibility_table, singlet};
pub use verifiers::{
    Coloring, ColoringProblem, EXHAUSTIVE_COLORING_CAP, LOCAL_MODEL_CANDIDATE_CAP, LocalModel,
    MAX_COLORING_VERTICES, ParityWitness, coloring_parity_certificate, find_colorings,
    find_local_models, local_model_candidates, mobit_triangle,
};
