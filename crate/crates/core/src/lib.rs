//! Filtration machinery for finite multimodal Kripke models.
//!
//! The crate covers formula syntax over test-free programs with converse,
//! finite standard models, the definable-set algebra of a model, Γ-filtrations
//! (minimal, maximal, strategy-driven and refined), the fusion filtration
//! pipeline, and a bounded finite-model search.

pub mod algebra;
pub mod bitset;
pub mod decide;
pub mod filtration;
pub mod fusion;
pub mod kripke;
pub mod syntax;

pub use bitset::{Relation, StateSet};
pub use kripke::{eval, models, program_relation, FrameCondition, Model};
pub use syntax::{parse_formula, parse_program, sub_closure, Formula, FormulaSet, Program};
