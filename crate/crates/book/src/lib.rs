//! Runs the guide's listings as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/density-matrices.md")]
pub mod density_matrices {}

#[doc = include_str!("../../../book/src/logical-negation.md")]
pub mod logical_negation {}

#[doc = include_str!("../../../book/src/composition.md")]
pub mod composition {}

#[doc = include_str!("../../../book/src/worldly-context.md")]
pub mod worldly_context {}

#[doc = include_str!("../../../book/src/entailment.md")]
pub mod entailment {}

#[doc = include_str!("../../../book/src/conversational-negation.md")]
pub mod conversational_negation {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
