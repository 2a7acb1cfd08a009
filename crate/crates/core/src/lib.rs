//! Conversational negation with density matrices.
//!
//! Word meanings are real density matrices ([`Dmat`]). A word is negated in
//! two steps: a *logical* negation ([`negation`]) produces everything the word
//! is not, then a *worldly context* ([`context`]) built from the word's
//! hypernyms re-weights that negation through a meaning-update composition
//! ([`composition`]). The [`entailment`] measures grade how plausible an
//! alternative word is given the result, and [`experiment`] correlates those
//! grades with human plausibility ratings.
//!
//! ```
//! use convneg::prelude::*;
//!
//! # fn main() -> Result<(), convneg::Error> {
//! // apple, orange, fig and movie as an orthonormal basis
//! let apple = Dmat::from_diagonal(&[1.0, 0.0, 0.0, 0.0])?;
//! let fruit = Dmat::from_diagonal(&[1.0 / 2.0, 1.0 / 3.0, 1.0 / 6.0, 0.0])?;
//!
//! let not_apple = neg_sub(&apple)?;
//! let updated = spider(&not_apple, &fruit)?;
//! let expected = Dmat::from_diagonal(&[0.0, 1.0 / 3.0, 1.0 / 6.0, 0.0])?;
//! assert!((updated.matrix() - expected.matrix()).norm() < 1e-12);
//! # Ok(())
//! # }
//! ```

pub mod composition;
pub mod context;
pub mod entailment;
pub mod error;
pub mod experiment;
pub mod lexicon;
pub mod negation;
pub mod pipeline;
pub mod random;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{Dmat, SpectralDecomposition};

pub mod prelude {
    pub use crate::composition::{compose, diag_comp, fuzz, mult, phaser, spider, BasisSlot, CompositionKind};
    pub use crate::context::{
        build_entailment_graph, hypernym_weights, worldly_context_graph, worldly_context_hierarchy, Combiner,
        EntailmentGraph, GraphMeasure, HypernymHierarchy, WeightFunction, WeightKind,
    };
    pub use crate::entailment::{k_ba, k_e, k_hyp, k_hyp_clamped, k_hyp_oracle, trace_similarity, Measure};
    pub use crate::lexicon::{build_density_matrix, load_lexicon, load_vectors, save_lexicon, Lexicon, VectorTable};
    pub use crate::negation::{neg_inv, neg_ker, neg_sub, neg_supp, LogicalNegation};
    pub use crate::pipeline::{
        conversational_negate, plausibility, Basis, ContextProvider, ContextSource, Direction, FixedContext,
        HierarchyContext, NegationConfig,
    };
    pub use crate::spectral::{
        loewner_leq, normalize_max_eig, scale_to_unit_max_eig, spectral_decompose, support_projector, Dmat,
        SpectralDecomposition, PSD_TOL, RANK_TOL,
    };
}
