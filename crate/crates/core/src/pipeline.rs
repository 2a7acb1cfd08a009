//! Conversational negation: logically negate a word, fetch its worldly
//! context, let the context update the negation, renormalize.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::composition::{compose, BasisSlot, CompositionKind};
use crate::context::{worldly_context_graph, worldly_context_hierarchy, Combiner, EntailmentGraph, HypernymHierarchy, WeightFunction};
use crate::entailment::Measure;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::negation::LogicalNegation;
use crate::spectral::{check_dims, scale_to_unit_max_eig, Dmat, RANK_TOL};

/// Supplies the worldly context of a word.
pub trait ContextProvider: Sync {
    fn context(&self, word: &str) -> Result<Dmat>;
}

/// Context from the weighted hypernym path.
pub struct HierarchyContext<'a> {
    pub hierarchy: &'a HypernymHierarchy,
    pub lexicon: &'a Lexicon,
    pub weights: WeightFunction,
}

impl ContextProvider for HierarchyContext<'_> {
    fn context(&self, word: &str) -> Result<Dmat> {
        worldly_context_hierarchy(word, self.hierarchy, self.lexicon, self.weights)
    }
}

/// Context from entailment-graph neighbours.
pub struct GraphContext<'a> {
    pub graph: &'a EntailmentGraph,
    pub lexicon: &'a Lexicon,
    pub combiner: Combiner,
}

impl ContextProvider for GraphContext<'_> {
    fn context(&self, word: &str) -> Result<Dmat> {
        let combiner = self.combiner;
        worldly_context_graph(word, self.graph, self.lexicon, move |p, q| combiner.apply(p, q))
    }
}

/// Hand-set contexts, used as given (no rescaling).
#[derive(Clone, Debug, Default)]
pub struct FixedContext {
    contexts: BTreeMap<String, Dmat>,
}

impl FixedContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, word: impl Into<String>, context: Dmat) -> Self {
        self.contexts.insert(word.into(), context);
        self
    }
}

impl ContextProvider for FixedContext {
    fn context(&self, word: &str) -> Result<Dmat> {
        self.contexts
            .get(word)
            .cloned()
            .ok_or_else(|| Error::IsolatedWord(word.to_string()))
    }
}

/// Which operand supplies the spectral structure of the composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    /// The logically negated word.
    W,
    /// The worldly context.
    C,
}

impl Basis {
    /// Slot of the negated word when composing `(negated, context)`.
    pub fn slot(self) -> BasisSlot {
        match self {
            Basis::W => BasisSlot::FirstOperand,
            Basis::C => BasisSlot::SecondOperand,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::W => "w",
            Basis::C => "c",
        }
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "w" => Ok(Basis::W),
            "c" => Ok(Basis::C),
            other => Err(Error::InvalidArgument(format!("unknown basis `{other}`"))),
        }
    }
}

/// Where a configuration takes its worldly context from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContextSource {
    Hierarchy(WeightFunction),
    Graph(Combiner),
    Fixed,
}

impl fmt::Display for ContextSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextSource::Hierarchy(w) => write!(f, "{w}"),
            ContextSource::Graph(c) => write!(f, "graph:{}", c.name()),
            ContextSource::Fixed => f.write_str("fixed"),
        }
    }
}

/// One conversational-negation recipe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegationConfig {
    pub negation: LogicalNegation,
    pub composition: CompositionKind,
    pub basis: Basis,
    pub context: ContextSource,
}

impl NegationConfig {
    /// Basis collapsed to `w` for compositions that ignore it, so configs that
    /// differ only in an ignored basis compare equal.
    pub fn canonical(mut self) -> Self {
        if !self.composition.uses_basis() {
            self.basis = Basis::W;
        }
        self
    }

    pub fn basis_label(&self) -> &'static str {
        if self.composition.uses_basis() {
            self.basis.name()
        } else {
            "-"
        }
    }
}

/// `normalize(compose(¬⟦word⟧, wc_word))` with the structural slot chosen by
/// `cfg.basis`. The result is scaled to largest eigenvalue 1; a composition
/// that annihilates everything is reported as [`Error::ZeroMatrix`].
pub fn conversational_negate(
    word: &str,
    cfg: &NegationConfig,
    lexicon: &Lexicon,
    context: &dyn ContextProvider,
) -> Result<Dmat> {
    let meaning = lexicon.require(word)?;
    let negated = cfg.negation.apply(meaning, RANK_TOL)?;
    let wc = context.context(word)?;
    let updated = compose(&negated, &wc, cfg.composition, cfg.basis.slot())?;
    scale_to_unit_max_eig(&updated)
}

/// Logical negation alone, scaled to largest eigenvalue 1.
pub fn logical_negation_only(word: &str, negation: LogicalNegation, lexicon: &Lexicon) -> Result<Dmat> {
    let meaning = lexicon.require(word)?;
    scale_to_unit_max_eig(&negation.apply(meaning, RANK_TOL)?)
}

/// Direction of an asymmetric plausibility measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// measure(negation output, ⟦w_A⟧)
    FromNegated,
    /// measure(⟦w_A⟧, negation output)
    FromAlternative,
}

pub fn plausibility(negated: &Dmat, alternative: &Dmat, measure: Measure, direction: Direction) -> Result<f64> {
    check_dims(negated.dim(), alternative.dim())?;
    match direction {
        Direction::FromNegated => measure.evaluate(negated, alternative, RANK_TOL),
        Direction::FromAlternative => measure.evaluate(alternative, negated, RANK_TOL),
    }
}
