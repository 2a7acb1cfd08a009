//! Seeded randomized verification of the algebraic properties the rest of
//! the crate relies on.
//!
//! Each [`Suite`] draws its own ChaCha stream from the seed, so results do not
//! depend on which suites run or in what order. A suite either expects the
//! property to hold on every trial ([`Expectation::Holds`]) or expects a
//! counterexample within a search budget ([`Expectation::Refuted`]).

use std::fmt;
use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::composition::{diag_comp, fuzz, mult, phaser, spider};
use crate::context::{WeightFunction, WeightKind};
use crate::entailment::{k_ba, k_e, k_hyp, k_hyp_oracle, trace_similarity};
use crate::error::{Error, Result};
use crate::experiment::pearson;
use crate::lexicon::{build_density_matrix, Lexicon, VectorTable};
use crate::negation::{neg_inv, neg_ker, neg_sub, neg_supp, LogicalNegation};
use crate::random::{
    gaussian_matrix, in_basis, random_commuting_pair, random_dmat, random_invertible, random_nested_support_pair,
    random_ordered_pair, random_orthogonal, random_same_support_pair,
};
use crate::spectral::{
    loewner_leq, normalize_max_eig, scale_to_unit_max_eig, support_projector, symmetric_eigen, Dmat, PSD_TOL,
    RANK_TOL,
};

pub type CompositionFn = fn(&Dmat, &Dmat) -> Result<Dmat>;

/// The basis-dependent compositions under test. Swapping one out is the
/// mutation hook: a broken operator must make its suites fail.
#[derive(Clone, Copy)]
pub struct Operators {
    pub spider: CompositionFn,
    pub fuzz: CompositionFn,
    pub phaser: CompositionFn,
}

impl Default for Operators {
    fn default() -> Self {
        Operators { spider, fuzz, phaser }
    }
}

impl fmt::Debug for Operators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Operators { .. }")
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Trials per [`Expectation::Holds`] suite.
    pub trials: usize,
    pub dims: RangeInclusive<usize>,
    /// Trials allowed to find a counterexample in a refutation suite.
    pub search_budget: usize,
    pub operators: Operators,
}

impl VerifyOptions {
    pub fn new(seed: u64, trials: usize) -> Self {
        VerifyOptions { seed, trials, dims: 2..=8, search_budget: 10_000, operators: Operators::default() }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.dims.is_empty() || *self.dims.start() < 2 {
            return Err(Error::InvalidArgument(format!("dimension range {:?} must start at 2 or more", self.dims)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Holds,
    Refuted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    SpectralRoundTrip,
    LoewnerReflexiveAntisymmetric,
    ConjugationPreservesOrder,
    SupportProjectorIdempotent,
    NormalizeBound,
    SubInvolution,
    SubContrapositive,
    SubKbaSymmetry,
    SuppDoubleInverse,
    NegationsPreserveEigenspaces,
    SuppInverseReversesKHyp,
    SuppInverseReversesKHypSingular,
    InverseReversesKbaDefinite,
    InverseReversesKbaGeneral,
    MaximallyMixedSupport,
    MaximallyMixedSupportInv,
    SpiderInvTieCounterexample,
    CompositionsArePsd,
    MultPreservesOrder,
    DiagPreservesOrder,
    SpiderPreservesOrder,
    SpiderFixedBasisPreservesOrder,
    FuzzBreaksOrder,
    PhaserBreaksOrder,
    CommutingCompositionsCoincide,
    SpiderIsMultForDiagonal,
    KHypMatchesOracle,
    ExtremeMeasures,
    KHypScaleCovariance,
    TraceSimilarity,
    WeightsNonIncreasing,
    ContextIsNormalized,
    LexiconPermutationInvariant,
    LexiconRoundTrip,
    PearsonAffineInvariance,
}

impl Suite {
    pub const ALL: [Suite; 35] = [
        Suite::SpectralRoundTrip,
        Suite::LoewnerReflexiveAntisymmetric,
        Suite::ConjugationPreservesOrder,
        Suite::SupportProjectorIdempotent,
        Suite::NormalizeBound,
        Suite::SubInvolution,
        Suite::SubContrapositive,
        Suite::SubKbaSymmetry,
        Suite::SuppDoubleInverse,
        Suite::NegationsPreserveEigenspaces,
        Suite::SuppInverseReversesKHyp,
        Suite::SuppInverseReversesKHypSingular,
        Suite::InverseReversesKbaDefinite,
        Suite::InverseReversesKbaGeneral,
        Suite::MaximallyMixedSupport,
        Suite::MaximallyMixedSupportInv,
        Suite::SpiderInvTieCounterexample,
        Suite::CompositionsArePsd,
        Suite::MultPreservesOrder,
        Suite::DiagPreservesOrder,
        Suite::SpiderPreservesOrder,
        Suite::SpiderFixedBasisPreservesOrder,
        Suite::FuzzBreaksOrder,
        Suite::PhaserBreaksOrder,
        Suite::CommutingCompositionsCoincide,
        Suite::SpiderIsMultForDiagonal,
        Suite::KHypMatchesOracle,
        Suite::ExtremeMeasures,
        Suite::KHypScaleCovariance,
        Suite::TraceSimilarity,
        Suite::WeightsNonIncreasing,
        Suite::ContextIsNormalized,
        Suite::LexiconPermutationInvariant,
        Suite::LexiconRoundTrip,
        Suite::PearsonAffineInvariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SpectralRoundTrip => "spectral/round-trip",
            Suite::LoewnerReflexiveAntisymmetric => "spectral/loewner-reflexive-antisymmetric",
            Suite::ConjugationPreservesOrder => "spectral/conjugation-preserves-order",
            Suite::SupportProjectorIdempotent => "spectral/support-projector-idempotent",
            Suite::NormalizeBound => "spectral/normalize-bound",
            Suite::SubInvolution => "negation/sub-involution",
            Suite::SubContrapositive => "negation/sub-contrapositive",
            Suite::SubKbaSymmetry => "negation/sub-k_BA-symmetry",
            Suite::SuppDoubleInverse => "negation/supp-double-inverse",
            Suite::NegationsPreserveEigenspaces => "negation/eigenspaces-preserved",
            Suite::SuppInverseReversesKHyp => "negation/supp-reverses-k_hyp-invertible",
            Suite::SuppInverseReversesKHypSingular => "negation/supp-reverses-k_hyp-equal-rank",
            Suite::InverseReversesKbaDefinite => "negation/inverse-reverses-k_BA-definite",
            Suite::InverseReversesKbaGeneral => "negation/inverse-reverses-k_BA-commuting",
            Suite::MaximallyMixedSupport => "composition/maximally-mixed-support-supp",
            Suite::MaximallyMixedSupportInv => "composition/maximally-mixed-support-inv",
            Suite::SpiderInvTieCounterexample => "composition/spider-inv-tied-eigenspace",
            Suite::CompositionsArePsd => "composition/outputs-psd",
            Suite::MultPreservesOrder => "composition/mult-preserves-order",
            Suite::DiagPreservesOrder => "composition/diag-preserves-order",
            Suite::SpiderPreservesOrder => "composition/spider-order-counterexample",
            Suite::SpiderFixedBasisPreservesOrder => "composition/spider-fixed-basis-preserves-order",
            Suite::FuzzBreaksOrder => "composition/fuzz-order-counterexample",
            Suite::PhaserBreaksOrder => "composition/phaser-order-counterexample",
            Suite::CommutingCompositionsCoincide => "composition/commuting-coincide",
            Suite::SpiderIsMultForDiagonal => "composition/spider-is-mult-for-diagonal",
            Suite::KHypMatchesOracle => "entailment/k_hyp-matches-oracle",
            Suite::ExtremeMeasures => "entailment/extreme-values",
            Suite::KHypScaleCovariance => "entailment/k_hyp-scale-covariance",
            Suite::TraceSimilarity => "entailment/trace-similarity",
            Suite::WeightsNonIncreasing => "context/weights-non-increasing",
            Suite::ContextIsNormalized => "context/output-normalized",
            Suite::LexiconPermutationInvariant => "lexicon/permutation-invariant",
            Suite::LexiconRoundTrip => "lexicon/round-trip",
            Suite::PearsonAffineInvariance => "experiment/pearson-affine-invariance",
        }
    }

    pub fn expectation(self) -> Expectation {
        match self {
            Suite::FuzzBreaksOrder
            | Suite::PhaserBreaksOrder
            | Suite::InverseReversesKbaGeneral
            | Suite::SpiderPreservesOrder
            | Suite::SpiderInvTieCounterexample => Expectation::Refuted,
            _ => Expectation::Holds,
        }
    }

    /// Residual above which a trial counts as a failure (for `Holds`) or as
    /// a counterexample (for `Refuted`).
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::SubInvolution | Suite::SupportProjectorIdempotent => 1e-10,
            Suite::SuppInverseReversesKHyp | Suite::SuppInverseReversesKHypSingular | Suite::KHypMatchesOracle => 1e-6,
            Suite::ConjugationPreservesOrder
            | Suite::NormalizeBound
            | Suite::CompositionsArePsd
            | Suite::MultPreservesOrder
            | Suite::DiagPreservesOrder
            | Suite::SpiderPreservesOrder
            | Suite::SpiderFixedBasisPreservesOrder
            | Suite::FuzzBreaksOrder
            | Suite::PhaserBreaksOrder
            | Suite::CommutingCompositionsCoincide
            | Suite::SpiderIsMultForDiagonal
            | Suite::ExtremeMeasures
            | Suite::PearsonAffineInvariance => 1e-9,
            Suite::SpiderInvTieCounterexample => 1e-8,
            Suite::TraceSimilarity | Suite::WeightsNonIncreasing | Suite::ContextIsNormalized => 1e-12,
            Suite::LexiconPermutationInvariant | Suite::LexiconRoundTrip | Suite::LoewnerReflexiveAntisymmetric => 0.0,
            _ => 1e-8,
        }
    }

    /// Fixed trial dimension, for suites where the search is cheapest there.
    fn fixed_dim(self) -> Option<usize> {
        match self {
            Suite::FuzzBreaksOrder | Suite::PhaserBreaksOrder | Suite::SpiderPreservesOrder => Some(3),
            _ => None,
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).expect("suite listed in ALL") as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A trial whose residual crossed the tolerance.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub trial: usize,
    pub residual: f64,
    pub operands: Vec<DMatrix<f64>>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trial {} residual {:.3e}", self.trial, self.residual)?;
        for (i, m) in self.operands.iter().enumerate() {
            let rows: Vec<String> = m
                .row_iter()
                .map(|r| r.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" "))
                .collect();
            write!(f, "\n    operand {}: [{}]", i + 1, rows.join("; "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub trials: usize,
    pub failures: usize,
    pub max_residual: f64,
    /// First failing trial (`Holds`) or the counterexample found (`Refuted`).
    pub counterexample: Option<Counterexample>,
    pub error: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        if self.error.is_some() {
            return false;
        }
        match self.suite.expectation() {
            Expectation::Holds => self.failures == 0,
            Expectation::Refuted => self.counterexample.is_some(),
        }
    }
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let kind = match self.suite.expectation() {
            Expectation::Holds => "holds",
            Expectation::Refuted => "refuted",
        };
        write!(
            f,
            "{status} {:<48} expect {kind:<7} trials {:>5} failures {:>5} max residual {:.3e} (tol {:.0e})",
            self.suite.name(),
            self.trials,
            self.failures,
            self.max_residual,
            self.suite.tolerance()
        )?;
        if let Some(e) = &self.error {
            write!(f, "\n  error: {e}")?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n  counterexample: {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub outcomes: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(SuiteOutcome::passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &SuiteOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    pub fn outcome(&self, suite: Suite) -> Option<&SuiteOutcome> {
        self.outcomes.iter().find(|o| o.suite == suite)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify: seed {} trials {}", self.seed, self.trials)?;
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        let passed = self.outcomes.iter().filter(|o| o.passed()).count();
        write!(f, "{passed}/{} suites passed", self.outcomes.len())
    }
}

/// Runs every suite with the default operators over dimensions 2–8.
pub fn verify_theorems(seed: u64, trials: usize) -> Result<VerifyReport> {
    verify_with(&VerifyOptions::new(seed, trials))
}

pub fn verify_with(opts: &VerifyOptions) -> Result<VerifyReport> {
    opts.check()?;
    let outcomes = Suite::ALL.par_iter().map(|&s| run_suite(s, opts)).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { seed: opts.seed, trials: opts.trials, outcomes })
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteOutcome> {
    opts.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(suite.stream());
    let budget = match suite.expectation() {
        Expectation::Holds => opts.trials,
        Expectation::Refuted => opts.search_budget,
    };
    let tol = suite.tolerance();
    let mut outcome =
        SuiteOutcome { suite, trials: 0, failures: 0, max_residual: 0.0, counterexample: None, error: None };
    for t in 0..budget {
        let dim = suite.fixed_dim().unwrap_or_else(|| rng.random_range(opts.dims.clone()));
        outcome.trials += 1;
        let result = match run_trial(suite, &mut rng, dim, &opts.operators) {
            Ok(r) => r,
            Err(e) => {
                outcome.failures += 1;
                outcome.error.get_or_insert_with(|| format!("trial {t}: {e}"));
                continue;
            }
        };
        let residual = if result.residual.is_nan() { f64::INFINITY } else { result.residual };
        outcome.max_residual = outcome.max_residual.max(residual);
        if residual > tol {
            outcome.failures += 1;
            if outcome.counterexample.is_none() {
                outcome.counterexample = Some(Counterexample { trial: t, residual, operands: result.operands });
            }
            if suite.expectation() == Expectation::Refuted {
                break;
            }
        }
    }
    Ok(outcome)
}

struct Trial {
    residual: f64,
    operands: Vec<DMatrix<f64>>,
}

impl Trial {
    fn new(residual: f64, operands: &[&Dmat]) -> Self {
        Trial { residual, operands: operands.iter().map(|m| m.matrix().clone()).collect() }
    }
}

fn dist(a: &Dmat, b: &Dmat) -> f64 {
    (a.matrix() - b.matrix()).norm()
}

/// How far `b − a` is from being PSD: `max(0, −λ_min(b − a))`.
fn order_violation(a: &Dmat, b: &Dmat) -> Result<f64> {
    let diff = b.matrix() - a.matrix();
    Ok((-symmetric_eigen(&diff)?.min_eigenvalue()).max(0.0))
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

/// Largest `‖Y P − c P‖` over the eigenspace projectors `P` of `x`, where `c`
/// is the scalar `Y` should act as on that eigenspace.
fn eigenspace_defect(x: &Dmat, y: &Dmat) -> Result<f64> {
    let mut worst = 0.0_f64;
    for space in x.decompose()?.eigenspaces() {
        let p = &space.projector;
        let yp = y.matrix() * p;
        let c = yp.trace() / p.trace();
        worst = worst.max((yp - p * c).norm());
    }
    Ok(worst)
}

/// Hadamard product in the basis given by the columns of `q`.
fn spider_in_basis(a: &Dmat, b: &Dmat, q: &DMatrix<f64>) -> Dmat {
    let qt = q.transpose();
    let product = (&qt * a.matrix() * q).component_mul(&(&qt * b.matrix() * q));
    Dmat::from_psd_unchecked(q * product * qt)
}

fn run_trial(suite: Suite, rng: &mut ChaCha8Rng, dim: usize, ops: &Operators) -> Result<Trial> {
    Ok(match suite {
        Suite::SpectralRoundTrip => {
            let x = random_dmat(rng, dim);
            let back = Dmat::from_psd_unchecked(x.decompose()?.reconstruct());
            Trial::new(dist(&x, &back), &[&x])
        }
        Suite::LoewnerReflexiveAntisymmetric => {
            let a = random_dmat(rng, dim);
            let y = random_dmat(rng, dim).scaled(rng.random_range(1e-3..1.0));
            let b = Dmat::from_psd_unchecked(a.matrix() + y.matrix());
            let reflexive = loewner_leq(&a, &a, PSD_TOL)?;
            let forward = loewner_leq(&a, &b, PSD_TOL)?;
            let backward = loewner_leq(&b, &a, PSD_TOL)?;
            // both directions may only hold for (numerically) equal matrices
            let antisymmetric = !(forward && backward) || dist(&a, &b) < 1e-8;
            Trial::new(flag(reflexive && forward && !backward && antisymmetric), &[&a, &b])
        }
        Suite::ConjugationPreservesOrder => {
            let (a, b) = random_ordered_pair(rng, dim);
            let q = random_orthogonal(rng, dim);
            let (qa, qb) = (a.conjugated(&q)?, b.conjugated(&q)?);
            Trial::new(order_violation(&qa, &qb)?, &[&a, &b])
        }
        Suite::SupportProjectorIdempotent => {
            let x = random_dmat(rng, dim);
            let p = support_projector(&x, RANK_TOL)?;
            Trial::new((p.matrix() * p.matrix() - p.matrix()).norm(), &[&x])
        }
        Suite::NormalizeBound => {
            let x = random_dmat(rng, dim).scaled(rng.random_range(0.01..100.0));
            let n = normalize_max_eig(&x)?;
            Trial::new((n.max_eigenvalue()? - 1.0).max(0.0), &[&x])
        }
        Suite::SubInvolution => {
            let x = random_dmat(rng, dim);
            Trial::new(dist(&neg_sub(&neg_sub(&x)?)?, &x), &[&x])
        }
        Suite::SubContrapositive => {
            let (a, b) = random_ordered_pair(rng, dim);
            let (na, nb) = (neg_sub(&a)?, neg_sub(&b)?);
            let ordered = order_violation(&nb, &na)?;
            // the equivalence must also hold on pairs that are not ordered
            let (c, d) = (random_dmat(rng, dim), random_dmat(rng, dim));
            let same = loewner_leq(&c, &d, PSD_TOL)? == loewner_leq(&neg_sub(&d)?, &neg_sub(&c)?, PSD_TOL)?;
            Trial::new(ordered.max(flag(same)), &[&a, &b, &c, &d])
        }
        Suite::SubKbaSymmetry => {
            let (a, b) = (random_dmat(rng, dim), random_dmat(rng, dim));
            let lhs = k_ba(&neg_sub(&b)?, &neg_sub(&a)?)?;
            Trial::new((lhs - k_ba(&a, &b)?).abs(), &[&a, &b])
        }
        Suite::SuppDoubleInverse => {
            let x = random_dmat(rng, dim);
            Trial::new(dist(&neg_supp(&neg_supp(&x, RANK_TOL)?, RANK_TOL)?, &x), &[&x])
        }
        Suite::NegationsPreserveEigenspaces => {
            let x = random_dmat(rng, dim);
            let outputs = [
                neg_sub(&x)?,
                neg_supp(&x, RANK_TOL)?,
                neg_ker(&x, RANK_TOL)?.projector,
                neg_inv(&x, LogicalNegation::DEFAULT_SUPPORT_WEIGHT, RANK_TOL)?,
            ];
            let mut worst = 0.0_f64;
            for y in &outputs {
                worst = worst.max(eigenspace_defect(&x, y)?);
            }
            Trial::new(worst, &[&x])
        }
        Suite::SuppInverseReversesKHyp => {
            let (a, b) = (random_invertible(rng, dim), random_invertible(rng, dim));
            let forward = k_hyp(&a, &b, RANK_TOL)?;
            let backward = k_hyp(&neg_supp(&b, RANK_TOL)?, &neg_supp(&a, RANK_TOL)?, RANK_TOL)?;
            Trial::new((forward - backward).abs(), &[&a, &b])
        }
        Suite::SuppInverseReversesKHypSingular => {
            let rank = rng.random_range(1..dim);
            let (a, b) = random_same_support_pair(rng, dim, rank);
            let forward = k_hyp(&a, &b, RANK_TOL)?;
            let backward = k_hyp(&neg_supp(&b, RANK_TOL)?, &neg_supp(&a, RANK_TOL)?, RANK_TOL)?;
            Trial::new((forward - backward).abs(), &[&a, &b])
        }
        Suite::InverseReversesKbaDefinite => {
            // B − A definite (all eigenvalue gaps share a sign)
            let q = random_orthogonal(rng, dim);
            let sa: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..0.5)).collect();
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let sb: Vec<f64> = sa.iter().map(|&l| (l + sign * rng.random_range(0.01..0.04)).max(0.01)).collect();
            let (a, b) = (in_basis(&q, &sa), in_basis(&q, &sb));
            let lhs = k_ba(&neg_supp(&b, RANK_TOL)?, &neg_supp(&a, RANK_TOL)?)?;
            Trial::new((lhs - k_ba(&a, &b)?).abs(), &[&a, &b])
        }
        Suite::InverseReversesKbaGeneral => {
            let (a, b) = random_commuting_pair(rng, dim);
            let lhs = k_ba(&neg_supp(&b, RANK_TOL)?, &neg_supp(&a, RANK_TOL)?)?;
            Trial::new((lhs - k_ba(&a, &b)?).abs(), &[&a, &b])
        }
        Suite::MaximallyMixedSupport => {
            let x = random_dmat(rng, dim);
            let inverse = neg_supp(&x, RANK_TOL)?;
            let target = support_projector(&x, RANK_TOL)?;
            let mut worst = 0.0_f64;
            for op in [ops.spider, ops.fuzz, ops.phaser] {
                worst = worst.max(dist(&op(&x, &inverse)?, &target));
            }
            Trial::new(worst, &[&x])
        }
        Suite::MaximallyMixedSupportInv => {
            let x = random_dmat(rng, dim);
            let negated = neg_inv(&x, LogicalNegation::DEFAULT_SUPPORT_WEIGHT, RANK_TOL)?;
            let target = support_projector(&x, RANK_TOL)?;
            let mut worst = 0.0_f64;
            for op in [ops.fuzz, ops.phaser] {
                worst = worst.max(dist(&scale_to_unit_max_eig(&op(&x, &negated)?)?, &target));
            }
            Trial::new(worst, &[&x])
        }
        Suite::SpiderInvTieCounterexample => {
            // For singular X with unit top eigenvalue, ¬_inv X has eigenvalue
            // 1/2 on both the top eigenvector and the kernel. spider reads
            // that tied eigenspace in an arbitrary basis, mixing kernel and
            // support.
            let x = random_dmat(rng, dim);
            let negated = neg_inv(&x, LogicalNegation::DEFAULT_SUPPORT_WEIGHT, RANK_TOL)?;
            let target = support_projector(&x, RANK_TOL)?;
            Trial::new(dist(&scale_to_unit_max_eig(&(ops.spider)(&x, &negated)?)?, &target), &[&x])
        }
        Suite::CompositionsArePsd => {
            let (a, b) = (random_dmat(rng, dim), random_dmat(rng, dim));
            let mut worst = 0.0_f64;
            for op in [ops.spider, ops.fuzz, ops.phaser, mult as CompositionFn, diag_comp] {
                let out = op(&a, &b)?;
                let m = out.matrix();
                let asym = (m - m.transpose()).amax();
                let eig = symmetric_eigen(m)?;
                let neg = (-eig.min_eigenvalue()).max(0.0) / eig.max_eigenvalue().max(1.0);
                worst = worst.max(asym).max(neg);
            }
            Trial::new(worst, &[&a, &b])
        }
        Suite::MultPreservesOrder => order_trial(rng, dim, mult)?,
        Suite::DiagPreservesOrder => order_trial(rng, dim, diag_comp)?,
        // in B's own eigenbasis spider agrees with fuzz whenever B's spectrum
        // is simple, so it inherits fuzz's counterexamples
        Suite::SpiderPreservesOrder => order_trial(rng, dim, ops.spider)?,
        Suite::SpiderFixedBasisPreservesOrder => {
            let q = random_orthogonal(rng, dim);
            let (a1, b1) = random_ordered_pair(rng, dim);
            let (a2, b2) = random_ordered_pair(rng, dim);
            let violation = order_violation(&spider_in_basis(&a1, &a2, &q), &spider_in_basis(&b1, &b2, &q))?;
            Trial::new(violation, &[&a1, &b1, &a2, &b2])
        }
        Suite::FuzzBreaksOrder => order_trial(rng, dim, ops.fuzz)?,
        Suite::PhaserBreaksOrder => order_trial(rng, dim, ops.phaser)?,
        Suite::CommutingCompositionsCoincide => {
            let (a, b) = random_commuting_pair(rng, dim);
            let s = (ops.spider)(&a, &b)?;
            let f = (ops.fuzz)(&a, &b)?;
            let p = (ops.phaser)(&a, &b)?;
            Trial::new(dist(&s, &f).max(dist(&s, &p)).max(dist(&f, &p)), &[&a, &b])
        }
        Suite::SpiderIsMultForDiagonal => {
            let a = random_dmat(rng, dim);
            let diagonal: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let b = Dmat::from_diagonal(&diagonal)?;
            Trial::new(dist(&(ops.spider)(&a, &b)?, &mult(&a, &b)?), &[&a, &b])
        }
        Suite::KHypMatchesOracle => {
            let rank = rng.random_range(1..=dim);
            let (a, b) = random_nested_support_pair(rng, dim, rank);
            let k = k_hyp(&a, &b, RANK_TOL)?;
            let oracle = k_hyp_oracle(&a, &b, 1e-12)?;
            let mut residual = (k - oracle).abs();
            // the reference pair: apple inside the fruit mixture
            let apple = Dmat::from_diagonal(&[1.0, 0.0, 0.0, 0.0])?;
            let fruit = Dmat::from_diagonal(&[0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0])?;
            residual = residual.max((k_hyp(&apple, &fruit, RANK_TOL)? - 0.5).abs());
            Trial::new(residual, &[&a, &b])
        }
        Suite::ExtremeMeasures => {
            let (a, b) = random_ordered_pair(rng, dim);
            let mut residual = (k_e(&a, &b)? - 1.0).abs().max((k_ba(&a, &b)? - 1.0).abs());
            if dist(&a, &b) > 1e-8 {
                residual = residual.max((k_ba(&b, &a)? + 1.0).abs());
            }
            Trial::new(residual, &[&a, &b])
        }
        Suite::KHypScaleCovariance => {
            let (a, b) = (random_dmat(rng, dim), random_invertible(rng, dim));
            let c = rng.random_range(0.1..10.0);
            let k = k_hyp(&a, &b, RANK_TOL)?;
            let scaled = k_hyp(&a.scaled(c), &b, RANK_TOL)?;
            Trial::new((scaled * c - k).abs() / k.max(1.0), &[&a, &b])
        }
        Suite::TraceSimilarity => {
            let (a, b) = (random_dmat(rng, dim), random_dmat(rng, dim));
            let q = random_orthogonal(rng, dim);
            let t = trace_similarity(&a, &b)?;
            let symmetric = (t - trace_similarity(&b, &a)?).abs();
            let conjugated = (t - trace_similarity(&a.conjugated(&q)?, &b.conjugated(&q)?)?).abs();
            let self_sim = (trace_similarity(&a, &a.scaled(rng.random_range(0.1..10.0)))? - 1.0).abs();
            // independent draws are never proportional
            let below_one = flag(t < 1.0 - 1e-9);
            Trial::new(symmetric.max(conjugated).max(self_sim).max(below_one), &[&a, &b])
        }
        Suite::WeightsNonIncreasing => {
            let n = rng.random_range(1..=12);
            let x = rng.random_range(0.0..6.0);
            let mut worst = 0.0_f64;
            for kind in [WeightKind::Poly, WeightKind::Exp] {
                let f = WeightFunction::new(kind, x)?;
                let w: Vec<f64> = (1..=n).map(|i| f.raw_weight(i, n, 1.0)).collect();
                for pair in w.windows(2) {
                    worst = worst.max((pair[1] - pair[0]) / pair[0].abs().max(1.0));
                }
                if w.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    worst = f64::INFINITY;
                }
            }
            Trial { residual: worst, operands: vec![] }
        }
        Suite::ContextIsNormalized => {
            let n = rng.random_range(1..=5);
            let mut lexicon = Lexicon::new(dim);
            lexicon.insert("w", random_dmat(rng, dim))?;
            let mut path = Vec::new();
            for i in 0..n {
                let h = format!("h{i}");
                lexicon.insert(h.clone(), random_dmat(rng, dim))?;
                path.push(h);
            }
            let hierarchy = crate::context::HypernymHierarchy::from_paths([("w", path)])?;
            let kind = [WeightKind::Poly, WeightKind::Exp, WeightKind::Hyp][rng.random_range(0..3)];
            let f = WeightFunction::new(kind, rng.random_range(0.0..4.0))?;
            match crate::context::worldly_context_hierarchy("w", &hierarchy, &lexicon, f) {
                Ok(c) => {
                    let eig = c.decompose()?;
                    let residual = (eig.max_eigenvalue() - 1.0).abs().max((-eig.min_eigenvalue()).max(0.0));
                    Trial::new(residual, &[&c])
                }
                // all-zero weights are reported, never returned as a matrix
                Err(Error::ZeroMatrix) => Trial { residual: 0.0, operands: vec![] },
                Err(e) => return Err(e),
            }
        }
        Suite::LexiconPermutationInvariant => {
            let count = rng.random_range(1..=6);
            let words: Vec<String> = (0..=count).map(|i| format!("w{i}")).collect();
            let vectors = VectorTable::from_pairs(words.iter().map(|w| {
                let v: Vec<f64> = gaussian_matrix(rng, dim, 1).iter().copied().collect();
                (w.clone(), v)
            }))?;
            let mut hyponyms: Vec<&str> = words[1..].iter().map(String::as_str).collect();
            let first = build_density_matrix("w0", hyponyms.iter().copied(), &vectors)?;
            hyponyms.reverse();
            let j = rng.random_range(0..hyponyms.len());
            hyponyms.swap(0, j);
            let second = build_density_matrix("w0", hyponyms.iter().copied(), &vectors)?;
            Trial::new(flag(first.matrix() == second.matrix()), &[&first, &second])
        }
        Suite::LexiconRoundTrip => {
            let mut lexicon = Lexicon::new(dim);
            for i in 0..rng.random_range(1..=4) {
                lexicon.insert(format!("word{i}"), random_dmat(rng, dim))?;
            }
            let mut bytes = Vec::new();
            lexicon.write_binary(&mut bytes)?;
            let back = Lexicon::read_binary(bytes.as_slice())?;
            let same = lexicon.len() == back.len()
                && lexicon
                    .iter()
                    .zip(back.iter())
                    .all(|((w1, m1), (w2, m2))| w1 == w2 && m1.matrix() == m2.matrix());
            Trial { residual: flag(same), operands: vec![] }
        }
        Suite::PearsonAffineInvariance => {
            let n = rng.random_range(3..=50);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let (scale, shift) = (rng.random_range(0.01..100.0), rng.random_range(-50.0..50.0));
            let r = pearson(&xs, &ys)?;
            let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let moved_y: Vec<f64> = ys.iter().map(|y| scale * y - shift).collect();
            let residual = (pearson(&moved, &ys)? - r).abs().max((pearson(&xs, &moved_y)? - r).abs());
            Trial { residual, operands: vec![] }
        }
    })
}

/// `A₁ ⊑ B₁`, `A₂ ⊑ B₂`; residual is how far `op(A₁, A₂) ⊑ op(B₁, B₂)` fails.
fn order_trial(rng: &mut ChaCha8Rng, dim: usize, op: CompositionFn) -> Result<Trial> {
    let (a1, b1) = random_ordered_pair(rng, dim);
    let (a2, b2) = random_ordered_pair(rng, dim);
    let violation = order_violation(&op(&a1, &a2)?, &op(&b1, &b2)?)?;
    Ok(Trial::new(violation, &[&a1, &b1, &a2, &b2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_rejected() {
        assert!(matches!(verify_theorems(0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn suites_are_reproducible() {
        let opts = VerifyOptions::new(7, 20);
        let a = run_suite(Suite::MaximallyMixedSupport, &opts).unwrap();
        let b = run_suite(Suite::MaximallyMixedSupport, &opts).unwrap();
        assert_eq!(a.max_residual, b.max_residual);
    }

    fn broken_phaser(a: &Dmat, b: &Dmat) -> Result<Dmat> {
        Ok(Dmat::from_psd_unchecked(b.matrix() * a.matrix() * b.matrix()))
    }

    #[test]
    fn broken_phaser_is_caught() {
        let mut opts = VerifyOptions::new(0, 50);
        opts.operators.phaser = broken_phaser;
        let outcome = run_suite(Suite::MaximallyMixedSupport, &opts).unwrap();
        assert!(!outcome.passed(), "{outcome}");
    }
}
