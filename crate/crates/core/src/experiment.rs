//! Plausibility-rating experiments: dataset ingestion, the configuration
//! grid, Pearson correlation and the result table.
//!
//! Dataset TSV (header required):
//!
//! ```text
//! negated<TAB>alternative<TAB>mean_rating
//! radio<TAB>dad<TAB>1.2
//! ```
//!
//! Grid configuration is a flat `key = value` file, lists comma separated:
//!
//! ```text
//! negation = sub, inv
//! support_weight = 0.5
//! composition = spider, fuzz, phaser, mult, diag
//! basis = w, c
//! context = hierarchy          # hierarchy | graph
//! context_fn = poly, exp, hyp  # hierarchy only
//! x = 0, 1, 2                  # hierarchy only
//! combiner = p                 # graph only: p | q | mean | product | max
//! graph_measure = k_E          # graph only: k_E | k_hyp
//! graph_threshold = 0.0        # graph only
//! measures = k_hyp1, k_hyp2, k_E1, k_E2, k_BA, trace
//! baseline = true
//! highlight = 0.4
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::composition::CompositionKind;
use crate::context::{Combiner, EntailmentGraph, GraphMeasure, HypernymHierarchy, WeightFunction, WeightKind};
use crate::entailment::Measure;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::negation::LogicalNegation;
use crate::pipeline::{
    conversational_negate, logical_negation_only, plausibility, Basis, ContextProvider, ContextSource, Direction,
    FixedContext, GraphContext, HierarchyContext, NegationConfig,
};
use crate::spectral::Dmat;

pub const DATASET_HEADER: &str = "negated\talternative\tmean_rating";
pub const RESULT_HEADER: &str = "negation,composition,basis,context,measure,r,n,skipped";
pub const SCATTER_HEADER: &str = "negation,composition,basis,context,measure,negated,alternative,rating,score";

#[derive(Clone, Debug, PartialEq)]
pub struct PlausibilityRecord {
    pub negated: String,
    pub alternative: String,
    pub mean_rating: f64,
}

/// `(w_N, w_A, mean human rating)` triples, ratings on a 1–5 scale.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlausibilityDataset {
    records: Vec<PlausibilityRecord>,
}

impl PlausibilityDataset {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim_end_matches(['\r', '\n']) != DATASET_HEADER {
            return Err(Error::parse(1, format!("expected header `{DATASET_HEADER}`")));
        }
        let mut records = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [negated, alternative, rating] = fields[..] else {
                return Err(Error::parse(line_no, "expected three tab-separated fields"));
            };
            let mean_rating: f64 = rating
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad rating `{rating}`")))?;
            if !(1.0..=5.0).contains(&mean_rating) {
                return Err(Error::RatingOutOfRange { line: line_no, value: mean_rating });
            }
            let (negated, alternative) = (negated.trim().to_string(), alternative.trim().to_string());
            if !seen.insert((negated.clone(), alternative.clone())) {
                return Err(Error::DuplicatePair(negated, alternative));
            }
            records.push(PlausibilityRecord { negated, alternative, mean_rating });
        }
        Ok(PlausibilityDataset { records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn records(&self) -> &[PlausibilityRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn words(&self) -> BTreeSet<&str> {
        self.records
            .iter()
            .flat_map(|r| [r.negated.as_str(), r.alternative.as_str()])
            .collect()
    }
}

/// Product-moment correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!("length mismatch {} vs {}", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData(n));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= f64::EPSILON * f64::EPSILON * n as f64 || syy <= f64::EPSILON * f64::EPSILON * n as f64 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// A measure applied in a fixed direction; one column of the result table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreColumn {
    KHyp1,
    KHyp2,
    KHyp1Clamped,
    KHyp2Clamped,
    KE1,
    KE2,
    KBa,
    Trace,
}

impl ScoreColumn {
    pub const ALL: [ScoreColumn; 8] = [
        ScoreColumn::KHyp1,
        ScoreColumn::KHyp2,
        ScoreColumn::KHyp1Clamped,
        ScoreColumn::KHyp2Clamped,
        ScoreColumn::KE1,
        ScoreColumn::KE2,
        ScoreColumn::KBa,
        ScoreColumn::Trace,
    ];

    pub fn measure(self) -> (Measure, Direction) {
        use Direction::*;
        match self {
            ScoreColumn::KHyp1 => (Measure::KHyp, FromNegated),
            ScoreColumn::KHyp2 => (Measure::KHyp, FromAlternative),
            ScoreColumn::KHyp1Clamped => (Measure::KHypClamped, FromNegated),
            ScoreColumn::KHyp2Clamped => (Measure::KHypClamped, FromAlternative),
            ScoreColumn::KE1 => (Measure::KE, FromNegated),
            ScoreColumn::KE2 => (Measure::KE, FromAlternative),
            ScoreColumn::KBa => (Measure::KBa, FromNegated),
            ScoreColumn::Trace => (Measure::TraceSim, FromNegated),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreColumn::KHyp1 => "k_hyp1",
            ScoreColumn::KHyp2 => "k_hyp2",
            ScoreColumn::KHyp1Clamped => "k_hyp1_clamped",
            ScoreColumn::KHyp2Clamped => "k_hyp2_clamped",
            ScoreColumn::KE1 => "k_E1",
            ScoreColumn::KE2 => "k_E2",
            ScoreColumn::KBa => "k_BA",
            ScoreColumn::Trace => "trace",
        }
    }

    pub fn score(self, negated: &Dmat, alternative: &Dmat) -> Result<f64> {
        let (measure, direction) = self.measure();
        plausibility(negated, alternative, measure, direction)
    }
}

impl fmt::Display for ScoreColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScoreColumn::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure column `{s}`")))
    }
}

/// The axes of an experiment grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub negations: Vec<LogicalNegation>,
    pub compositions: Vec<CompositionKind>,
    pub bases: Vec<Basis>,
    pub contexts: Vec<ContextSource>,
    pub columns: Vec<ScoreColumn>,
    pub graph_measure: GraphMeasure,
    pub graph_threshold: f64,
    pub baseline: bool,
    pub highlight: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            negations: vec![LogicalNegation::Sub, LogicalNegation::inv()],
            compositions: CompositionKind::ALL.to_vec(),
            bases: vec![Basis::W, Basis::C],
            contexts: vec![ContextSource::Hierarchy(WeightFunction::poly(1.0))],
            columns: vec![
                ScoreColumn::KHyp1,
                ScoreColumn::KHyp2,
                ScoreColumn::KHyp1Clamped,
                ScoreColumn::KHyp2Clamped,
                ScoreColumn::KE1,
                ScoreColumn::KE2,
                ScoreColumn::KBa,
                ScoreColumn::Trace,
            ],
            graph_measure: GraphMeasure::KE,
            graph_threshold: 0.0,
            baseline: true,
            highlight: 0.4,
        }
    }
}

impl GridConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, "expected `key = value`"))?;
            if values.insert(k.trim().to_string(), (idx + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse(idx + 1, format!("duplicate key `{}`", k.trim())));
            }
        }

        fn list<T: FromStr<Err = Error>>(line: usize, v: &str) -> Result<Vec<T>> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| Error::parse(line, e.to_string())))
                .collect()
        }
        fn number(line: usize, v: &str) -> Result<f64> {
            v.parse().map_err(|_| Error::parse(line, format!("bad number `{v}`")))
        }

        let mut grid = GridConfig::default();
        let mut support_weight = LogicalNegation::DEFAULT_SUPPORT_WEIGHT;
        let mut source = "hierarchy".to_string();
        let mut kinds = vec![WeightKind::Poly];
        let mut xs = vec![1.0];
        let mut combiners = vec![Combiner::Forward];
        for (key, (line, v)) in &values {
            let line = *line;
            match key.as_str() {
                "negation" => grid.negations = list(line, v)?,
                "support_weight" => support_weight = number(line, v)?,
                "composition" => grid.compositions = list(line, v)?,
                "basis" => grid.bases = list(line, v)?,
                "context" => source = v.clone(),
                "context_fn" => kinds = list(line, v)?,
                "x" => {
                    xs = v.split(',').map(|s| number(line, s.trim())).collect::<Result<_>>()?;
                }
                "combiner" => combiners = list(line, v)?,
                "graph_measure" => grid.graph_measure = v.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?,
                "graph_threshold" => grid.graph_threshold = number(line, v)?,
                "measures" => grid.columns = list(line, v)?,
                "baseline" => {
                    grid.baseline = v.parse().map_err(|_| Error::parse(line, format!("bad boolean `{v}`")))?
                }
                "highlight" => grid.highlight = number(line, v)?,
                other => return Err(Error::parse(line, format!("unknown key `{other}`"))),
            }
        }
        if !(0.0..=1.0).contains(&support_weight) {
            return Err(Error::WeightOutOfRange(support_weight));
        }
        for n in &mut grid.negations {
            if let LogicalNegation::Inv { support_weight: w } = n {
                *w = support_weight;
            }
        }
        grid.contexts = match source.as_str() {
            "hierarchy" => {
                let mut out = Vec::new();
                for &kind in &kinds {
                    for &x in &xs {
                        out.push(ContextSource::Hierarchy(WeightFunction::new(kind, x)?));
                    }
                }
                out
            }
            "graph" => combiners.into_iter().map(ContextSource::Graph).collect(),
            "fixed" => vec![ContextSource::Fixed],
            other => return Err(Error::InvalidArgument(format!("unknown context source `{other}`"))),
        };
        if grid.negations.is_empty() || grid.compositions.is_empty() || grid.bases.is_empty() || grid.columns.is_empty() {
            return Err(Error::InvalidArgument("every grid axis needs at least one value".into()));
        }
        Ok(grid)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Every distinct configuration. `mult` and `diag` appear once, whatever
    /// the number of bases.
    pub fn configs(&self) -> Vec<NegationConfig> {
        let mut out: Vec<NegationConfig> = Vec::new();
        for &negation in &self.negations {
            for &composition in &self.compositions {
                for &basis in &self.bases {
                    for &context in &self.contexts {
                        let cfg = NegationConfig { negation, composition, basis, context }.canonical();
                        if !out.contains(&cfg) {
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn uses_graph(&self) -> bool {
        self.contexts.iter().any(|c| matches!(c, ContextSource::Graph(_)))
    }
}

/// Context data available to a grid run.
#[derive(Clone, Copy, Default)]
pub struct ContextSources<'a> {
    pub hierarchy: Option<&'a HypernymHierarchy>,
    pub graph: Option<&'a EntailmentGraph>,
    pub fixed: Option<&'a FixedContext>,
}

impl<'a> ContextSources<'a> {
    fn provider(&self, source: ContextSource, lexicon: &'a Lexicon) -> Result<Box<dyn ContextProvider + 'a>> {
        let missing = |what: &str| Error::InvalidArgument(format!("grid needs a {what} but none was supplied"));
        Ok(match source {
            ContextSource::Hierarchy(weights) => Box::new(HierarchyContext {
                hierarchy: self.hierarchy.ok_or_else(|| missing("hierarchy"))?,
                lexicon,
                weights,
            }),
            ContextSource::Graph(combiner) => Box::new(GraphContext {
                graph: self.graph.ok_or_else(|| missing("entailment graph"))?,
                lexicon,
                combiner,
            }),
            ContextSource::Fixed => Box::new(self.fixed.ok_or_else(|| missing("fixed context"))?.clone()),
        })
    }
}

/// Correlation of one score column with the human ratings.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub column: ScoreColumn,
    /// `None` when fewer than three pairs were scored or a side had no variance.
    pub r: Option<f64>,
    pub n: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub negation: String,
    pub composition: String,
    pub basis: String,
    pub context: String,
    pub cells: Vec<Cell>,
}

impl ResultRow {
    pub fn key(&self) -> (&str, &str, &str, &str) {
        (&self.negation, &self.composition, &self.basis, &self.context)
    }

    pub fn cell(&self, column: ScoreColumn) -> Option<&Cell> {
        self.cells.iter().find(|c| c.column == column)
    }

    pub fn is_baseline(&self) -> bool {
        self.composition == "none"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPoint {
    pub row: usize,
    pub column: ScoreColumn,
    pub record: usize,
    pub score: f64,
}

/// Rows sorted by `(negation, composition, basis, context)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub scatter: Vec<ScatterPoint>,
    pub dataset_size: usize,
}

impl ResultTable {
    pub fn row(&self, negation: &str, composition: &str, basis: &str, context: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.key() == (negation, composition, basis, context))
    }

    /// Long-format CSV, one line per (row, measure).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{RESULT_HEADER}")?;
        for row in &self.rows {
            for cell in &row.cells {
                let r = cell.r.map_or_else(|| "null".to_string(), |r| format!("{r:.4}"));
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    row.negation, row.composition, row.basis, row.context, cell.column, r, cell.n, cell.skipped
                )?;
            }
        }
        Ok(())
    }

    pub fn write_scatter<W: Write>(&self, dataset: &PlausibilityDataset, mut w: W) -> Result<()> {
        writeln!(w, "{SCATTER_HEADER}")?;
        for p in &self.scatter {
            let row = &self.rows[p.row];
            let rec = &dataset.records()[p.record];
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                row.negation, row.composition, row.basis, row.context, p.column, rec.negated, rec.alternative,
                rec.mean_rating, p.score
            )?;
        }
        Ok(())
    }

    /// Fixed-width summary; correlations at or above `highlight` get a `*`.
    pub fn render(&self, highlight: f64) -> String {
        let columns: Vec<ScoreColumn> = self.rows.first().map(|r| r.cells.iter().map(|c| c.column).collect()).unwrap_or_default();
        let mut out = format!("{:<10}{:<8}{:<6}{:<12}", "negation", "comp", "basis", "context");
        for c in &columns {
            out += &format!("{:>16}", c.name());
        }
        out.push('\n');
        for row in &self.rows {
            out += &format!("{:<10}{:<8}{:<6}{:<12}", row.negation, row.composition, row.basis, row.context);
            for cell in &row.cells {
                let text = match cell.r {
                    Some(r) if r >= highlight => format!("{r:.4}*"),
                    Some(r) => format!("{r:.4} "),
                    None => "null ".to_string(),
                };
                out += &format!("{:>16}", format!("{text} n={}", cell.n));
            }
            out.push('\n');
        }
        out
    }
}

fn correlate(
    column: ScoreColumn,
    outcomes: &[Option<(&Dmat, &Dmat)>],
    dataset: &PlausibilityDataset,
) -> (Cell, Vec<(usize, f64)>) {
    let mut points = Vec::new();
    for (idx, pair) in outcomes.iter().enumerate() {
        if let Some((negated, alternative)) = pair {
            if let Ok(score) = column.score(negated, alternative) {
                if score.is_finite() {
                    points.push((idx, score));
                }
            }
        }
    }
    let scores: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ratings: Vec<f64> = points.iter().map(|p| dataset.records()[p.0].mean_rating).collect();
    let r = pearson(&scores, &ratings).ok();
    let n = points.len();
    (Cell { column, r, n, skipped: dataset.len() - n }, points)
}

type RowKey = [String; 4];
type NegatedOutputs<'a> = BTreeMap<&'a str, Result<Dmat>>;
/// Score column, record index, score.
type PairScore = (ScoreColumn, usize, f64);

fn evaluate_row(
    key: RowKey,
    negations: &NegatedOutputs,
    dataset: &PlausibilityDataset,
    lexicon: &Lexicon,
    columns: &[ScoreColumn],
) -> (ResultRow, Vec<PairScore>) {
    let outcomes: Vec<Option<(&Dmat, &Dmat)>> = dataset
        .records()
        .iter()
        .map(|rec| {
            let negated = negations.get(rec.negated.as_str())?.as_ref().ok()?;
            let alternative = lexicon.get(&rec.alternative)?;
            Some((negated, alternative))
        })
        .collect();
    let mut cells = Vec::new();
    let mut scatter = Vec::new();
    for &column in columns {
        let (cell, points) = correlate(column, &outcomes, dataset);
        cells.push(cell);
        scatter.extend(points.into_iter().map(|(rec, s)| (column, rec, s)));
    }
    let [negation, composition, basis, context] = key;
    (ResultRow { negation, composition, basis, context, cells }, scatter)
}

/// Runs every configuration of `grid` over `dataset`.
///
/// Pairs whose negated word cannot be processed (unknown word, no context,
/// annihilating composition) or whose alternative has no matrix are skipped
/// and counted per cell. When `grid.baseline` is set, a logical-negation-only
/// row (composition `none`) is added per negation.
pub fn run_grid(
    dataset: &PlausibilityDataset,
    lexicon: &Lexicon,
    contexts: ContextSources<'_>,
    grid: &GridConfig,
) -> Result<ResultTable> {
    let negated_words: BTreeSet<&str> = dataset.records().iter().map(|r| r.negated.as_str()).collect();
    let configs = grid.configs();
    let providers = configs
        .iter()
        .map(|cfg| contexts.provider(cfg.context, lexicon))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs: Vec<(RowKey, NegatedOutputs)> = configs
        .par_iter()
        .zip(providers.par_iter())
        .map(|(cfg, provider)| {
            let key = [
                cfg.negation.label(),
                cfg.composition.name().to_string(),
                cfg.basis_label().to_string(),
                cfg.context.to_string(),
            ];
            let outputs = negated_words
                .iter()
                .map(|&w| (w, conversational_negate(w, cfg, lexicon, provider.as_ref())))
                .collect();
            (key, outputs)
        })
        .collect();

    if grid.baseline {
        let mut seen = BTreeSet::new();
        for negation in &grid.negations {
            if seen.insert(negation.label()) {
                let key = [negation.label(), "none".into(), "-".into(), "-".into()];
                let outputs = negated_words
                    .iter()
                    .map(|&w| (w, logical_negation_only(w, *negation, lexicon)))
                    .collect();
                jobs.push((key, outputs));
            }
        }
    }

    let mut evaluated: Vec<(ResultRow, Vec<PairScore>)> = jobs
        .into_par_iter()
        .map(|(key, outputs)| evaluate_row(key, &outputs, dataset, lexicon, &grid.columns))
        .collect();
    evaluated.sort_by(|a, b| a.0.key().cmp(&b.0.key()));

    let mut table = ResultTable { dataset_size: dataset.len(), ..Default::default() };
    for (idx, (row, points)) in evaluated.into_iter().enumerate() {
        table.rows.push(row);
        table
            .scatter
            .extend(points.into_iter().map(|(column, record, score)| ScatterPoint { row: idx, column, record, score }));
    }
    Ok(table)
}
