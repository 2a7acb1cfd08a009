//! Worldly context: an a-priori density matrix for a word, built either from
//! its hypernym path or from a graph of graded entailments between words.
//!
//! Hierarchy file format, one record per line, nearest hypernym first:
//!
//! ```text
//! # comment
//! apple<TAB>fruit,food,entity
//! ```
//!
//! Entailment graphs export as `u<TAB>v<TAB>p` lines, `p` printed with nine
//! significant digits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::entailment::{k_e, k_hyp_clamped};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::spectral::{scale_to_unit_max_eig, Dmat, RANK_TOL};

/// Hypernym paths, nearest hypernym first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HypernymHierarchy {
    paths: BTreeMap<String, Vec<String>>,
}

impl HypernymHierarchy {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut hierarchy = HypernymHierarchy::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (word, rest) = trimmed
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected `word<TAB>h1,h2,...`"))?;
            let word = word.trim();
            if word.is_empty() {
                return Err(Error::parse(line_no, "empty word"));
            }
            let hypernyms: Vec<String> = rest.split(',').map(|h| h.trim().to_string()).collect();
            if hypernyms.iter().any(String::is_empty) {
                return Err(Error::parse(line_no, format!("empty hypernym in list for `{word}`")));
            }
            hierarchy.insert(word, hypernyms)?;
        }
        Ok(hierarchy)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn from_paths<I, S, H>(paths: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, H)>,
        S: AsRef<str>,
        H: IntoIterator,
        H::Item: Into<String>,
    {
        let mut hierarchy = HypernymHierarchy::default();
        for (word, hypernyms) in paths {
            hierarchy.insert(word.as_ref(), hypernyms.into_iter().map(Into::into).collect())?;
        }
        Ok(hierarchy)
    }

    fn insert(&mut self, word: &str, hypernyms: Vec<String>) -> Result<()> {
        if hypernyms.is_empty() {
            return Err(Error::parse(0, format!("`{word}` has no hypernyms")));
        }
        if hypernyms.iter().any(|h| h == word) {
            return Err(Error::SelfReference(word.to_string()));
        }
        if self.paths.contains_key(word) {
            return Err(Error::DuplicateWord(word.to_string()));
        }
        self.paths.insert(word.to_string(), hypernyms);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.paths
            .get(word)
            .or_else(|| self.paths.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }

    pub fn require(&self, word: &str) -> Result<&[String]> {
        self.get(word).ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.paths.keys().map(String::as_str)
    }

    /// Every word mentioned, as an entry or as a hypernym.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.paths
            .iter()
            .flat_map(|(w, hs)| std::iter::once(w.as_str()).chain(hs.iter().map(String::as_str)))
            .collect()
    }

    /// Hypernym → all words having it anywhere on their path.
    pub fn hyponym_index(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut index: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (w, hs) in &self.paths {
            for h in hs {
                index.entry(h.as_str()).or_default().insert(w.as_str());
            }
        }
        index
    }

    /// Drops hypernyms that have no matrix in `lexicon`, and entries left
    /// with an empty path. Returns the pruned hierarchy and the number of
    /// entries removed.
    pub fn restrict_to(&self, lexicon: &Lexicon) -> (HypernymHierarchy, usize) {
        let mut paths = BTreeMap::new();
        let mut dropped = 0;
        for (w, hs) in &self.paths {
            let kept: Vec<String> = hs.iter().filter(|h| lexicon.contains(h)).cloned().collect();
            if kept.is_empty() {
                dropped += 1;
            } else {
                paths.insert(w.clone(), kept);
            }
        }
        (HypernymHierarchy { paths }, dropped)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WeightKind {
    /// `(n − i)^x`
    Poly,
    /// `(1 + x/10)^(n − i)`
    Exp,
    /// `(n − i)^(x/2) · k_E(w, h_i)`
    Hyp,
}

/// Weighting of the hypernyms `h_1 … h_n` along a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub x: f64,
}

impl WeightFunction {
    pub fn new(kind: WeightKind, x: f64) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight parameter x = {x} must be finite and >= 0")));
        }
        Ok(WeightFunction { kind, x })
    }

    pub fn poly(x: f64) -> Self {
        WeightFunction { kind: WeightKind::Poly, x }
    }

    pub fn exp(x: f64) -> Self {
        WeightFunction { kind: WeightKind::Exp, x }
    }

    pub fn hyp(x: f64) -> Self {
        WeightFunction { kind: WeightKind::Hyp, x }
    }

    /// Unnormalized weight of the `i`-th hypernym (1-based) on a path of
    /// length `n`. `entailment` is `k_E(w, h_i)` and only used by `hyp`.
    pub fn raw_weight(&self, i: usize, n: usize, entailment: f64) -> f64 {
        let distance = (n - i) as f64;
        match self.kind {
            WeightKind::Poly => distance.powf(self.x),
            WeightKind::Exp => (1.0 + self.x / 10.0).powf(distance),
            WeightKind::Hyp => distance.powf(self.x / 2.0) * entailment,
        }
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            WeightKind::Poly => "poly",
            WeightKind::Exp => "exp",
            WeightKind::Hyp => "hyp",
        };
        write!(f, "{name}:{}", self.x)
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "poly" => Ok(WeightKind::Poly),
            "exp" => Ok(WeightKind::Exp),
            "hyp" => Ok(WeightKind::Hyp),
            other => Err(Error::InvalidArgument(format!("unknown weight function `{other}`"))),
        }
    }
}

/// Hypernym weights for `word`, rescaled to sum to 1.
pub fn hypernym_weights(
    f: WeightFunction,
    word: &str,
    hierarchy: &HypernymHierarchy,
    lexicon: &Lexicon,
) -> Result<Vec<f64>> {
    let path = hierarchy.require(word)?;
    let n = path.len();
    let raw = match f.kind {
        WeightKind::Hyp => {
            let w = lexicon.get(word).ok_or_else(|| Error::MissingMatrix(word.to_string()))?;
            path.iter()
                .enumerate()
                .map(|(idx, h)| {
                    let h = lexicon.get(h).ok_or_else(|| Error::MissingMatrix(h.clone()))?;
                    Ok(f.raw_weight(idx + 1, n, k_e(w, h)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => (1..=n).map(|i| f.raw_weight(i, n, 1.0)).collect(),
    };
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Ok(raw);
    }
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// `Σ_i p_i ⟦h_i⟧` over the hypernym path, scaled to unit largest eigenvalue.
pub fn worldly_context_hierarchy(
    word: &str,
    hierarchy: &HypernymHierarchy,
    lexicon: &Lexicon,
    f: WeightFunction,
) -> Result<Dmat> {
    let path = hierarchy.require(word)?;
    let matrices = path
        .iter()
        .map(|h| lexicon.get(h).ok_or_else(|| Error::MissingMatrix(h.clone())))
        .collect::<Result<Vec<_>>>()?;
    let weights = hypernym_weights(f, word, hierarchy, lexicon)?;
    mix_and_scale(weights.into_iter().zip(matrices))
}

fn mix_and_scale<'a>(terms: impl IntoIterator<Item = (f64, &'a Dmat)>) -> Result<Dmat> {
    let mixture = Dmat::mixture(terms)?.ok_or(Error::ZeroMatrix)?;
    scale_to_unit_max_eig(&mixture)
}

/// Graded measure used for entailment-graph edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphMeasure {
    /// `min(k_hyp, 1)`.
    KHyp,
    KE,
}

impl FromStr for GraphMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "k_hyp" => Ok(GraphMeasure::KHyp),
            "k_E" | "k_e" => Ok(GraphMeasure::KE),
            other => Err(Error::InvalidArgument(format!("unknown graph measure `{other}`"))),
        }
    }
}

/// Directed weighted edges `u → v` carrying "how much `u` entails `v`".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EntailmentGraph {
    edges: BTreeMap<String, BTreeMap<String, f64>>,
}

impl EntailmentGraph {
    pub fn from_edges<I, S>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let mut graph = EntailmentGraph::default();
        for (u, v, p) in edges {
            graph.add_edge(u.into(), v.into(), p)?;
        }
        Ok(graph)
    }

    fn add_edge(&mut self, u: String, v: String, p: f64) -> Result<()> {
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop on `{u}`")));
        }
        if !p.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite weight on {u} -> {v}")));
        }
        self.edges.entry(u).or_default().insert(v, p);
        Ok(())
    }

    pub fn weight(&self, u: &str, v: &str) -> Option<f64> {
        self.edges.get(u).and_then(|out| out.get(v)).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_count() == 0
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges
            .iter()
            .flat_map(|(u, out)| out.iter().map(move |(v, &p)| (u.as_str(), v.as_str(), p)))
    }

    /// Words connected to `word` in either direction, with `(p, q)`:
    /// `p` on the edge out of `word`, `q` on the edge into it (0 if absent).
    pub fn neighbors(&self, word: &str) -> Vec<(&str, f64, f64)> {
        let mut names: BTreeSet<&str> = self
            .edges
            .get(word)
            .map(|out| out.keys().map(String::as_str).collect())
            .unwrap_or_default();
        for (u, out) in &self.edges {
            if out.contains_key(word) {
                names.insert(u.as_str());
            }
        }
        names
            .into_iter()
            .map(|h| (h, self.weight(word, h).unwrap_or(0.0), self.weight(h, word).unwrap_or(0.0)))
            .collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (u, v, p) in self.edges() {
            writeln!(w, "{u}\t{v}\t{}", format_significant(p, 9))?;
        }
        Ok(())
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut graph = EntailmentGraph::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [u, v, p] = fields[..] else {
                return Err(Error::parse(idx + 1, "expected `u<TAB>v<TAB>p`"));
            };
            let p = p.trim().parse().map_err(|_| Error::parse(idx + 1, format!("bad weight `{p}`")))?;
            graph.add_edge(u.to_string(), v.to_string(), p).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        }
        Ok(graph)
    }
}

/// Formats `x` in plain decimal notation rounded to `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Scores every ordered pair of distinct words; edges below `threshold` are dropped.
pub fn build_entailment_graph(lexicon: &Lexicon, measure: GraphMeasure, threshold: f64) -> EntailmentGraph {
    let words: Vec<(&str, &Dmat)> = lexicon.iter().collect();
    let edges: Vec<(String, String, f64)> = words
        .par_iter()
        .flat_map_iter(|&(u, mu)| {
            words.iter().filter(move |(v, _)| *v != u).filter_map(move |&(v, mv)| {
                let p = match measure {
                    GraphMeasure::KHyp => k_hyp_clamped(mu, mv, RANK_TOL),
                    GraphMeasure::KE => k_e(mu, mv),
                }
                .ok()?;
                (p.is_finite() && p >= threshold).then(|| (u.to_string(), v.to_string(), p))
            })
        })
        .collect();
    let mut graph = EntailmentGraph::default();
    for (u, v, p) in edges {
        graph.edges.entry(u).or_default().insert(v, p);
    }
    graph
}

/// Combines the two edge weights between a word and a neighbour.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Combiner {
    /// `f(p, q) = p`
    #[default]
    Forward,
    /// `f(p, q) = q`
    Backward,
    Mean,
    Product,
    Max,
}

impl Combiner {
    pub fn apply(self, p: f64, q: f64) -> f64 {
        match self {
            Combiner::Forward => p,
            Combiner::Backward => q,
            Combiner::Mean => 0.5 * (p + q),
            Combiner::Product => p * q,
            Combiner::Max => p.max(q),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Combiner::Forward => "p",
            Combiner::Backward => "q",
            Combiner::Mean => "mean",
            Combiner::Product => "product",
            Combiner::Max => "max",
        }
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "p" => Ok(Combiner::Forward),
            "q" => Ok(Combiner::Backward),
            "mean" => Ok(Combiner::Mean),
            "product" => Ok(Combiner::Product),
            "max" => Ok(Combiner::Max),
            other => Err(Error::InvalidArgument(format!("unknown combiner `{other}`"))),
        }
    }
}

/// `Σ_i f(p_i, q_i) ⟦h_i⟧` over the graph neighbours of `word`, scaled to
/// unit largest eigenvalue. Negative combiner outputs are treated as 0.
pub fn worldly_context_graph(
    word: &str,
    graph: &EntailmentGraph,
    lexicon: &Lexicon,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Dmat> {
    let neighbors = graph.neighbors(word);
    if neighbors.is_empty() {
        return Err(Error::IsolatedWord(word.to_string()));
    }
    let terms = neighbors
        .into_iter()
        .map(|(h, p, q)| {
            let m = lexicon.get(h).ok_or_else(|| Error::MissingMatrix(h.to_string()))?;
            Ok((f(p, q).max(0.0), m))
        })
        .collect::<Result<Vec<_>>>()?;
    mix_and_scale(terms)
}
