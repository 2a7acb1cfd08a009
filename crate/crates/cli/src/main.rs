use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Parser, Subcommand};

use convneg::composition::CompositionKind;
use convneg::context::{build_entailment_graph, HypernymHierarchy, WeightFunction, WeightKind};
use convneg::experiment::{run_grid, ContextSources, GridConfig, PlausibilityDataset};
use convneg::lexicon::{load_lexicon, load_vectors, save_lexicon, text_line, Lexicon};
use convneg::negation::LogicalNegation;
use convneg::pipeline::{conversational_negate, Basis, ContextSource, HierarchyContext, NegationConfig};
use convneg::verify::{verify_with, VerifyOptions};

#[derive(Parser)]
#[command(name = "convneg", version, about = "Conversational negation with density matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build density matrices from word vectors and a hypernym file.
    BuildLexicon {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also build matrices for every word of this plausibility dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Conversationally negate one word and print the resulting matrix.
    Negate {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value = "sub", value_parser = choice::<LogicalNegation>(&["sub", "inv"]))]
        negation: LogicalNegation,
        /// Support weight of the `inv` negation.
        #[arg(long, default_value_t = LogicalNegation::DEFAULT_SUPPORT_WEIGHT)]
        support_weight: f64,
        #[arg(long, default_value = "phaser",
              value_parser = choice::<CompositionKind>(&["spider", "fuzz", "phaser", "mult", "diag"]))]
        composition: CompositionKind,
        #[arg(long, default_value = "w", value_parser = choice::<Basis>(&["w", "c"]))]
        basis: Basis,
        #[arg(long, default_value = "poly", value_parser = choice::<WeightKind>(&["poly", "exp", "hyp"]))]
        context_fn: WeightKind,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
        /// Print one machine-readable line (`word<TAB>dim<TAB>values`).
        #[arg(long)]
        text_out: bool,
    },
    /// Correlate plausibility scores with human ratings over a config grid.
    Evaluate {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-pair scores for scatter plots.
        #[arg(long)]
        scatter: Option<PathBuf>,
        /// Overrides the grid file's highlight threshold.
        #[arg(long)]
        highlight: Option<f64>,
    },
    /// Run the randomized property suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
    },
}

fn choice<T>(names: &'static [&'static str]) -> impl clap::builder::TypedValueParser<Value = T>
where
    T: std::str::FromStr + Clone + Send + Sync + 'static,
    T::Err: std::fmt::Debug,
{
    PossibleValuesParser::new(names).map(|s| s.parse::<T>().expect("listed names parse"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::BuildLexicon { vectors, hierarchy, out, dataset } => {
            build_lexicon(&vectors, &hierarchy, &out, dataset.as_deref())?;
        }
        Command::Negate {
            lexicon,
            hierarchy,
            word,
            negation,
            support_weight,
            composition,
            basis,
            context_fn,
            x,
            text_out,
        } => {
            let negation = match negation {
                LogicalNegation::Inv { .. } => {
                    if !(0.0..=1.0).contains(&support_weight) {
                        bail!("--support-weight must lie in [0, 1], got {support_weight}");
                    }
                    LogicalNegation::Inv { support_weight }
                }
                other => other,
            };
            let weights = WeightFunction::new(context_fn, x)?;
            let cfg = NegationConfig { negation, composition, basis, context: ContextSource::Hierarchy(weights) };
            let lexicon = open_lexicon(&lexicon)?;
            let hierarchy = open_hierarchy(&hierarchy, &lexicon)?;
            let provider = HierarchyContext { hierarchy: &hierarchy, lexicon: &lexicon, weights };
            let out = conversational_negate(&word, &cfg, &lexicon, &provider)
                .with_context(|| format!("negating `{word}`"))?;
            if text_out {
                println!("{}", text_line(&word, &out));
            } else {
                print_negation(&word, &cfg, &out, &lexicon)?;
            }
        }
        Command::Evaluate { lexicon, hierarchy, dataset, grid, out, scatter, highlight } => {
            let lexicon = open_lexicon(&lexicon)?;
            let hierarchy = open_hierarchy(&hierarchy, &lexicon)?;
            let dataset = PlausibilityDataset::load(&dataset)
                .with_context(|| format!("reading dataset {}", dataset.display()))?;
            let grid = GridConfig::load(&grid).with_context(|| format!("reading grid {}", grid.display()))?;
            let graph = grid
                .uses_graph()
                .then(|| build_entailment_graph(&lexicon, grid.graph_measure, grid.graph_threshold));
            let sources = ContextSources { hierarchy: Some(&hierarchy), graph: graph.as_ref(), fixed: None };
            let table = run_grid(&dataset, &lexicon, sources, &grid)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            table.write_csv(BufWriter::new(file))?;
            if let Some(path) = scatter {
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                table.write_scatter(&dataset, BufWriter::new(file))?;
            }
            print!("{}", table.render(highlight.unwrap_or(grid.highlight)));
            eprintln!("{} rows written to {}", table.rows.len(), out.display());
        }
        Command::Verify { seed, trials, max_dim } => {
            let mut opts = VerifyOptions::new(seed, trials);
            opts.dims = 2..=max_dim;
            let report = verify_with(&opts)?;
            println!("{report}");
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn build_lexicon(vectors: &Path, hierarchy: &Path, out: &Path, dataset: Option<&Path>) -> Result<()> {
    let table = load_vectors(vectors).with_context(|| format!("reading vectors {}", vectors.display()))?;
    let hierarchy =
        HypernymHierarchy::load(hierarchy).with_context(|| format!("reading hierarchy {}", hierarchy.display()))?;
    let dataset = dataset
        .map(|p| PlausibilityDataset::load(p).with_context(|| format!("reading dataset {}", p.display())))
        .transpose()?;
    let extra = dataset.as_ref().map(|d| d.words()).unwrap_or_default();
    let (lexicon, report) = Lexicon::build(&table, &hierarchy, extra)?;
    save_lexicon(&lexicon, out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "{} matrices of dimension {} written to {}; {} words had no vector",
        lexicon.len(),
        lexicon.dim(),
        out.display(),
        report.missing.len()
    );
    Ok(())
}

fn open_lexicon(path: &Path) -> Result<Lexicon> {
    load_lexicon(path).with_context(|| format!("reading lexicon {}", path.display()))
}

/// Loads the hierarchy and drops hypernyms the lexicon has no matrix for.
fn open_hierarchy(path: &Path, lexicon: &Lexicon) -> Result<HypernymHierarchy> {
    let full = HypernymHierarchy::load(path).with_context(|| format!("reading hierarchy {}", path.display()))?;
    let (pruned, dropped) = full.restrict_to(lexicon);
    if dropped > 0 {
        eprintln!("{dropped} hierarchy entries have no hypernym in the lexicon and were dropped");
    }
    Ok(pruned)
}

fn print_negation(word: &str, cfg: &NegationConfig, out: &convneg::Dmat, lexicon: &Lexicon) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "not {word}  [{} / {} / basis {} / {}]",
        cfg.negation,
        cfg.composition,
        cfg.basis_label(),
        cfg.context
    )?;
    for row in out.matrix().row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>9.5}")).collect();
        writeln!(stdout, "  {}", cells.join(" "))?;
    }
    let mut ranked: Vec<(&str, f64)> = lexicon
        .iter()
        .filter(|(w, _)| *w != word)
        .filter_map(|(w, m)| convneg::entailment::trace_similarity(out, m).ok().map(|t| (w, t)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    writeln!(stdout, "closest alternatives (trace similarity):")?;
    for (w, t) in ranked.iter().take(10) {
        writeln!(stdout, "  {t:.4}  {w}")?;
    }
    Ok(())
}
