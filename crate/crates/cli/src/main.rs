//! `spamsift`: corpus → features → CHAID tree → rules and metrics.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spamsift_core::chaid::{extract_rules, grow_tree, predict, ChaidTree, Prediction};
use spamsift_core::config::AppConfig;
use spamsift_core::corpus::extract_corpus;
use spamsift_core::dataset::Dataset;
use spamsift_core::features::PageDocument;
use spamsift_core::metrics::cross_validate;
use spamsift_core::synth::{generate_synthetic, GeneratorSpec};
use spamsift_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_MODEL: u8 = 3;

#[derive(Parser)]
#[command(name = "spamsift", version, about = "Web spam feature extraction and CHAID pattern mining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract one feature row per manifest entry of a page corpus.
    Extract {
        /// Directory holding the pages and manifest.csv.
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Output dataset CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grow a CHAID tree on the labeled rows of a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Output model JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a single page or every row of a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// HTML file to classify (requires --url).
        #[arg(long, requires = "url", conflicts_with = "data")]
        page: Option<PathBuf>,
        /// Address the page was fetched from.
        #[arg(long, requires = "page")]
        url: Option<String>,
        /// Dataset CSV to classify.
        #[arg(long, required_unless_present = "page")]
        data: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Print the tree's rules, most spam-dense first.
    Rules {
        #[arg(long)]
        model: PathBuf,
        /// Also write the tree in Graphviz DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// k-fold cross-validation with precision, recall and F-measure.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Fold seed; defaults to the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the per-fold report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labeled synthetic dataset from a generator spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// JSON configuration file.
    #[arg(long = "config", env = "SPAMSIFT_CONFIG")]
    path: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<AppConfig, Failure> {
        match &self.path {
            Some(p) => AppConfig::load(p).map_err(|e| Failure::input(at(p, e))),
            None => Ok(AppConfig::default()),
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn model(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_MODEL,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Prefixes `path` unless the error already names it.
fn at(path: &Path, e: Error) -> String {
    match e {
        Error::Io { .. } => e.to_string(),
        _ => format!("{}: {e}", path.display()),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Extract { corpus, config, out } => extract(&corpus, &config, &out),
        Command::Train { data, config, out } => train(&data, &config, &out),
        Command::Predict { model, page, url, data, config } => {
            predict_cmd(&model, page.as_deref().zip(url.as_deref()), data.as_deref(), &config)
        }
        Command::Rules { model, dot } => rules(&model, dot.as_deref()),
        Command::Evaluate { data, config, folds, seed, out } => {
            evaluate(&data, &config, folds, seed, out.as_deref())
        }
        Command::Synth { spec, out, seed } => synth(&spec, &out, seed),
    }
}

fn load_data(path: &Path) -> Result<Dataset, Failure> {
    Dataset::load_csv(path).map_err(|e| Failure::input(at(path, e)))
}

fn load_model(path: &Path) -> Result<ChaidTree, Failure> {
    ChaidTree::load(path).map_err(|e| Failure::model(at(path, e)))
}

fn labeled(data: Dataset) -> Result<Dataset, Failure> {
    let dropped = data.label_counts().2;
    let data = data.labeled();
    if dropped > 0 {
        eprintln!("note: ignoring {dropped} unlabeled rows");
    }
    if data.is_empty() {
        return Err(Failure::input("dataset has no labeled rows"));
    }
    Ok(data)
}

fn write(path: &Path, contents: &str) -> CmdResult {
    std::fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn extract(corpus: &Path, config: &ConfigArg, out: &Path) -> CmdResult {
    let extractor = config.load()?.extractor().map_err(|e| Failure::input(e.to_string()))?;
    let result = extract_corpus(corpus, &extractor)
        .map_err(|e| Failure::input(at(corpus, e)))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    result.dataset.save_csv(out).map_err(|e| Failure::input(e.to_string()))?;
    let (spam, nonspam, unknown) = result.dataset.label_counts();
    emit(&format!(
        "extracted {} records (spam {spam}, nonspam {nonspam}, unknown {unknown}) with {} warnings\n",
        result.dataset.len(),
        result.warnings.len()
    ));
    Ok(())
}

fn train(data: &Path, config: &ConfigArg, out: &Path) -> CmdResult {
    let config = config.load()?;
    let data = labeled(load_data(data)?)?;
    let tree = grow_tree(&data, &config.chaid).map_err(|e| Failure::input(e.to_string()))?;
    tree.save(out).map_err(|e| Failure::input(e.to_string()))?;
    emit(&format!(
        "trained on {} records: {} nodes, {} leaves, depth {}\n",
        data.len(),
        tree.nodes().len(),
        tree.leaves().count(),
        tree.depth()
    ));
    Ok(())
}

fn describe(p: &Prediction) -> String {
    format!(
        "{} {:.4} leaf {}{}",
        p.label.as_str(),
        p.spam_probability,
        p.leaf,
        if p.fallback { " (fallback)" } else { "" }
    )
}

fn predict_cmd(
    model: &Path,
    page: Option<(&Path, &str)>,
    data: Option<&Path>,
    config: &ConfigArg,
) -> CmdResult {
    let tree = load_model(model)?;
    if let Some((file, url)) = page {
        let extractor = config.load()?.extractor().map_err(|e| Failure::input(e.to_string()))?;
        let bytes = std::fs::read(file).map_err(|e| Failure::input(format!("{}: {e}", file.display())))?;
        let doc = PageDocument {
            url: url.to_string(),
            html: String::from_utf8_lossy(&bytes).into_owned(),
            fetched_from: file.to_path_buf(),
        };
        let record = extractor.extract(&doc).map_err(|e| Failure::input(e.to_string()))?;
        emit(&format!("{}\n", describe(&predict(&tree, &record))));
    } else if let Some(path) = data {
        let mut out = String::from("url,prediction,spam_probability,leaf,fallback\n");
        for r in load_data(path)?.records() {
            let p = predict(&tree, r);
            out.push_str(&format!(
                "{},{},{:.6},{},{}\n",
                r.url,
                p.label.as_str(),
                p.spam_probability,
                p.leaf,
                p.fallback
            ));
        }
        emit(&out);
    }
    Ok(())
}

fn rules(model: &Path, dot: Option<&Path>) -> CmdResult {
    let tree = load_model(model)?;
    let text: String = extract_rules(&tree).iter().map(|r| format!("{r}\n")).collect();
    emit(&text);
    if let Some(path) = dot {
        write(path, &tree.to_dot())?;
    }
    Ok(())
}

fn evaluate(
    data: &Path,
    config: &ConfigArg,
    folds: usize,
    seed: Option<u64>,
    out: Option<&Path>,
) -> CmdResult {
    let config = config.load()?;
    let data = labeled(load_data(data)?)?;
    let seed = seed.unwrap_or(config.seed);
    let cv = cross_validate(&data, &config.chaid, folds, seed).map_err(|e| Failure::input(e.to_string()))?;
    match out {
        Some(path) => write(path, &cv.to_csv())?,
        None => emit(&cv.to_csv()),
    }
    emit(&format!(
        "{folds}-fold: precision {:.4} ± {:.4}, recall {:.4} ± {:.4}, F {:.4} ± {:.4}\n",
        cv.precision.mean, cv.precision.stdev, cv.recall.mean, cv.recall.stdev, cv.f_measure.mean, cv.f_measure.stdev
    ));
    Ok(())
}

fn synth(spec: &Path, out: &Path, seed: Option<u64>) -> CmdResult {
    let spec_doc = GeneratorSpec::load(spec).map_err(|e| Failure::input(at(spec, e)))?;
    let data = generate_synthetic(&spec_doc, seed.unwrap_or(spec_doc.seed))
        .map_err(|e| Failure::input(e.to_string()))?;
    data.save_csv(out).map_err(|e| Failure::input(e.to_string()))?;
    let (spam, nonspam, _) = data.label_counts();
    emit(&format!("generated {} records (spam {spam}, nonspam {nonspam})\n", data.len()));
    Ok(())
}
