//! Command-line front end.
//!
//! Subcommands cover the full workflow: train a method and persist it,
//! evaluate on a held-out split, cross-validate with optional paired
//! significance against a baseline container, predict from standard input,
//! inspect composed vectors and their neighbors, run the obfuscation
//! benchmark, and report dictionary-OOV statistics.
//!
//! Log lines go to standard error; machine-readable results (TSV) go to
//! standard output. Exit codes: 0 success, 1 usage or configuration error,
//! 2 data/format error, 3 training error.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use oovf::bench::{
    default_fillers, generate_corpus, repeat_spec, run_benchmark, SyntheticCorpusSpec,
};
use oovf::config::RunConfig;
use oovf::dataset::{load_dataset, save_dataset, DatasetFile};
use oovf::error::{Error, Result};
use oovf::eval::{compute_metrics, metrics_tsv, paired_t_test, stratified_kfold};
use oovf::models::{compose_in_context, Method};
use oovf::pipeline::{cross_validate, evaluate_split, train_method, TrainedMethod};
use oovf::rng::derive_seed;
use oovf::stats::dictionary_oov_stats;
use oovf::text::parse_stopwords;

#[derive(Parser)]
#[command(
    name = "oovf",
    version,
    about = "Abuse-robust text classification with composed embeddings for obfuscated words"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a method on a dataset and write a model container.
    Train(TrainArgs),
    /// Train on a stratified split and report held-out metrics.
    Evaluate(EvaluateArgs),
    /// Stratified k-fold cross-validation, optionally paired against a
    /// baseline container.
    Cv(CvArgs),
    /// Read texts from standard input, write label and distribution per line.
    Predict(PredictArgs),
    /// Print composed embedding vectors for words.
    Compose(ComposeArgs),
    /// Print nearest vocabulary neighbors for words.
    Neighbors(NeighborsArgs),
    /// Run the obfuscation benchmark on synthetic corpora.
    Bench(BenchArgs),
    /// Report unique tokens absent from a wordlist, total and per class.
    Stats(StatsArgs),
}

/// Configuration layering, weakest first: config file, `--set` pairs, then
/// named flags.
#[derive(Args)]
struct ConfigOpts {
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set gbdt-rounds=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Method tag: hs, char-hs, hs-cng, augmented-hs-cng, context-hs-cng,
    /// ws, char-ws, ws-cng, augmented-ws-cng, context-ws-cng.
    #[arg(long)]
    method: Option<String>,
    /// Master seed; every run with the same seed is bit-reproducible.
    #[arg(long)]
    seed: Option<u64>,
    /// Word embedding dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Fold count for cross-validation.
    #[arg(long)]
    folds: Option<usize>,
    /// Train share of the evaluate split.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Pretrained embedding text file (word then values, space-separated).
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Stopword file, one word per line; defaults to the built-in list.
    #[arg(long, value_name = "FILE")]
    stopwords: Option<PathBuf>,
    /// Fold workers. Accepted for compatibility; fold seeds are always
    /// seed+fold, so results do not depend on this value.
    #[arg(long)]
    jobs: Option<usize>,
}

impl ConfigOpts {
    /// Builds the run configuration. Returns whether a method was named
    /// anywhere; commands that train require one.
    fn build(&self) -> Result<(RunConfig, bool)> {
        let mut config = RunConfig::new(Method::Hs);
        let mut method_seen = false;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            config.apply_text(&text)?;
            method_seen |= text
                .lines()
                .filter_map(|l| l.split('#').next())
                .filter_map(|l| l.split('=').next())
                .any(|key| key.trim() == "method");
        }
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::config(format!("--set needs KEY=VALUE, got '{pair}'")))?;
            config.apply(key.trim(), value.trim())?;
            method_seen |= key.trim() == "method";
        }
        if let Some(method) = &self.method {
            config.apply("method", method)?;
            method_seen = true;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(dim) = self.dim {
            config.dim = dim;
        }
        if let Some(folds) = self.folds {
            config.folds = folds;
        }
        if let Some(fraction) = self.train_fraction {
            config.train_fraction = fraction;
        }
        if let Some(path) = &self.embeddings {
            config.embeddings = Some(path.clone());
        }
        if let Some(path) = &self.stopwords {
            config.stopwords = Some(path.clone());
        }
        config.validate()?;
        Ok((config, method_seen))
    }

    fn build_with_method(&self) -> Result<RunConfig> {
        let (config, method_seen) = self.build()?;
        if !method_seen {
            return Err(Error::config("no method given; pass --method or set it in the config"));
        }
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset TSV: id TAB label TAB text per line.
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Output model container path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigOpts,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Also write the trained model container here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigOpts,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Baseline model container; evaluated on the same folds and compared
    /// with a paired t-test.
    #[arg(long, value_name = "FILE")]
    baseline: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigOpts,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model container.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Words to compose.
    #[arg(required = true, value_name = "WORD")]
    words: Vec<String>,
}

#[derive(Args)]
struct NeighborsArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Neighbors per word.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Query words; unseen words are composed first when the model can.
    #[arg(required = true, value_name = "WORD")]
    words: Vec<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// Marker lexicon file: one class per line, words space-separated.
    #[arg(long, value_name = "FILE")]
    markers: PathBuf,
    /// Filler lexicon file, one word per line; defaults to the shipped list.
    #[arg(long, value_name = "FILE")]
    fillers: Option<PathBuf>,
    /// Comma-separated method tags to compare, in order.
    #[arg(long, default_value = "ws,ws-cng,augmented-ws-cng")]
    methods: String,
    /// Share of test-split marker tokens to obfuscate.
    #[arg(long, default_value_t = 0.8)]
    rate: f64,
    #[arg(long, default_value_t = 80)]
    train_per_class: usize,
    #[arg(long, default_value_t = 40)]
    test_per_class: usize,
    #[arg(long, default_value_t = 6)]
    doc_len_min: usize,
    #[arg(long, default_value_t = 12)]
    doc_len_max: usize,
    /// Repeats with derived seeds; overrides the `bench-seeds` config key.
    #[arg(long)]
    bench_seeds: Option<usize>,
    /// Write each repeat's generated corpora into this directory as
    /// run-N-train.tsv / run-N-test.tsv.
    #[arg(long, value_name = "DIR")]
    dump_corpus: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigOpts,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Wordlist, one word per line.
    #[arg(long, value_name = "FILE")]
    wordlist: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(match err {
            Error::InvalidConfig(_) => 1,
            Error::Training(_) => 3,
            _ => 2,
        });
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Compose(args) => cmd_compose(args),
        Command::Neighbors(args) => cmd_neighbors(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

/// Texts, class ids, and label names out of a dataset file.
fn dataset_views(data: &DatasetFile) -> (Vec<&str>, Vec<usize>, &[String]) {
    let texts: Vec<&str> = data.records.iter().map(|r| r.text.as_str()).collect();
    (texts, data.class_ids(), &data.labels)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = args.config.build_with_method()?;
    let data = load_dataset(&args.data)?;
    let (texts, classes, labels) = dataset_views(&data);
    eprintln!(
        "training {} on {} documents, {} classes, seed {}",
        config.method,
        texts.len(),
        labels.len(),
        config.seed
    );
    let model = train_method(&texts, &classes, labels, &config)?;
    model.save(&args.out)?;
    eprintln!("container written to {}", args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let config = args.config.build_with_method()?;
    let data = load_dataset(&args.data)?;
    let (texts, classes, labels) = dataset_views(&data);
    eprintln!(
        "evaluating {} with a {:.0}:{:.0} split, seed {}",
        config.method,
        config.train_fraction * 100.0,
        (1.0 - config.train_fraction) * 100.0,
        config.seed
    );
    let evaluation = evaluate_split(&texts, &classes, labels, &config)?;
    print!("{}", metrics_tsv(config.method.name(), labels, &evaluation.report));
    if let Some(out) = &args.out {
        evaluation.model.save(out)?;
        eprintln!("container written to {}", out.display());
    }
    Ok(())
}

fn cmd_cv(args: CvArgs) -> Result<()> {
    let config = args.config.build_with_method()?;
    let data = load_dataset(&args.data)?;
    let (texts, classes, labels) = dataset_views(&data);
    eprintln!(
        "cross-validating {} with {} folds, seed {}",
        config.method, config.folds, config.seed
    );
    let reports = cross_validate(&texts, &classes, labels, &config)?;

    println!("fold\tmethod\tmacro-precision\tmacro-recall\tmacro-f1");
    let mut scores = Vec::with_capacity(reports.len());
    for (fold, report) in reports.iter().enumerate() {
        println!(
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            fold + 1,
            config.method,
            report.macro_precision,
            report.macro_recall,
            report.macro_f1
        );
        scores.push(report.macro_f1);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!(
        "mean\t{}\t{:.6}\t{:.6}\t{:.6}",
        config.method,
        mean(&reports.iter().map(|r| r.macro_precision).collect::<Vec<_>>()),
        mean(&reports.iter().map(|r| r.macro_recall).collect::<Vec<_>>()),
        mean(&scores)
    );

    if let Some(path) = &args.baseline {
        let baseline = TrainedMethod::load(path)?;
        let tag = format!("baseline-{}", baseline.config.method);
        let baseline_scores =
            baseline_fold_scores(&baseline, &texts, &classes, labels, &config)?;
        for (fold, score) in baseline_scores.iter().enumerate() {
            println!("{}\t{}\t-\t-\t{:.6}", fold + 1, tag, score);
        }
        println!("mean\t{}\t-\t-\t{:.6}", tag, mean(&baseline_scores));
        let (t, p) = paired_t_test(&scores, &baseline_scores)?;
        println!("ttest\t{}\t{}\t{:.6}\t{:.6}", config.method, tag, t, p);
    }
    Ok(())
}

/// Macro F1 of an already-trained model on each fold's evaluation side,
/// using the same fold plan as `cross_validate`.
fn baseline_fold_scores(
    baseline: &TrainedMethod,
    texts: &[&str],
    classes: &[usize],
    labels: &[String],
    config: &RunConfig,
) -> Result<Vec<f64>> {
    let index_of: Vec<usize> = baseline_label_map(&baseline.labels, labels)?;
    let plan = stratified_kfold(classes, config.folds, derive_seed(config.seed, "cv"))?;
    let mut scores = Vec::with_capacity(plan.folds.len());
    for fold in &plan.folds {
        let mut predictions = Vec::with_capacity(fold.len());
        for &i in fold {
            predictions.push(index_of[baseline.predict_class(texts[i])?]);
        }
        let gold: Vec<usize> = fold.iter().map(|&i| classes[i]).collect();
        scores.push(compute_metrics(&gold, &predictions, labels.len())?.macro_f1);
    }
    Ok(scores)
}

/// Maps baseline class indices onto the dataset's label order.
fn baseline_label_map(baseline_labels: &[String], labels: &[String]) -> Result<Vec<usize>> {
    baseline_labels
        .iter()
        .map(|name| {
            labels.iter().position(|l| l == name).ok_or_else(|| {
                Error::input(format!("baseline label '{name}' is not in the dataset"))
            })
        })
        .collect()
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = TrainedMethod::load(&args.model)?;
    eprintln!(
        "predicting with {} over {} labels",
        model.config.method,
        model.labels.len()
    );
    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        let line = line.map_err(Error::Io)?;
        let probabilities = model.predict_text(&line)?;
        // First maximum wins ties, matching the model's own argmax.
        let mut best = 0;
        for (i, p) in probabilities.iter().enumerate().skip(1) {
            if *p > probabilities[best] {
                best = i;
            }
        }
        let mut out = model.labels[best].clone();
        for p in &probabilities {
            out.push_str(&format!("\t{p:.6}"));
        }
        println!("{out}");
    }
    Ok(())
}

fn cmd_compose(args: ComposeArgs) -> Result<()> {
    let model = TrainedMethod::load(&args.model)?;
    let components = &model.components;
    let composer = components
        .composer
        .as_ref()
        .ok_or_else(|| Error::input(format!("{} has no composition model", model.config.method)))?;
    for word in &args.words {
        let word = word.to_lowercase();
        let vector = match &components.encoder {
            Some(encoder) => compose_in_context(composer, encoder, &[word.clone()], 0)?,
            None => composer.compose_word(&word)?,
        };
        let mut out = word.clone();
        for v in vector {
            out.push_str(&format!(" {v:.6}"));
        }
        println!("{out}");
    }
    Ok(())
}

fn cmd_neighbors(args: NeighborsArgs) -> Result<()> {
    let model = TrainedMethod::load(&args.model)?;
    let components = &model.components;
    let table = components
        .table
        .as_ref()
        .ok_or_else(|| Error::input(format!("{} has no embedding table", model.config.method)))?;
    let vocab = &components.vocab;
    for word in &args.words {
        let word = word.to_lowercase();
        let (query, exclude) = if vocab.contains(&word) {
            let index = vocab.encode(&word);
            (table.row(index).to_vec(), Some(index))
        } else {
            let composer = components.composer.as_ref().ok_or_else(|| {
                Error::input(format!(
                    "'{word}' is outside the vocabulary and {} has no composition model",
                    model.config.method
                ))
            })?;
            let vector = match &components.encoder {
                Some(encoder) => compose_in_context(composer, encoder, &[word.clone()], 0)?,
                None => composer.compose_word(&word)?,
            };
            (vector, None)
        };
        for (neighbor, cosine) in table.nearest_neighbors(&query, vocab, args.k, exclude)? {
            println!("{word}\t{neighbor}\t{cosine:.6}");
        }
    }
    Ok(())
}

/// One lexicon per line, words whitespace-separated; # starts a comment.
fn parse_marker_lexicons(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path)?;
    let lexicons: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    if lexicons.is_empty() {
        return Err(Error::format(None, "marker file has no lexicons"));
    }
    Ok(lexicons)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let (mut config, _) = args.config.build()?;
    if let Some(n) = args.bench_seeds {
        config.bench_seeds = n;
    }
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|tag| tag.trim().parse())
        .collect::<Result<_>>()?;
    let fillers = match &args.fillers {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect()
        }
        None => default_fillers(),
    };
    let spec = SyntheticCorpusSpec {
        marker_lexicons: parse_marker_lexicons(&args.markers)?,
        fillers,
        doc_len_min: args.doc_len_min,
        doc_len_max: args.doc_len_max,
        train_per_class: args.train_per_class,
        test_per_class: args.test_per_class,
        obfuscation_rate: args.rate,
        seed: config.seed,
    };
    eprintln!(
        "benchmark: {} methods, {} classes, rate {}, {} repeats",
        methods.len(),
        spec.n_classes(),
        spec.obfuscation_rate,
        config.bench_seeds
    );
    let result = run_benchmark(&methods, &spec, &config)?;
    print!("{}", result.table());
    if let Some(dir) = &args.dump_corpus {
        std::fs::create_dir_all(dir)?;
        for repeat in 0..config.bench_seeds {
            let corpus = generate_corpus(&repeat_spec(&spec, repeat))?;
            let train_path = dir.join(format!("run-{}-train.tsv", repeat + 1));
            let test_path = dir.join(format!("run-{}-test.tsv", repeat + 1));
            save_dataset(&train_path, &corpus.train_records())?;
            save_dataset(&test_path, &corpus.test_records())?;
        }
        eprintln!("corpora written to {}", dir.display());
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let data = load_dataset(&args.data)?;
    let wordlist: BTreeSet<String> = parse_stopwords(&std::fs::read_to_string(&args.wordlist)?);
    let stats = dictionary_oov_stats(&data, &wordlist);
    println!("label\ttotal-unique\tabsent-unique\tfraction");
    println!(
        "all\t{}\t{}\t{:.6}",
        stats.total_unique, stats.absent_unique, stats.fraction
    );
    for class in &stats.per_class {
        println!(
            "{}\t{}\t{}\t{:.6}",
            class.label, class.total_unique, class.absent_unique, class.fraction
        );
    }
    Ok(())
}
