//! Obfuscation benchmark.
//!
//! Generates synthetic corpora whose class signal hides behind disguised
//! vocabulary, trains the requested methods on a shared split, and compares
//! them on the obfuscated test side over repeated seeds. The repeat count
//! comes from the run configuration's `bench-seeds`.

pub mod corpus;
pub mod ops;

pub use corpus::{
    default_fillers, generate_corpus, SyntheticCorpus, SyntheticCorpusSpec, SyntheticDocument,
};
pub use ops::{obfuscate, obfuscate_with, standard_ops, Obfuscated, ObfuscationOp};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::eval::{compute_metrics, paired_t_test, MetricsReport};
use crate::models::Method;
use crate::pipeline::{assemble, load_run_stopwords, train_method_gbdt, train_shared};
use crate::rng::derive_seed;
use crate::text::{normalize_and_tokenize, NormalizedText};

/// Paired comparison of two methods over the benchmark repeats; `t` > 0
/// means `method_a` scored higher.
#[derive(Debug, Clone)]
pub struct MethodComparison {
    pub method_a: Method,
    pub method_b: Method,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub methods: Vec<Method>,
    /// Corpus seed per repeat.
    pub seeds: Vec<u64>,
    /// Indexed `[method][repeat]`, methods in requested order.
    pub reports: Vec<Vec<MetricsReport>>,
    /// Each later method against the one requested before it.
    pub comparisons: Vec<MethodComparison>,
}

impl BenchmarkResult {
    /// Macro F1 per repeat for one method.
    pub fn macro_f1(&self, method: usize) -> Vec<f64> {
        self.reports[method].iter().map(|r| r.macro_f1).collect()
    }

    pub fn mean_macro_f1(&self, method: usize) -> f64 {
        let scores = self.macro_f1(method);
        scores.iter().sum::<f64>() / scores.len() as f64
    }

    /// TSV comparison table: one row per method with per-repeat and mean
    /// macro F1, then one `compare` row per consecutive method pair with
    /// mean difference and the paired t-test.
    pub fn table(&self) -> String {
        let mut out = String::from("method");
        for i in 0..self.seeds.len() {
            out.push_str(&format!("\trun-{}", i + 1));
        }
        out.push_str("\tmean-macro-f1\n");
        for (m, method) in self.methods.iter().enumerate() {
            out.push_str(method.name());
            for report in &self.reports[m] {
                out.push_str(&format!("\t{:.6}", report.macro_f1));
            }
            out.push_str(&format!("\t{:.6}\n", self.mean_macro_f1(m)));
        }
        for c in &self.comparisons {
            out.push_str(&format!(
                "compare\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                c.method_a,
                c.method_b,
                c.mean_a - c.mean_b,
                c.t,
                c.p
            ));
        }
        out
    }
}

/// The spec for one benchmark repeat: same corpus shape, derived seed.
pub fn repeat_spec(spec: &SyntheticCorpusSpec, repeat: usize) -> SyntheticCorpusSpec {
    let mut out = spec.clone();
    out.seed = derive_seed(spec.seed, &format!("bench-corpus-{repeat}"));
    out
}

/// Runs the benchmark: per repeat, one corpus and one shared component pool
/// serve every requested method, so methods differ only in how they use the
/// pool. Deterministic for a fixed spec and configuration.
pub fn run_benchmark(
    methods: &[Method],
    spec: &SyntheticCorpusSpec,
    config: &RunConfig,
) -> Result<BenchmarkResult> {
    if methods.is_empty() {
        return Err(Error::config("no methods requested"));
    }
    spec.validate()?;
    config.validate()?;
    let stopwords = load_run_stopwords(config)?;
    let n_classes = spec.n_classes();

    let mut reports: Vec<Vec<MetricsReport>> = vec![Vec::new(); methods.len()];
    let mut seeds = Vec::with_capacity(config.bench_seeds);
    for repeat in 0..config.bench_seeds {
        let run_spec = repeat_spec(spec, repeat);
        seeds.push(run_spec.seed);
        let corpus = generate_corpus(&run_spec)?;

        let normalize = |docs: &[SyntheticDocument]| -> (Vec<NormalizedText>, Vec<usize>) {
            let texts =
                docs.iter().map(|d| normalize_and_tokenize(&d.text(), &stopwords)).collect();
            (texts, docs.iter().map(|d| d.class).collect())
        };
        let (train_texts, train_classes) = normalize(&corpus.train);
        let (test_texts, test_classes) = normalize(&corpus.test);

        let mut run_config = config.clone();
        run_config.seed = derive_seed(config.seed, &format!("bench-train-{repeat}"));
        let shared = train_shared(&train_texts, &train_classes, methods, &run_config)?;
        for (m, &method) in methods.iter().enumerate() {
            run_config.method = method;
            let mut components = assemble(&shared, method, n_classes)?;
            train_method_gbdt(&mut components, &train_texts, &train_classes, &run_config)?;
            let predicted: Vec<usize> = test_texts
                .iter()
                .map(|t| components.predict_class(t))
                .collect::<Result<_>>()?;
            reports[m].push(compute_metrics(&test_classes, &predicted, n_classes)?);
        }
    }

    let mut comparisons = Vec::new();
    if config.bench_seeds >= 2 {
        for earlier in 0..methods.len().saturating_sub(1) {
            let later = earlier + 1;
            let scores_a: Vec<f64> = reports[later].iter().map(|r| r.macro_f1).collect();
            let scores_b: Vec<f64> = reports[earlier].iter().map(|r| r.macro_f1).collect();
            let (t, p) = paired_t_test(&scores_a, &scores_b)?;
            comparisons.push(MethodComparison {
                method_a: methods[later],
                method_b: methods[earlier],
                mean_a: scores_a.iter().sum::<f64>() / scores_a.len() as f64,
                mean_b: scores_b.iter().sum::<f64>() / scores_b.len() as f64,
                t,
                p,
            });
        }
    }

    Ok(BenchmarkResult { methods: methods.to_vec(), seeds, reports, comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SyntheticCorpusSpec {
        SyntheticCorpusSpec {
            marker_lexicons: vec![
                vec!["wug".into(), "fep".into(), "daxy".into()],
                vec!["blick".into(), "tove".into(), "zorp".into()],
            ],
            fillers: vec![
                "river".into(),
                "stone".into(),
                "cloud".into(),
                "meadow".into(),
                "lantern".into(),
                "copper".into(),
                "violin".into(),
                "harbor".into(),
            ],
            doc_len_min: 3,
            doc_len_max: 6,
            train_per_class: 10,
            test_per_class: 6,
            obfuscation_rate: 0.8,
            seed: 9,
        }
    }

    fn tiny_config() -> RunConfig {
        let mut config = RunConfig::new(Method::Ws);
        config.dim = 8;
        config.ngram_min = 2;
        config.ngram_max = 3;
        config.bench_seeds = 2;
        config.recurrent.hidden = 8;
        config.recurrent.layers = 1;
        config.recurrent.max_epochs = 4;
        config.composer.lstm_hidden = 8;
        config.composer.lstm_layers = 1;
        config.composer.hidden_dim = 8;
        config.composer.max_epochs = 2;
        config.gbdt.rounds = 10;
        config.gbdt.max_depth = 3;
        config.gbdt.min_leaf = 2;
        config
    }

    #[test]
    fn benchmark_is_deterministic_and_one_row_per_method() {
        let methods = [Method::Ws, Method::WsCng];
        let spec = tiny_spec();
        let config = tiny_config();
        let a = run_benchmark(&methods, &spec, &config).unwrap();
        let b = run_benchmark(&methods, &spec, &config).unwrap();
        assert_eq!(a.table(), b.table());

        assert_eq!(a.reports.len(), 2);
        assert!(a.reports.iter().all(|r| r.len() == 2));
        assert_eq!(a.comparisons.len(), 1);
        let rows: Vec<String> =
            a.table().lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
        assert_eq!(rows, vec!["method", "ws", "ws-cng", "compare"]);
    }

    #[test]
    fn comparison_pairs_follow_request_order() {
        let methods = [Method::Ws, Method::WsCng];
        let result = run_benchmark(&methods, &tiny_spec(), &tiny_config()).unwrap();
        let c = &result.comparisons[0];
        assert_eq!(c.method_a, Method::WsCng);
        assert_eq!(c.method_b, Method::Ws);
        assert!(c.p >= 0.0 && c.p <= 1.0);
    }

    #[test]
    fn empty_method_list_is_rejected() {
        assert!(run_benchmark(&[], &tiny_spec(), &tiny_config()).is_err());
    }
}
