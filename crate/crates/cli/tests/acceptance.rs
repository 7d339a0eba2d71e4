//! Criterion 10 of the acceptance gate: cross-validation through the CLI is
//! byte-reproducible for a fixed seed.

use std::process::Command;
use std::time::Instant;

use oovf::bench::{default_fillers, generate_corpus, SyntheticCorpusSpec};
use oovf::dataset::save_dataset;

#[test]
fn criterion_10_cli_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticCorpusSpec {
        marker_lexicons: vec![
            ["wuggle", "blicket", "daxen", "fepple"].map(String::from).to_vec(),
            ["quorv", "splen", "tridge", "glomby"].map(String::from).to_vec(),
        ],
        fillers: default_fillers().into_iter().take(30).collect(),
        doc_len_min: 4,
        doc_len_max: 8,
        train_per_class: 30,
        test_per_class: 1,
        obfuscation_rate: 0.0,
        seed: 1010,
    };
    let corpus = generate_corpus(&spec).unwrap();
    let data = dir.path().join("docs.tsv");
    save_dataset(&data, &corpus.train_records()).unwrap();

    let config_path = dir.path().join("run.conf");
    std::fs::write(
        &config_path,
        concat!(
            "method = ws-cng\n",
            "seed = 11\n",
            "folds = 3\n",
            "dim = 8\n",
            "ngram-min = 2\n",
            "ngram-max = 3\n",
            "ngram-scope = token\n",
            "rnn-hidden = 8\n",
            "rnn-layers = 1\n",
            "rnn-max-epochs = 4\n",
            "rnn-patience = 2\n",
            "gbdt-rounds = 10\n",
            "gbdt-max-depth = 3\n",
            "gbdt-min-leaf = 2\n",
        ),
    )
    .unwrap();

    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_oovf"))
            .arg("cv")
            .arg("--data")
            .arg(&data)
            .arg("--config")
            .arg(&config_path)
            .output()
            .unwrap();
        assert!(out.status.success(), "cv failed: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run();
    let second = run();
    assert!(!first.is_empty(), "cv printed nothing");
    assert_eq!(first, second, "cv output changed between identical runs");
    println!("criterion 10 (cli-determinism): PASS ({:.1}s)", start.elapsed().as_secs_f64());
}
