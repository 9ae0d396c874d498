//! Frozen regression facts for the bundled corpus: path and verdict
//! counts, and evidence values checked against independently computed
//! references (50-digit numeric integration for the inexact ones).
//!
//! Counts pin the explorer's behavior; reference values pin the measure
//! lanes. A legitimate semantics change must update the table knowingly.

mod common;

use common::{corpus, corpus_dir, FROZEN};
use probsym::pipeline::{run, RunConfig};

#[test]
fn corpus_counts_and_evidence_match_the_frozen_table() {
    for frozen in FROZEN {
        if let Err(drift) = common::check_entry(frozen) {
            panic!("{drift}");
        }
    }
}

#[test]
fn the_frozen_table_covers_the_whole_corpus() {
    let mut on_disk: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("entry").file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".prob"))
        .collect();
    on_disk.sort();
    let mut in_table: Vec<String> = FROZEN.iter().map(|f| f.file.to_string()).collect();
    in_table.sort();
    assert_eq!(on_disk, in_table, "corpus files and frozen table diverged");
}

/// Known posteriors for queried corpus runs, all exact except the last.
#[test]
fn corpus_posteriors_match_hand_computed_values() {
    let cases: &[(&str, &str, Option<&str>, f64, f64)] = &[
        // P(both heads | at least one heads) = 1/3.
        ("two_coins.prob", "first = 1 && second = 1", Some("1/3"), 1.0 / 3.0, 1e-15),
        // P(first heads | at least one heads) = 2/3.
        ("two_coins.prob", "first = 1", Some("2/3"), 2.0 / 3.0, 1e-15),
        // P(unknown fish is a piranha | drew a piranha) = 2/3.
        ("piranha.prob", "unknown_is_piranha = 1", Some("2/3"), 2.0 / 3.0, 1e-15),
        // P(aunt did it | gun) = 291/431.
        ("murder_mystery.prob", "aunt = 1", Some("291/431"), 291.0 / 431.0, 1e-15),
        // P(wide component | x <= 1) = 3/17.
        ("mixture.prob", "component = 1", Some("3/17"), 3.0 / 17.0, 1e-15),
        // P(even face | face <= 6) = 1/2.
        ("die_cond.prob", "even = 1", Some("1/2"), 0.5, 1e-15),
        // P(bias >= 1/2 | two heads) = 7/8, by Monte Carlo.
        ("coin_bias.prob", "fair_or_better = 1", None, 0.875, 0.02),
    ];
    for (file, query, exact, value, tolerance) in cases {
        let mut config = RunConfig::new(corpus(file));
        config.query = Some(query.to_string());
        let report = run(&config).unwrap();
        let posterior = report
            .summary
            .posterior
            .as_ref()
            .unwrap_or_else(|| panic!("{file}: no posterior"));
        assert_eq!(posterior.exact.as_deref(), *exact, "{file} [{query}]");
        let got: f64 = posterior.value.parse().unwrap();
        assert!(
            (got - value).abs() <= *tolerance,
            "{file} [{query}]: posterior {got} vs {value}"
        );
    }
}
