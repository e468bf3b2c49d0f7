//! Weights of evidence against a logistic baseline on the same binary
//! hypothesis, compared by ROC points.
//!
//! Run with `cargo run --example roc_comparison`.

use std::path::Path;

use evidence_kit::data::{generate_synthetic, SyntheticSpec};
use evidence_kit::eval::{roc_csv_compare, roc_points, DEFAULT_ROC_THRESHOLDS};
use evidence_kit::pipeline::{binary_labels, prior_odds, train_logistic, train_woe, GroupOptions, WoeScorer};
use evidence_kit::search::{SearchConfig, SearchVersion};
use evidence_kit::woe::{read_memberships_path, variable_of};
use evidence_kit::Result;

pub fn main() -> Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let train = generate_synthetic(&SyntheticSpec::from_json_path(&fixtures.join("woe_train.json"))?)?;
    let test = generate_synthetic(&SyntheticSpec::from_json_path(&fixtures.join("woe_test.json"))?)?;
    let memberships = read_memberships_path(&fixtures.join("memberships.csv"))?;

    let options = GroupOptions {
        pairs: true,
        ..GroupOptions::default()
    };
    let training = train_woe(&train, &memberships, "surgical", &options)?;
    for w in training.weights.iter().filter(|w| !w.evidence_key.contains('&')) {
        println!("{:<20} W = {:+.3} at alpha {:.3}", w.evidence_key, w.weight, w.alpha);
    }
    let odds = prior_odds(&binary_labels(&train, "surgical")?)?;
    let labels = binary_labels(&test, "surgical")?;

    let mut series = Vec::new();
    for version in [SearchVersion::V1, SearchVersion::V2] {
        let cfg = SearchConfig {
            version,
            ..SearchConfig::default()
        };
        let scorer = WoeScorer::new(&training.weights, &memberships, &train, &cfg, odds)?;
        let mut scored = Vec::new();
        for (case, label) in test.iter().zip(&labels) {
            if let Some(positive) = label {
                scored.push((scorer.score(case)?.0.probability, *positive));
            }
        }
        series.push((format!("woe-{version:?}").to_lowercase(), roc_points(&scored, &DEFAULT_ROC_THRESHOLDS)?));
    }

    let mut variables: Vec<String> = memberships.keys().map(|k| variable_of(k).to_string()).collect();
    variables.dedup();
    let (model, _) = train_logistic(&train, &variables, "surgical", 0.95)?;
    let scored: Vec<(f64, bool)> = test
        .iter()
        .zip(&labels)
        .filter_map(|(case, label)| Some((model.predict(|v| case.value(v)).ok()?, (*label)?)))
        .collect();
    println!("logistic baseline keeps {:?} and scores {} complete test cases", model.names, scored.len());
    series.push(("logistic".to_string(), roc_points(&scored, &DEFAULT_ROC_THRESHOLDS)?));

    let borrowed: Vec<(&str, &[_])> = series.iter().map(|(n, p)| (n.as_str(), p.as_slice())).collect();
    print!("{}", roc_csv_compare(&borrowed));
    Ok(())
}
