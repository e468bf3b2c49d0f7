//! Synthetic training and test cases, Method 1 masses, a diagnosis report
//! for one case and S/NONS/F tallies for each estimator.
//!
//! Run with `cargo run --example diagnosis_pipeline`.

use std::path::Path;

use evidence_kit::data::{generate_synthetic, SyntheticSpec};
use evidence_kit::eval::{render_tally_table, ReportConfig, TallyColumn, DEFAULT_REPORT_THRESHOLD};
use evidence_kit::mass::{EstimateConfig, Method, Remainder};
use evidence_kit::pipeline::{diagnose_case, evaluate_ds, train_masses, Variant};
use evidence_kit::Result;

pub fn main() -> Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let train_spec = SyntheticSpec::from_json_path(&fixtures.join("synth_train.json"))?;
    let test_spec = SyntheticSpec::from_json_path(&fixtures.join("synth_test.json"))?;
    let frame = train_spec.frame()?;
    let disc = train_spec.discretization()?;
    let train = generate_synthetic(&train_spec)?;
    let test = generate_synthetic(&test_spec)?;
    println!("{} training and {} test cases over {}", train.len(), test.len(), frame.labels().join(", "));

    let report = ReportConfig::new(DEFAULT_REPORT_THRESHOLD)?;
    let trained = train_masses(&train, &disc, &frame, &EstimateConfig::new(Method::Consonant))?;
    println!("{} symptom states have mass functions", trained.masses.len());
    let first = &test[0];
    print!("{}", diagnose_case(first, &disc, &trained.masses, &frame, &report)?.render());
    println!("recorded outcome: {}\n", first.outcome.as_deref().unwrap_or("?"));

    let mut columns = Vec::new();
    for method in [Method::Consonant, Method::SimpleSupport(Remainder::Complement), Method::SimpleSupport(Remainder::Theta)] {
        for token in ["cd3", "cd5"] {
            let variant = Variant::parse(token, &[])?;
            let e = evaluate_ds(&train, &test, &disc, &frame, &EstimateConfig::new(method), &variant, &report)?;
            columns.push(TallyColumn {
                method: method.token().to_string(),
                variant: token.to_string(),
                tally: e.tally,
            });
        }
    }
    print!("{}", render_tally_table(&columns));
    Ok(())
}
