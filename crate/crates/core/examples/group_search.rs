//! Ranking candidate symptom groups and picking a non-redundant subset,
//! plus correlation-based variable reduction.
//!
//! Run with `cargo run --example group_search`.

use std::collections::BTreeSet;

use evidence_kit::search::{
    chi_square_2way, rank_groups, reduce_variables, select_v1, select_v2, CorrelationMatrix, OracleCase, Reduction,
    SearchConfig, SymptomGroup, TrainingOracle,
};
use evidence_kit::Result;

fn case(evidence: &[&str]) -> OracleCase {
    OracleCase {
        evidence: evidence.iter().map(|s| s.to_string()).collect(),
        observed: ["pulse", "pain", "reflux"].iter().map(|s| s.to_string()).collect(),
    }
}

pub fn main() -> Result<()> {
    let t = chi_square_2way([[10, 20], [20, 10]])?;
    println!("chi-square {:.3} (p = {:.4})", t.statistic, t.p_value);

    let groups = vec![
        SymptomGroup::new(["pulse=high"], 40, 30)?,
        SymptomGroup::new(["pain=severe"], 35, 28)?,
        SymptomGroup::new(["pulse=high", "pain=severe"], 20, 19)?,
        SymptomGroup::new(["reflux=present"], 12, 8)?,
    ];
    let cfg = SearchConfig::default();
    for g in rank_groups(&groups, &cfg) {
        println!("{:<24} score {:.3} (reliability {:.3}, specificity {:.3})", g.group.key(), g.score, g.reliability, g.specificity);
    }

    // pulse and pain co-occur far more than chance in these training cases
    let mut training = Vec::new();
    training.extend((0..30).map(|_| case(&["pulse=high", "pain=severe"])));
    training.extend((0..30).map(|_| case(&[])));
    training.extend((0..5).map(|_| case(&["pulse=high", "reflux=present"])));
    training.extend((0..5).map(|_| case(&["pain=severe", "reflux=present"])));
    let oracle = TrainingOracle::new(training, cfg.significance);

    let evidence: BTreeSet<String> = ["pulse=high", "pain=severe", "reflux=present"].iter().map(|s| s.to_string()).collect();
    let ranked = rank_groups(&groups, &cfg);
    println!("version 1:\n{}", select_v1(&evidence, &ranked, &oracle).trace_text());
    println!("version 2:\n{}", select_v2(&evidence, &ranked, 0).trace_text());

    let names: Vec<String> = ["albumin", "protein", "calcium"].iter().map(|s| s.to_string()).collect();
    let corr = CorrelationMatrix::new(
        names.clone(),
        vec![
            vec![Some(1.0), Some(0.82), Some(0.10)],
            vec![Some(0.82), Some(1.0), Some(0.05)],
            vec![Some(0.10), Some(0.05), Some(1.0)],
        ],
    )?;
    let by_priority = reduce_variables(
        &corr,
        &Reduction::Threshold {
            threshold: 0.5,
            priority: vec!["protein".into()],
        },
    );
    println!("threshold reduction keeps {by_priority:?}");
    Ok(())
}
