//! A fuzzy membership function turned into a weight of evidence at its
//! most discriminating cut, then used to score cases.
//!
//! Run with `cargo run --example weights_of_evidence`.

use evidence_kit::woe::{cut_counts, score_case, EvidenceWeight, MembershipFunction};
use evidence_kit::Result;

pub fn main() -> Result<()> {
    // membership of "pulse is high"
    let high_pulse = MembershipFunction::new(vec![(60.0, 0.0), (80.0, 0.5), (100.0, 1.0)])?;
    let surgical = [96.0, 88.0, 104.0, 72.0, 92.0, 84.0, 110.0, 66.0, 90.0, 98.0];
    let medical = [52.0, 64.0, 70.0, 58.0, 84.0, 60.0, 76.0, 48.0, 62.0, 94.0, 56.0, 68.0];

    for alpha in [0.0, 0.25, 0.5, 0.75] {
        let c = cut_counts(&high_pulse, &surgical, &medical, alpha);
        println!("alpha {alpha:.2}: {}/{} surgical, {}/{} medical, W = {:+.3}", c.e_h, c.h, c.e_not_h, c.not_h, c.weight()?);
    }
    let pulse = EvidenceWeight::train("surgical", "pulse=high", &high_pulse, &surgical, &medical)?;
    println!("chosen alpha {:.3}, weight {:+.3}", pulse.alpha, pulse.weight);

    let severe_pain = MembershipFunction::new(vec![(1.0, 0.0), (3.0, 0.6), (4.0, 1.0)])?;
    let pain = EvidenceWeight::train(
        "surgical",
        "pain=severe",
        &severe_pain,
        &[4.0, 3.5, 4.0, 2.0, 3.8, 4.0, 3.0, 1.5, 4.0, 3.6],
        &[1.0, 2.0, 1.5, 3.5, 1.0, 2.5, 1.0, 2.0, 1.2, 4.0, 1.0, 2.2],
    )?;
    println!("pain weight {:+.3} at alpha {:.3}", pain.weight, pain.alpha);

    let prior_odds = surgical.len() as f64 / medical.len() as f64;
    for (name, evidence) in [("no findings", vec![]), ("high pulse", vec![pulse.clone()]), ("both", vec![pulse, pain])] {
        let s = score_case(prior_odds, &evidence)?;
        println!("{name:<12} log-odds {:+.3} -> P(surgical) = {:.3}", s.posterior_log_odds, s.probability);
    }
    Ok(())
}
