//! Logistic regression fitted by iteratively reweighted least squares,
//! pruned by Wald tests, and used for prediction.
//!
//! Run with `cargo run --example logistic_baseline`.

use evidence_kit::logit::{fit, prune, DesignMatrix, DesignRow, FitConfig};
use evidence_kit::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let names = vec!["distension".to_string(), "noise".to_string()];
    let mut rows = Vec::new();
    // distension present: 8 of 10 surgical; absent: 2 of 10, repeated tenfold
    for rep in 0..10 {
        for (x, pos, neg) in [(1.0, 8, 2), (0.0, 2, 8)] {
            for i in 0..pos + neg {
                rows.push(DesignRow {
                    id: format!("r{rep}-{x}-{i}"),
                    values: vec![Some(x), Some(rng.gen_range(-1.0..1.0))],
                    response: i < pos,
                });
            }
        }
    }
    let design = DesignMatrix::from_rows(names, rows)?;
    let cfg = FitConfig::default();
    let full = fit(&design, &cfg)?;
    println!("full model after {} iterations:", full.iterations);
    print!("{}", full.to_csv());
    println!("p-values {:?}", full.p_values().iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>());

    let pruned = prune(&full, &design, 0.95, &cfg)?;
    println!("pruned model keeps {:?}", pruned.names);
    println!("odds ratio for distension {:.2} (closed form 16)", pruned.coefficients[0].exp());
    let p = pruned.predict(|v| (v == "distension").then_some(1.0))?;
    println!("P(surgical | distension) = {p:.3}");
    Ok(())
}
