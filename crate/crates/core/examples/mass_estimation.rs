//! Mass functions estimated from one frequency table with every method,
//! followed by an expert override.
//!
//! Run with `cargo run --example mass_estimation`.

use evidence_kit::mass::{
    apply_overrides, estimate_row, EstimateConfig, ExpertOverride, FrequencyTable, Method, Method3Config,
    Normalization, Remainder, ThetaPreassign,
};
use evidence_kit::{Frame, Result};
use indexmap::IndexMap;

pub fn main() -> Result<()> {
    let frame = Frame::new(["necrosis", "fibrosis", "congestion", "atrophy"])?;
    let mut table = FrequencyTable::new(frame.clone());
    table.insert_row("albumin=low", vec![12, 7, 2, 1])?;
    table.insert_row("albumin=normal", vec![3, 9, 9, 4])?;
    table.insert_row("calcium=high", vec![1, 0, 0, 6])?;

    let methods = [
        Method::Consonant,
        Method::SimpleSupport(Remainder::Complement),
        Method::SimpleSupport(Remainder::Theta),
        Method::Spread(Method3Config::new(Normalization::ByCardinality, ThetaPreassign::One)),
    ];
    for key in table.keys() {
        println!("{key} counts {:?}", table.row(key).unwrap_or_default());
        for method in methods {
            let m = estimate_row(&table, key, &EstimateConfig::new(method))?;
            let spread = if m.focal_count() > 6 { format!("{} foci", m.focal_count()) } else { m.to_string() };
            println!("  {:<10} theta {:.3}  {spread}", method.token(), m.mass(frame.theta()));
        }
    }

    let mut masses = IndexMap::new();
    masses.insert("albumin=low".to_string(), estimate_row(&table, "albumin=low", &EstimateConfig::new(Method::Consonant))?);
    let ov = ExpertOverride::new("albumin=low", ["necrosis", "fibrosis"], 0.4);
    let out = apply_overrides(&masses, &[ov])?;
    println!("before override: {}", masses["albumin=low"]);
    println!("after override:  {}", out.masses["albumin=low"]);
    Ok(())
}
