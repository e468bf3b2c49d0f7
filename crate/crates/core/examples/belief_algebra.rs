//! Two mass functions over a three-outcome frame, combined with Dempster's rule.
//!
//! Run with `cargo run --example belief_algebra`.

use evidence_kit::{combine, combine_all, Frame, MassFunction, Result};

pub fn main() -> Result<()> {
    let frame = Frame::new(["hepatitis", "cirrhosis", "tumour"])?;
    let liver = frame.set(["hepatitis", "cirrhosis"])?;
    let cirrhosis = frame.singleton("cirrhosis")?;
    let tumour = frame.singleton("tumour")?;

    // a raised enzyme points at inflammatory disease, an ultrasound at cirrhosis
    let enzyme = MassFunction::new(frame.clone(), [(liver, 0.7), (frame.theta(), 0.3)])?;
    let scan = MassFunction::new(frame.clone(), [(cirrhosis, 0.6), (tumour, 0.1), (frame.theta(), 0.3)])?;

    let joint = combine(&enzyme, &scan)?;
    println!("enzyme: {enzyme}");
    println!("scan:   {scan}");
    println!("combined (conflict {:.3}): {}", joint.conflict, joint.result);
    for set in [cirrhosis, liver, tumour] {
        println!("  {:<24} {}", frame.format_set(set), joint.result.interval(set)?);
    }

    // highly conflicting sources concentrate everything on the only shared outcome
    let hepatitis = frame.singleton("hepatitis")?;
    let a = MassFunction::new(frame.clone(), [(hepatitis, 0.9), (tumour, 0.1)])?;
    let b = MassFunction::new(frame.clone(), [(cirrhosis, 0.9), (tumour, 0.1)])?;
    let r = combine_all(&[a, b])?;
    println!("conflicting pair: K = {:.2}, result {}", r.conflict, r.result);

    let vacuous = MassFunction::vacuous(frame.clone());
    let unchanged = combine(&scan, &vacuous)?.result;
    println!("combining with total ignorance leaves the scan unchanged: {}", unchanged == scan);
    Ok(())
}
