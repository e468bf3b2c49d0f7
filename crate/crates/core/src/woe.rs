//! Weights of evidence with fuzzy evidence regions.
//!
//! `W(H:E) = ln p(E|H) / p(E|¬H)`, the shift in log-odds of `H` once `E` is
//! observed. Continuous symptoms enter through expert membership functions;
//! the crisp event used for counting is the strong α-cut `{x : μ(x) > α}`, and
//! the α chosen is the one that maximizes `|W|`.

use std::io::Read;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Piecewise-linear membership function, clamped outside its breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFunction {
    points: Vec<(f64, f64)>,
}

impl MembershipFunction {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidMembership("need at least two breakpoints".into()));
        }
        for &(x, mu) in &points {
            if !x.is_finite() || !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidMembership(format!("bad breakpoint ({x}, {mu})")));
            }
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidMembership("breakpoint values must strictly increase".into()));
        }
        Ok(MembershipFunction { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (first, last) = (self.points[0], self.points[self.points.len() - 1]);
        if x <= first.0 {
            return first.1;
        }
        if x >= last.0 {
            return last.1;
        }
        let i = self.points.partition_point(|p| p.0 <= x);
        let (x0, m0) = self.points[i - 1];
        let (x1, m1) = self.points[i];
        m0 + (m1 - m0) * (x - x0) / (x1 - x0)
    }
}

/// The strong α-level cut `{x : μ(x) > α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCut {
    alpha: f64,
}

impl AlphaCut {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(AlphaCut { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn admits(&self, mu: f64) -> bool {
        mu > self.alpha
    }

    pub fn contains(&self, mf: &MembershipFunction, x: f64) -> bool {
        self.admits(mf.eval(x))
    }
}

/// The 2×2 counts behind a weight of evidence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvidenceCounts {
    /// Cases with `E` and `H`.
    pub e_h: u64,
    /// Cases with `E` and not `H`.
    pub e_not_h: u64,
    pub h: u64,
    pub not_h: u64,
}

impl EvidenceCounts {
    pub fn weight(&self) -> Result<f64> {
        weight_of_evidence(self.e_h, self.e_not_h, self.h, self.not_h)
    }

    /// Cases exhibiting `E` regardless of class.
    pub fn support(&self) -> u64 {
        self.e_h + self.e_not_h
    }
}

/// `ln p̂(E|H) / p̂(E|¬H)` in natural-log units.
///
/// When any of the four 2×2 cells is empty, 0.5 is added to every cell
/// (so each class total grows by 1).
pub fn weight_of_evidence(e_h: u64, e_not_h: u64, h: u64, not_h: u64) -> Result<f64> {
    if h == 0 || not_h == 0 {
        return Err(Error::InvalidCounts("both H and not-H need at least one case".into()));
    }
    if e_h > h || e_not_h > not_h {
        return Err(Error::InvalidCounts(format!(
            "evidence counts ({e_h}, {e_not_h}) exceed class totals ({h}, {not_h})"
        )));
    }
    let zero_cell = e_h == 0 || e_not_h == 0 || e_h == h || e_not_h == not_h;
    let (c, d) = if zero_cell { (0.5, 1.0) } else { (0.0, 0.0) };
    let p_h = (e_h as f64 + c) / (h as f64 + d);
    let p_not_h = (e_not_h as f64 + c) / (not_h as f64 + d);
    Ok((p_h / p_not_h).ln())
}

/// Fraction of samples inside the strong α-cut.
pub fn fuzzy_probability(mf: &MembershipFunction, samples: &[f64], alpha: f64) -> Result<f64> {
    let cut = AlphaCut::new(alpha)?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let inside = samples.iter().filter(|&&x| cut.contains(mf, x)).count();
    Ok(inside as f64 / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub weight: f64,
    pub counts: EvidenceCounts,
}

/// Counts of the strong α-cut over both sample groups.
pub fn cut_counts(mf: &MembershipFunction, h: &[f64], not_h: &[f64], alpha: f64) -> EvidenceCounts {
    let inside = |xs: &[f64]| xs.iter().filter(|&&x| mf.eval(x) > alpha).count() as u64;
    EvidenceCounts {
        e_h: inside(h),
        e_not_h: inside(not_h),
        h: h.len() as u64,
        not_h: not_h.len() as u64,
    }
}

/// The α in `[0, 1)` maximizing `|W(H:E_α)|`.
///
/// Cuts only change at sample membership values, so the candidates are 0
/// and each distinct sample μ below 1. Cuts containing no sample at all are
/// skipped. Ties go to the smallest α.
pub fn optimal_alpha(mf: &MembershipFunction, h: &[f64], not_h: &[f64]) -> Result<AlphaChoice> {
    if h.is_empty() || not_h.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut candidates: Vec<f64> = h
        .iter()
        .chain(not_h)
        .map(|&x| mf.eval(x))
        .filter(|&mu| mu > 0.0 && mu < 1.0)
        .collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best: Option<AlphaChoice> = None;
    for alpha in candidates {
        let counts = cut_counts(mf, h, not_h, alpha);
        if counts.support() == 0 {
            continue;
        }
        let weight = counts.weight()?;
        if best.is_none_or(|b| weight.abs() > b.weight.abs()) {
            best = Some(AlphaChoice { alpha, weight, counts });
        }
    }
    best.ok_or(Error::NoSupport)
}

/// A trained weight for one piece of evidence toward one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceWeight {
    pub hypothesis: String,
    pub evidence_key: String,
    pub weight: f64,
    pub alpha: f64,
    pub counts: EvidenceCounts,
}

impl EvidenceWeight {
    pub fn train(
        hypothesis: &str,
        evidence_key: &str,
        mf: &MembershipFunction,
        h: &[f64],
        not_h: &[f64],
    ) -> Result<Self> {
        let choice = optimal_alpha(mf, h, not_h)?;
        Ok(EvidenceWeight {
            hypothesis: hypothesis.to_string(),
            evidence_key: evidence_key.to_string(),
            weight: choice.weight,
            alpha: choice.alpha,
            counts: choice.counts,
        })
    }
}

/// The variable an evidence key such as `pulse=high` refers to.
pub fn variable_of(evidence_key: &str) -> &str {
    evidence_key.split('=').next().unwrap_or(evidence_key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseScore {
    pub prior_log_odds: f64,
    pub applied: Vec<(String, f64)>,
    pub posterior_log_odds: f64,
    pub probability: f64,
}

pub fn logistic(log_odds: f64) -> f64 {
    1.0 / (1.0 + (-log_odds).exp())
}

/// `ln O(H|E) = ln O(H) + Σ W` over the supplied evidence.
pub fn score_case(prior_odds: f64, evidence: &[EvidenceWeight]) -> Result<CaseScore> {
    if !(prior_odds > 0.0) || !prior_odds.is_finite() {
        return Err(Error::InvalidPriorOdds(prior_odds));
    }
    let prior_log_odds = prior_odds.ln();
    let mut posterior = prior_log_odds;
    let mut applied = Vec::with_capacity(evidence.len());
    for e in evidence {
        posterior += e.weight;
        applied.push((e.evidence_key.clone(), e.weight));
    }
    Ok(CaseScore {
        prior_log_odds,
        applied,
        posterior_log_odds: posterior,
        probability: logistic(posterior),
    })
}

/// Reads `evidence_key,value,mu` rows grouped by key and sorted by value.
pub fn read_memberships<R: Read>(reader: R, source: &str) -> Result<IndexMap<String, MembershipFunction>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["evidence_key", "value", "mu"] {
        return Err(Error::parse(source, 1, "header must be `evidence_key,value,mu`"));
    }
    let mut points: IndexMap<String, Vec<(f64, f64)>> = IndexMap::new();
    let mut last_key: Option<String> = None;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::parse(source, line, format!("`{}` is not a number", &record[i])))
        };
        let key = record[0].to_string();
        if last_key.as_deref() != Some(key.as_str()) && points.contains_key(&key) {
            return Err(Error::parse(source, line, format!("rows for `{key}` are not contiguous")));
        }
        points.entry(key.clone()).or_default().push((num(1)?, num(2)?));
        last_key = Some(key);
    }
    points
        .into_iter()
        .map(|(k, p)| {
            let mf = MembershipFunction::new(p).map_err(|e| Error::parse(source, 0, format!("`{k}`: {e}")))?;
            Ok((k, mf))
        })
        .collect()
}

pub fn read_memberships_path(path: &Path) -> Result<IndexMap<String, MembershipFunction>> {
    read_memberships(std::fs::File::open(path)?, &path.display().to_string())
}

pub const WEIGHTS_HEADER: &str = "hypothesis,evidence_key,weight,alpha,nEH,nEnotH,nH,nnotH";

pub fn write_weights(weights: &[EvidenceWeight]) -> String {
    let mut out = format!("{WEIGHTS_HEADER}\n");
    for w in weights {
        let c = w.counts;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            w.hypothesis, w.evidence_key, w.weight, w.alpha, c.e_h, c.e_not_h, c.h, c.not_h
        ));
    }
    out
}

pub fn read_weights<R: Read>(reader: R, source: &str) -> Result<Vec<EvidenceWeight>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != WEIGHTS_HEADER {
        return Err(Error::parse(source, 1, format!("header must be `{WEIGHTS_HEADER}`")));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |i: usize| Error::parse(source, line, format!("bad field `{}`", &record[i]));
        let float = |i: usize| record[i].parse::<f64>().map_err(|_| bad(i));
        let int = |i: usize| record[i].parse::<u64>().map_err(|_| bad(i));
        out.push(EvidenceWeight {
            hypothesis: record[0].to_string(),
            evidence_key: record[1].to_string(),
            weight: float(2)?,
            alpha: float(3)?,
            counts: EvidenceCounts {
                e_h: int(4)?,
                e_not_h: int(5)?,
                h: int(6)?,
                not_h: int(7)?,
            },
        });
    }
    Ok(out)
}

pub fn read_weights_path(path: &Path) -> Result<Vec<EvidenceWeight>> {
    read_weights(std::fs::File::open(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> MembershipFunction {
        MembershipFunction::new(vec![(0.0, 0.0), (10.0, 1.0)]).unwrap()
    }

    /// μ = 0.5 on [1, 2], μ = 1 on [3, 4], 0 below 0.
    fn two_plateaus() -> MembershipFunction {
        MembershipFunction::new(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.5), (3.0, 1.0), (4.0, 1.0)]).unwrap()
    }

    fn crisp() -> MembershipFunction {
        MembershipFunction::new(vec![(4.999, 0.0), (5.0, 1.0)]).unwrap()
    }

    #[test]
    fn membership_interpolates_and_clamps() {
        let mf = ramp();
        assert_eq!(mf.eval(-3.0), 0.0);
        assert_eq!(mf.eval(12.0), 1.0);
        assert!((mf.eval(2.5) - 0.25).abs() < 1e-15);
        let p = two_plateaus();
        assert_eq!(p.eval(1.5), 0.5);
        assert_eq!(p.eval(3.5), 1.0);
        assert!(MembershipFunction::new(vec![(0.0, 0.0)]).is_err());
        assert!(MembershipFunction::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(MembershipFunction::new(vec![(0.0, 0.0), (1.0, 1.5)]).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_of_evidence(5, 10, 10, 20).unwrap(), 0.0);
        assert!((weight_of_evidence(8, 2, 10, 10).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert!((weight_of_evidence(10, 0, 10, 10).unwrap() - 21f64.ln()).abs() < 1e-12);
        assert!((weight_of_evidence(10, 0, 10, 10).unwrap() - 3.0445).abs() < 1e-4);
        assert!(weight_of_evidence(1, 1, 0, 5).is_err());
        assert!(weight_of_evidence(6, 1, 5, 5).is_err());
    }

    #[test]
    fn fuzzy_probability_examples() {
        let mf = ramp();
        let p = fuzzy_probability(&mf, &[2.0, 5.0, 8.0], 0.4).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
        // alpha = 0 counts every sample with positive membership
        assert_eq!(fuzzy_probability(&mf, &[0.0, 5.0, 8.0], 0.0).unwrap(), 2.0 / 3.0);
        assert!(matches!(fuzzy_probability(&mf, &[1.0], -0.01), Err(Error::InvalidAlpha(_))));
        assert!(matches!(fuzzy_probability(&mf, &[1.0], 1.0), Err(Error::InvalidAlpha(_))));
        assert!(matches!(fuzzy_probability(&mf, &[], 0.5), Err(Error::EmptySamples)));

        let c = crisp();
        let xs = [1.0, 2.0, 6.0, 7.0, 9.0];
        let half = fuzzy_probability(&c, &xs, 0.5).unwrap();
        for alpha in [0.01, 0.2, 0.7, 0.99] {
            assert_eq!(fuzzy_probability(&c, &xs, alpha).unwrap(), half);
        }
    }

    #[test]
    fn optimal_alpha_two_plateaus() {
        let mf = two_plateaus();
        let h: Vec<f64> = [vec![3.5; 8], vec![1.5], vec![-1.0]].concat();
        let not_h: Vec<f64> = [vec![3.5; 2], vec![1.5; 5], vec![-1.0; 3]].concat();
        let choice = optimal_alpha(&mf, &h, &not_h).unwrap();
        assert_eq!(choice.alpha, 0.5);
        assert!((choice.weight - 4f64.ln()).abs() < 1e-12);
        assert_eq!(choice.counts, EvidenceCounts { e_h: 8, e_not_h: 2, h: 10, not_h: 10 });
    }

    #[test]
    fn optimal_alpha_degenerate_inputs() {
        let c = crisp();
        let choice = optimal_alpha(&c, &[6.0, 7.0, 1.0], &[2.0, 3.0, 8.0]).unwrap();
        assert_eq!(choice.alpha, 0.0);

        let xs = [1.0, 6.0, 8.0];
        let sym = optimal_alpha(&ramp(), &xs, &xs).unwrap();
        assert_eq!((sym.alpha, sym.weight), (0.0, 0.0));

        assert!(matches!(optimal_alpha(&ramp(), &[], &[1.0]), Err(Error::EmptySamples)));
        assert!(matches!(optimal_alpha(&ramp(), &[-1.0], &[-2.0]), Err(Error::NoSupport)));
    }

    #[test]
    fn score_case_examples() {
        let w = |k: &str, x: f64| EvidenceWeight {
            hypothesis: "H".into(),
            evidence_key: k.into(),
            weight: x,
            alpha: 0.0,
            counts: EvidenceCounts::default(),
        };
        let s = score_case(3.0, &[]).unwrap();
        assert_eq!(s.posterior_log_odds, 3f64.ln());
        assert!((s.probability - 0.75).abs() < 1e-15);

        let s = score_case(1.0, &[w("a", 4f64.ln()), w("b", 0.25f64.ln())]).unwrap();
        assert!((s.probability - 0.5).abs() < 1e-15);

        let s = score_case(1.0, &[w("a", 4f64.ln())]).unwrap();
        assert!((s.probability - 0.8).abs() < 1e-15);
        let z = score_case(1.0, &[w("a", 4f64.ln()), w("z", 0.0)]).unwrap();
        assert_eq!(z.posterior_log_odds.to_bits(), s.posterior_log_odds.to_bits());

        assert!(score_case(0.0, &[]).is_err());
        assert!(score_case(f64::NAN, &[]).is_err());
    }

    #[test]
    fn csv_round_trips() {
        let text = "evidence_key,value,mu\npulse=high,60,0\npulse=high,80,1\ntemp=low,36,1\ntemp=low,37.5,0\n";
        let mfs = read_memberships(text.as_bytes(), "m.csv").unwrap();
        assert_eq!(mfs.len(), 2);
        assert_eq!(mfs["pulse=high"].eval(70.0), 0.5);
        let split = "evidence_key,value,mu\na,0,0\na,1,1\nb,0,0\nb,1,1\na,2,1\n";
        assert!(read_memberships(split.as_bytes(), "m.csv").is_err());

        let ws = vec![EvidenceWeight {
            hypothesis: "surgical".into(),
            evidence_key: "pulse=high".into(),
            weight: 4f64.ln(),
            alpha: 0.25,
            counts: EvidenceCounts { e_h: 8, e_not_h: 2, h: 10, not_h: 10 },
        }];
        let text = write_weights(&ws);
        assert_eq!(read_weights(text.as_bytes(), "w.csv").unwrap(), ws);
        assert_eq!(variable_of("pulse=high"), "pulse");
    }

    proptest! {
        #[test]
        fn weight_is_antisymmetric(h in 2u64..50, nh in 2u64..50, a in 1u64..49, b in 1u64..49) {
            let (a, b) = (a.min(h - 1), b.min(nh - 1));
            let w = weight_of_evidence(a, b, h, nh).unwrap();
            let swapped = weight_of_evidence(b, a, nh, h).unwrap();
            prop_assert!((w + swapped).abs() < 1e-12);
        }

        #[test]
        fn fuzzy_probability_nonincreasing(xs in prop::collection::vec(-2.0f64..12.0, 1..40), a in 0.0f64..0.99, d in 0.0f64..0.5) {
            let mf = two_plateaus();
            let b = (a + d).min(0.999);
            prop_assert!(fuzzy_probability(&mf, &xs, b).unwrap() <= fuzzy_probability(&mf, &xs, a).unwrap());
        }

        #[test]
        fn argmax_ignores_common_prior_shift(w1 in -3.0f64..3.0, w2 in -3.0f64..3.0, shift in -5.0f64..5.0) {
            let ev = |x: f64| EvidenceWeight {
                hypothesis: "H".into(),
                evidence_key: "e".into(),
                weight: x,
                alpha: 0.0,
                counts: EvidenceCounts::default(),
            };
            let a = score_case(1.0, &[ev(w1)]).unwrap();
            let b = score_case(1.0, &[ev(w2)]).unwrap();
            let a2 = score_case(shift.exp(), &[ev(w1)]).unwrap();
            let b2 = score_case(shift.exp(), &[ev(w2)]).unwrap();
            if (w1 - w2).abs() > 1e-9 {
                prop_assert_eq!(a.posterior_log_odds > b.posterior_log_odds, a2.posterior_log_odds > b2.posterior_log_odds);
            }
        }
    }
}
