//! Diagnosis reports, S/NONS/F match scoring and ROC points.

use std::fmt;

use indexmap::IndexMap;

use crate::belief::{combine_all, BeliefInterval, Frame, MassFunction, OutcomeSet};
use crate::error::{Error, Result};

/// Default cutoff for the strongest-outcomes list.
pub const DEFAULT_REPORT_THRESHOLD: f64 = 0.25;

/// The four operating points used for the binary classifier.
pub const DEFAULT_ROC_THRESHOLDS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConfig {
    /// Sets with belief `>=` this value are listed as strongest.
    pub threshold: f64,
    /// Whether the whole frame may appear in the strongest list. Its belief
    /// is always 1, so including it makes every case at least NONS.
    pub include_theta: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            threshold: DEFAULT_REPORT_THRESHOLD,
            include_theta: false,
        }
    }
}

impl ReportConfig {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidConfig(format!("report threshold {threshold} outside [0, 1]")));
        }
        Ok(ReportConfig {
            threshold,
            include_theta: false,
        })
    }

    pub fn with_theta(mut self, include: bool) -> Self {
        self.include_theta = include;
        self
    }
}

/// Combined evidence for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisReport {
    pub case_id: String,
    /// Keys that had a mass function and were combined.
    pub applied: Vec<String>,
    /// Observed keys with no mass function; they contribute nothing.
    pub unrecognized: Vec<String>,
    pub combined: MassFunction,
    pub conflict: f64,
    /// Every focal set of the combined mass, by cardinality then frame order.
    pub intervals: Vec<(OutcomeSet, BeliefInterval)>,
    /// Singletons first, each block by descending belief.
    pub strongest: Vec<(OutcomeSet, f64)>,
    /// Frame index of the singleton with the highest positive belief.
    pub top_singleton: Option<usize>,
    /// Another singleton shares the top belief; frame order decided.
    pub tie: bool,
    pub config: ReportConfig,
}

/// Combines the mass functions of the observed evidence keys.
pub fn diagnose(
    case_id: &str,
    evidence: &[String],
    masses: &IndexMap<String, MassFunction>,
    frame: &Frame,
    cfg: &ReportConfig,
) -> Result<DiagnosisReport> {
    let mut applied = Vec::new();
    let mut unrecognized = Vec::new();
    let mut ms = Vec::new();
    for key in evidence {
        match masses.get(key) {
            Some(m) => {
                if m.frame() != frame {
                    return Err(Error::FrameMismatch);
                }
                applied.push(key.clone());
                ms.push(m.clone());
            }
            None => unrecognized.push(key.clone()),
        }
    }
    let (combined, conflict) = if ms.is_empty() {
        (MassFunction::vacuous(frame.clone()), 0.0)
    } else {
        let report = combine_all(&ms)?;
        (report.result, report.conflict)
    };

    let intervals = combined
        .focal_sorted()
        .into_iter()
        .map(|(s, _)| Ok((s, combined.interval(s)?)))
        .collect::<Result<Vec<_>>>()?;

    let theta = frame.theta();
    let mut singles = Vec::new();
    let mut others = Vec::new();
    for (set, iv) in &intervals {
        if iv.bel + TIE_EPS < cfg.threshold || (*set == theta && !cfg.include_theta) {
            continue;
        }
        if set.is_singleton() {
            singles.push((*set, iv.bel));
        } else {
            others.push((*set, iv.bel));
        }
    }
    // stable sort keeps the cardinality-then-frame order among equal beliefs
    singles.sort_by(|a, b| b.1.total_cmp(&a.1));
    others.sort_by(|a, b| b.1.total_cmp(&a.1));
    singles.extend(others);

    let mut top: Option<(usize, f64)> = None;
    let mut tie = false;
    for i in 0..frame.len() {
        let b = combined.mass(OutcomeSet::singleton(i));
        match top {
            _ if b <= 0.0 => {}
            Some((_, best)) if (b - best).abs() <= TIE_EPS => tie = true,
            Some((_, best)) if b < best => {}
            _ => {
                top = Some((i, b));
                tie = false;
            }
        }
    }

    Ok(DiagnosisReport {
        case_id: case_id.to_string(),
        applied,
        unrecognized,
        combined,
        conflict,
        intervals,
        strongest: singles,
        top_singleton: top.map(|t| t.0),
        tie,
        config: *cfg,
    })
}

impl DiagnosisReport {
    /// Plain-text report: symptoms, every belief interval, then the
    /// strongest outcomes.
    pub fn render(&self) -> String {
        let frame = self.combined.frame();
        let mut out = format!("case {}\n", self.case_id);
        out.push_str(&format!(
            "report threshold: belief >= {} ({})\n",
            self.config.threshold,
            if self.config.include_theta { "whole frame listed" } else { "whole frame omitted" }
        ));
        let list = |v: &[String]| if v.is_empty() { "(none)".to_string() } else { v.join(", ") };
        out.push_str(&format!("symptoms: {}\n", list(&self.applied)));
        if !self.unrecognized.is_empty() {
            out.push_str(&format!("unrecognized: {}\n", list(&self.unrecognized)));
        }
        out.push_str(&format!("conflict: {:.6}\n", self.conflict));
        let width = self
            .intervals
            .iter()
            .map(|(s, _)| frame.format_set(*s).chars().count())
            .max()
            .unwrap_or(0);
        out.push_str("belief intervals:\n");
        for (set, iv) in &self.intervals {
            out.push_str(&format!("  {:<width$}  {}\n", frame.format_set(*set), iv));
        }
        out.push_str("strongest outcomes:\n");
        if self.strongest.is_empty() {
            out.push_str("  (none)\n");
        }
        for (set, bel) in &self.strongest {
            out.push_str(&format!("  {:<width$}  {:.4}\n", frame.format_set(*set), bel));
        }
        match self.top_singleton {
            Some(i) if self.tie => out.push_str(&format!("top singleton: {} (tie, frame order)\n", frame.label(i))),
            Some(i) => out.push_str(&format!("top singleton: {}\n", frame.label(i))),
            None => out.push_str("top singleton: (none)\n"),
        }
        out
    }
}

/// Per-case match category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Match {
    /// The top singleton is the expected outcome.
    S,
    /// Some reported set contains the expected outcome.
    Nons,
    F,
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Match::S => "S",
            Match::Nons => "NONS",
            Match::F => "F",
        })
    }
}

pub fn classify_sns(report: &DiagnosisReport, expected: &str) -> Result<Match> {
    let frame = report.combined.frame();
    let idx = frame
        .index_of(expected)
        .ok_or_else(|| Error::UnknownOutcome(expected.to_string()))?;
    if report.top_singleton == Some(idx) {
        Ok(Match::S)
    } else if report.strongest.iter().any(|(s, _)| s.contains(idx)) {
        Ok(Match::Nons)
    } else {
        Ok(Match::F)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchTally {
    pub s: usize,
    pub nons: usize,
    pub f: usize,
}

impl MatchTally {
    pub fn cases(&self) -> usize {
        self.s + self.nons + self.f
    }

    pub fn matched(&self) -> usize {
        self.s + self.nons
    }

    fn pct(&self, n: usize) -> f64 {
        100.0 * n as f64 / self.cases() as f64
    }

    pub fn s_pct(&self) -> f64 {
        self.pct(self.s)
    }

    pub fn nons_pct(&self) -> f64 {
        self.pct(self.nons)
    }

    pub fn f_pct(&self) -> f64 {
        self.pct(self.f)
    }

    pub fn matched_pct(&self) -> f64 {
        self.s_pct() + self.nons_pct()
    }
}

pub fn tally(labels: &[Match]) -> Result<MatchTally> {
    if labels.is_empty() {
        return Err(Error::EmptyTally);
    }
    let count = |m: Match| labels.iter().filter(|&&l| l == m).count();
    Ok(MatchTally {
        s: count(Match::S),
        nons: count(Match::Nons),
        f: count(Match::F),
    })
}

/// One column of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct TallyColumn {
    pub method: String,
    pub variant: String,
    pub tally: MatchTally,
}

/// Rows S, NONS, F and total matched; one column per method and variant,
/// in percent.
pub fn render_tally_table(columns: &[TallyColumn]) -> String {
    let width = columns
        .iter()
        .map(|c| c.method.len().max(c.variant.len()))
        .max()
        .unwrap_or(0)
        .max(7);
    let mut out = format!("{:<14}", "");
    for c in columns {
        out.push_str(&format!(" {:>width$}", c.method));
    }
    out.push('\n');
    out.push_str(&format!("{:<14}", ""));
    for c in columns {
        out.push_str(&format!(" {:>width$}", c.variant));
    }
    out.push('\n');
    let rows: [(&str, fn(&MatchTally) -> f64); 4] = [
        ("S", MatchTally::s_pct),
        ("NONS", MatchTally::nons_pct),
        ("F", MatchTally::f_pct),
        ("Total matched", MatchTally::matched_pct),
    ];
    for (label, get) in rows {
        out.push_str(&format!("{label:<14}"));
        for c in columns {
            out.push_str(&format!(" {:>width$.1}", get(&c.tally)));
        }
        out.push('\n');
    }
    out.push_str(&format!("{:<14}", "cases"));
    for c in columns {
        out.push_str(&format!(" {:>width$}", c.tally.cases()));
    }
    out.push('\n');
    out
}

pub const TALLY_HEADER: &str = "method,variant,s,nons,f,cases,s_pct,nons_pct,f_pct,matched_pct";

pub fn tally_csv(columns: &[TallyColumn]) -> String {
    let mut out = format!("{TALLY_HEADER}\n");
    for c in columns {
        let t = &c.tally;
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4}\n",
            c.method,
            c.variant,
            t.s,
            t.nons,
            t.f,
            t.cases(),
            t.s_pct(),
            t.nons_pct(),
            t.f_pct(),
            t.matched_pct()
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Confusion counts at each threshold, predicting positive when the
/// probability is `>=` the threshold. Points come back in ascending
/// threshold order.
pub fn roc_points(scores: &[(f64, bool)], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    let pos = scores.iter().filter(|s| s.1).count();
    if pos == 0 || pos == scores.len() {
        return Err(Error::SingleClassLabels);
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidConfig(format!("threshold {t} outside [0, 1]")));
    }
    let mut ts = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);
    Ok(ts
        .into_iter()
        .map(|t| {
            let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
            for &(p, label) in scores {
                match (p >= t, label) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, false) => tn += 1,
                    (false, true) => fn_ += 1,
                }
            }
            RocPoint {
                threshold: t,
                tpr: tp as f64 / (tp + fn_) as f64,
                fpr: fp as f64 / (fp + tn) as f64,
                tp,
                fp,
                tn,
                fn_,
            }
        })
        .collect())
}

pub const ROC_HEADER: &str = "threshold,tpr,fpr,tp,fp,tn,fn";

fn roc_row(p: &RocPoint) -> String {
    format!("{},{:.6},{:.6},{},{},{},{}", p.threshold, p.tpr, p.fpr, p.tp, p.fp, p.tn, p.fn_)
}

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut out = format!("{ROC_HEADER}\n");
    for p in points {
        out.push_str(&roc_row(p));
        out.push('\n');
    }
    out
}

/// Long-format ROC table with a leading `method` column.
pub fn roc_csv_compare(series: &[(&str, &[RocPoint])]) -> String {
    let mut out = format!("method,{ROC_HEADER}\n");
    for (method, points) in series {
        for p in *points {
            out.push_str(&format!("{method},{}\n", roc_row(p)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame() -> Frame {
        Frame::new(["a", "b", "c"]).unwrap()
    }

    fn book(entries: &[(&str, &[(&[&str], f64)])]) -> IndexMap<String, MassFunction> {
        let f = frame();
        entries
            .iter()
            .map(|(k, focal)| {
                let m = MassFunction::new(f.clone(), focal.iter().map(|(s, w)| (f.set(s.iter().copied()).unwrap(), *w)))
                    .unwrap();
                (k.to_string(), m)
            })
            .collect()
    }

    fn keys(k: &[&str]) -> Vec<String> {
        k.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn vacuous_report() {
        let r = diagnose("x", &keys(&["zz=1"]), &IndexMap::new(), &frame(), &ReportConfig::default()).unwrap();
        assert!(r.combined.is_vacuous());
        assert_eq!(r.unrecognized, ["zz=1"]);
        assert_eq!(r.intervals.len(), 1);
        assert_eq!((r.intervals[0].1.bel, r.intervals[0].1.pl), (1.0, 1.0));
        for i in 0..3 {
            let iv = r.combined.interval(OutcomeSet::singleton(i)).unwrap();
            assert_eq!((iv.bel, iv.pl), (0.0, 1.0));
        }
        assert_eq!(r.top_singleton, None);
        // whole frame omitted: F; listed: NONS, at either cutoff
        for t in [0.25, 1.0] {
            let cfg = ReportConfig::new(t).unwrap();
            let r = diagnose("x", &[], &IndexMap::new(), &frame(), &cfg).unwrap();
            assert_eq!(classify_sns(&r, "a").unwrap(), Match::F);
            let r = diagnose("x", &[], &IndexMap::new(), &frame(), &cfg.with_theta(true)).unwrap();
            assert_eq!(classify_sns(&r, "a").unwrap(), Match::Nons);
        }
    }

    #[test]
    fn single_symptom_matches_its_mass() {
        let b = book(&[("s=1", &[(&["a"], 0.5), (&["a", "b"], 0.3), (&["a", "b", "c"], 0.2)])]);
        let r = diagnose("x", &keys(&["s=1"]), &b, &frame(), &ReportConfig::default()).unwrap();
        assert_eq!(r.combined, b["s=1"]);
        for (set, iv) in &r.intervals {
            assert_eq!(*iv, b["s=1"].interval(*set).unwrap());
        }
        assert_eq!(r.strongest.iter().map(|s| s.0).collect::<Vec<_>>(), [OutcomeSet::singleton(0), frame().set(["a", "b"]).unwrap()]);
        assert_eq!(r.top_singleton, Some(0));
        assert!(!r.tie);
    }

    #[test]
    fn sns_rules() {
        let f = frame();
        let b = book(&[
            ("s=1", &[(&["b"], 0.4), (&["a", "c"], 0.6)]),
            ("s=2", &[(&["a"], 0.2), (&["b", "c"], 0.1), (&["a", "b", "c"], 0.7)]),
        ]);
        let r = diagnose("x", &keys(&["s=1"]), &b, &f, &ReportConfig::default()).unwrap();
        assert_eq!(classify_sns(&r, "b").unwrap(), Match::S);
        assert_eq!(classify_sns(&r, "c").unwrap(), Match::Nons);
        let r = diagnose("x", &keys(&["s=2"]), &b, &f, &ReportConfig::default()).unwrap();
        assert_eq!(classify_sns(&r, "a").unwrap(), Match::S);
        assert_eq!(classify_sns(&r, "c").unwrap(), Match::F);
        assert!(classify_sns(&r, "q").is_err());
    }

    #[test]
    fn ties_break_by_frame_order() {
        let b = book(&[("s=1", &[(&["b"], 0.4), (&["c"], 0.4), (&["a"], 0.2)])]);
        let r = diagnose("x", &keys(&["s=1"]), &b, &frame(), &ReportConfig::default()).unwrap();
        assert_eq!(r.top_singleton, Some(1));
        assert!(r.tie);
        assert!(r.render().contains("top singleton: b (tie, frame order)"));
    }

    #[test]
    fn conflict_propagates() {
        let b = book(&[("s=1", &[(&["a"], 1.0)]), ("s=2", &[(&["b"], 1.0)])]);
        assert!(diagnose("x", &keys(&["s=1", "s=2"]), &b, &frame(), &ReportConfig::default()).is_err());
    }

    #[test]
    fn tally_examples() {
        let t = tally(&[Match::S; 4]).unwrap();
        assert_eq!((t.s_pct(), t.nons_pct(), t.f_pct(), t.matched_pct()), (100.0, 0.0, 0.0, 100.0));
        let mut labels = vec![Match::S; 6];
        labels.extend([Match::Nons; 11]);
        let t = tally(&labels).unwrap();
        assert!((t.s_pct() - 35.294).abs() < 1e-3);
        assert!((t.nons_pct() - 64.706).abs() < 1e-3);
        assert_eq!(t.f_pct(), 0.0);
        let t = tally(&[Match::F]).unwrap();
        assert_eq!(t.matched_pct(), 0.0);
        assert!(matches!(tally(&[]), Err(Error::EmptyTally)));

        let cols = [
            TallyColumn { method: "m1".into(), variant: "cd3".into(), tally: tally(&labels).unwrap() },
            TallyColumn { method: "m1".into(), variant: "cd5".into(), tally: t },
        ];
        let table = render_tally_table(&cols);
        assert!(table.contains("S                 35.3   "));
        assert!(table.lines().nth(5).unwrap().starts_with("Total matched"));
        assert!(tally_csv(&cols).contains("m1,cd3,6,11,0,17,35.2941,64.7059,0.0000,100.0000"));
    }

    #[test]
    fn roc_examples() {
        let all = roc_points(&[(0.3, true), (0.1, false)], &[0.0]).unwrap();
        assert_eq!((all[0].tpr, all[0].fpr), (1.0, 1.0));
        let sep: Vec<(f64, bool)> = (0..10).map(|i| if i < 5 { (0.9, true) } else { (0.1, false) }).collect();
        let pts = roc_points(&sep, &DEFAULT_ROC_THRESHOLDS).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|p| p.tpr == 1.0 && p.fpr == 0.0));
        let hand = roc_points(&[(0.9, true), (0.7, false), (0.6, true), (0.3, false)], &[0.6]).unwrap();
        assert_eq!((hand[0].tpr, hand[0].fpr), (1.0, 0.5));
        assert_eq!((hand[0].tp, hand[0].fp, hand[0].tn, hand[0].fn_), (2, 1, 1, 0));
        assert!(matches!(roc_points(&[(0.5, true)], &[0.5]), Err(Error::SingleClassLabels)));
        let csv = roc_csv(&hand);
        assert_eq!(csv, "threshold,tpr,fpr,tp,fp,tn,fn\n0.6,1.000000,0.500000,2,1,1,0\n");
        assert!(roc_csv_compare(&[("woe", &hand)]).starts_with("method,threshold"));
    }

    proptest! {
        #[test]
        fn roc_monotone(
            scores in prop::collection::vec((0.0f64..1.0, any::<bool>()), 2..40),
            ts in prop::collection::vec(0.0f64..1.0, 1..8),
        ) {
            prop_assume!(scores.iter().any(|s| s.1) && scores.iter().any(|s| !s.1));
            let pts = roc_points(&scores, &ts).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[0].threshold <= w[1].threshold);
                prop_assert!(w[1].tpr <= w[0].tpr && w[1].fpr <= w[0].fpr);
            }
            for p in &pts {
                prop_assert_eq!(p.tp + p.fp + p.tn + p.fn_, scores.len());
            }
        }

        #[test]
        fn tally_recomputes(labels in prop::collection::vec(prop_oneof![Just(Match::S), Just(Match::Nons), Just(Match::F)], 1..60)) {
            let t = tally(&labels).unwrap();
            prop_assert_eq!(t.cases(), labels.len());
            prop_assert!((t.s_pct() + t.nons_pct() + t.f_pct() - 100.0).abs() < 0.01);
            prop_assert_eq!(t.s_pct(), 100.0 * t.s as f64 / labels.len() as f64);
        }

        #[test]
        fn s_takes_precedence(w in prop::collection::vec(0.01f64..1.0, 7), t in 0.0f64..1.0) {
            let f = frame();
            let total: f64 = w.iter().sum();
            let m = MassFunction::new(f.clone(), (1..8u32).map(|b| (OutcomeSet::from_bits(b), w[b as usize - 1] / total)))
                .unwrap();
            let mut book = IndexMap::new();
            book.insert("k".to_string(), m);
            let r = diagnose("x", &["k".to_string()], &book, &f, &ReportConfig::new(t).unwrap()).unwrap();
            for label in ["a", "b", "c"] {
                let got = classify_sns(&r, label).unwrap();
                let idx = f.index_of(label).unwrap();
                if r.top_singleton == Some(idx) {
                    prop_assert_eq!(got, Match::S);
                }
            }
            // strongest list ordering
            let split = r.strongest.iter().position(|s| !s.0.is_singleton()).unwrap_or(r.strongest.len());
            prop_assert!(r.strongest[split..].iter().all(|s| !s.0.is_singleton()));
            for block in [&r.strongest[..split], &r.strongest[split..]] {
                for pair in block.windows(2) {
                    prop_assert!(pair[0].1 >= pair[1].1);
                }
            }
        }
    }
}
