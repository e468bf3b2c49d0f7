//! End-to-end workflows over case records: mass training and diagnosis,
//! reduction variants, the weights-of-evidence classifier and the logistic
//! baseline.

use std::collections::BTreeSet;

use indexmap::IndexMap;

use crate::belief::{Frame, MassFunction};
use crate::data::{build_frequency_table, evidence_keys, pearson_matrix, CaseRecord, Discretization};
use crate::error::{Error, Result};
use crate::eval::{classify_sns, diagnose, tally, DiagnosisReport, Match, MatchTally, ReportConfig};
use crate::logit::{fit, prune, DesignMatrix, DesignRow, FitConfig, LogisticModel};
use crate::mass::{estimate_row, EstimateConfig, FrequencyTable};
use crate::search::{
    rank_groups, reduce_variables, select, AlwaysIndependent, DependenceOracle, OracleCase, RankedGroup, Reduction,
    SearchConfig, SearchVersion, Selection, SymptomGroup, TrainingOracle,
};
use crate::woe::{score_case, variable_of, weight_of_evidence, CaseScore, EvidenceCounts, EvidenceWeight, MembershipFunction};

/// Mass functions estimated from training cases.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMasses {
    pub table: FrequencyTable,
    pub masses: IndexMap<String, MassFunction>,
    /// Rows whose total fell below the configured floor; they get no mass.
    pub flagged: Vec<String>,
}

pub fn train_masses(
    cases: &[CaseRecord],
    disc: &Discretization,
    frame: &Frame,
    cfg: &EstimateConfig,
) -> Result<TrainedMasses> {
    let table = build_frequency_table(cases, disc, frame)?;
    let flagged: Vec<String> = table.rows_below(cfg.min_total.max(1)).into_iter().map(str::to_string).collect();
    let mut masses = IndexMap::new();
    let mut failures = Vec::new();
    for key in table.keys().filter(|k| !flagged.iter().any(|f| f == k)) {
        match estimate_row(&table, key, cfg) {
            Ok(m) => {
                masses.insert(key.to_string(), m);
            }
            Err(e) => failures.push((key.to_string(), e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Rows(failures));
    }
    Ok(TrainedMasses { table, masses, flagged })
}

/// Diagnoses one case from its observed symptoms.
pub fn diagnose_case(
    case: &CaseRecord,
    disc: &Discretization,
    masses: &IndexMap<String, MassFunction>,
    frame: &Frame,
    cfg: &ReportConfig,
) -> Result<DiagnosisReport> {
    let keys = evidence_keys(case, disc)?;
    diagnose(&case.id, &keys, masses, frame, cfg)
}

/// Variable subset used for training and testing.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// Every variable.
    All,
    /// A correlation-based reduction computed on the training cases.
    Reduced(Reduction),
}

impl Variant {
    /// Correlation cutoff shared by both reductions.
    pub const DEFAULT_THRESHOLD: f64 = 0.5;
    pub const DEFAULT_CUMULATIVE: f64 = 1.0;

    /// Parses `cd3`, `cd5` or `cd7`. `cd5` keeps variables in the given
    /// priority order (declaration order when empty).
    pub fn parse(token: &str, priority: &[String]) -> Result<Self> {
        match token {
            "cd3" => Ok(Variant::All),
            "cd5" => Ok(Variant::Reduced(Reduction::Threshold {
                threshold: Self::DEFAULT_THRESHOLD,
                priority: priority.to_vec(),
            })),
            "cd7" => Ok(Variant::Reduced(Reduction::Cumulative {
                threshold: Self::DEFAULT_THRESHOLD,
                cumulative: Self::DEFAULT_CUMULATIVE,
            })),
            other => Err(Error::InvalidConfig(format!("unknown variant `{other}` (expected cd3, cd5 or cd7)"))),
        }
    }

    /// Variables retained on the training cases, in declaration order.
    pub fn variables(&self, train: &[CaseRecord], disc: &Discretization) -> Result<Vec<String>> {
        let all: Vec<String> = disc.variables().map(str::to_string).collect();
        match self {
            Variant::All => Ok(all),
            Variant::Reduced(reduction) => {
                let corr = pearson_matrix(train, &all)?;
                Ok(reduce_variables(&corr, reduction))
            }
        }
    }
}

/// Per-case result of an evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub id: String,
    pub expected: String,
    pub label: Match,
    /// Set when the case's evidence was in total conflict; such cases score F.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub variables: Vec<String>,
    pub tally: MatchTally,
    pub cases: Vec<CaseOutcome>,
    pub flagged: Vec<String>,
}

/// Trains on `train` and scores every case of `test` as S, NONS or F.
pub fn evaluate_ds(
    train: &[CaseRecord],
    test: &[CaseRecord],
    disc: &Discretization,
    frame: &Frame,
    cfg: &EstimateConfig,
    variant: &Variant,
    report: &ReportConfig,
) -> Result<Evaluation> {
    check_disjoint(train, test)?;
    let variables = variant.variables(train, disc)?;
    let restricted = disc.restrict(&variables);
    let train_r: Vec<CaseRecord> = train.iter().map(|c| c.restrict(&variables)).collect();
    let trained = train_masses(&train_r, &restricted, frame, cfg)?;
    let mut cases = Vec::with_capacity(test.len());
    for case in test {
        let expected = case.outcome.clone().ok_or_else(|| Error::MissingOutcome(case.id.clone()))?;
        if frame.index_of(&expected).is_none() {
            return Err(Error::UnknownOutcome(expected));
        }
        let narrowed = case.restrict(&variables);
        let (label, note) = match diagnose_case(&narrowed, &restricted, &trained.masses, frame, report) {
            Ok(r) => (classify_sns(&r, &expected)?, None),
            Err(e @ Error::TotalConflictAt { .. }) => (Match::F, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        cases.push(CaseOutcome {
            id: case.id.clone(),
            expected,
            label,
            note,
        });
    }
    let labels: Vec<Match> = cases.iter().map(|c| c.label).collect();
    Ok(Evaluation {
        variables,
        tally: tally(&labels)?,
        cases,
        flagged: trained.flagged,
    })
}

/// Refuses train and test sets that share a case id.
pub fn check_disjoint(train: &[CaseRecord], test: &[CaseRecord]) -> Result<()> {
    let ids: BTreeSet<&str> = train.iter().map(|c| c.id.as_str()).collect();
    let shared: Vec<String> = test.iter().filter(|c| ids.contains(c.id.as_str())).map(|c| c.id.clone()).collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(Error::OverlappingIds(shared))
    }
}

/// Binary labels for labelled cases: `true` when the outcome is `positive`.
/// Exactly two distinct outcome labels must occur.
pub fn binary_labels(cases: &[CaseRecord], positive: &str) -> Result<Vec<Option<bool>>> {
    let distinct: BTreeSet<&str> = cases.iter().filter_map(|c| c.outcome.as_deref()).collect();
    if distinct.len() != 2 || !distinct.contains(positive) {
        return Err(Error::NonBinaryHypothesis(format!(
            "expected two outcome labels including `{positive}`, found {{{}}}",
            distinct.into_iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(cases.iter().map(|c| c.outcome.as_deref().map(|o| o == positive)).collect())
}

/// Prior odds of the positive class among labelled cases.
pub fn prior_odds(labels: &[Option<bool>]) -> Result<f64> {
    let pos = labels.iter().filter(|l| **l == Some(true)).count();
    let neg = labels.iter().filter(|l| **l == Some(false)).count();
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok(pos as f64 / neg as f64)
}

/// Options for weight training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupOptions {
    /// Also train weights for pairs of evidence on different variables.
    pub pairs: bool,
    /// Pairs observed together fewer times than this are skipped.
    pub min_support: u64,
}

impl Default for GroupOptions {
    fn default() -> Self {
        GroupOptions {
            pairs: false,
            min_support: 5,
        }
    }
}

/// Trained weights for one binary hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct WoeTraining {
    pub hypothesis: String,
    pub weights: Vec<EvidenceWeight>,
    /// Evidence keys that could not be trained, with the reason.
    pub skipped: Vec<(String, String)>,
}

fn holds(case: &CaseRecord, key: &str, mf: &MembershipFunction, alpha: f64) -> Option<bool> {
    case.value(variable_of(key)).map(|x| mf.eval(x) > alpha)
}

/// Fits a weight per membership function at its optimal cut, and
/// optionally crisp weights for pairs of the resulting cuts.
pub fn train_woe(
    cases: &[CaseRecord],
    memberships: &IndexMap<String, MembershipFunction>,
    positive: &str,
    groups: &GroupOptions,
) -> Result<WoeTraining> {
    let labels = binary_labels(cases, positive)?;
    let mut weights = Vec::new();
    let mut skipped = Vec::new();
    for (key, mf) in memberships {
        let var = variable_of(key);
        let mut h = Vec::new();
        let mut not_h = Vec::new();
        for (case, label) in cases.iter().zip(&labels) {
            if let (Some(x), Some(l)) = (case.value(var), label) {
                if *l {
                    h.push(x);
                } else {
                    not_h.push(x);
                }
            }
        }
        match EvidenceWeight::train(positive, key, mf, &h, &not_h) {
            Ok(w) => weights.push(w),
            Err(e @ (Error::EmptySamples | Error::NoSupport)) => skipped.push((key.clone(), e.to_string())),
            Err(e) => return Err(e),
        }
    }

    if groups.pairs {
        let singles = weights.clone();
        for (i, a) in singles.iter().enumerate() {
            for b in &singles[i + 1..] {
                if variable_of(&a.evidence_key) == variable_of(&b.evidence_key) {
                    continue;
                }
                let (mfa, mfb) = (&memberships[&a.evidence_key], &memberships[&b.evidence_key]);
                let mut counts = EvidenceCounts { e_h: 0, e_not_h: 0, h: 0, not_h: 0 };
                for (case, label) in cases.iter().zip(&labels) {
                    let (Some(l), Some(ha), Some(hb)) = (
                        label,
                        holds(case, &a.evidence_key, mfa, a.alpha),
                        holds(case, &b.evidence_key, mfb, b.alpha),
                    ) else {
                        continue;
                    };
                    let both = u64::from(ha && hb);
                    if *l {
                        counts.h += 1;
                        counts.e_h += both;
                    } else {
                        counts.not_h += 1;
                        counts.e_not_h += both;
                    }
                }
                if counts.support() < groups.min_support.max(1) || counts.h == 0 || counts.not_h == 0 {
                    continue;
                }
                let group = SymptomGroup::new([a.evidence_key.clone(), b.evidence_key.clone()], counts.support(), 0)?;
                let weight = weight_of_evidence(counts.e_h, counts.e_not_h, counts.h, counts.not_h)?;
                weights.push(EvidenceWeight {
                    hypothesis: positive.to_string(),
                    evidence_key: group.key(),
                    weight,
                    alpha: 0.0,
                    counts,
                });
            }
        }
    }
    Ok(WoeTraining {
        hypothesis: positive.to_string(),
        weights,
        skipped,
    })
}

/// Scores cases from trained weights, selecting non-redundant evidence
/// through the group search.
pub struct WoeScorer {
    weights: IndexMap<String, EvidenceWeight>,
    memberships: IndexMap<String, MembershipFunction>,
    ranked: Vec<RankedGroup>,
    oracle: Box<dyn DependenceOracle>,
    cfg: SearchConfig,
    prior_odds: f64,
}

/// The group a trained weight stands for. Its successes count the class
/// the evidence favours, so strong evidence against the hypothesis ranks
/// as high as strong evidence for it.
fn group_of(w: &EvidenceWeight) -> Result<SymptomGroup> {
    let favoured = if w.weight >= 0.0 { w.counts.e_h } else { w.counts.e_not_h };
    SymptomGroup::new(w.evidence_key.split('&'), w.counts.support(), favoured)
}

impl WoeScorer {
    /// `training` supplies the chi-square screens for version 1 selection and
    /// may be empty for version 2.
    pub fn new(
        weights: &[EvidenceWeight],
        memberships: &IndexMap<String, MembershipFunction>,
        training: &[CaseRecord],
        cfg: &SearchConfig,
        prior_odds: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(prior_odds > 0.0 && prior_odds.is_finite()) {
            return Err(Error::InvalidPriorOdds(prior_odds));
        }
        let mut by_key = IndexMap::new();
        for w in weights {
            for member in w.evidence_key.split('&') {
                if !memberships.contains_key(member) {
                    return Err(Error::InvalidConfig(format!("no membership function for `{member}`")));
                }
            }
            by_key.insert(w.evidence_key.clone(), w.clone());
        }
        let groups = weights.iter().map(group_of).collect::<Result<Vec<_>>>()?;
        let ranked = rank_groups(&groups, cfg);
        let mut scorer = WoeScorer {
            weights: by_key,
            memberships: memberships.clone(),
            ranked,
            oracle: Box::new(AlwaysIndependent),
            cfg: *cfg,
            prior_odds,
        };
        if cfg.version == SearchVersion::V1 {
            let cases = training
                .iter()
                .map(|c| OracleCase {
                    evidence: scorer.evidence(c),
                    observed: c.present().map(|(v, _)| v.to_string()).collect(),
                })
                .collect();
            scorer.oracle = Box::new(TrainingOracle::new(cases, cfg.significance));
        }
        Ok(scorer)
    }

    /// Single evidence keys that hold for a case at their trained cuts.
    pub fn evidence(&self, case: &CaseRecord) -> BTreeSet<String> {
        self.weights
            .values()
            .filter(|w| !w.evidence_key.contains('&'))
            .filter(|w| holds(case, &w.evidence_key, &self.memberships[&w.evidence_key], w.alpha) == Some(true))
            .map(|w| w.evidence_key.clone())
            .collect()
    }

    pub fn prior_odds(&self) -> f64 {
        self.prior_odds
    }

    pub fn score(&self, case: &CaseRecord) -> Result<(CaseScore, Selection)> {
        let evidence = self.evidence(case);
        let selection = select(&evidence, &self.ranked, self.oracle.as_ref(), &self.cfg);
        let chosen: Vec<EvidenceWeight> = selection
            .selected
            .iter()
            .map(|g| self.weights[&g.group.key()].clone())
            .collect();
        Ok((score_case(self.prior_odds, &chosen)?, selection))
    }
}

/// Logistic baseline on the raw variable values of the training cases,
/// pruned at the given significance.
pub fn train_logistic(
    cases: &[CaseRecord],
    variables: &[String],
    positive: &str,
    significance: f64,
) -> Result<(LogisticModel, DesignMatrix)> {
    let labels = binary_labels(cases, positive)?;
    let rows = cases
        .iter()
        .zip(&labels)
        .filter_map(|(c, l)| {
            l.map(|response| DesignRow {
                id: c.id.clone(),
                values: variables.iter().map(|v| c.value(v)).collect(),
                response,
            })
        })
        .collect();
    let design = DesignMatrix::from_rows(variables.to_vec(), rows)?;
    let cfg = FitConfig::default();
    let full = fit(&design, &cfg)?;
    let pruned = prune(&full, &design, significance, &cfg)?;
    Ok((pruned, design))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticBin, SyntheticSpec, SyntheticVariable};
    use crate::mass::Method;

    fn spec(seed: u64, prefix: &str, cases: usize) -> SyntheticSpec {
        let bins = |a: f64, b: f64, c: f64| {
            vec![
                SyntheticBin { state: "low".into(), lower: a, upper: b },
                SyntheticBin { state: "high".into(), lower: b, upper: c },
            ]
        };
        SyntheticSpec {
            seed,
            frame: vec!["pos".into(), "neg".into()],
            priors: vec![0.5, 0.5],
            variables: vec![
                SyntheticVariable { name: "x".into(), bins: bins(0.0, 5.0, 10.0), conditionals: vec![vec![0.2, 0.8], vec![0.8, 0.2]] },
                SyntheticVariable { name: "y".into(), bins: bins(0.0, 1.0, 2.0), conditionals: vec![vec![0.3, 0.7], vec![0.6, 0.4]] },
                SyntheticVariable { name: "z".into(), bins: bins(0.0, 1.0, 2.0), conditionals: vec![vec![0.5, 0.5], vec![0.5, 0.5]] },
            ],
            cases,
            missingness: 0.05,
            id_prefix: Some(prefix.into()),
        }
    }

    fn memberships() -> IndexMap<String, MembershipFunction> {
        let mut m = IndexMap::new();
        m.insert("x=high".to_string(), MembershipFunction::new(vec![(3.0, 0.0), (7.0, 1.0)]).unwrap());
        m.insert("y=high".to_string(), MembershipFunction::new(vec![(0.5, 0.0), (1.5, 1.0)]).unwrap());
        m.insert("z=high".to_string(), MembershipFunction::new(vec![(0.5, 0.0), (1.5, 1.0)]).unwrap());
        m
    }

    #[test]
    fn ds_evaluation_runs_all_variants() {
        let s = spec(1, "tr", 300);
        let train = generate_synthetic(&s).unwrap();
        let test = generate_synthetic(&spec(2, "te", 100)).unwrap();
        let disc = s.discretization().unwrap();
        let frame = s.frame().unwrap();
        for v in ["cd3", "cd5", "cd7"] {
            let variant = Variant::parse(v, &[]).unwrap();
            let cfg = EstimateConfig::new(Method::Consonant);
            let e = evaluate_ds(&train, &test, &disc, &frame, &cfg, &variant, &ReportConfig::default()).unwrap();
            assert_eq!(e.tally.cases(), 100);
            // x is informative, so most cases should at least match
            assert!(e.tally.matched() > 50, "{v}: {:?}", e.tally);
        }
        assert!(matches!(
            evaluate_ds(&train, &train, &disc, &frame, &EstimateConfig::new(Method::Consonant), &Variant::All, &ReportConfig::default()),
            Err(Error::OverlappingIds(_))
        ));
    }

    #[test]
    fn single_case_train_equals_test() {
        let frame = Frame::new(["a", "b"]).unwrap();
        let mut disc = Discretization::new();
        disc.insert("v", crate::data::VariableBins::from_breakpoints(&["lo", "hi"], &[1.0]).unwrap());
        let train = [CaseRecord::new("t1").with_value("v", Some(2.0)).with_outcome("a")];
        let test = [CaseRecord::new("q1").with_value("v", Some(2.0)).with_outcome("a")];
        let e = evaluate_ds(&train, &test, &disc, &frame, &EstimateConfig::new(Method::Consonant), &Variant::All, &ReportConfig::default())
            .unwrap();
        assert_eq!((e.tally.s_pct(), e.tally.nons_pct(), e.tally.f_pct()), (100.0, 0.0, 0.0));
    }

    #[test]
    fn woe_training_and_scoring() {
        let train = generate_synthetic(&spec(3, "tr", 400)).unwrap();
        let t = train_woe(&train, &memberships(), "pos", &GroupOptions { pairs: true, min_support: 5 }).unwrap();
        let w = |k: &str| t.weights.iter().find(|w| w.evidence_key == k).unwrap().weight;
        assert!(w("x=high") > 0.5);
        assert!(w("z=high").abs() < 0.5);
        assert!(t.weights.iter().any(|w| w.evidence_key.contains('&')));

        let labels = binary_labels(&train, "pos").unwrap();
        let odds = prior_odds(&labels).unwrap();
        for version in [SearchVersion::V1, SearchVersion::V2] {
            let cfg = SearchConfig { version, ..SearchConfig::default() };
            let scorer = WoeScorer::new(&t.weights, &memberships(), &train, &cfg, odds).unwrap();
            let empty = CaseRecord::new("e");
            let (score, sel) = scorer.score(&empty).unwrap();
            assert!(sel.selected.is_empty());
            assert!((score.probability - odds / (1.0 + odds)).abs() < 1e-12);
            let case = CaseRecord::new("c").with_value("x", Some(9.0)).with_value("y", Some(1.9));
            let (score, sel) = scorer.score(&case).unwrap();
            assert!(!sel.selected.is_empty());
            assert!(score.probability > 0.5);
        }
    }

    #[test]
    fn symmetric_training_gives_zero_weights() {
        let mut cases = Vec::new();
        for (i, x) in [1.0, 4.0, 6.0, 9.0].iter().enumerate() {
            for label in ["pos", "neg"] {
                cases.push(CaseRecord::new(format!("{label}{i}")).with_value("x", Some(*x)).with_outcome(label));
            }
        }
        let t = train_woe(&cases, &memberships(), "pos", &GroupOptions::default()).unwrap();
        assert!(t.weights.iter().all(|w| w.weight == 0.0));
        assert_eq!(t.skipped.len(), 2);
    }

    #[test]
    fn non_binary_hypothesis_refused() {
        let cases = [
            CaseRecord::new("1").with_outcome("a"),
            CaseRecord::new("2").with_outcome("b"),
            CaseRecord::new("3").with_outcome("c"),
        ];
        assert!(matches!(binary_labels(&cases, "a"), Err(Error::NonBinaryHypothesis(_))));
        assert!(matches!(binary_labels(&cases[..2], "z"), Err(Error::NonBinaryHypothesis(_))));
    }

    #[test]
    fn logistic_baseline_on_synthetic() {
        let train = generate_synthetic(&spec(4, "tr", 400)).unwrap();
        let vars = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let (model, design) = train_logistic(&train, &vars, "pos", 0.95).unwrap();
        assert!(model.names.contains(&"x".to_string()));
        assert!(!design.dropped().is_empty());
        assert_eq!(design.len() + design.dropped().len(), 400);
    }
}
