//! Frame-of-discernment set algebra, mass functions, belief/plausibility and
//! Dempster's rule of combination.
//!
//! Subsets of a frame are bit-vectors (`OutcomeSet`) indexed by outcome
//! position, so a frame holds at most [`Frame::MAX_OUTCOMES`] outcomes. Mass
//! functions are sparse: only focal sets are stored, and combination iterates
//! over focal pairs rather than the full power set.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{BitAnd, BitOr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Raw sums deviating from one by at most this much are renormalized;
/// anything further is rejected.
pub const RENORMALIZE_LIMIT: f64 = 1e-6;

/// Conflict at or above `1 - TOTAL_CONFLICT_EPS` is treated as total conflict.
pub const TOTAL_CONFLICT_EPS: f64 = 1e-12;

/// An ordered list of distinct outcome labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    pub const MAX_OUTCOMES: usize = 30;

    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidFrame("a frame needs at least one outcome".into()));
        }
        if labels.len() > Self::MAX_OUTCOMES {
            return Err(Error::InvalidFrame(format!(
                "{} outcomes exceed the limit of {}",
                labels.len(),
                Self::MAX_OUTCOMES
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(Error::InvalidFrame(format!("outcome {i} has an empty label")));
            }
            if labels[..i].contains(label) {
                return Err(Error::InvalidFrame(format!("duplicate outcome `{label}`")));
            }
        }
        Ok(Frame { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The whole frame, θ.
    pub fn theta(&self) -> OutcomeSet {
        OutcomeSet::full(self.len())
    }

    pub fn singleton(&self, label: &str) -> Result<OutcomeSet> {
        self.index_of(label)
            .map(OutcomeSet::singleton)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    /// Builds a subset from outcome labels.
    pub fn set<I, S>(&self, labels: I) -> Result<OutcomeSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        labels
            .into_iter()
            .try_fold(OutcomeSet::EMPTY, |acc, l| Ok(acc | self.singleton(l.as_ref())?))
    }

    pub fn contains(&self, set: OutcomeSet) -> bool {
        set.is_subset_of(self.theta())
    }

    pub fn check(&self, set: OutcomeSet) -> Result<()> {
        if self.contains(set) {
            Ok(())
        } else {
            Err(Error::SetOutsideFrame(set.bits(), self.len()))
        }
    }

    pub fn complement(&self, set: OutcomeSet) -> OutcomeSet {
        OutcomeSet(!set.0 & self.theta().0)
    }

    /// Labels of the members of `set`, in frame order.
    pub fn labels_of(&self, set: OutcomeSet) -> Vec<&str> {
        set.indices().map(|i| self.label(i)).collect()
    }

    /// `{a,b}` style rendering of a subset.
    pub fn format_set(&self, set: OutcomeSet) -> String {
        format!("{{{}}}", self.labels_of(set).join(","))
    }
}

/// A subset of a frame, encoded as a bit-vector over outcome positions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeSet(u32);

impl OutcomeSet {
    pub const EMPTY: OutcomeSet = OutcomeSet(0);

    pub fn from_bits(bits: u32) -> Self {
        OutcomeSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(index: usize) -> Self {
        debug_assert!(index < Frame::MAX_OUTCOMES);
        OutcomeSet(1 << index)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= Frame::MAX_OUTCOMES);
        OutcomeSet(((1u64 << n) - 1) as u32)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_singleton(self) -> bool {
        self.len() == 1
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn union(self, other: Self) -> Self {
        OutcomeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        OutcomeSet(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member positions in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }
}

impl BitOr for OutcomeSet {
    type Output = OutcomeSet;
    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl BitAnd for OutcomeSet {
    type Output = OutcomeSet;
    fn bitand(self, rhs: Self) -> Self {
        self.intersection(rhs)
    }
}

/// `[Bel(A), Pl(A)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefInterval {
    pub bel: f64,
    pub pl: f64,
}

impl BeliefInterval {
    fn new(bel: f64, pl: f64) -> Self {
        let bel = bel.clamp(0.0, 1.0);
        // rounding can leave pl a few ulps under bel
        let pl = pl.clamp(bel, 1.0);
        BeliefInterval { bel, pl }
    }

    pub fn width(&self) -> f64 {
        self.pl - self.bel
    }
}

impl fmt::Display for BeliefInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.4}, {:.4}]", self.bel, self.pl)
    }
}

/// A normalized basic belief assignment over the subsets of a frame.
///
/// Only focal sets (strictly positive mass) are stored; `m(∅)` is always 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<OutcomeSet, f64>,
}

impl MassFunction {
    /// Builds a mass function from `(set, mass)` pairs.
    ///
    /// Duplicate sets are summed and zero masses dropped. A raw total within
    /// [`RENORMALIZE_LIMIT`] of one is rescaled to one; anything else is an
    /// error, as are negative masses and positive mass on the empty set.
    pub fn new<I>(frame: Frame, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OutcomeSet, f64)>,
    {
        let mut focal = BTreeMap::new();
        for (set, mass) in entries {
            frame.check(set)?;
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidMass(format!(
                    "mass {mass} on {} is not a nonnegative number",
                    frame.format_set(set)
                )));
            }
            if mass == 0.0 {
                continue;
            }
            if set.is_empty() {
                return Err(Error::InvalidMass("the empty set cannot carry mass".into()));
            }
            *focal.entry(set).or_insert(0.0) += mass;
        }
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > RENORMALIZE_LIMIT {
            return Err(Error::InvalidMass(format!("masses sum to {total}, not 1")));
        }
        Ok(Self::normalized(frame, focal))
    }

    /// Divides every mass by the total. Callers guarantee a positive total.
    pub(crate) fn normalized(frame: Frame, mut focal: BTreeMap<OutcomeSet, f64>) -> Self {
        focal.retain(|_, m| *m > 0.0);
        let total: f64 = focal.values().sum();
        if total != 1.0 {
            for m in focal.values_mut() {
                *m /= total;
            }
        }
        MassFunction { frame, focal }
    }

    /// Total ignorance: all mass on θ.
    pub fn vacuous(frame: Frame) -> Self {
        let theta = frame.theta();
        MassFunction {
            frame,
            focal: BTreeMap::from([(theta, 1.0)]),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Focal sets and masses in ascending bit order.
    pub fn focal(&self) -> impl Iterator<Item = (OutcomeSet, f64)> + '_ {
        self.focal.iter().map(|(s, m)| (*s, *m))
    }

    /// Focal sets ordered by cardinality, then by bit pattern.
    pub fn focal_sorted(&self) -> Vec<(OutcomeSet, f64)> {
        let mut v: Vec<_> = self.focal().collect();
        v.sort_by_key(|(s, _)| (s.len(), s.bits()));
        v
    }

    pub fn focal_count(&self) -> usize {
        self.focal.len()
    }

    pub fn mass(&self, set: OutcomeSet) -> f64 {
        self.focal.get(&set).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.focal.values().sum()
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal.contains_key(&self.frame.theta())
    }

    /// True when the focal sets form a chain under inclusion.
    pub fn is_consonant(&self) -> bool {
        let chain = self.focal_sorted();
        chain
            .windows(2)
            .all(|w| w[0].0.is_subset_of(w[1].0))
    }

    /// `Bel(A)`: total mass on focal sets contained in `a`.
    pub fn belief(&self, a: OutcomeSet) -> Result<f64> {
        self.frame.check(a)?;
        if a.is_empty() {
            return Ok(0.0);
        }
        if a == self.frame.theta() {
            return Ok(1.0);
        }
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| b.is_subset_of(a))
            .map(|(_, m)| *m)
            .sum())
    }

    /// `Pl(A) = 1 - Bel(Ā)`.
    pub fn plausibility(&self, a: OutcomeSet) -> Result<f64> {
        self.frame.check(a)?;
        Ok(1.0 - self.belief(self.frame.complement(a))?)
    }

    pub fn interval(&self, a: OutcomeSet) -> Result<BeliefInterval> {
        if a.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(BeliefInterval::new(self.belief(a)?, self.plausibility(a)?))
    }

    /// Dempster's rule; see [`combine`].
    pub fn combine(&self, other: &MassFunction) -> Result<CombinationReport> {
        combine(self, other)
    }

    pub fn to_doc(&self) -> MassDoc {
        MassDoc {
            frame: self.frame.labels().to_vec(),
            focal: self
                .focal_sorted()
                .into_iter()
                .map(|(set, mass)| FocalDoc {
                    set: self.frame.labels_of(set).into_iter().map(String::from).collect(),
                    mass: round_significant(mass, 12),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &MassDoc) -> Result<Self> {
        let frame = Frame::new(doc.frame.iter().cloned())?;
        let entries = doc
            .focal
            .iter()
            .map(|f| Ok((frame.set(&f.set)?, f.mass)))
            .collect::<Result<Vec<_>>>()?;
        MassFunction::new(frame, entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("mass document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MassDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }
}

impl fmt::Display for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .focal_sorted()
            .into_iter()
            .map(|(s, m)| format!("{}:{:.6}", self.frame.format_set(s), m))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// JSON form of a mass function: `{"frame": [...], "focal": [{"set": [...], "mass": x}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDoc {
    pub frame: Vec<String>,
    pub focal: Vec<FocalDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalDoc {
    pub set: Vec<String>,
    pub mass: f64,
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Result of Dempster's rule: the normalized mass and the discarded conflict `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationReport {
    pub result: MassFunction,
    pub conflict: f64,
}

/// Dempster's rule of combination.
///
/// Products of focal masses are accumulated on pairwise intersections; the
/// mass landing on the empty set is the conflict `K`, and the rest is
/// renormalized. Total conflict is an error.
pub fn combine(m1: &MassFunction, m2: &MassFunction) -> Result<CombinationReport> {
    if m1.frame != m2.frame {
        return Err(Error::FrameMismatch);
    }
    let mut acc: BTreeMap<OutcomeSet, f64> = BTreeMap::new();
    let mut conflict = 0.0;
    for (b, mb) in &m1.focal {
        for (c, mc) in &m2.focal {
            let product = mb * mc;
            let meet = *b & *c;
            if meet.is_empty() {
                conflict += product;
            } else {
                *acc.entry(meet).or_insert(0.0) += product;
            }
        }
    }
    let agreement: f64 = acc.values().sum();
    if conflict >= 1.0 - TOTAL_CONFLICT_EPS || agreement <= TOTAL_CONFLICT_EPS {
        return Err(Error::TotalConflict { conflict });
    }
    Ok(CombinationReport {
        result: MassFunction::normalized(m1.frame.clone(), acc),
        conflict: conflict.clamp(0.0, 1.0),
    })
}

/// Left fold of [`combine`]; the reported conflict is `1 - Π(1 - K_i)`.
pub fn combine_all(ms: &[MassFunction]) -> Result<CombinationReport> {
    let (first, rest) = ms.split_first().ok_or(Error::NothingToCombine)?;
    let mut result = first.clone();
    let mut retained = 1.0;
    for (offset, m) in rest.iter().enumerate() {
        let report = combine(&result, m).map_err(|e| match e {
            Error::TotalConflict { .. } => Error::TotalConflictAt { index: offset + 1 },
            other => other,
        })?;
        retained *= 1.0 - report.conflict;
        result = report.result;
    }
    Ok(CombinationReport {
        result,
        conflict: 1.0 - retained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Frame {
        Frame::new(["a", "b", "c"]).unwrap()
    }

    fn mass(frame: &Frame, entries: &[(&[&str], f64)]) -> MassFunction {
        let e = entries
            .iter()
            .map(|(labels, m)| (frame.set(labels.iter()).unwrap(), *m));
        MassFunction::new(frame.clone(), e).unwrap()
    }

    #[test]
    fn frame_rejects_bad_labels() {
        assert!(Frame::new(Vec::<String>::new()).is_err());
        assert!(Frame::new(["a", "a"]).is_err());
        assert!(Frame::new(["a", " "]).is_err());
        assert!(Frame::new((0..31).map(|i| format!("o{i}"))).is_err());
        assert_eq!(Frame::new((0..30).map(|i| format!("o{i}"))).unwrap().theta().len(), 30);
    }

    #[test]
    fn constructor_renormalizes_small_drift_only() {
        let f = abc();
        let m = MassFunction::new(f.clone(), [(f.theta(), 1.0 + 5e-7)]).unwrap();
        assert_eq!(m.mass(f.theta()), 1.0);
        assert!(MassFunction::new(f.clone(), [(f.theta(), 0.9)]).is_err());
        assert!(MassFunction::new(f.clone(), [(OutcomeSet::EMPTY, 0.5), (f.theta(), 0.5)]).is_err());
        assert!(MassFunction::new(f.clone(), [(OutcomeSet::from_bits(0b1000), 1.0)]).is_err());
        assert!(MassFunction::new(f, [(OutcomeSet::from_bits(1), -0.1), (OutcomeSet::from_bits(2), 1.1)]).is_err());
    }

    #[test]
    fn vacuous_belief_is_zero_on_proper_subsets() {
        let f = abc();
        let m = MassFunction::vacuous(f.clone());
        for bits in 1..7 {
            assert_eq!(m.belief(OutcomeSet::from_bits(bits)).unwrap(), 0.0);
        }
        assert_eq!(m.plausibility(f.singleton("a").unwrap()).unwrap(), 1.0);
        let iv = m.interval(f.singleton("a").unwrap()).unwrap();
        assert_eq!((iv.bel, iv.pl), (0.0, 1.0));
    }

    #[test]
    fn belief_sums_subset_masses() {
        let f = abc();
        let m = mass(&f, &[(&["a"], 0.5), (&["a", "b"], 1.0 / 3.0), (&["a", "b", "c"], 1.0 / 6.0)]);
        let ab = f.set(["a", "b"]).unwrap();
        assert!((m.belief(ab).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(m.belief(f.theta()).unwrap(), 1.0);
        assert_eq!(m.belief(OutcomeSet::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn plausibility_and_interval_examples() {
        let f = abc();
        let m = mass(&f, &[(&["a"], 0.5), (&["a", "b"], 0.3), (&["a", "b", "c"], 0.2)]);
        let b = f.singleton("b").unwrap();
        assert!((m.plausibility(b).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(m.plausibility(OutcomeSet::EMPTY).unwrap(), 0.0);
        let iv = m.interval(f.singleton("a").unwrap()).unwrap();
        assert!((iv.bel - 0.5).abs() < 1e-12 && (iv.pl - 1.0).abs() < 1e-12);
        assert!(matches!(m.interval(OutcomeSet::EMPTY), Err(Error::EmptySet)));

        let certain = mass(&f, &[(&["a"], 1.0)]);
        let iv = certain.interval(f.singleton("a").unwrap()).unwrap();
        assert_eq!((iv.bel, iv.pl), (1.0, 1.0));
    }

    #[test]
    fn set_outside_frame_is_rejected() {
        let m = MassFunction::vacuous(abc());
        assert!(matches!(
            m.belief(OutcomeSet::from_bits(0b1001)),
            Err(Error::SetOutsideFrame(..))
        ));
    }

    #[test]
    fn combine_with_vacuous_is_identity() {
        let f = abc();
        let m = mass(&f, &[(&["a"], 0.5), (&["a", "b"], 0.3), (&["a", "b", "c"], 0.2)]);
        let r = combine(&m, &MassFunction::vacuous(f)).unwrap();
        assert_eq!(r.conflict, 0.0);
        for (s, x) in m.focal() {
            assert!((r.result.mass(s) - x).abs() < 1e-15);
        }
        assert_eq!(r.result.focal_count(), 3);
    }

    #[test]
    fn zadeh_example() {
        let f = abc();
        let m1 = mass(&f, &[(&["a"], 0.9), (&["c"], 0.1)]);
        let m2 = mass(&f, &[(&["b"], 0.9), (&["c"], 0.1)]);
        let r = combine(&m1, &m2).unwrap();
        assert!((r.conflict - 0.99).abs() < 1e-12);
        assert!((r.result.mass(f.singleton("c").unwrap()) - 1.0).abs() < 1e-12);
        assert_eq!(r.result.focal_count(), 1);
    }

    #[test]
    fn disjoint_certainties_conflict_totally() {
        let f = Frame::new(["a", "b"]).unwrap();
        let m1 = mass(&f, &[(&["a"], 1.0)]);
        let m2 = mass(&f, &[(&["b"], 1.0)]);
        assert!(matches!(combine(&m1, &m2), Err(Error::TotalConflict { .. })));
        let v = MassFunction::vacuous(f);
        assert!(matches!(
            combine_all(&[v, m1, m2]),
            Err(Error::TotalConflictAt { index: 2 })
        ));
    }

    #[test]
    fn combine_rejects_frame_mismatch() {
        let m1 = MassFunction::vacuous(abc());
        let m2 = MassFunction::vacuous(Frame::new(["a", "b"]).unwrap());
        assert!(matches!(combine(&m1, &m2), Err(Error::FrameMismatch)));
    }

    #[test]
    fn combine_all_edge_cases() {
        let f = abc();
        let m = mass(&f, &[(&["a"], 0.7), (&["a", "b", "c"], 0.3)]);
        let r = combine_all(std::slice::from_ref(&m)).unwrap();
        assert_eq!(r.result, m);
        assert_eq!(r.conflict, 0.0);
        let v = MassFunction::vacuous(f);
        let r = combine_all(&[v.clone(), v.clone()]).unwrap();
        assert!(r.result.is_vacuous());
        assert!(matches!(combine_all(&[]), Err(Error::NothingToCombine)));
    }

    #[test]
    fn cumulative_conflict() {
        let f = abc();
        let m1 = mass(&f, &[(&["a"], 0.5), (&["b", "c"], 0.5)]);
        let m2 = mass(&f, &[(&["b"], 0.5), (&["a", "c"], 0.5)]);
        let m3 = mass(&f, &[(&["c"], 0.5), (&["a", "b"], 0.5)]);
        let r12 = combine(&m1, &m2).unwrap();
        let r123 = combine(&r12.result, &m3).unwrap();
        let all = combine_all(&[m1, m2, m3]).unwrap();
        let expected = 1.0 - (1.0 - r12.conflict) * (1.0 - r123.conflict);
        assert!((all.conflict - expected).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let f = abc();
        let m = mass(&f, &[(&["a"], 0.5), (&["a", "b"], 1.0 / 3.0), (&["a", "b", "c"], 1.0 / 6.0)]);
        let text = m.to_json();
        assert!(text.contains("0.333333333333"));
        let back = MassFunction::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        for (s, x) in m.focal() {
            assert!((back.mass(s) - x).abs() < 1e-11);
        }
    }

    fn mass_from_entries(n: usize, entries: Vec<(u32, u32)>) -> MassFunction {
        let frame = Frame::new((0..n).map(|i| format!("o{i}"))).unwrap();
        let total: u32 = entries.iter().map(|(_, w)| w).sum();
        let e = entries
            .into_iter()
            .map(|(bits, w)| (OutcomeSet::from_bits(bits), w as f64 / total as f64));
        MassFunction::new(frame, e).unwrap()
    }

    /// `count` random mass functions over one shared frame of 2..=max_n outcomes.
    fn arb_masses(count: usize, max_n: usize, max_focal: usize) -> impl Strategy<Value = Vec<MassFunction>> {
        (2..=max_n).prop_flat_map(move |n| {
            let full = (1u32 << n) - 1;
            let one = prop::collection::vec((1..=full, 1u32..1000), 1..=max_focal);
            prop::collection::vec(one, count).prop_map(move |all| {
                all.into_iter().map(|e| mass_from_entries(n, e)).collect()
            })
        })
    }

    fn arb_mass(max_n: usize, max_focal: usize) -> impl Strategy<Value = MassFunction> {
        arb_masses(1, max_n, max_focal).prop_map(|mut v| v.pop().unwrap())
    }

    fn brute_belief(m: &MassFunction, a: OutcomeSet) -> f64 {
        // sum over every subset of a, not just the focal map
        let n = m.frame().len();
        (1u32..(1 << n))
            .map(OutcomeSet::from_bits)
            .filter(|s| s.is_subset_of(a))
            .map(|s| m.mass(s))
            .sum()
    }

    fn assert_same(a: &MassFunction, b: &MassFunction, tol: f64) {
        for bits in 1u32..(1 << a.frame().len()) {
            let s = OutcomeSet::from_bits(bits);
            assert!((a.mass(s) - b.mass(s)).abs() <= tol, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn normalization_holds(m in arb_mass(5, 8)) {
            prop_assert!((m.total() - 1.0).abs() <= NORMALIZATION_TOLERANCE);
        }

        #[test]
        fn duality_monotonicity_superadditivity(m in arb_mass(5, 8), a in 0u32..32, b in 0u32..32) {
            let n = m.frame().len();
            let mask = (1u32 << n) - 1;
            let (a, b) = (OutcomeSet::from_bits(a & mask), OutcomeSet::from_bits(b & mask));
            let f = m.frame();
            prop_assert_eq!(m.plausibility(a).unwrap(), 1.0 - m.belief(f.complement(a)).unwrap());
            let ab = a | b;
            prop_assert!(m.belief(a).unwrap() <= m.belief(ab).unwrap() + 1e-12);
            prop_assert!(m.plausibility(a).unwrap() <= m.plausibility(ab).unwrap() + 1e-12);
            let lhs = m.belief(ab).unwrap();
            let rhs = m.belief(a).unwrap() + m.belief(b).unwrap() - m.belief(a & b).unwrap();
            prop_assert!(lhs >= rhs - 1e-12);
            if !a.is_empty() {
                let iv = m.interval(a).unwrap();
                prop_assert!(0.0 <= iv.bel && iv.bel <= iv.pl && iv.pl <= 1.0);
            }
        }

        #[test]
        fn belief_matches_brute_force(m in arb_mass(5, 8), a in 0u32..32) {
            let a = OutcomeSet::from_bits(a & ((1 << m.frame().len()) - 1));
            prop_assert!((m.belief(a).unwrap() - brute_belief(&m, a)).abs() < 1e-12);
        }

        #[test]
        fn combine_commutes(ms in arb_masses(2, 5, 8)) {
            match (combine(&ms[0], &ms[1]), combine(&ms[1], &ms[0])) {
                (Ok(x), Ok(y)) => {
                    assert_same(&x.result, &y.result, 1e-9);
                    prop_assert!((x.conflict - y.conflict).abs() < 1e-12);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric failure"),
            }
        }

        #[test]
        fn combine_associates(ms in arb_masses(3, 5, 8)) {
            let left = combine(&ms[0], &ms[1]).and_then(|r| combine(&r.result, &ms[2]));
            let right = combine(&ms[1], &ms[2]).and_then(|r| combine(&ms[0], &r.result));
            if let (Ok(x), Ok(y)) = (left, right) {
                assert_same(&x.result, &y.result, 1e-9);
            }
        }
    }
}
