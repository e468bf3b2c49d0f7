//! Symptom-group ranking and evidence selection.
//!
//! Groups of evidence keys are ranked by a weighted average of reliability
//! (Wilson lower bound on the group's success rate) and specificity (group
//! size relative to the largest group). Two greedy searches then pick a
//! covering for a case: [`select_v1`] screens candidates with chi-square
//! independence tests against what has already been picked, while
//! [`select_v2`] only bounds how much picked groups may overlap.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::Read;
use std::path::Path;

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::woe::variable_of;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub df: u32,
}

fn pearson_test(cells: &[(u64, f64)], df: u32) -> ChiSquare {
    let statistic: f64 = cells
        .iter()
        .map(|&(observed, expected)| {
            let d = observed as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    ChiSquare {
        statistic,
        p_value: dist.sf(statistic),
        df,
    }
}

/// Pearson chi-square test of independence on a 2×2 table (df = 1).
pub fn chi_square_2way(table: [[u64; 2]; 2]) -> Result<ChiSquare> {
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    if rows.contains(&0) || cols.contains(&0) {
        return Err(Error::ZeroMarginal);
    }
    let n = (rows[0] + rows[1]) as f64;
    let mut cells = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            cells.push((table[i][j], rows[i] as f64 * cols[j] as f64 / n));
        }
    }
    Ok(pearson_test(&cells, 1))
}

/// Pearson test of mutual independence on a 2×2×2 table (df = 4).
///
/// Expected counts are `N·p(a)·p(b)·p(c)` from the one-way marginals.
pub fn chi_square_3way(table: [[[u64; 2]; 2]; 2]) -> Result<ChiSquare> {
    let mut margins = [[0u64; 2]; 3];
    let mut n = 0u64;
    for (i, plane) in table.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, &count) in row.iter().enumerate() {
                margins[0][i] += count;
                margins[1][j] += count;
                margins[2][k] += count;
                n += count;
            }
        }
    }
    if n == 0 || margins.iter().any(|m| m.contains(&0)) {
        return Err(Error::ZeroMarginal);
    }
    let n = n as f64;
    let p = |axis: usize, v: usize| margins[axis][v] as f64 / n;
    let mut cells = Vec::with_capacity(8);
    for (i, plane) in table.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (k, &count) in row.iter().enumerate() {
                cells.push((count, n * p(0, i) * p(1, j) * p(2, k)));
            }
        }
    }
    Ok(pearson_test(&cells, 4))
}

/// Lower end of the two-sided Wilson score interval for `k` successes in `n`.
pub fn wilson_lower_bound(k: u64, n: u64, confidence: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - spread) / (1.0 + z2 / n)).max(0.0)
}

/// A conjunction of evidence keys with its training support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymptomGroup {
    pub members: BTreeSet<String>,
    /// Training cases exhibiting every member.
    pub support: u64,
    /// Of those, cases where the hypothesis held.
    pub successes: u64,
}

impl SymptomGroup {
    pub fn new<I, S>(members: I, support: u64, successes: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let members: BTreeSet<String> = members.into_iter().map(Into::into).collect();
        if members.is_empty() {
            return Err(Error::InvalidConfig("a symptom group needs at least one member".into()));
        }
        if successes > support {
            return Err(Error::InvalidCounts(format!("{successes} successes out of {support}")));
        }
        Ok(SymptomGroup {
            members,
            support,
            successes,
        })
    }

    pub fn p_hat(&self) -> f64 {
        if self.support == 0 {
            0.0
        } else {
            self.successes as f64 / self.support as f64
        }
    }

    /// Members joined with `&`.
    pub fn key(&self) -> String {
        self.members.iter().cloned().collect::<Vec<_>>().join("&")
    }

    pub fn applies_to(&self, evidence: &BTreeSet<String>) -> bool {
        self.members.is_subset(evidence)
    }

    pub fn overlap(&self, other: &SymptomGroup) -> usize {
        self.members.intersection(&other.members).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedGroup {
    pub group: SymptomGroup,
    pub reliability: f64,
    pub specificity: f64,
    pub score: f64,
}

/// Relative weights of reliability and specificity; only their ratio matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankWeights {
    reliability: f64,
    specificity: f64,
}

impl RankWeights {
    pub fn new(reliability: f64, specificity: f64) -> Result<Self> {
        let total = reliability + specificity;
        if reliability < 0.0 || specificity < 0.0 || !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "rank weights ({reliability}, {specificity}) must be nonnegative and not both zero"
            )));
        }
        Ok(RankWeights {
            reliability: reliability / total,
            specificity: specificity / total,
        })
    }

    pub fn reliability(&self) -> f64 {
        self.reliability
    }

    pub fn specificity(&self) -> f64 {
        self.specificity
    }
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights {
            reliability: 0.5,
            specificity: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchVersion {
    /// Chi-square independence screening.
    V1,
    /// Bounded member overlap.
    V2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub version: SearchVersion,
    /// Independence is rejected when a test's p-value falls below this.
    pub significance: f64,
    pub max_overlap: usize,
    pub min_support: u64,
    pub confidence: f64,
    pub weights: RankWeights,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidConfig(format!("significance {} outside (0, 1)", self.significance)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        Ok(())
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            version: SearchVersion::V1,
            significance: 0.05,
            max_overlap: 1,
            min_support: 1,
            confidence: 0.95,
            weights: RankWeights::default(),
        }
    }
}

/// Ranks groups meeting the minimum support, best first.
///
/// Ties break toward smaller groups, then lexicographically by members.
pub fn rank_groups(groups: &[SymptomGroup], cfg: &SearchConfig) -> Vec<RankedGroup> {
    let eligible: Vec<&SymptomGroup> = groups
        .iter()
        .filter(|g| g.support > 0 && g.support >= cfg.min_support)
        .collect();
    let max_size = eligible.iter().map(|g| g.members.len()).max().unwrap_or(1) as f64;
    let mut ranked: Vec<RankedGroup> = eligible
        .into_iter()
        .map(|g| {
            let reliability = wilson_lower_bound(g.successes, g.support, cfg.confidence);
            let specificity = g.members.len() as f64 / max_size;
            RankedGroup {
                group: g.clone(),
                reliability,
                specificity,
                score: cfg.weights.reliability * reliability + cfg.weights.specificity * specificity,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.group.members.len().cmp(&b.group.members.len()))
            .then_with(|| a.group.members.cmp(&b.group.members))
    });
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dependence {
    pub dependent: bool,
    pub statistic: Option<f64>,
}

impl Dependence {
    pub const INDEPENDENT: Dependence = Dependence {
        dependent: false,
        statistic: None,
    };
}

/// Answers independence queries between pieces of evidence.
pub trait DependenceOracle {
    fn pairwise(&self, a: &SymptomGroup, b: &SymptomGroup) -> Dependence;
    fn three_way(&self, a: &SymptomGroup, b: &SymptomGroup, c: &SymptomGroup) -> Dependence;
}

/// Declares everything independent.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysIndependent;

impl DependenceOracle for AlwaysIndependent {
    fn pairwise(&self, _: &SymptomGroup, _: &SymptomGroup) -> Dependence {
        Dependence::INDEPENDENT
    }

    fn three_way(&self, _: &SymptomGroup, _: &SymptomGroup, _: &SymptomGroup) -> Dependence {
        Dependence::INDEPENDENT
    }
}

/// One training case as seen by [`TrainingOracle`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleCase {
    /// Evidence keys that hold for the case.
    pub evidence: BTreeSet<String>,
    /// Variables with a recorded value.
    pub observed: BTreeSet<String>,
}

/// Chi-square screens over training cases.
///
/// A case takes part in a test only if every variable involved was
/// observed. Tables with an empty margin cannot show dependence and are
/// reported as independent.
#[derive(Debug, Clone)]
pub struct TrainingOracle {
    cases: Vec<OracleCase>,
    significance: f64,
}

impl TrainingOracle {
    pub fn new(cases: Vec<OracleCase>, significance: f64) -> Self {
        TrainingOracle { cases, significance }
    }

    fn usable<'a>(&'a self, groups: &'a [&'a SymptomGroup]) -> impl Iterator<Item = &'a OracleCase> + 'a {
        self.cases.iter().filter(move |c| {
            groups
                .iter()
                .flat_map(|g| g.members.iter())
                .all(|k| c.observed.contains(variable_of(k)))
        })
    }

    fn verdict(&self, test: Result<ChiSquare>) -> Dependence {
        match test {
            Ok(t) => Dependence {
                dependent: t.p_value < self.significance,
                statistic: Some(t.statistic),
            },
            Err(_) => Dependence::INDEPENDENT,
        }
    }
}

impl DependenceOracle for TrainingOracle {
    fn pairwise(&self, a: &SymptomGroup, b: &SymptomGroup) -> Dependence {
        let mut table = [[0u64; 2]; 2];
        for case in self.usable(&[a, b]) {
            let i = usize::from(!a.applies_to(&case.evidence));
            let j = usize::from(!b.applies_to(&case.evidence));
            table[i][j] += 1;
        }
        self.verdict(chi_square_2way(table))
    }

    fn three_way(&self, a: &SymptomGroup, b: &SymptomGroup, c: &SymptomGroup) -> Dependence {
        let mut table = [[[0u64; 2]; 2]; 2];
        for case in self.usable(&[a, b, c]) {
            let i = usize::from(!a.applies_to(&case.evidence));
            let j = usize::from(!b.applies_to(&case.evidence));
            let k = usize::from(!c.applies_to(&case.evidence));
            table[i][j][k] += 1;
        }
        self.verdict(chi_square_3way(table))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Pick { key: String, score: f64 },
    Eliminated { key: String, against: Vec<String>, statistic: Option<f64> },
    Rejected { key: String, against: String, overlap: usize },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Pick { key, score } => write!(f, "pick {key} (score {score:.4})"),
            TraceEvent::Eliminated { key, against, statistic } => {
                let stat = statistic.map_or_else(|| "n/a".to_string(), |s| format!("{s:.4}"));
                write!(f, "eliminate {key}: dependent on {} (chi2 {stat})", against.join(" + "))
            }
            TraceEvent::Rejected { key, against, overlap } => {
                write!(f, "reject {key}: overlaps {against} in {overlap} member(s)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub selected: Vec<RankedGroup>,
    pub trace: Vec<TraceEvent>,
}

impl Selection {
    pub fn keys(&self) -> Vec<String> {
        self.selected.iter().map(|g| g.group.key()).collect()
    }

    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|e| format!("{e}\n")).collect()
    }
}

fn applicable<'a>(evidence: &'a BTreeSet<String>, ranked: &'a [RankedGroup]) -> impl Iterator<Item = &'a RankedGroup> + 'a {
    ranked.iter().filter(move |g| g.group.applies_to(evidence))
}

/// Greedy selection with independence screening.
///
/// After each pick, candidates dependent on it are dropped; from the second
/// pick on, so are candidates that fail the three-way test together with the
/// latest pick and any earlier one.
pub fn select_v1(
    evidence: &BTreeSet<String>,
    ranked: &[RankedGroup],
    oracle: &dyn DependenceOracle,
) -> Selection {
    let mut queue: VecDeque<&RankedGroup> = applicable(evidence, ranked).collect();
    let mut out = Selection::default();
    while let Some(pick) = queue.pop_front() {
        out.trace.push(TraceEvent::Pick {
            key: pick.group.key(),
            score: pick.score,
        });
        let earlier: Vec<&SymptomGroup> = out.selected.iter().map(|g| &g.group).collect();
        let mut kept = VecDeque::with_capacity(queue.len());
        for cand in queue {
            let pair = oracle.pairwise(&pick.group, &cand.group);
            if pair.dependent {
                out.trace.push(TraceEvent::Eliminated {
                    key: cand.group.key(),
                    against: vec![pick.group.key()],
                    statistic: pair.statistic,
                });
                continue;
            }
            let triple = earlier.iter().find_map(|prev| {
                let d = oracle.three_way(prev, &pick.group, &cand.group);
                d.dependent.then(|| (prev.key(), d.statistic))
            });
            if let Some((prev, statistic)) = triple {
                out.trace.push(TraceEvent::Eliminated {
                    key: cand.group.key(),
                    against: vec![prev, pick.group.key()],
                    statistic,
                });
                continue;
            }
            kept.push_back(cand);
        }
        queue = kept;
        out.selected.push(pick.clone());
    }
    out
}

/// Greedy selection under a maximal-overlap condition.
pub fn select_v2(evidence: &BTreeSet<String>, ranked: &[RankedGroup], max_overlap: usize) -> Selection {
    let mut out = Selection::default();
    for cand in applicable(evidence, ranked) {
        let clash = out
            .selected
            .iter()
            .map(|s| (s, s.group.overlap(&cand.group)))
            .find(|(_, o)| *o > max_overlap);
        match clash {
            Some((s, overlap)) => out.trace.push(TraceEvent::Rejected {
                key: cand.group.key(),
                against: s.group.key(),
                overlap,
            }),
            None => {
                out.trace.push(TraceEvent::Pick {
                    key: cand.group.key(),
                    score: cand.score,
                });
                out.selected.push(cand.clone());
            }
        }
    }
    out
}

/// Selects with the version named in `cfg`.
pub fn select(
    evidence: &BTreeSet<String>,
    ranked: &[RankedGroup],
    oracle: &dyn DependenceOracle,
    cfg: &SearchConfig,
) -> Selection {
    match cfg.version {
        SearchVersion::V1 => select_v1(evidence, ranked, oracle),
        SearchVersion::V2 => select_v2(evidence, ranked, cfg.max_overlap),
    }
}

/// Symmetric matrix of pairwise correlations; `None` marks unavailable entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    names: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn new(names: Vec<String>, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = names.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig(format!("correlation matrix must be {n}×{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                let same = match (values[i][j], values[j][i]) {
                    (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
                    (None, None) => true,
                    _ => false,
                };
                if !same {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(CorrelationMatrix { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    /// Absolute correlation, with unavailable entries read as 0.
    fn strength(&self, i: usize, j: usize) -> f64 {
        self.values[i][j].map_or(0.0, f64::abs)
    }

    pub fn is_transpose_exact(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.values[i][j].map(f64::to_bits) == self.values[j][i].map(f64::to_bits)))
    }

    /// The submatrix over `keep`, in this matrix's order.
    pub fn restrict(&self, keep: &[String]) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep.contains(&self.names[i])).collect();
        CorrelationMatrix {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            values: idx.iter().map(|&i| idx.iter().map(|&j| self.values[i][j]).collect()).collect(),
        }
    }

    /// Reads a square CSV with variable names on the header row and first column.
    /// Empty or `NA` cells are unavailable.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().skip(1).map(String::from).collect();
        let mut values = Vec::with_capacity(names.len());
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if names.get(row).map(String::as_str) != Some(&record[0]) {
                return Err(Error::parse(source, line, format!("row `{}` does not match the header order", &record[0])));
            }
            let cells = record
                .iter()
                .skip(1)
                .map(|c| match c {
                    "" | "NA" => Ok(None),
                    v => v
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::parse(source, line, format!("`{v}` is not a number"))),
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(cells);
        }
        CorrelationMatrix::new(names, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            for v in row {
                match v {
                    Some(x) => out.push_str(&format!(",{x}")),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reduction {
    /// Keep variables in priority order, skipping any correlated above
    /// `threshold` with one already kept.
    Threshold { threshold: f64, priority: Vec<String> },
    /// Within each cluster of variables linked by correlations above
    /// `threshold`, keep only the variable with the largest summed link
    /// strength when that sum exceeds `cumulative`.
    Cumulative { threshold: f64, cumulative: f64 },
}

/// Retained variables, in matrix order.
pub fn reduce_variables(corr: &CorrelationMatrix, reduction: &Reduction) -> Vec<String> {
    let n = corr.len();
    let mut keep = vec![false; n];
    match reduction {
        Reduction::Threshold { threshold, priority } => {
            let mut order: Vec<usize> = priority
                .iter()
                .filter_map(|p| corr.names.iter().position(|n| n == p))
                .collect();
            order.dedup();
            for i in 0..n {
                if !order.contains(&i) {
                    order.push(i);
                }
            }
            for &i in &order {
                keep[i] = (0..n).all(|j| !keep[j] || corr.strength(i, j) <= *threshold);
            }
        }
        Reduction::Cumulative { threshold, cumulative } => {
            let linked = |i: usize, j: usize| i != j && corr.strength(i, j) > *threshold;
            let sums: Vec<f64> = (0..n)
                .map(|i| (0..n).filter(|&j| linked(i, j)).map(|j| corr.strength(i, j)).sum())
                .collect();
            let mut seen = vec![false; n];
            for start in 0..n {
                if seen[start] {
                    continue;
                }
                let mut cluster = vec![start];
                seen[start] = true;
                let mut head = 0;
                while head < cluster.len() {
                    let i = cluster[head];
                    head += 1;
                    for j in 0..n {
                        if !seen[j] && linked(i, j) {
                            seen[j] = true;
                            cluster.push(j);
                        }
                    }
                }
                // first maximum in matrix order
                let best = cluster
                    .iter()
                    .copied()
                    .fold(None::<usize>, |acc, i| match acc {
                        Some(b) if sums[b] > sums[i] || (sums[b] == sums[i] && b < i) => Some(b),
                        _ => Some(i),
                    })
                    .expect("cluster is nonempty");
                if cluster.len() > 1 && sums[best] > *cumulative {
                    keep[best] = true;
                } else {
                    for &i in &cluster {
                        keep[i] = true;
                    }
                }
            }
        }
    }
    (0..n).filter(|&i| keep[i]).map(|i| corr.names[i].clone()).collect()
}
