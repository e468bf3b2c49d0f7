//! Mass functions estimated from outcome frequencies.
//!
//! Every symptom state `x` carries a row of outcome counts `f_x(θ_i)`. Three
//! families of estimators turn such a row into a mass function:
//!
//! * [`estimate_method1`]: the consonant support function whose plausibility
//!   is `max_{θ∈A} f / max_{θ} f`. Foci form a nested chain.
//! * [`estimate_method2`]: a simple support function on the smallest
//!   high-frequency set exceeding one half, with the remainder either on the
//!   complementary positive-frequency outcomes or on θ.
//! * [`estimate_method3`]: scores every subset by its member frequencies and
//!   normalizes globally or per cardinality group.
//!
//! Expert opinion enters afterwards through [`apply_overrides`].

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use indexmap::IndexMap;

use crate::belief::{Frame, MassFunction, OutcomeSet};
use crate::error::{Error, Result};

/// Outcome counts per symptom-state key, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    frame: Frame,
    rows: IndexMap<String, Vec<u64>>,
}

impl FrequencyTable {
    pub fn new(frame: Frame) -> Self {
        FrequencyTable {
            frame,
            rows: IndexMap::new(),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn insert_row(&mut self, key: impl Into<String>, counts: Vec<u64>) -> Result<()> {
        let key = key.into();
        if counts.len() != self.frame.len() {
            return Err(Error::RowLength {
                key,
                got: counts.len(),
                expected: self.frame.len(),
            });
        }
        if self.rows.contains_key(&key) {
            return Err(Error::InvalidCounts(format!("duplicate row `{key}`")));
        }
        self.rows.insert(key, counts);
        Ok(())
    }

    /// Adds one observation of `outcome` under `key`, creating the row if needed.
    pub fn record(&mut self, key: &str, outcome: usize) {
        let n = self.frame.len();
        let row = self
            .rows
            .entry(key.to_string())
            .or_insert_with(|| vec![0; n]);
        row[outcome] += 1;
    }

    pub fn row(&self, key: &str) -> Option<&[u64]> {
        self.rows.get(key).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[u64])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn total(&self, key: &str) -> Option<u64> {
        self.row(key).map(|r| r.iter().sum())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keys of rows whose total count is below `floor`.
    pub fn rows_below(&self, floor: u64) -> Vec<&str> {
        self.rows()
            .filter(|(_, r)| r.iter().sum::<u64>() < floor)
            .map(|(k, _)| k)
            .collect()
    }

    /// Reorders rows by a rank computed from each key.
    pub(crate) fn sort_rows_by<F>(&mut self, mut rank: F)
    where
        F: FnMut(&str) -> (usize, usize),
    {
        self.rows.sort_by(|a, _, b, _| rank(a).cmp(&rank(b)));
    }

    /// Reads `symptom_state,<outcome1>,...,<outcomeN>`; the header defines the frame.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "symptom_state" {
            return Err(Error::parse(
                source,
                1,
                "header must be `symptom_state,<outcome1>,...`",
            ));
        }
        let frame = Frame::new(headers.iter().skip(1))?;
        let mut table = FrequencyTable::new(frame);
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let counts = record
                .iter()
                .skip(1)
                .map(|c| {
                    c.parse::<u64>()
                        .map_err(|_| Error::parse(source, line, format!("`{c}` is not a nonnegative integer count")))
                })
                .collect::<Result<Vec<_>>>()?;
            table
                .insert_row(&record[0], counts)
                .map_err(|e| Error::parse(source, line, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("symptom_state");
        for l in self.frame.labels() {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (k, r) in self.rows() {
            out.push_str(k);
            for c in r {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Where the mass left over after the support set goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Remainder {
    /// The union of the remaining positive-frequency outcomes (2A).
    Complement,
    /// The whole frame θ (2B).
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// One normalization over all scored subsets.
    Global,
    /// Normalize within each cardinality group, then across groups.
    ByCardinality,
}

/// Score given to θ before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaPreassign {
    /// θ scored like any other subset (sum of all counts).
    None,
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method3Config {
    pub normalization: Normalization,
    pub theta: ThetaPreassign,
    pub max_frame_size: usize,
}

impl Method3Config {
    /// Hard ceiling on `max_frame_size`; the estimator enumerates `2^n` subsets.
    pub const FRAME_SIZE_CEILING: usize = 20;
    pub const DEFAULT_MAX_FRAME_SIZE: usize = 12;

    pub fn new(normalization: Normalization, theta: ThetaPreassign) -> Self {
        Method3Config {
            normalization,
            theta,
            max_frame_size: Self::DEFAULT_MAX_FRAME_SIZE,
        }
    }

    pub fn with_max_frame_size(mut self, size: usize) -> Result<Self> {
        if size > Self::FRAME_SIZE_CEILING {
            return Err(Error::InvalidConfig(format!(
                "max frame size {size} exceeds {}",
                Self::FRAME_SIZE_CEILING
            )));
        }
        self.max_frame_size = size;
        Ok(self)
    }
}

impl Default for Method3Config {
    fn default() -> Self {
        Self::new(Normalization::ByCardinality, ThetaPreassign::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Consonant,
    SimpleSupport(Remainder),
    Spread(Method3Config),
}

impl Method {
    /// Parses the command-line tokens `m1`, `m2a`, `m2b`, `m3-global`, `m3-bycard`.
    pub fn parse(token: &str, theta: ThetaPreassign, max_frame_size: usize) -> Result<Self> {
        let spread = |normalization| {
            Method3Config::new(normalization, theta)
                .with_max_frame_size(max_frame_size)
                .map(Method::Spread)
        };
        match token {
            "m1" => Ok(Method::Consonant),
            "m2a" => Ok(Method::SimpleSupport(Remainder::Complement)),
            "m2b" => Ok(Method::SimpleSupport(Remainder::Theta)),
            "m3-global" => spread(Normalization::Global),
            "m3-bycard" => spread(Normalization::ByCardinality),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            Method::Consonant => "m1",
            Method::SimpleSupport(Remainder::Complement) => "m2a",
            Method::SimpleSupport(Remainder::Theta) => "m2b",
            Method::Spread(cfg) => match cfg.normalization {
                Normalization::Global => "m3-global",
                Normalization::ByCardinality => "m3-bycard",
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimateConfig {
    pub method: Method,
    /// Rows with a total count below this are rejected.
    pub min_total: u64,
}

impl EstimateConfig {
    pub fn new(method: Method) -> Self {
        EstimateConfig {
            method,
            min_total: 1,
        }
    }
}

fn checked_row<'a>(table: &'a FrequencyTable, key: &str, floor: u64) -> Result<&'a [u64]> {
    let row = table
        .row(key)
        .ok_or_else(|| Error::MissingRow(key.to_string()))?;
    let total: u64 = row.iter().sum();
    if total < floor.max(1) {
        return Err(Error::RowBelowFloor {
            key: key.to_string(),
            total,
            floor: floor.max(1),
        });
    }
    Ok(row)
}

/// Outcome indices by descending count; ties keep frame order.
fn descending(counts: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]));
    order
}

/// Consonant mass function from one row of counts.
///
/// With outcomes sorted so that `f(θ_1) ≥ … ≥ f(θ_n)`, the chain
/// `{θ_1..θ_j}` receives `(f(θ_j) − f(θ_{j+1})) / f(θ_1)` and θ receives
/// `f(θ_n) / f(θ_1)`.
pub fn consonant_masses(frame: &Frame, counts: &[u64]) -> Result<MassFunction> {
    let order = descending(counts);
    let top = counts[order[0]];
    if top == 0 {
        return Err(Error::InvalidCounts("all-zero row".into()));
    }
    let top = top as f64;
    let mut chain = OutcomeSet::EMPTY;
    let mut focal = BTreeMap::new();
    for (j, &idx) in order.iter().enumerate() {
        chain = chain | OutcomeSet::singleton(idx);
        let next = order.get(j + 1).map_or(0, |&i| counts[i]);
        let step = counts[idx] - next;
        if step > 0 {
            focal.insert(chain, step as f64 / top);
        }
    }
    Ok(MassFunction::normalized(frame.clone(), focal))
}

pub fn estimate_method1(table: &FrequencyTable, key: &str) -> Result<MassFunction> {
    consonant_masses(table.frame(), checked_row(table, key, 1)?)
}

/// Support set and remainder chosen from one row of counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportSplit {
    pub support: OutcomeSet,
    pub support_count: u64,
    pub rest: OutcomeSet,
    pub rest_count: u64,
    pub total: u64,
}

/// Traces the support-set construction.
///
/// Singletons are absorbed in descending frequency until the proportion
/// exceeds one half, then any singletons tied with the last one absorbed are
/// added too. The remaining positive-frequency singletons form the rest.
pub fn support_split(counts: &[u64]) -> Result<SupportSplit> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidCounts("all-zero row".into()));
    }
    let order = descending(counts);
    let mut support = OutcomeSet::EMPTY;
    let mut support_count = 0u64;
    let mut pos = 0;
    let mut last = 0;
    // m(B) <= 0.5, kept in integers
    while pos < order.len() && 2 * support_count <= total {
        let idx = order[pos];
        support = support | OutcomeSet::singleton(idx);
        support_count += counts[idx];
        last = counts[idx];
        pos += 1;
    }
    while pos < order.len() && counts[order[pos]] == last {
        let idx = order[pos];
        support = support | OutcomeSet::singleton(idx);
        support_count += counts[idx];
        pos += 1;
    }
    let mut rest = OutcomeSet::EMPTY;
    let mut rest_count = 0;
    for &idx in &order[pos..] {
        if counts[idx] > 0 {
            rest = rest | OutcomeSet::singleton(idx);
            rest_count += counts[idx];
        }
    }
    Ok(SupportSplit {
        support,
        support_count,
        rest,
        rest_count,
        total,
    })
}

pub fn simple_support_masses(frame: &Frame, counts: &[u64], remainder: Remainder) -> Result<MassFunction> {
    let split = support_split(counts)?;
    let total = split.total as f64;
    let mut focal = BTreeMap::new();
    focal.insert(split.support, split.support_count as f64 / total);
    if split.rest_count > 0 {
        let target = match remainder {
            Remainder::Complement => split.rest,
            Remainder::Theta => frame.theta(),
        };
        *focal.entry(target).or_insert(0.0) += split.rest_count as f64 / total;
    }
    Ok(MassFunction::normalized(frame.clone(), focal))
}

pub fn estimate_method2(table: &FrequencyTable, key: &str, remainder: Remainder) -> Result<MassFunction> {
    simple_support_masses(table.frame(), checked_row(table, key, 1)?, remainder)
}

/// Subset-spreading estimator over the whole power set.
///
/// A proper subset scores the sum of its members' counts; θ scores per
/// `cfg.theta`. Zero-score subsets are dropped.
pub fn spread_masses(frame: &Frame, counts: &[u64], cfg: &Method3Config, key: &str) -> Result<MassFunction> {
    let n = frame.len();
    if n > cfg.max_frame_size.min(Method3Config::FRAME_SIZE_CEILING) {
        return Err(Error::FrameTooLarge {
            size: n,
            limit: cfg.max_frame_size,
        });
    }
    let theta = frame.theta();
    let total: u64 = counts.iter().sum();
    let score = |set: OutcomeSet| -> f64 {
        if set == theta {
            match cfg.theta {
                ThetaPreassign::None => total as f64,
                ThetaPreassign::Zero => 0.0,
                ThetaPreassign::One => 1.0,
            }
        } else {
            set.indices().map(|i| counts[i]).sum::<u64>() as f64
        }
    };
    let scores: Vec<(OutcomeSet, f64)> = (1..=theta.bits())
        .map(OutcomeSet::from_bits)
        .map(|s| (s, score(s)))
        .filter(|(_, x)| *x > 0.0)
        .collect();
    if scores.is_empty() {
        return Err(Error::AllScoresZero(key.to_string()));
    }
    let focal: BTreeMap<OutcomeSet, f64> = match cfg.normalization {
        Normalization::Global => scores.into_iter().collect(),
        Normalization::ByCardinality => {
            let mut group_sums = vec![0.0; n + 1];
            for (s, x) in &scores {
                group_sums[s.len()] += x;
            }
            scores
                .into_iter()
                .map(|(s, x)| (s, x / group_sums[s.len()]))
                .collect()
        }
    };
    // the final global pass; per-group sums are 1, so this divides by the
    // number of nonempty groups in the by-cardinality case
    Ok(MassFunction::normalized(frame.clone(), focal))
}

pub fn estimate_method3(table: &FrequencyTable, key: &str, cfg: &Method3Config) -> Result<MassFunction> {
    spread_masses(table.frame(), checked_row(table, key, 1)?, cfg, key)
}

/// Estimates one row with the configured method and count floor.
pub fn estimate_row(table: &FrequencyTable, key: &str, cfg: &EstimateConfig) -> Result<MassFunction> {
    let row = checked_row(table, key, cfg.min_total)?;
    let frame = table.frame();
    match &cfg.method {
        Method::Consonant => consonant_masses(frame, row),
        Method::SimpleSupport(r) => simple_support_masses(frame, row, *r),
        Method::Spread(m3) => spread_masses(frame, row, m3, key),
    }
}

/// Estimates every row in table order, collecting all per-row failures.
pub fn estimate_all(table: &FrequencyTable, cfg: &EstimateConfig) -> Result<IndexMap<String, MassFunction>> {
    let mut out = IndexMap::with_capacity(table.len());
    let mut failures = Vec::new();
    for key in table.keys() {
        match estimate_row(table, key, cfg) {
            Ok(m) => {
                out.insert(key.to_string(), m);
            }
            Err(e) => failures.push((key.to_string(), e)),
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(Error::Rows(failures))
    }
}

/// An expert-supplied replacement for one focal mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertOverride {
    pub key: String,
    pub set: Vec<String>,
    pub mass: f64,
}

impl ExpertOverride {
    pub fn new<I, S>(key: impl Into<String>, set: I, mass: f64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ExpertOverride {
            key: key.into(),
            set: set.into_iter().map(Into::into).collect(),
            mass,
        }
    }

    /// Reads `symptom_state,set,mass` with `|`-joined outcome labels.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Vec<Self>> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["symptom_state", "set", "mass"] {
            return Err(Error::parse(source, 1, "header must be `symptom_state,set,mass`"));
        }
        let mut out = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let mass: f64 = record[2]
                .parse()
                .map_err(|_| Error::parse(source, line, format!("`{}` is not a number", &record[2])))?;
            let set = record[1].split('|').map(str::trim).filter(|s| !s.is_empty());
            out.push(ExpertOverride::new(&record[0], set, mass));
        }
        Ok(out)
    }

    pub fn from_csv_path(path: &Path) -> Result<Vec<Self>> {
        Self::from_csv(std::fs::File::open(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverrideOutcome {
    pub masses: IndexMap<String, MassFunction>,
    pub warnings: Vec<String>,
}

/// Sets `m(set) = mass` and rescales the other foci proportionally.
///
/// When no other focus exists to absorb the residual, it is placed on θ.
pub fn override_mass(m: &MassFunction, set: OutcomeSet, mass: f64) -> Result<(MassFunction, Option<String>)> {
    let frame = m.frame();
    frame.check(set)?;
    if !(0.0..=1.0).contains(&mass) {
        return Err(Error::InvalidOverride(format!("replacement mass {mass} is outside [0, 1]")));
    }
    if set.is_empty() {
        return Err(Error::InvalidOverride("cannot assign mass to the empty set".into()));
    }
    let others: f64 = m.focal().filter(|(s, _)| *s != set).map(|(_, x)| x).sum();
    let mut warning = None;
    let mut focal: BTreeMap<OutcomeSet, f64> = BTreeMap::new();
    if others > 0.0 {
        let scale = (1.0 - mass) / others;
        for (s, x) in m.focal().filter(|(s, _)| *s != set) {
            focal.insert(s, x * scale);
        }
        if mass == 1.0 {
            warning = Some(format!(
                "override of {} to 1 removed all other foci",
                frame.format_set(set)
            ));
        }
    } else if mass < 1.0 {
        if set == frame.theta() {
            return Err(Error::InvalidOverride(
                "θ is the only focus; its mass must stay 1".into(),
            ));
        }
        focal.insert(frame.theta(), 1.0 - mass);
        warning = Some(format!(
            "no other foci to rescale; residual {} placed on θ",
            1.0 - mass
        ));
    }
    if mass > 0.0 {
        focal.insert(set, mass);
    }
    Ok((MassFunction::normalized(frame.clone(), focal), warning))
}

/// Applies expert replacements in list order.
pub fn apply_overrides(
    masses: &IndexMap<String, MassFunction>,
    overrides: &[ExpertOverride],
) -> Result<OverrideOutcome> {
    let mut out = masses.clone();
    let mut warnings = Vec::new();
    for ov in overrides {
        let m = out
            .get(&ov.key)
            .ok_or_else(|| Error::InvalidOverride(format!("no mass function for `{}`", ov.key)))?;
        let set = m.frame().set(&ov.set)?;
        let (updated, warning) = override_mass(m, set, ov.mass)?;
        if let Some(w) = warning {
            warnings.push(format!("{}: {w}", ov.key));
        }
        out.insert(ov.key.clone(), updated);
    }
    Ok(OverrideOutcome { masses: out, warnings })
}
