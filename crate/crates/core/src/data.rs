//! Case records, discretization of continuous symptoms, frequency tables,
//! pairwise correlations and seeded synthetic data.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::Frame;
use crate::error::{Error, Result};
use crate::mass::FrequencyTable;
use crate::search::CorrelationMatrix;

/// One observed case. Missing values are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub id: String,
    pub values: IndexMap<String, Option<f64>>,
    pub outcome: Option<String>,
}

impl CaseRecord {
    pub fn new(id: impl Into<String>) -> Self {
        CaseRecord {
            id: id.into(),
            values: IndexMap::new(),
            outcome: None,
        }
    }

    pub fn with_value(mut self, variable: impl Into<String>, value: Option<f64>) -> Self {
        self.values.insert(variable.into(), value);
        self
    }

    pub fn with_outcome(mut self, outcome: impl Into<String>) -> Self {
        self.outcome = Some(outcome.into());
        self
    }

    pub fn value(&self, variable: &str) -> Option<f64> {
        self.values.get(variable).copied().flatten()
    }

    /// Observed `(variable, value)` pairs in column order.
    pub fn present(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().filter_map(|(k, v)| v.map(|x| (k.as_str(), x)))
    }

    /// Copy keeping only the listed variables.
    pub fn restrict(&self, keep: &[String]) -> CaseRecord {
        CaseRecord {
            id: self.id.clone(),
            values: self
                .values
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
            outcome: self.outcome.clone(),
        }
    }
}

/// Reads `id,outcome,<var1>,...`. Empty fields are missing values; an empty
/// outcome means the case is unlabelled.
pub fn read_cases<R: Read>(reader: R, source: &str) -> Result<Vec<CaseRecord>> {
    let (cases, mut bad) = read_cases_lenient(reader, source)?;
    match bad.is_empty() {
        true => Ok(cases),
        false => Err(bad.swap_remove(0)),
    }
}

/// Like [`read_cases`], but malformed rows are returned as errors alongside
/// the well-formed cases instead of failing the whole file. A bad header
/// still fails.
pub fn read_cases_lenient<R: Read>(reader: R, source: &str) -> Result<(Vec<CaseRecord>, Vec<Error>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "id" || &headers[1] != "outcome" {
        return Err(Error::parse(source, 1, "header must be `id,outcome,<var1>,...`"));
    }
    let variables: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut seen = HashSet::new();
    let mut cases = Vec::new();
    let mut bad = Vec::new();
    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                bad.push(Error::parse(source, line, e.to_string()));
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        match parse_case(&record, &variables, &mut seen) {
            Ok(case) => cases.push(case),
            Err(message) => bad.push(Error::parse(source, line, message)),
        }
    }
    Ok((cases, bad))
}

fn parse_case(record: &csv::StringRecord, variables: &[String], seen: &mut HashSet<String>) -> std::result::Result<CaseRecord, String> {
    let id = record[0].to_string();
    if id.is_empty() {
        return Err("empty case id".into());
    }
    if !seen.insert(id.clone()) {
        return Err(Error::DuplicateId(id).to_string());
    }
    let mut case = CaseRecord::new(id);
    if !record[1].is_empty() {
        case.outcome = Some(record[1].to_string());
    }
    for (var, field) in variables.iter().zip(record.iter().skip(2)) {
        let value = if field.is_empty() || field == "?" {
            None
        } else {
            let v: f64 = field
                .parse()
                .map_err(|_| format!("`{field}` in column `{var}` is not a number"))?;
            if !v.is_finite() {
                return Err(format!("value of `{var}` is not finite"));
            }
            Some(v)
        };
        case.values.insert(var.clone(), value);
    }
    Ok(case)
}

pub fn read_cases_path(path: &Path) -> Result<Vec<CaseRecord>> {
    read_cases(std::fs::File::open(path)?, &path.display().to_string())
}

/// Writes cases with the given column order. Variables a case lacks are
/// written as missing.
pub fn write_cases(cases: &[CaseRecord], variables: &[String]) -> String {
    let mut out = String::from("id,outcome");
    for v in variables {
        out.push(',');
        out.push_str(v);
    }
    out.push('\n');
    for c in cases {
        out.push_str(&c.id);
        out.push(',');
        out.push_str(c.outcome.as_deref().unwrap_or(""));
        for v in variables {
            out.push(',');
            if let Some(x) = c.value(v) {
                out.push_str(&x.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// Variables in first-seen order across all cases.
pub fn variables_of(cases: &[CaseRecord]) -> Vec<String> {
    let mut seen = indexmap::IndexSet::new();
    for c in cases {
        for k in c.values.keys() {
            seen.insert(k.clone());
        }
    }
    seen.into_iter().collect()
}

/// Half-open interval `[lower, upper)` labelled with a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub state: String,
    pub lower: f64,
    pub upper: f64,
}

/// Contiguous bins covering one variable's range.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableBins {
    bins: Vec<Bin>,
}

impl VariableBins {
    /// Bins are sorted by lower bound, then checked for contiguity, distinct
    /// state names and at least two states.
    pub fn new(mut bins: Vec<Bin>) -> Result<Self> {
        bins.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        if bins.len() < 2 {
            return Err(Error::InvalidConfig("a variable needs at least two states".into()));
        }
        let mut names = HashSet::new();
        for b in &bins {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower >= b.upper {
                return Err(Error::InvalidConfig(format!("state `{}` has an empty interval", b.state)));
            }
            if !names.insert(b.state.as_str()) {
                return Err(Error::InvalidConfig(format!("state `{}` repeated", b.state)));
            }
        }
        for w in bins.windows(2) {
            if w[0].upper != w[1].lower {
                return Err(Error::InvalidConfig(format!(
                    "states `{}` and `{}` are not contiguous",
                    w[0].state, w[1].state
                )));
            }
        }
        Ok(VariableBins { bins })
    }

    /// Unbounded bins from interior breakpoints: `states.len()` must be one
    /// more than `breakpoints.len()`.
    pub fn from_breakpoints<S: AsRef<str>>(states: &[S], breakpoints: &[f64]) -> Result<Self> {
        if states.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} states need {} breakpoints, got {}",
                states.len(),
                states.len().saturating_sub(1),
                breakpoints.len()
            )));
        }
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend_from_slice(breakpoints);
        edges.push(f64::INFINITY);
        let bins = states
            .iter()
            .zip(edges.windows(2))
            .map(|(s, e)| Bin {
                state: s.as_ref().to_string(),
                lower: e[0],
                upper: e[1],
            })
            .collect();
        Self::new(bins)
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn state_index(&self, value: f64) -> Option<usize> {
        self.bins.iter().position(|b| b.lower <= value && value < b.upper)
    }

    pub fn state_of(&self, value: f64) -> Option<&str> {
        self.state_index(value).map(|i| self.bins[i].state.as_str())
    }

    pub fn position_of(&self, state: &str) -> Option<usize> {
        self.bins.iter().position(|b| b.state == state)
    }
}

pub fn evidence_key(variable: &str, state: &str) -> String {
    format!("{variable}={state}")
}

/// Per-variable bins, in declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Discretization {
    variables: IndexMap<String, VariableBins>,
}

impl Discretization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, variable: impl Into<String>, bins: VariableBins) {
        self.variables.insert(variable.into(), bins);
    }

    pub fn get(&self, variable: &str) -> Option<&VariableBins> {
        self.variables.get(variable)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.variables.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Keeps only the listed variables, preserving declaration order.
    pub fn restrict(&self, keep: &[String]) -> Discretization {
        Discretization {
            variables: self
                .variables
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Every `variable=state` key in declaration order.
    pub fn keys(&self) -> Vec<String> {
        self.variables
            .iter()
            .flat_map(|(v, bins)| bins.bins().iter().map(move |b| evidence_key(v, &b.state)))
            .collect()
    }

    /// `(variable position, state position)` of an evidence key.
    pub fn rank_of(&self, key: &str) -> Option<(usize, usize)> {
        let (var, state) = key.split_once('=')?;
        let (i, _, bins) = self.variables.get_full(var)?;
        Some((i, bins.position_of(state)?))
    }

    /// Reads `variable,state,lower,upper`; `-inf` and `+inf` are accepted.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["variable", "state", "lower", "upper"] {
            return Err(Error::parse(source, 1, "header must be `variable,state,lower,upper`"));
        }
        let mut grouped: IndexMap<String, (u64, Vec<Bin>)> = IndexMap::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let bound = |field: &str| -> Result<f64> {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|x| !x.is_nan())
                    .ok_or_else(|| Error::parse(source, line, format!("`{field}` is not a bound")))
            };
            let bin = Bin {
                state: record[1].to_string(),
                lower: bound(&record[2])?,
                upper: bound(&record[3])?,
            };
            grouped
                .entry(record[0].to_string())
                .or_insert_with(|| (line, Vec::new()))
                .1
                .push(bin);
        }
        let mut spec = Discretization::new();
        for (var, (line, bins)) in grouped {
            let bins = VariableBins::new(bins).map_err(|e| Error::parse(source, line, format!("`{var}`: {e}")))?;
            spec.insert(var, bins);
        }
        Ok(spec)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let bound = |x: f64| {
            if x == f64::INFINITY {
                "+inf".to_string()
            } else if x == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                x.to_string()
            }
        };
        let mut out = String::from("variable,state,lower,upper\n");
        for (v, bins) in &self.variables {
            for b in bins.bins() {
                out.push_str(&format!("{v},{},{},{}\n", b.state, bound(b.lower), bound(b.upper)));
            }
        }
        out
    }
}

/// Maps each observed variable of a case to its `variable=state` key.
/// Missing values emit nothing.
pub fn discretize(case: &CaseRecord, spec: &Discretization) -> Result<IndexMap<String, String>> {
    let mut out = IndexMap::new();
    for (var, value) in case.present() {
        let bins = spec.get(var).ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
        let state = bins.state_of(value).ok_or_else(|| Error::OutOfRange {
            variable: var.to_string(),
            value,
        })?;
        out.insert(var.to_string(), evidence_key(var, state));
    }
    Ok(out)
}

/// The evidence keys of a case, in column order.
pub fn evidence_keys(case: &CaseRecord, spec: &Discretization) -> Result<Vec<String>> {
    Ok(discretize(case, spec)?.into_values().collect())
}

/// Counts outcome occurrences per observed symptom state. Rows appear only
/// for observed keys, ordered by variable then state as declared in `spec`.
pub fn build_frequency_table(cases: &[CaseRecord], spec: &Discretization, frame: &Frame) -> Result<FrequencyTable> {
    let mut table = FrequencyTable::new(frame.clone());
    for case in cases {
        let outcome = case.outcome.as_deref().ok_or_else(|| Error::MissingOutcome(case.id.clone()))?;
        let idx = frame
            .index_of(outcome)
            .ok_or_else(|| Error::UnknownOutcome(outcome.to_string()))?;
        for key in evidence_keys(case, spec)? {
            table.record(&key, idx);
        }
    }
    table.sort_rows_by(|k| spec.rank_of(k).unwrap_or((usize::MAX, usize::MAX)));
    Ok(table)
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pairwise-complete Pearson correlations. An entry is unavailable when
/// fewer than two cases observe both variables or either has zero variance.
pub fn pearson_matrix(cases: &[CaseRecord], variables: &[String]) -> Result<CorrelationMatrix> {
    let n = variables.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        values[i][i] = Some(1.0);
        for j in (i + 1)..n {
            let pairs: Vec<(f64, f64)> = cases
                .iter()
                .filter_map(|c| Some((c.value(&variables[i])?, c.value(&variables[j])?)))
                .collect();
            let r = pearson(&pairs);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrelationMatrix::new(variables.to_vec(), values)
}

/// A finite bin of a synthetic variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticBin {
    pub state: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticVariable {
    pub name: String,
    pub bins: Vec<SyntheticBin>,
    /// One state distribution per outcome, in frame order.
    pub conditionals: Vec<Vec<f64>>,
}

/// Recipe for a seeded synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub frame: Vec<String>,
    pub priors: Vec<f64>,
    pub variables: Vec<SyntheticVariable>,
    pub cases: usize,
    pub missingness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_prefix: Option<String>,
}

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

fn check_distribution(what: &str, p: &[f64], len: usize) -> Result<()> {
    if p.len() != len {
        return Err(Error::InvalidSynthetic(format!("{what} has {} entries, expected {len}", p.len())));
    }
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidSynthetic(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidSynthetic(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the running sum: take the last state with weight
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

impl SyntheticSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SyntheticSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("synthetic spec serializes")
    }

    pub fn frame(&self) -> Result<Frame> {
        Frame::new(&self.frame)
    }

    pub fn validate(&self) -> Result<()> {
        let frame = self.frame().map_err(|e| Error::InvalidSynthetic(e.to_string()))?;
        check_distribution("priors", &self.priors, frame.len())?;
        if !(0.0..=1.0).contains(&self.missingness) {
            return Err(Error::InvalidSynthetic(format!("missingness {} outside [0, 1]", self.missingness)));
        }
        let mut names = HashSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidSynthetic(format!("variable `{}` repeated", v.name)));
            }
            if v.bins.iter().any(|b| !b.lower.is_finite() || !b.upper.is_finite()) {
                return Err(Error::InvalidSynthetic(format!("`{}` needs finite bin bounds", v.name)));
            }
            let bins = v.bins.iter().map(|b| Bin { state: b.state.clone(), lower: b.lower, upper: b.upper }).collect();
            let sorted = VariableBins::new(bins).map_err(|e| Error::InvalidSynthetic(format!("`{}`: {e}", v.name)))?;
            if sorted.bins().iter().zip(&v.bins).any(|(a, b)| a.state != b.state) {
                return Err(Error::InvalidSynthetic(format!("`{}` bins must be listed in increasing order", v.name)));
            }
            if v.conditionals.len() != frame.len() {
                return Err(Error::InvalidSynthetic(format!(
                    "`{}` has {} conditionals for {} outcomes",
                    v.name,
                    v.conditionals.len(),
                    frame.len()
                )));
            }
            for (o, p) in v.conditionals.iter().enumerate() {
                check_distribution(&format!("`{}` given `{}`", v.name, frame.label(o)), p, v.bins.len())?;
            }
        }
        Ok(())
    }

    /// Discretization matching the generator, with the outermost bounds
    /// opened to infinity.
    pub fn discretization(&self) -> Result<Discretization> {
        let mut spec = Discretization::new();
        for v in &self.variables {
            let last = v.bins.len().saturating_sub(1);
            let bins = v
                .bins
                .iter()
                .enumerate()
                .map(|(i, b)| Bin {
                    state: b.state.clone(),
                    lower: if i == 0 { f64::NEG_INFINITY } else { b.lower },
                    upper: if i == last { f64::INFINITY } else { b.upper },
                })
                .collect();
            spec.insert(v.name.clone(), VariableBins::new(bins)?);
        }
        Ok(spec)
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }
}

/// Samples cases: outcome from the priors, then per variable a state from
/// its conditional, a value uniform within that state's bin, and an
/// independent missingness draw. Identical specs give identical datasets.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<CaseRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let prefix = spec.id_prefix.as_deref().unwrap_or("c");
    let width = spec.cases.to_string().len().max(4);
    let mut cases = Vec::with_capacity(spec.cases);
    for i in 0..spec.cases {
        let outcome = draw(&mut rng, &spec.priors);
        let mut case = CaseRecord::new(format!("{prefix}{:0width$}", i + 1)).with_outcome(spec.frame[outcome].clone());
        for v in &spec.variables {
            let state = draw(&mut rng, &v.conditionals[outcome]);
            let bin = &v.bins[state];
            let value: f64 = rng.gen_range(bin.lower..bin.upper);
            let missing = rng.gen::<f64>() < spec.missingness;
            case.values.insert(v.name.clone(), if missing { None } else { Some(value) });
        }
        cases.push(case);
    }
    Ok(cases)
}
