//! Command-line surface: argument definitions, run manifests and the
//! command implementations behind the `evkit` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::belief::{FocalDoc, Frame, MassDoc, MassFunction};
use crate::data::{
    generate_synthetic, pearson_matrix, read_cases_lenient, read_cases_path, variables_of, write_cases, CaseRecord, Discretization,
    SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::eval::{render_tally_table, roc_csv, roc_csv_compare, roc_points, tally_csv, ReportConfig, TallyColumn, DEFAULT_ROC_THRESHOLDS};
use crate::mass::{apply_overrides, EstimateConfig, ExpertOverride, Method, Method3Config, ThetaPreassign};
use crate::pipeline::{
    binary_labels, check_disjoint, diagnose_case, evaluate_ds, prior_odds, train_logistic, train_masses, train_woe,
    GroupOptions, Variant, WoeScorer,
};
use crate::search::{reduce_variables, CorrelationMatrix, Reduction, SearchConfig, SearchVersion};
use crate::woe::{read_memberships_path, read_weights_path, variable_of, write_weights};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "evkit", version, about = "Belief-function diagnosis and weights-of-evidence scoring from case data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a mass function per symptom state from training cases.
    Estimate(EstimateArgs),
    /// Combine evidence and report belief intervals per case.
    Diagnose(DiagnoseArgs),
    /// Train on one case set, score another, and tabulate S/NONS/F.
    Evaluate(EvaluateArgs),
    /// Weights of evidence for a binary hypothesis.
    Woe {
        #[command(subcommand)]
        command: WoeCommand,
    },
    /// Reduce correlated variables.
    Reduce(ReduceArgs),
    /// Generate a seeded synthetic case set.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThetaArg {
    None,
    Zero,
    One,
}

impl From<ThetaArg> for ThetaPreassign {
    fn from(t: ThetaArg) -> Self {
        match t {
            ThetaArg::None => ThetaPreassign::None,
            ThetaArg::Zero => ThetaPreassign::Zero,
            ThetaArg::One => ThetaPreassign::One,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// m1, m2a, m2b, m3-global or m3-bycard.
    #[arg(long, default_value = "m1")]
    pub method: String,
    /// Mass preassigned to the whole frame by the spread methods.
    #[arg(long, value_enum, default_value = "none")]
    pub theta: ThetaArg,
    #[arg(long, default_value_t = Method3Config::DEFAULT_MAX_FRAME_SIZE)]
    pub max_frame_size: usize,
    /// Symptom states seen fewer times than this get no mass function.
    #[arg(long, default_value_t = 1)]
    pub min_total: u64,
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub cases: PathBuf,
    #[arg(long)]
    pub disc: PathBuf,
    /// Expert replacements: `symptom_state,set,mass` with `|`-joined sets.
    #[arg(long)]
    pub overrides: Option<PathBuf>,
    /// Also write the frequency table here.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Sets with belief at or above this are listed as strongest.
    #[arg(long, default_value_t = crate::eval::DEFAULT_REPORT_THRESHOLD)]
    pub threshold: f64,
    /// List the whole frame among the strongest outcomes.
    #[arg(long)]
    pub include_theta: bool,
}

impl ReportArgs {
    fn config(&self) -> Result<ReportConfig> {
        Ok(ReportConfig::new(self.threshold)?.with_theta(self.include_theta))
    }
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Mass file written by `estimate`.
    #[arg(long)]
    pub masses: PathBuf,
    #[arg(long)]
    pub disc: PathBuf,
    /// Cases file; without it cases are read from standard input, one per
    /// line as `name=value` tokens (`id=...` names the case).
    #[arg(long)]
    pub cases: Option<PathBuf>,
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub disc: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "m1,m2a,m2b")]
    pub methods: Vec<String>,
    /// cd3 (all variables), cd5 (threshold reduction), cd7 (cumulative reduction).
    #[arg(long, value_delimiter = ',', default_value = "cd3")]
    pub variants: Vec<String>,
    /// Variable priority for cd5; unlisted variables follow in declaration order.
    #[arg(long, value_delimiter = ',')]
    pub priority: Vec<String>,
    #[arg(long, value_enum, default_value = "none")]
    pub theta: ThetaArg,
    #[arg(long, default_value_t = 1)]
    pub min_total: u64,
    #[command(flatten)]
    pub report: ReportArgs,
    /// Machine-readable tally.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WoeCommand {
    /// Fit weights at their optimal cuts.
    Train(WoeTrainArgs),
    /// Posterior probabilities for cases.
    Score(WoeScoreArgs),
    /// ROC points at fixed probability thresholds.
    Roc(WoeRocArgs),
}

#[derive(Debug, Args)]
pub struct WoeTrainArgs {
    #[arg(long)]
    pub cases: PathBuf,
    /// `evidence_key,value,mu` membership functions.
    #[arg(long)]
    pub memberships: PathBuf,
    /// Outcome label treated as the hypothesis.
    #[arg(long)]
    pub positive: String,
    /// Also train weights for pairs of evidence.
    #[arg(long)]
    pub pairs: bool,
    #[arg(long, default_value_t = 5)]
    pub min_support: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchArg {
    V1,
    V2,
}

#[derive(Debug, Args)]
pub struct ScoringArgs {
    /// Weights written by `woe train`.
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub memberships: PathBuf,
    #[arg(long)]
    pub cases: PathBuf,
    /// Training cases: prior odds and independence screens.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Prior odds of the hypothesis; overrides the training ratio.
    #[arg(long)]
    pub prior_odds: Option<f64>,
    #[arg(long, value_enum, default_value = "v1")]
    pub search: SearchArg,
    #[arg(long, default_value_t = 1)]
    pub max_overlap: usize,
    /// Independence is rejected below this p-value.
    #[arg(long, default_value_t = 0.05)]
    pub significance: f64,
    #[arg(long, default_value_t = 1)]
    pub min_support: u64,
}

#[derive(Debug, Args)]
pub struct WoeScoreArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Selection traces, one block per case.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Logistic,
}

#[derive(Debug, Args)]
pub struct WoeRocArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ROC_THRESHOLDS.to_vec())]
    pub thresholds: Vec<f64>,
    /// Fit this baseline on the training cases and report it alongside.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
    /// Significance kept by the baseline's backward elimination.
    #[arg(long, default_value_t = 0.95)]
    pub baseline_significance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceMode {
    Cd5,
    Cd7,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Cases to correlate; alternatively pass `--corr`.
    #[arg(long, conflicts_with = "corr", required_unless_present = "corr")]
    pub cases: Option<PathBuf>,
    /// Precomputed correlation matrix.
    #[arg(long)]
    pub corr: Option<PathBuf>,
    /// Variables to consider (default: every case column).
    #[arg(long, value_delimiter = ',')]
    pub variables: Vec<String>,
    #[arg(long, value_enum, default_value = "cd5")]
    pub mode: ReduceMode,
    #[arg(long, default_value_t = Variant::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = Variant::DEFAULT_CUMULATIVE)]
    pub cumulative: f64,
    #[arg(long, value_delimiter = ',')]
    pub priority: Vec<String>,
    /// Also write the correlation matrix here.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Replaces the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Discretization matching the generator.
    #[arg(long)]
    pub disc_out: Option<PathBuf>,
    /// Frame file, one label per line.
    #[arg(long)]
    pub frame_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Digest of one input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub sha256: String,
}

/// Provenance embedded in every artifact: the command, its input digests
/// and configuration, and the tool version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub config: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, ctx: &RunContext) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            config: BTreeMap::new(),
            timestamp: ctx.timestamp,
        }
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputDigest {
            role: role.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    /// `# manifest {...}` line for text and CSV artifacts.
    pub fn comment(&self) -> String {
        format!("# manifest {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }

    /// Reads the manifest line from the top of a text artifact.
    pub fn from_comment(text: &str) -> Option<Self> {
        text.lines()
            .find_map(|l| l.strip_prefix("# manifest "))
            .and_then(|json| serde_json::from_str(json).ok())
    }
}

/// Environment supplied by the caller. Library callers normally leave the
/// timestamp unset so outputs depend on inputs alone.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunContext {
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEntry {
    pub symptom_state: String,
    pub focal: Vec<FocalDoc>,
}

/// Mass functions for every symptom state, as written by `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBook {
    pub manifest: RunManifest,
    pub method: String,
    pub frame: Vec<String>,
    #[serde(default)]
    pub flagged: Vec<String>,
    pub entries: Vec<MassEntry>,
}

impl MassBook {
    pub fn new(manifest: RunManifest, method: &str, frame: &Frame, masses: &IndexMap<String, MassFunction>, flagged: Vec<String>) -> Self {
        MassBook {
            manifest,
            method: method.to_string(),
            frame: frame.labels().to_vec(),
            flagged,
            entries: masses
                .iter()
                .map(|(k, m)| MassEntry {
                    symptom_state: k.clone(),
                    focal: m.to_doc().focal,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mass book serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn frame(&self) -> Result<Frame> {
        Frame::new(&self.frame)
    }

    pub fn masses(&self) -> Result<IndexMap<String, MassFunction>> {
        self.entries
            .iter()
            .map(|e| {
                let doc = MassDoc {
                    frame: self.frame.clone(),
                    focal: e.focal.clone(),
                };
                Ok((e.symptom_state.clone(), MassFunction::from_doc(&doc)?))
            })
            .collect()
    }
}

/// Reads a frame file: one outcome label per line; blank lines and `#`
/// comments are ignored.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let text = std::fs::read_to_string(path)?;
    Frame::new(
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#')),
    )
}

pub fn write_frame(frame: &Frame) -> String {
    frame.labels().iter().map(|l| format!("{l}\n")).collect()
}

/// Standard streams handed to a command.
pub struct Streams<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses arguments and runs a command, returning the process exit code.
pub fn run_from<I, T>(args: I, ctx: &RunContext, io: &mut Streams<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, ctx, io),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = io.stderr.write_all(text.as_bytes());
                EXIT_INPUT
            } else {
                let _ = io.stdout.write_all(text.as_bytes());
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli, ctx: &RunContext, io: &mut Streams<'_>) -> i32 {
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, ctx, io),
        Command::Diagnose(a) => cmd_diagnose(&a, ctx, io),
        Command::Evaluate(a) => cmd_evaluate(&a, ctx, io),
        Command::Woe { command } => match command {
            WoeCommand::Train(a) => cmd_woe_train(&a, ctx, io),
            WoeCommand::Score(a) => cmd_woe_score(&a, ctx, io),
            WoeCommand::Roc(a) => cmd_woe_roc(&a, ctx, io),
        },
        Command::Reduce(a) => cmd_reduce(&a, ctx, io),
        Command::Synth(a) => cmd_synth(&a, ctx, io),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn warn(io: &mut Streams<'_>, message: impl std::fmt::Display) {
    let _ = writeln!(io.stderr, "warning: {message}");
}

pub fn cmd_estimate(a: &EstimateArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let frame = read_frame(&a.frame)?;
    let method = Method::parse(&a.method, a.theta.into(), a.max_frame_size)?;
    let cfg = EstimateConfig {
        method,
        min_total: a.min_total,
    };
    let cases = read_cases_path(&a.cases)?;
    let disc = Discretization::from_csv_path(&a.disc)?;

    let mut manifest = RunManifest::new("estimate", ctx);
    manifest.input("frame", &a.frame)?;
    manifest.input("cases", &a.cases)?;
    manifest.input("disc", &a.disc)?;
    manifest.set("method", method.token());
    manifest.set("theta", format!("{:?}", a.theta).to_lowercase());
    manifest.set("max_frame_size", a.max_frame_size);
    manifest.set("min_total", a.min_total);

    let trained = train_masses(&cases, &disc, &frame, &cfg)?;
    for key in &trained.flagged {
        warn(io, format!("`{key}` is below the frequency floor {}; no mass estimated", a.min_total));
    }
    let mut masses = trained.masses;
    if let Some(path) = &a.overrides {
        manifest.input("overrides", path)?;
        let overrides = ExpertOverride::from_csv_path(path)?;
        let outcome = apply_overrides(&masses, &overrides)?;
        for w in &outcome.warnings {
            warn(io, w);
        }
        masses = outcome.masses;
    }
    if let Some(path) = &a.table_out {
        std::fs::write(path, format!("{}{}", manifest.comment(), trained.table.to_csv()))?;
    }
    let book = MassBook::new(manifest, method.token(), &frame, &masses, trained.flagged);
    emit(a.out.as_deref(), &book.to_json(), io.stdout)?;
    Ok(EXIT_OK)
}

/// Parses one standard-input case line of `name=value` tokens.
pub fn parse_case_line(line: &str, fallback_id: &str) -> Result<CaseRecord> {
    let mut case = CaseRecord::new(fallback_id);
    for token in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        let (name, value) = token
            .split_once('=')
            .ok_or_else(|| Error::parse("<stdin>", 0, format!("`{token}` is not name=value")))?;
        if name == "id" {
            case.id = value.to_string();
            continue;
        }
        let v = if value.is_empty() || value == "?" {
            None
        } else {
            let x: f64 = value
                .parse()
                .map_err(|_| Error::parse("<stdin>", 0, format!("`{value}` for `{name}` is not a number")))?;
            Some(x).filter(|x| x.is_finite())
        };
        case.values.insert(name.to_string(), v);
    }
    Ok(case)
}

pub fn cmd_diagnose(a: &DiagnoseArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let book = MassBook::from_json(&std::fs::read_to_string(&a.masses)?)?;
    let frame = book.frame()?;
    let masses = book.masses()?;
    let disc = Discretization::from_csv_path(&a.disc)?;
    let report = a.report.config()?;

    let mut manifest = RunManifest::new("diagnose", ctx);
    manifest.input("masses", &a.masses)?;
    manifest.input("disc", &a.disc)?;
    manifest.set("threshold", report.threshold);
    manifest.set("include_theta", report.include_theta);

    let mut failures = 0usize;
    let render = |case: &CaseRecord, failures: &mut usize| match diagnose_case(case, &disc, &masses, &frame, &report) {
        Ok(r) => r.render(),
        Err(e) => {
            *failures += 1;
            format!("case {}\nerror: {e}\n", case.id)
        }
    };

    match &a.cases {
        Some(path) => {
            manifest.input("cases", path)?;
            let (cases, bad) = read_cases_lenient(std::fs::File::open(path)?, &path.display().to_string())?;
            for e in &bad {
                failures += 1;
                let _ = writeln!(io.stderr, "skipped: {e}");
            }
            let mut out = manifest.comment();
            for (i, case) in cases.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&render(case, &mut failures));
            }
            emit(a.out.as_deref(), &out, io.stdout)?;
        }
        None => {
            // interactive: answer each line as it arrives
            let mut sink: Box<dyn Write> = match &a.out {
                Some(p) => Box::new(std::fs::File::create(p)?),
                None => Box::new(&mut *io.stdout),
            };
            sink.write_all(manifest.comment().as_bytes())?;
            let mut n = 0usize;
            let mut line = String::new();
            loop {
                line.clear();
                if io.stdin.read_line(&mut line)? == 0 {
                    break;
                }
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                n += 1;
                let text = match parse_case_line(trimmed, &format!("stdin-{n}")) {
                    Ok(case) => render(&case, &mut failures),
                    Err(e) => {
                        failures += 1;
                        format!("case stdin-{n}\nerror: {e}\n")
                    }
                };
                if n > 1 {
                    sink.write_all(b"\n")?;
                }
                sink.write_all(text.as_bytes())?;
                sink.flush()?;
            }
        }
    }
    if failures > 0 {
        warn(io, format!("{failures} case(s) could not be diagnosed"));
        Ok(EXIT_PARTIAL)
    } else {
        Ok(EXIT_OK)
    }
}

pub fn cmd_evaluate(a: &EvaluateArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let frame = read_frame(&a.frame)?;
    let train = read_cases_path(&a.train)?;
    let test = read_cases_path(&a.test)?;
    check_disjoint(&train, &test)?;
    let disc = Discretization::from_csv_path(&a.disc)?;
    let report = a.report.config()?;

    let mut manifest = RunManifest::new("evaluate", ctx);
    manifest.input("frame", &a.frame)?;
    manifest.input("train", &a.train)?;
    manifest.input("test", &a.test)?;
    manifest.input("disc", &a.disc)?;
    manifest.set("methods", a.methods.join(","));
    manifest.set("variants", a.variants.join(","));
    manifest.set("priority", a.priority.join(","));
    manifest.set("theta", format!("{:?}", a.theta).to_lowercase());
    manifest.set("min_total", a.min_total);
    manifest.set("threshold", report.threshold);
    manifest.set("include_theta", report.include_theta);

    let mut columns = Vec::new();
    let mut notes = Vec::new();
    for m in &a.methods {
        let method = Method::parse(m, a.theta.into(), Method3Config::DEFAULT_MAX_FRAME_SIZE)?;
        let cfg = EstimateConfig {
            method,
            min_total: a.min_total,
        };
        for v in &a.variants {
            let variant = Variant::parse(v, &a.priority)?;
            let e = evaluate_ds(&train, &test, &disc, &frame, &cfg, &variant, &report)?;
            if *v != "cd3" {
                notes.push(format!("# {m}/{v} variables: {}\n", e.variables.join(",")));
            }
            for c in e.cases.iter().filter(|c| c.note.is_some()) {
                warn(io, format!("{m}/{v} case {}: {}", c.id, c.note.as_deref().unwrap_or("")));
            }
            columns.push(TallyColumn {
                method: m.clone(),
                variant: v.clone(),
                tally: e.tally,
            });
        }
    }
    notes.dedup();
    let mut text = manifest.comment();
    for n in &notes {
        text.push_str(n);
    }
    text.push_str("Performance in %\n");
    text.push_str(&render_tally_table(&columns));
    if let Some(path) = &a.csv {
        std::fs::write(path, format!("{}{}", manifest.comment(), tally_csv(&columns)))?;
    }
    emit(a.out.as_deref(), &text, io.stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_woe_train(a: &WoeTrainArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let cases = read_cases_path(&a.cases)?;
    let memberships = read_memberships_path(&a.memberships)?;
    let mut manifest = RunManifest::new("woe train", ctx);
    manifest.input("cases", &a.cases)?;
    manifest.input("memberships", &a.memberships)?;
    manifest.set("positive", &a.positive);
    manifest.set("pairs", a.pairs);
    manifest.set("min_support", a.min_support);
    let groups = GroupOptions {
        pairs: a.pairs,
        min_support: a.min_support,
    };
    let trained = train_woe(&cases, &memberships, &a.positive, &groups)?;
    for (key, why) in &trained.skipped {
        warn(io, format!("`{key}` not trained: {why}"));
    }
    emit(a.out.as_deref(), &format!("{}{}", manifest.comment(), write_weights(&trained.weights)), io.stdout)?;
    Ok(EXIT_OK)
}

struct Scoring {
    scorer: WoeScorer,
    positive: String,
    cases: Vec<CaseRecord>,
    train: Vec<CaseRecord>,
    manifest: RunManifest,
}

fn prepare_scoring(a: &ScoringArgs, command: &str, ctx: &RunContext) -> Result<Scoring> {
    let weights = read_weights_path(&a.weights)?;
    let positive = weights
        .first()
        .map(|w| w.hypothesis.clone())
        .ok_or_else(|| Error::InvalidConfig("weights file is empty".into()))?;
    let memberships = read_memberships_path(&a.memberships)?;
    let cases = read_cases_path(&a.cases)?;
    let mut manifest = RunManifest::new(command, ctx);
    manifest.input("weights", &a.weights)?;
    manifest.input("memberships", &a.memberships)?;
    manifest.input("cases", &a.cases)?;
    let train = match &a.train {
        Some(p) => {
            manifest.input("train", p)?;
            read_cases_path(p)?
        }
        None => Vec::new(),
    };
    let version = match a.search {
        SearchArg::V1 => SearchVersion::V1,
        SearchArg::V2 => SearchVersion::V2,
    };
    if version == SearchVersion::V1 && train.is_empty() {
        return Err(Error::InvalidConfig("--search v1 needs --train for its independence screens".into()));
    }
    let odds = match a.prior_odds {
        Some(o) => o,
        None if !train.is_empty() => prior_odds(&binary_labels(&train, &positive)?)?,
        None => return Err(Error::InvalidConfig("give --prior-odds or --train".into())),
    };
    let cfg = SearchConfig {
        version,
        significance: a.significance,
        max_overlap: a.max_overlap,
        min_support: a.min_support,
        ..SearchConfig::default()
    };
    manifest.set("hypothesis", &positive);
    manifest.set("prior_odds", odds);
    manifest.set("search", format!("{:?}", a.search).to_lowercase());
    manifest.set("max_overlap", a.max_overlap);
    manifest.set("significance", a.significance);
    manifest.set("min_support", a.min_support);
    let scorer = WoeScorer::new(&weights, &memberships, &train, &cfg, odds)?;
    Ok(Scoring {
        scorer,
        positive,
        cases,
        train,
        manifest,
    })
}

pub fn cmd_woe_score(a: &WoeScoreArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let s = prepare_scoring(&a.scoring, "woe score", ctx)?;
    let mut out = s.manifest.comment();
    out.push_str("id,outcome,probability,log_odds,evidence\n");
    let mut trace = String::new();
    for case in &s.cases {
        let (score, selection) = s.scorer.score(case)?;
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            case.id,
            case.outcome.as_deref().unwrap_or(""),
            score.probability,
            score.posterior_log_odds,
            selection.keys().join(";")
        ));
        trace.push_str(&format!("case {}\n{}\n", case.id, selection.trace_text()));
    }
    if let Some(p) = &a.trace {
        std::fs::write(p, trace)?;
    }
    emit(a.out.as_deref(), &out, io.stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_woe_roc(a: &WoeRocArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let mut s = prepare_scoring(&a.scoring, "woe roc", ctx)?;
    let thresholds: Vec<String> = a.thresholds.iter().map(f64::to_string).collect();
    s.manifest.set("thresholds", thresholds.join(","));
    let labels = binary_labels(&s.cases, &s.positive)?;
    let mut scores = Vec::new();
    for (case, label) in s.cases.iter().zip(&labels) {
        if let Some(l) = label {
            scores.push((s.scorer.score(case)?.0.probability, *l));
        }
    }
    let woe_points = roc_points(&scores, &a.thresholds)?;
    let text = match a.baseline {
        None => roc_csv(&woe_points),
        Some(BaselineArg::Logistic) => {
            if s.train.is_empty() {
                return Err(Error::InvalidConfig("--baseline logistic needs --train".into()));
            }
            s.manifest.set("baseline", "logistic");
            s.manifest.set("baseline_significance", a.baseline_significance);
            let mut variables: Vec<String> = Vec::new();
            for w in read_weights_path(&a.scoring.weights)? {
                for key in w.evidence_key.split('&') {
                    let v = variable_of(key).to_string();
                    if !variables.contains(&v) {
                        variables.push(v);
                    }
                }
            }
            let (model, design) = train_logistic(&s.train, &variables, &s.positive, a.baseline_significance)?;
            if !design.dropped().is_empty() {
                warn(io, format!("baseline: {} training case(s) dropped for missing values", design.dropped().len()));
            }
            let mut base = Vec::new();
            let mut undiagnosable = 0;
            for (case, label) in s.cases.iter().zip(&labels) {
                let Some(l) = label else { continue };
                match model.predict(|v| case.value(v)) {
                    Ok(p) => base.push((p, *l)),
                    Err(Error::Undiagnosable(_)) => undiagnosable += 1,
                    Err(e) => return Err(e),
                }
            }
            if undiagnosable > 0 {
                warn(io, format!("baseline: {undiagnosable} test case(s) undiagnosable"));
            }
            let base_points = roc_points(&base, &a.thresholds)?;
            roc_csv_compare(&[("woe", &woe_points), ("logistic", &base_points)])
        }
    };
    emit(a.out.as_deref(), &format!("{}{}", s.manifest.comment(), text), io.stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_reduce(a: &ReduceArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let mut manifest = RunManifest::new("reduce", ctx);
    let corr = match (&a.cases, &a.corr) {
        (Some(path), _) => {
            manifest.input("cases", path)?;
            let cases = read_cases_path(path)?;
            let vars = if a.variables.is_empty() { variables_of(&cases) } else { a.variables.clone() };
            pearson_matrix(&cases, &vars)?
        }
        (None, Some(path)) => {
            manifest.input("corr", path)?;
            let m = CorrelationMatrix::from_csv_path(path)?;
            if a.variables.is_empty() {
                m
            } else {
                m.restrict(&a.variables)
            }
        }
        (None, None) => return Err(Error::InvalidConfig("give --cases or --corr".into())),
    };
    let reduction = match a.mode {
        ReduceMode::Cd5 => Reduction::Threshold {
            threshold: a.threshold,
            priority: a.priority.clone(),
        },
        ReduceMode::Cd7 => Reduction::Cumulative {
            threshold: a.threshold,
            cumulative: a.cumulative,
        },
    };
    manifest.set("mode", format!("{:?}", a.mode).to_lowercase());
    manifest.set("threshold", a.threshold);
    if a.mode == ReduceMode::Cd7 {
        manifest.set("cumulative", a.cumulative);
    } else {
        manifest.set("priority", a.priority.join(","));
    }
    if let Some(p) = &a.matrix_out {
        std::fs::write(p, format!("{}{}", manifest.comment(), corr.to_csv()))?;
    }
    let kept = reduce_variables(&corr, &reduction);
    let mut out = manifest.comment();
    for v in kept {
        out.push_str(&v);
        out.push('\n');
    }
    emit(a.out.as_deref(), &out, io.stdout)?;
    Ok(EXIT_OK)
}

pub fn cmd_synth(a: &SynthArgs, ctx: &RunContext, io: &mut Streams<'_>) -> Result<i32> {
    let mut spec = SyntheticSpec::from_json_path(&a.spec)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let mut manifest = RunManifest::new("synth", ctx);
    manifest.input("spec", &a.spec)?;
    manifest.set("seed", spec.seed);
    let cases = generate_synthetic(&spec)?;
    if let Some(p) = &a.disc_out {
        std::fs::write(p, spec.discretization()?.to_csv())?;
    }
    if let Some(p) = &a.frame_out {
        std::fs::write(p, write_frame(&spec.frame()?))?;
    }
    let text = format!("{}{}", manifest.comment(), write_cases(&cases, &spec.variable_names()));
    emit(a.out.as_deref(), &text, io.stdout)?;
    Ok(EXIT_OK)
}
