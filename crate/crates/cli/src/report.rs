//! Report envelopes and their JSON and CSV renderings.

use serde::Serialize;
use serde_json::Value;

use qnd_core::{
    CheckResult, MeasurementResult, Observable, OracleReport, RepeatabilityReport, SampleReport, SuiteReport,
};

use crate::error::CliError;
use crate::format::{format_float, nums, MatrixFile, Num};

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "qnd";

#[derive(Debug, Serialize)]
pub struct Envelope<R: Serialize> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub result: R,
}

/// Named tolerances, serialized as an object in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Tolerances(pub Vec<(&'static str, f64)>);

impl Serialize for Tolerances {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &Num(*v))?;
        }
        map.end()
    }
}

impl<R: Serialize> Envelope<R> {
    pub fn new(command: &'static str, seed: u64, tolerances: Vec<(&'static str, f64)>, result: R) -> Self {
        Self {
            schema: SCHEMA,
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            tolerances: Tolerances(tolerances),
            result,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DecomposeResult {
    pub dim: usize,
    pub eigenvalues: Vec<Num>,
    pub ranks: Vec<usize>,
    pub projectors: Vec<MatrixFile>,
    pub reconstruction_error: Num,
    pub projector_defect: Num,
}

impl DecomposeResult {
    pub fn new(obs: &Observable, input: &qnd_core::ComplexMatrix) -> Self {
        Self {
            dim: obs.dim(),
            eigenvalues: nums(obs.eigenvalues()),
            ranks: obs.ranks(),
            projectors: obs.projectors().iter().map(MatrixFile::from).collect(),
            reconstruction_error: Num(obs.matrix().max_abs_diff(input)),
            projector_defect: Num(obs.projector_defect()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OutcomeEntry {
    pub index: usize,
    pub eigenvalue: Num,
    pub rank: usize,
    pub probability: Num,
    pub conditional_state: Option<MatrixFile>,
}

#[derive(Debug, Serialize)]
pub struct MeasureResult {
    pub dim: usize,
    pub outcomes: Vec<OutcomeEntry>,
    pub probability_sum: Num,
    pub final_state: MatrixFile,
    pub recombination_residual: Num,
}

impl From<&MeasurementResult> for MeasureResult {
    fn from(m: &MeasurementResult) -> Self {
        let ranks = m.observable.ranks();
        Self {
            dim: m.observable.dim(),
            outcomes: m
                .observable
                .outcomes()
                .map(|o| OutcomeEntry {
                    index: o.index,
                    eigenvalue: Num(o.eigenvalue),
                    rank: ranks[o.index],
                    probability: Num(m.probabilities[o.index]),
                    conditional_state: m.conditional_states[o.index].as_ref().map(MatrixFile::from),
                })
                .collect(),
            probability_sum: Num(m.probabilities.iter().sum()),
            final_state: MatrixFile::from(&m.final_state),
            recombination_residual: Num(m.recombination_residual()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OracleResult {
    pub passed: bool,
    pub method: &'static str,
    pub reference: &'static str,
    pub best_distance: Num,
    pub lueders_distance: Num,
    pub gap: Num,
    pub argmin_deviation: Num,
    pub iterations_used: usize,
    pub candidates_evaluated: usize,
    pub converged: bool,
    pub best_state: MatrixFile,
}

impl OracleResult {
    pub fn new(report: &OracleReport, passed: bool, claimed: bool) -> Self {
        Self {
            passed,
            method: report.method.as_str(),
            reference: if claimed { "claimed" } else { "lueders" },
            best_distance: Num(report.best_distance),
            lueders_distance: Num(report.lueders_distance),
            gap: Num(report.gap),
            argmin_deviation: Num(report.argmin_deviation),
            iterations_used: report.iterations_used,
            candidates_evaluated: report.candidates_evaluated,
            converged: report.converged,
            best_state: MatrixFile::from(&report.best_state),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SampleResult {
    pub n_trials: u64,
    pub counts: Vec<u64>,
    pub frequencies: Vec<Num>,
    pub probabilities: Vec<Num>,
    pub max_abs_deviation: Num,
    pub pearson_chi_square: Num,
    pub chi_square_999: bool,
}

impl From<&SampleReport> for SampleResult {
    fn from(r: &SampleReport) -> Self {
        Self {
            n_trials: r.n_trials,
            counts: r.counts.clone(),
            frequencies: nums(&r.frequencies),
            probabilities: nums(&r.probabilities),
            max_abs_deviation: Num(r.max_abs_deviation),
            pearson_chi_square: Num(r.pearson_chi_square()),
            chi_square_999: r.chi_square_passes(0.999),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RepeatResult {
    pub passed: bool,
    pub n_trials: u64,
    pub agreements: u64,
    pub agreement_rate: Num,
    pub first: SampleResult,
    pub second: SampleResult,
}

impl From<&RepeatabilityReport> for RepeatResult {
    fn from(r: &RepeatabilityReport) -> Self {
        Self {
            passed: r.fully_repeatable(),
            n_trials: r.n_trials,
            agreements: r.agreements,
            agreement_rate: Num(r.agreement_rate()),
            first: SampleResult::from(&r.first),
            second: SampleResult::from(&r.second),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckEntry {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub worst: Num,
    pub tolerance: Num,
}

impl From<&CheckResult> for CheckEntry {
    fn from(c: &CheckResult) -> Self {
        Self {
            name: c.name,
            passed: c.passed(),
            cases: c.cases,
            failures: c.failures,
            worst: Num(c.worst),
            tolerance: Num(c.tolerance),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub passed: bool,
    pub dims: Vec<usize>,
    pub cases: usize,
    pub oracle_samples: usize,
    pub trials: u64,
    pub checks: Vec<CheckEntry>,
}

impl From<&SuiteReport> for VerifyResult {
    fn from(r: &SuiteReport) -> Self {
        Self {
            passed: r.passed(),
            dims: r.config.dims.clone(),
            cases: r.config.cases,
            oracle_samples: r.config.oracle_samples,
            trials: r.config.trials,
            checks: r.checks.iter().map(CheckEntry::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

pub fn render<R: Serialize>(envelope: &Envelope<R>, format: OutputFormat) -> Result<String, CliError> {
    let mut json = serde_json::to_string_pretty(envelope).map_err(|e| CliError::Serialize(e.to_string()))?;
    json.push('\n');
    match format {
        OutputFormat::Json => Ok(json),
        OutputFormat::Csv => to_csv(&json),
    }
}

/// Flattens a JSON report into `path,value` rows. Paths join object keys and
/// array indices with dots.
pub fn to_csv(json: &str) -> Result<String, CliError> {
    let value: Value = serde_json::from_str(json).map_err(|e| CliError::Serialize(e.to_string()))?;
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    writer.write_record(["path", "value"]).map_err(ser)?;
    for (path, value) in rows {
        writer.write_record([path, value]).map_err(ser)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::Number(n) if n.is_f64() => rows.push((prefix.to_string(), format_float(n.as_f64().unwrap()))),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
