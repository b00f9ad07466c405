//! Library behind the `qnd` binary: argument handling, file formats and
//! report rendering. Exit codes are 0 on success, 1 for usage or validation
//! errors, 2 for I/O errors and 3 when a property or oracle check fails.

pub mod args;
pub mod error;
pub mod format;
pub mod report;

use std::path::{Path, PathBuf};

use qnd_core::measurement::{CERTAINTY_TOL, PROBABILITY_CLIP, P_FLOOR};
use qnd_core::oracle::{ARGMIN_TOL, GAP_TOL, STEP_FLOOR};
use qnd_core::{
    measure, repeatability_run, run_suite, sample_outcomes, spectral_decompose, verify_claimed_minimizer,
    verify_minimality, DensityOperator, Error as CoreError, OracleConfig, SuiteConfig,
};

pub use error::CliError;
pub use report::OutputFormat;

use format::{parse_matrix_file, parse_observable_file, parse_state_file};
use report::{
    render, DecomposeResult, Envelope, MeasureResult, OracleResult, RepeatResult, SampleResult, VerifyResult,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PROPERTY: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Decompose {
        input: PathBuf,
    },
    Measure {
        observable: PathBuf,
        state: PathBuf,
    },
    Oracle {
        observable: PathBuf,
        state: PathBuf,
        claimed: Option<PathBuf>,
    },
    Sample {
        observable: PathBuf,
        state: PathBuf,
        repeat: bool,
    },
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Decompose { .. } => "decompose",
            Command::Measure { .. } => "measure",
            Command::Oracle { .. } => "oracle",
            Command::Sample { .. } => "sample",
            Command::Verify => "verify",
        }
    }

    fn files(&self) -> Vec<&Path> {
        match self {
            Command::Decompose { input } => vec![input],
            Command::Measure { observable, state } | Command::Sample { observable, state, .. } => {
                vec![observable, state]
            }
            Command::Oracle {
                observable,
                state,
                claimed,
            } => {
                let mut files = vec![observable.as_path(), state.as_path()];
                files.extend(claimed.as_deref());
                files
            }
            Command::Verify => vec![],
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    /// Oracle random-search budget, sampler trial count, or the per-case
    /// oracle budget of `verify`, depending on the command.
    pub samples: Option<u64>,
    /// Sampler trials inside `verify`.
    pub trials: Option<u64>,
    pub dims: Vec<usize>,
    pub cases: Option<usize>,
    pub cluster_tol: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Largest dimension `verify` accepts.
pub const MAX_VERIFY_DIM: usize = 64;

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            samples: None,
            trials: None,
            dims: SuiteConfig::default().dims,
            cases: None,
            cluster_tol: qnd_core::DEFAULT_CLUSTER_TOL,
            out: None,
            format: OutputFormat::Json,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.cluster_tol.is_finite() && self.cluster_tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--cluster-tol must be positive, got {}",
                self.cluster_tol
            )));
        }
        if self.samples == Some(0) {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        if self.trials == Some(0) {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if self.cases == Some(0) {
            return Err(CliError::Usage("--cases must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(CliError::Usage("--dims must name at least one dimension".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d > MAX_VERIFY_DIM) {
            return Err(CliError::Usage(format!(
                "--dims entries must be in 1..={MAX_VERIFY_DIM}, got {d}"
            )));
        }
        for path in self.command.files() {
            if !path.is_file() {
                return Err(CliError::Usage(format!("{}: no such file", path.display())));
            }
        }
        Ok(())
    }
}

/// A rendered report and whether every check it carries passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub report: String,
    pub passed: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_PROPERTY
        }
    }
}

fn usize_samples(samples: Option<u64>, default: usize) -> Result<usize, CliError> {
    samples
        .map(|s| usize::try_from(s).map_err(|_| CliError::Usage(format!("--samples {s} is too large"))))
        .unwrap_or(Ok(default))
}

/// Validates the configuration, runs the command and renders its report.
pub fn execute(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let seed = config.seed;
    let cluster = ("cluster_tol", config.cluster_tol);
    let measure_tols = vec![
        cluster,
        ("p_floor", P_FLOOR),
        ("probability_clip", PROBABILITY_CLIP),
        ("certainty_tol", CERTAINTY_TOL),
    ];
    let name = config.command.name();

    let (report, passed) = match &config.command {
        Command::Decompose { input } => {
            let h = parse_matrix_file(input)?;
            let obs = spectral_decompose(&h, config.cluster_tol)?;
            let env = Envelope::new(name, seed, vec![cluster], DecomposeResult::new(&obs, &h));
            (render(&env, config.format)?, true)
        }
        Command::Measure { observable, state } => {
            let obs = parse_observable_file(observable, config.cluster_tol)?;
            let rho = parse_state_file(state)?;
            let result = measure(&obs, &rho)?;
            let env = Envelope::new(name, seed, measure_tols, MeasureResult::from(&result));
            (render(&env, config.format)?, true)
        }
        Command::Oracle {
            observable,
            state,
            claimed,
        } => {
            let obs = parse_observable_file(observable, config.cluster_tol)?;
            let rho = parse_state_file(state)?;
            let claimed: Option<DensityOperator> = claimed.as_deref().map(parse_state_file).transpose()?;
            let oracle = OracleConfig {
                samples: usize_samples(config.samples, OracleConfig::default().samples)?,
                seed,
                ..OracleConfig::default()
            };
            let outcome = match &claimed {
                Some(c) => verify_claimed_minimizer(&obs, &rho, c, &oracle),
                None => verify_minimality(&obs, &rho, &oracle),
            };
            let (report, passed) = match outcome {
                Ok(report) => (report, true),
                Err(CoreError::MinimalityViolation(report)) => (*report, false),
                Err(e) => return Err(e.into()),
            };
            let tols = vec![
                cluster,
                ("gap_tol", GAP_TOL),
                ("argmin_tol", ARGMIN_TOL),
                ("descent_step", oracle.step),
                ("descent_tol", oracle.tol),
                ("step_floor", STEP_FLOOR),
            ];
            let env = Envelope::new(name, seed, tols, OracleResult::new(&report, passed, claimed.is_some()));
            (render(&env, config.format)?, passed)
        }
        Command::Sample {
            observable,
            state,
            repeat,
        } => {
            let obs = parse_observable_file(observable, config.cluster_tol)?;
            let rho = parse_state_file(state)?;
            let trials = config.samples.unwrap_or(10_000);
            if *repeat {
                let run = repeatability_run(&obs, &rho, trials, seed)?;
                let result = RepeatResult::from(&run);
                let passed = result.passed;
                (
                    render(&Envelope::new(name, seed, measure_tols, result), config.format)?,
                    passed,
                )
            } else {
                let run = sample_outcomes(&obs, &rho, trials, seed)?;
                let env = Envelope::new(name, seed, measure_tols, SampleResult::from(&run));
                (render(&env, config.format)?, true)
            }
        }
        Command::Verify => {
            let defaults = SuiteConfig::default();
            let suite = SuiteConfig {
                dims: config.dims.clone(),
                seed,
                cases: config.cases.unwrap_or(defaults.cases),
                oracle_samples: usize_samples(config.samples, defaults.oracle_samples)?,
                trials: config.trials.unwrap_or(defaults.trials),
            };
            let result = VerifyResult::from(&run_suite(&suite)?);
            let passed = result.passed;
            let tols = vec![cluster, ("gap_tol", GAP_TOL), ("argmin_tol", ARGMIN_TOL)];
            (render(&Envelope::new(name, seed, tols, result), config.format)?, passed)
        }
    };
    Ok(RunOutcome { report, passed })
}

/// Writes the report to `out`, or to stdout when `out` is `None`.
pub fn emit(outcome: &RunOutcome, out: Option<&Path>) -> Result<(), CliError> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, &outcome.report).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.report.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Runs a configuration end to end and returns the process exit code.
pub fn run(config: &RunConfig) -> u8 {
    match execute(config).and_then(|outcome| emit(&outcome, config.out.as_deref()).map(|_| outcome)) {
        Ok(outcome) => {
            if !outcome.passed {
                eprintln!("qnd {}: property check failed", config.command.name());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("qnd: {e}");
            e.exit_code()
        }
    }
}
