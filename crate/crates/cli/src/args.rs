//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::{Command, OutputFormat, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "qnd",
    version,
    about = "Projective measurement kernel: Lüders channel, trace rule, HS-distance oracle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Eigenvalues closer than this are merged into one eigenspace.
    #[arg(long, global = true, default_value_t = qnd_core::DEFAULT_CLUSTER_TOL)]
    pub cluster_tol: f64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Spectral decomposition of a Hermitian matrix.
    Decompose {
        #[arg(long)]
        input: PathBuf,
    },
    /// Outcome probabilities, conditional states and the Lüders state.
    Measure {
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Searches the definite-value family for a state closer than the Lüders state.
    Oracle {
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Random-search budget.
        #[arg(long)]
        samples: Option<u64>,
        /// Check this state instead of the Lüders state.
        #[arg(long)]
        claimed: Option<PathBuf>,
    },
    /// Monte Carlo outcome sampling.
    Sample {
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Number of trials.
        #[arg(long)]
        samples: Option<u64>,
        /// Measure each trial twice and report agreement.
        #[arg(long)]
        repeat: bool,
    },
    /// Seeded property suite.
    Verify {
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Random cases per dimension for each check.
        #[arg(long)]
        cases: Option<usize>,
        /// Oracle random-search budget per case.
        #[arg(long)]
        samples: Option<u64>,
        /// Trials per sampler check.
        #[arg(long)]
        trials: Option<u64>,
    },
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let mut samples = None;
        let mut trials = None;
        let mut cases = None;
        let mut dims = None;
        let command = match self.command {
            Sub::Decompose { input } => Command::Decompose { input },
            Sub::Measure { observable, state } => Command::Measure { observable, state },
            Sub::Oracle {
                observable,
                state,
                samples: s,
                claimed,
            } => {
                samples = s;
                Command::Oracle {
                    observable,
                    state,
                    claimed,
                }
            }
            Sub::Sample {
                observable,
                state,
                samples: s,
                repeat,
            } => {
                samples = s;
                Command::Sample {
                    observable,
                    state,
                    repeat,
                }
            }
            Sub::Verify {
                dims: d,
                cases: c,
                samples: s,
                trials: t,
            } => {
                (dims, cases, samples, trials) = (d, c, s, t);
                Command::Verify
            }
        };
        let mut config = RunConfig::new(command);
        config.seed = self.common.seed;
        config.cluster_tol = self.common.cluster_tol;
        config.out = self.common.out;
        config.format = self.common.format;
        config.samples = samples;
        config.trials = trials;
        config.cases = cases;
        if let Some(dims) = dims {
            config.dims = dims;
        }
        config
    }
}
