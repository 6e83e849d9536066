use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bracketlab", version, about = "Simulate, estimate and verify choice-bracketing experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a price-list experiment and write the dataset CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to `run.out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `run.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; output is identical for every value.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Estimate from a dataset CSV.
    Estimate {
        #[arg(value_enum)]
        kind: EstimateKind,
        #[arg(long)]
        data: PathBuf,
        /// Writes `<out>.md` and `<out>.csv` instead of printing markdown.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reads the `[estimate]` section for defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        censor_limit: Option<f64>,
        /// Continuity correction for rank-sum tests.
        #[arg(long)]
        continuity: bool,
        /// Keep inconsistent price lists, read at their first acceptance.
        #[arg(long)]
        keep_inconsistent: bool,
    },
    /// Two-sample sample sizes.
    Power {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.9)]
        power: f64,
        /// n_large / n_small.
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        /// Inflate by π/3 for a rank-sum test.
        #[arg(long)]
        are: bool,
    },
    /// Run the theory checks over the model zoo.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateKind {
    Means,
    Mwu,
    Kappa,
    Tobit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Additivity,
    Unidentifiability,
    Cara,
    Mixture,
    Warp,
    All,
}
