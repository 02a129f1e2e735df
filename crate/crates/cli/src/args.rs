use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "funcint", version, about = "Closed-form Gaussian functional integrals with cardinal tags")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Relative tolerance for engine/analytic agreement.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Dimensions to verify at, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1,2,4")]
    pub dims: Vec<usize>,
    /// Monte Carlo samples per row (0 disables Monte Carlo).
    #[arg(long, global = true, default_value_t = 0)]
    pub mc_samples: u64,
    /// Random seed; the FUNCINT_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Bind a kernel or vector symbol to a CSV or JSON file.
    #[arg(long = "bind", global = true, value_name = "NAME=PATH")]
    pub binds: Vec<String>,
    /// Dimension at which to instantiate the closed form numerically.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// Closed-form catalog.
    Catalog,
    /// Moment-series expansion (isotropic real integrals only).
    Series,
    /// Squared-integral rotation (unshifted complex integrals only).
    Square,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an integral written in the DSL.
    Eval {
        /// Integral, e.g. "int exp(-q.K.q + q.f) D[q]".
        integral: String,
        /// Derivation route.
        #[arg(long, value_enum, default_value_t = Route::Catalog)]
        via: Route,
    },
    /// Check closed forms against the finite-dimensional oracles.
    Verify {
        /// A..J, "all", or a JSON case file.
        #[arg(long = "case")]
        case: String,
    },
    /// Moment tensor of the functional measure.
    Moments {
        #[arg(long)]
        order: u32,
        /// Largest order whose pairings may be enumerated.
        #[arg(long, default_value_t = funcint::wick::DEFAULT_PAIRING_CAP)]
        cap: u32,
    },
    /// Number of pairings of n items.
    Pairings {
        #[arg(long)]
        n: u32,
        /// Also list every pairing.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = funcint::wick::DEFAULT_PAIRING_CAP)]
        cap: u32,
    },
    /// Carleman condition diagnostics for the probability moments.
    Carleman {
        /// |f|, the norm of the test function.
        #[arg(long)]
        norm: f64,
        #[arg(long)]
        nmax: u64,
        /// Print every row of the termwise table.
        #[arg(long)]
        full: bool,
    },
}
