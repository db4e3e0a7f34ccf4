use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use permix::group::ParityFilter;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug, Clone)]
#[command(name = "permix", version = VERSION, about = "Product mixing experiments on S_n and A_n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags shared by every subcommand. Only the fields that can change the
/// results are embedded in reports, so output does not depend on where it is
/// written or how many threads produced it.
#[derive(Args, Debug, Clone, Serialize)]
pub struct CommonArgs {
    /// Degree of the permutation group.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Parity::All)]
    pub parity: Parity,
    /// Seed for every random choice; required by randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also compute exact rational results (n ≤ 6).
    #[arg(long = "rational", global = true)]
    pub rational_mode: bool,
    /// Largest number of pair evaluations an exact computation may perform.
    #[arg(long, global = true, default_value_t = 2_000_000_000)]
    pub budget: u128,
    /// Write the report here instead of stdout.
    #[arg(long = "output", global = true)]
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "PERMIX_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Embed wall-clock runtime in the report (makes output run-dependent).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// The symmetric group S_n.
    All,
    /// The alternating group A_n.
    Even,
}

impl From<Parity> for ParityFilter {
    fn from(p: Parity) -> Self {
        match p {
            Parity::All => ParityFilter::All,
            Parity::Even => ParityFilter::Even,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Measure ⟨1_X * 1_Y, 1_Z⟩ against αβγ.
    Mixing(MixingArgs),
    /// Build the product-free and surplus constructions.
    Construct {
        #[command(subcommand)]
        which: ConstructCommand,
    },
    /// Check the standard-representation identities on random functions.
    Fourier(FourierArgs),
    /// Hoeffding's statistic and the rearrangement experiments.
    Concentration {
        #[command(subcommand)]
        which: ConcentrationCommand,
    },
    /// Permanent and entropy inequalities.
    Inequality {
        #[command(subcommand)]
        which: InequalityCommand,
    },
    /// Evaluate the sufficient conditions for one-sided mixing.
    Threshold(ThresholdArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Kedlaya,
    Surplus,
    All,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MixingArgs {
    /// Draw random subsets X, Y, Z of the enumerated group.
    #[arg(long)]
    pub random_triple: bool,
    /// Inclusion probability for the random subsets: one value or three.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub density: Vec<f64>,
    /// Number of random triples.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Minimal nontrivial representation dimension (defaults per group).
    #[arg(long)]
    pub m: Option<usize>,
    /// Take X = Y = Z from a predicate family and estimate by Monte Carlo.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// |T| for the kedlaya and surplus families.
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructCommand {
    /// π(b) ∈ T and π(T) ∩ T = ∅.
    Kedlaya(KedlayaArgs),
    /// π(T) ∩ T ≠ ∅.
    Surplus(SurplusArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KedlayaArgs {
    #[arg(long)]
    pub t: usize,
    /// Base point (1-based).
    #[arg(long, default_value_t = 1)]
    pub basepoint: usize,
    /// Points of T (1-based); default 2..=t+1.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<usize>>,
    /// Search the enumerated set for a solution of xy = z.
    #[arg(long)]
    pub check_product_free: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SurplusArgs {
    /// One or more sizes of T, each using T = {1..t}.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FourierCheck {
    All,
    Decomposition,
    Secondterm,
    Parseval,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FourierArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = FourierCheck::All)]
    pub check: FourierCheck,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcentrationCommand {
    /// Exponential-moment bound and the CLL step on a λ grid.
    ExpMoment(ExpMomentArgs),
    /// Exact and Monte Carlo tails against the Bernstein bound.
    Tail(TailArgs),
    /// Dyadic decomposition invariants on random functions.
    Dyadic(DyadicArgs),
    /// Level-set deficits for random f and indicator level sets.
    Levelset(LevelsetArgs),
    /// Rearrangement deficit table.
    Deficit(DeficitArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExpMomentArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub lambdas: usize,
    /// Matrix CSV (first row `n,<size>`); replaces the random corpus.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TailArgs {
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Constant in 2 exp(-c t²/(v + M t)).
    #[arg(long, default_value_t = 1.0 / 16.0)]
    pub c: f64,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DyadicArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = permix::concentration::DEFAULT_DYADIC_FLOOR)]
    pub floor: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LevelsetArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta2: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DeficitArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityCommand {
    /// ∫ Π f_i(π(i)) ≤ Π ‖f_i‖₂ for random nonnegative f_i.
    Cll(TrialsArgs),
    /// |perm M| ≤ (n!/n^{n/2}) Π |v_i| for random Gaussian M.
    Hadamard(TrialsArgs),
    /// S(f) ≥ (1/2) Σ S(p_i f) for random f.
    Subadditivity(TrialsArgs),
    /// Extremal two-level entropies against their lower bounds.
    EntropyLemmas(EntropyLemmaArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrialsArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EntropyLemmaArgs {
    /// Grid points per parameter.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Mixing(_) => "mixing",
            Command::Construct { which } => match which {
                ConstructCommand::Kedlaya(_) => "construct kedlaya",
                ConstructCommand::Surplus(_) => "construct surplus",
            },
            Command::Fourier(_) => "fourier",
            Command::Concentration { which } => match which {
                ConcentrationCommand::ExpMoment(_) => "concentration exp-moment",
                ConcentrationCommand::Tail(_) => "concentration tail",
                ConcentrationCommand::Dyadic(_) => "concentration dyadic",
                ConcentrationCommand::Levelset(_) => "concentration levelset",
                ConcentrationCommand::Deficit(_) => "concentration deficit",
            },
            Command::Inequality { which } => match which {
                InequalityCommand::Cll(_) => "inequality cll",
                InequalityCommand::Hadamard(_) => "inequality hadamard",
                InequalityCommand::Subadditivity(_) => "inequality subadditivity",
                InequalityCommand::EntropyLemmas(_) => "inequality entropy-lemmas",
            },
            Command::Threshold(_) => "threshold",
        }
    }
}
