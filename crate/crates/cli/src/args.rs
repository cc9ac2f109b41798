use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chancomp", version, about = "Certified complexity intervals for quantum channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interval for the complexity of a channel against a resource set.
    Complexity {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        resource: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Interval for the expected length of a resource set.
    ExpectedLength {
        #[arg(long)]
        resource: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Interval for the complete complexity over a few ancilla levels.
    CbComplexity {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        resource: PathBuf,
        /// Ancilla levels, comma separated; default 1,2,d.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Diamond norm of a channel minus a reference (identity by default).
    Diamond {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// First time a semigroup is within `eps` of its fixed-point projection.
    ReturnTime {
        #[command(flatten)]
        semigroup: SemigroupArgs,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = ReturnNormArg::Diamond)]
        norm: ReturnNormArg,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Complete-complexity intervals along a semigroup.
    Trajectory {
        #[command(flatten)]
        semigroup: SemigroupArgs,
        /// `auto` or a comma-separated increasing list of times.
        #[arg(long, default_value = "auto")]
        grid: String,
        /// Number of points of the automatic grid.
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Word-length statistics of a finite group.
    GroupStats {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Numerical checks of proven inequalities.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Partial-trace norm against the Pauli Lipschitz norm.
    Pauli {
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Logarithmic generators against the Pauli unitaries.
    Clifford {
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Product of two qubit channels against the sum of their intervals.
    TensorAdditivity {
        #[arg(long, value_enum, default_value_t = QubitChannel::Depolarizing)]
        first: QubitChannel,
        #[arg(long, value_enum, default_value_t = QubitChannel::AdX)]
        second: QubitChannel,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Expected length of a commutative group algebra against its mean word length.
    WordLength {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Directory for reports and the run manifest.
    #[arg(long, default_value = "chancomp-out")]
    pub out: PathBuf,
    /// Worker cap; falls back to CHANCOMP_THREADS.
    #[arg(long, env = "CHANCOMP_THREADS")]
    pub threads: Option<usize>,
    /// Also write SVG plots where available.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub restarts: usize,
    #[arg(long, default_value_t = 60)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 4000)]
    pub lmo_iter: usize,
    #[arg(long, value_enum, default_value_t = LmoArg::Admm)]
    pub lmo: LmoArg,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Inf)]
    pub variant: VariantArg,
    /// Extra upper bound `name=value`; repeatable.
    #[arg(long = "certificate")]
    pub certificates: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SemigroupArgs {
    /// Built-in qubit semigroup.
    #[arg(long, value_enum, conflicts_with = "resource")]
    pub semigroup: Option<SemigroupPreset>,
    /// Resource file generating the semigroup.
    #[arg(long, requires = "kind")]
    pub resource: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Weights over the symmetrized resource elements (discrete kind).
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    /// `z<n>` (cyclic, n ≤ 64) or `s3`.
    #[arg(long, conflicts_with = "resource")]
    pub group: Option<String>,
    /// Discrete resource file whose elements generate the group.
    #[arg(long)]
    pub resource: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub max_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemigroupPreset {
    /// Uniform mixture of the Pauli conjugations.
    PauliMixture,
    /// Lindblad generator with the three Pauli jumps.
    PauliLindblad,
    /// Lindblad generator with a single σZ jump.
    Dephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Discrete,
    Lindblad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReturnNormArg {
    Diamond,
    InfInfUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LmoArg {
    Admm,
    DykstraAscent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Inf,
    L2,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QubitChannel {
    Depolarizing,
    AdX,
}
