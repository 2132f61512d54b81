use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "sumlab", version, about = "Exact experiments with δ-discretized sum-product sets")]
pub struct Cli {
    /// Worker threads for data-parallel steps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for randomized commands; SUMLAB_SEED takes precedence.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Covering numbers, regularity constants and uniformity of a set.
    Analyze(AnalyzeArgs),
    /// Largest-mass uniform subset, or an exhaustion by uniform pieces.
    Uniformize(UniformizeArgs),
    /// Branching function and slope decomposition of a uniform set.
    Branch(BranchArgs),
    /// Build example sets.
    Construct(ConstructArgs),
    /// Adversarial expansion search over c ∈ C.
    Expand(ExpandArgs),
    /// Scale-window certificates.
    Trace(TraceArgs),
    /// Acceptance battery, or re-verification of a certificate.
    Verify(VerifyArgs),
    /// CSV or SVG from a branch or expand report.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Dyadic,
    Exact,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Exponents, as p/q, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1/2,1")]
    pub s: Vec<String>,
    #[arg(long, value_enum, default_value = "dyadic")]
    pub mode: ModeArg,
    /// Also test uniformity with this block length.
    #[arg(long = "T")]
    pub t: Option<u32>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct UniformizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "T")]
    pub t: u32,
    /// Exhaust by uniform pieces down to a δ^ε share; needs a directory output.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Set file, or directory with --epsilon.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecomposeArg {
    Hull,
    Minlen,
}

#[derive(Args, Debug, Serialize)]
pub struct BranchArgs {
    /// Uniform set.
    #[arg(long, conflicts_with = "function", required_unless_present = "function")]
    pub input: Option<PathBuf>,
    /// Branching function JSON instead of a set.
    #[arg(long)]
    pub function: Option<PathBuf>,
    #[arg(long = "T", required_unless_present = "function")]
    pub t: Option<u32>,
    #[arg(long, value_enum)]
    pub decompose: Option<DecomposeArg>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// CSV of (j, f(j)) and the minorant when decomposed.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[command(subcommand)]
    pub kind: ConstructKind,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingArg {
    Exact,
    Floor,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomKind {
    Katztao,
    Frostman,
    Subset,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "construct", rename_all = "kebab-case")]
pub enum ConstructKind {
    /// A, B, C of the sharpness example, written to a directory.
    Sharpness {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        eta: String,
        #[arg(long, value_enum, default_value = "exact")]
        rounding: RoundingArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// A, B, C with diam(B)·diam(C) ≤ δ, written to a directory.
    SmallDiam {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        rb: u32,
        #[arg(long)]
        rc: u32,
        /// Use this A instead of the default progression.
        #[arg(long = "A")]
        a: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// A = [0, 2^a δ) and B = [0, 2^b δ), written to a directory.
    Concentration {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Arithmetic progression o + i·2^gap.
    Ap {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        gap: u32,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        offset: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Seeded random set.
    Random {
        #[arg(long, value_enum)]
        kind: RandomKind,
        #[arg(long)]
        q: u32,
        #[arg(long = "T", default_value_t = 2)]
        t: u32,
        #[arg(long, default_value = "1/2")]
        s: String,
        /// Point count for --kind subset.
        #[arg(long)]
        n: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ExpandArgs {
    #[arg(long = "A")]
    pub a: PathBuf,
    #[arg(long = "B")]
    pub b: PathBuf,
    #[arg(long = "C")]
    pub c: PathBuf,
    /// Pair density θ = δ^e.
    #[arg(long, conflicts_with = "theta", required_unless_present = "theta")]
    pub theta_exp: Option<String>,
    /// Pair density θ given directly.
    #[arg(long)]
    pub theta: Option<String>,
    /// Also compute |A + BC|_δ.
    #[arg(long)]
    pub union: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub per_c_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Abc,
    C3,
    C4,
    /// Upper-half reduction of C.
    Reduce,
}

#[derive(Args, Debug, Serialize)]
pub struct TraceArgs {
    #[arg(value_enum)]
    pub kind: TraceKind,
    #[arg(long = "A")]
    pub a: Option<PathBuf>,
    #[arg(long = "B")]
    pub b: Option<PathBuf>,
    #[arg(long = "C")]
    pub c: PathBuf,
    #[arg(long = "T")]
    pub t: Option<u32>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub eta: String,
    /// Min-length parameter for the decomposition.
    #[arg(long)]
    pub lemma_eps: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub frostman_limit: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// `all`, or comma-separated criterion numbers.
    #[arg(long, default_value = "all", conflicts_with = "certificate")]
    pub suite: String,
    /// Re-verify a trace report against its inputs.
    #[arg(long, requires_all = ["a", "b", "c"])]
    pub certificate: Option<PathBuf>,
    #[arg(long = "A")]
    pub a: Option<PathBuf>,
    #[arg(long = "B")]
    pub b: Option<PathBuf>,
    #[arg(long = "C")]
    pub c: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotFormat {
    Csv,
    Svg,
}

#[derive(Args, Debug, Serialize)]
pub struct PlotArgs {
    /// A branch or expand report.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: PlotFormat,
    #[arg(short, long)]
    pub output: PathBuf,
}
