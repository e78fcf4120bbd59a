use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ellres", version)]
#[command(about = "Equivariant elliptic genera, residues and wall-crossing checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Elliptic genus of a fixed-point model at a sampled torus point
    Genus(GenusArgs),
    /// Wall-crossing integral C_n of a Chern-root configuration
    Residue(ResidueArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct GenusArgs {
    /// Fixed-point model (JSON)
    #[arg(long)]
    pub model: PathBuf,

    /// `<re>+<im>i`, `zeta:N:k` or `random`
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,

    #[arg(long, default_value_t = 8)]
    pub q_order: usize,

    /// Seeds the torus point (and `--y random`)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Normalize by y^dim at each point (the genus); `--raw` gives the bare sum
    #[arg(long)]
    pub raw: bool,

    #[arg(long)]
    pub json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    Quadrature,
    Localization,
}

#[derive(Args, Debug)]
pub struct ResidueArgs {
    /// Chern-root configuration (JSON)
    #[arg(long)]
    pub config: PathBuf,

    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub n: i32,

    #[arg(long, value_enum, default_value_t = Method::Direct)]
    pub method: Method,

    /// Run all three methods and report the largest pairwise deviation
    #[arg(long)]
    pub all_methods: bool,

    #[arg(long, allow_hyphen_values = true)]
    pub y: String,

    #[arg(long, default_value_t = 8)]
    pub q_order: usize,

    /// Quadrature nodes per circle
    #[arg(long, default_value_t = ellres::residue::DEFAULT_NODES)]
    pub points: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Theta,
    Axioms,
    Blowup,
    PnVanishing,
    C0Vanishing,
    JkAgreement,
    Flip,
    Ellipticity,
    Holomorphy,
    Flags,
    Hrr,
    VwParity,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    /// Root-of-unity order
    #[arg(long = "N")]
    pub big_n: Option<u32>,

    /// Root-of-unity exponent (every k in 1..N when omitted)
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i64>,

    #[arg(long)]
    pub rp: Option<usize>,

    #[arg(long)]
    pub rm: Option<usize>,

    /// Power of s in the integrand
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i32>,

    /// Largest d1 + d2 for the flag suite
    #[arg(long)]
    pub dmax: Option<u32>,

    #[arg(long)]
    pub trials: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-case tolerance (suite default when omitted)
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long)]
    pub q_order: Option<usize>,

    /// Run the negative control: every case must fail the identity
    #[arg(long)]
    pub expect_fail: bool,

    #[arg(long)]
    pub json: bool,
}
