use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qed-dim",
    version,
    about = "Exact and QED-asymptotic analysis and dimensioning of many-server queues",
    args_override_self = true
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// TOML file with default values for the subcommand's flags (same key names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact performance measures of one system.
    Eval(EvalArgs),
    /// Limit and first-order coefficients of delay, queue, idle and revenue.
    Expand(ExpandArgs),
    /// Maximise the revenue rate over the slack.
    Optimize(OptimizeArgs),
    /// Slack meeting a delay-probability target.
    DelayStaff(DelayStaffArgs),
    /// Joint slack/threshold optimum of the limiting revenue.
    Joint(JointArgs),
    /// Joint optima and improvements over a grid of cost ratios.
    JointTable(JointTableArgs),
    /// Expansion error and optimality gaps over a range of system sizes.
    GapSweep(GapSweepArgs),
    /// Fit decay laws to gap-sweep columns.
    Fit(FitArgs),
    /// Discrete-event simulation with batch-means confidence intervals.
    Simulate(SimulateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    /// Scaled threshold: at most floor(eta sqrt(s)) waiting.
    Threshold,
    /// Everybody joins (M/M/s).
    Always,
    /// Nobody waits (M/M/s/s).
    Loss,
    /// Constant join probability `p`.
    Constant,
    /// M/M/s+M: abandonment rate `theta` per waiting customer.
    Abandonment,
    /// Scaled profile exp(-rate x).
    Exponential,
}

#[derive(Args, Debug, Clone)]
pub struct PolicyArgs {
    #[arg(long, value_enum, default_value_t = PolicyKind::Threshold)]
    pub policy: PolicyKind,
    /// Threshold level (`inf` disables admission control).
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct EconArgs {
    /// Fee per served customer.
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    /// Waiting cost per customer per unit time.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Penalty per rejected customer.
    #[arg(long, default_value_t = 0.0)]
    pub d: f64,
}

#[derive(Args, Debug, Clone)]
pub struct IntervalArgs {
    #[arg(long, default_value_t = -2.0)]
    pub gamma_lo: f64,
    #[arg(long, default_value_t = 3.0)]
    pub gamma_hi: f64,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct EvalArgs {
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub gamma: f64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub econ: EconArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct ExpandArgs {
    #[arg(long)]
    pub gamma: f64,
    /// Also report the two-term approximation and the exact value at this size.
    #[arg(long)]
    pub s: Option<u64>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub econ: EconArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Order {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    Exact,
    /// Series-refined order-1 level (delay-staff only).
    Refined,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = Order::Exact)]
    pub order: Order,
    #[arg(long)]
    pub s: Option<u64>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub econ: EconArgs,
    #[command(flatten)]
    pub interval: IntervalArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct DelayStaffArgs {
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = Order::Exact)]
    pub order: Order,
    #[arg(long)]
    pub s: Option<u64>,
    /// Number of series terms for `--order refined`.
    #[arg(long, default_value_t = 1)]
    pub n_max: usize,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub interval: IntervalArgs,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct JointBoxArgs {
    #[arg(long, default_value_t = -5.0)]
    pub gamma_lo: f64,
    #[arg(long, default_value_t = 5.0)]
    pub gamma_hi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta_lo: f64,
    #[arg(long, default_value_t = 20.0)]
    pub eta_hi: f64,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct JointArgs {
    #[command(flatten)]
    pub econ: EconArgs,
    #[command(flatten)]
    pub search: JointBoxArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct JointTableArgs {
    /// Ratios a/(a+d); defaults to 0.1, ..., 0.9.
    #[arg(long, value_delimiter = ',')]
    pub r1: Vec<f64>,
    /// Ratios (a+d)/b; defaults to 1/5, 1/4, 1/3, 1/2, 1, ..., 5.
    #[arg(long, value_delimiter = ',')]
    pub r2: Vec<f64>,
    #[command(flatten)]
    pub search: JointBoxArgs,
}

#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
pub struct GapSweepArgs {
    #[command(flatten)]
    pub econ: EconArgs,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    /// Slack at which the expansion error is measured.
    #[arg(long, default_value_t = 2.0)]
    pub gamma_eval: f64,
    #[arg(long, default_value_t = 10)]
    pub s_min: u64,
    #[arg(long, default_value_t = 75)]
    pub s_max: u64,
    #[command(flatten)]
    pub interval: IntervalArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    FreeExponent,
    InvSqrt,
    Inv,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct FitArgs {
    /// Gap-sweep CSV to fit; a default sweep is run when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column to fit; all three standard fits are reported when absent.
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub gamma: f64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long, default_value_t = 2_000_000)]
    pub events: u64,
    #[arg(long, default_value_t = 100_000)]
    pub warmup: u64,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
