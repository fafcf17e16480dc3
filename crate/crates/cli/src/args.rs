use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use flexd::montecarlo::PairSelection;
use flexd::scheduler::Mode;
use flexd::traffic::FdDelivery;

#[derive(Debug, Parser)]
#[command(name = "flexd", version, about = "RIS-assisted FlexD network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed form against quadrature and Monte Carlo; exits 2 on a tolerance breach.
    Validate(ValidateArgs),
    /// Run a preset sweep and write CSVs plus a manifest.
    Sweep(SweepArgs),
    /// Buffered-traffic comparison over a target-rate grid.
    Traffic(TrafficCommand),
    /// Write Ω and Ω̄ of the scenario's RIS to CSV.
    DumpCorrelation(DumpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrialArgs {
    /// Channel draws per grid point.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Comma-separated modes: flexd, hd, fd-const, fd-linear.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<Mode>>,
    /// Common random numbers across modes.
    #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = ArgAction::Set)]
    pub crn: bool,
    /// Pair selection: `all` (max-throughput pair) or `single`.
    #[arg(long, default_value = "all")]
    pub pairs: PairSelection,
}

#[derive(Debug, Clone, Args)]
pub struct TrafficArgs {
    /// Poisson arrivals per user per slot.
    #[arg(long, default_value_t = 0.8)]
    pub arrival_rate: f64,
    /// Nats per packet.
    #[arg(long, default_value_t = 1.0)]
    pub payload: f64,
    #[arg(long, default_value_t = 100_000)]
    pub slots: u64,
    /// Target rates as `start:stop:step` or a comma list.
    #[arg(long, default_value = "0.1:2:0.1")]
    pub rt_grid: Grid,
    /// Slots with nothing to send count as outages.
    #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = ArgAction::Set)]
    pub outage_counts_idle: bool,
    /// FlexD hands an empty winner's slot to its partner.
    #[arg(long, num_args = 0..=1, default_value_t = true, default_missing_value = "true", action = ArgAction::Set)]
    pub empty_buffer_fallback: bool,
    /// Full-duplex slot throughput: `min` (two-way) or `sum`.
    #[arg(long, default_value = "min")]
    pub fd_delivery: FdDelivery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Power,
    Sinr,
    Position,
    MElements,
    Ee,
    Traffic,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Power => "power",
            SweepKind::Sinr => "sinr",
            SweepKind::Position => "position",
            SweepKind::MElements => "m-elements",
            SweepKind::Ee => "ee",
            SweepKind::Traffic => "traffic",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub trials: TrialArgs,
    /// Sweep grid as `start:stop:step` or a comma list; defaults per kind.
    #[arg(long)]
    pub grid: Option<Grid>,
    #[command(flatten)]
    pub traffic: TrafficArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrafficCommand {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated modes.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<Mode>>,
    #[command(flatten)]
    pub traffic: TrafficArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Bound on |MC − analytic| outage.
    #[arg(long, default_value_t = 0.03)]
    pub mc_tol: f64,
    /// Bound on the closed-form to quadrature relative gap.
    #[arg(long, default_value_t = 1e-6)]
    pub oracle_tol: f64,
    /// Power points around the analytic median.
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long, default_value_t = 1.5)]
    pub spacing_db: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub common: Common,
}

/// Grid values from `start:stop:step` (inclusive) or `a,b,c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, step] = parts[..] else {
                return Err(format!("range `{s}` must be start:stop:step"));
            };
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !(b >= a) {
                return Err(format!("range `{s}` needs step > 0 and stop >= start"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            // Rounded to 12 significant digits so 0.1 steps print as typed.
            let round = |v: f64| format!("{v:.12e}").parse::<f64>().unwrap_or(v);
            Ok(Grid((0..=n).map(|i| round(a + step * i as f64)).collect()))
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>().map(Grid)
        }
    }
}
