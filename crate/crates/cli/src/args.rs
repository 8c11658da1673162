use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use hfvol::mc::Preset;
use hfvol::multistep::Tuning;
use hfvol::Window;

#[derive(Debug, Parser)]
#[command(
    name = "hfvol",
    version,
    about = "Noise-robust volatility estimation from high-frequency prices"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output directory for all written files
    #[arg(short = 'o', long = "out", global = true, default_value = ".")]
    pub out: PathBuf,
    /// More log output on stderr (repeatable)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    /// Random seed; determines every stochastic output
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo runs (default: all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an observed price path with microstructure noise
    Simulate(SimulateArgs),
    /// Estimate integrated volatility with the multi-step pipeline
    Estimate(EstimateArgs),
    /// Estimate noise variance, autocovariances and autocorrelations
    Acf(AcfArgs),
    /// Run a Monte Carlo experiment
    Mc(McArgs),
    /// Split a tick CSV file into per-day series
    Ingest(IngestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ou,
    Sv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseKind {
    /// U = V + ε with Var(V) = 2.9e-8, Var(ε) = 4.3e-8
    Benchmark,
    /// Var(V) = 1.9e-7, Var(ε) = 1.3e-7
    Appendix,
    /// No noise
    None,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON file with `price`, `noise`, `n_obs` and optional `horizon`
    #[arg(long, conflicts_with_all = ["model", "n", "rho", "noise", "horizon"])]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ou")]
    pub model: Model,
    /// Number of observations N (n = N - 1 increments)
    #[arg(long, default_value_t = 23_401)]
    pub n: usize,
    /// Horizon in units of one trading session
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, value_enum, default_value = "benchmark")]
    pub noise: NoiseKind,
    /// AR(1) coefficient of the noise
    #[arg(long, default_value_t = -0.7, allow_hyphen_values = true)]
    pub rho: f64,
    /// Also write the efficient (noise-free) path
    #[arg(long)]
    pub efficient: bool,
}

/// How the input series is sampled before estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    None,
    Tick,
    Calendar(f64),
}

impl FromStr for Sampling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "transaction" => Ok(Sampling::None),
            "tick" => Ok(Sampling::Tick),
            "calendar" => Ok(Sampling::Calendar(1.0)),
            _ => {
                let step = s
                    .strip_prefix("calendar:")
                    .ok_or_else(|| format!("expected none, tick or calendar:<seconds>, got `{s}`"))?;
                match step.parse::<f64>() {
                    Ok(g) if g > 0.0 && g.is_finite() => Ok(Sampling::Calendar(g)),
                    _ => Err(format!(
                        "calendar step must be a positive number of seconds, got `{step}`"
                    )),
                }
            }
        }
    }
}

impl std::fmt::Display for Sampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sampling::None => write!(f, "none"),
            Sampling::Tick => write!(f, "tick"),
            Sampling::Calendar(g) => write!(f, "calendar:{g}"),
        }
    }
}

/// Tuning flags shared by `estimate` and `acf`; each overrides the config
/// file value.
#[derive(Debug, Args)]
pub struct TuningArgs {
    /// JSON file with tuning fields (c, j_n, i_n, max_lag, n_steps, alpha, window)
    #[arg(long = "tuning")]
    pub tuning_file: Option<PathBuf>,
    /// Start from the dense-data defaults (j_n = 30, i_n = 15)
    #[arg(long)]
    pub dense: bool,
    /// Pre-averaging window constant
    #[arg(long)]
    pub c: Option<f64>,
    /// Lag whose realized volatility estimates the noise variance
    #[arg(long)]
    pub jn: Option<usize>,
    /// Autocovariances summed into the long-run variance
    #[arg(long = "in")]
    pub i_n: Option<usize>,
    /// Largest autocovariance lag reported
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Pre-averaging window convention (closed, half-open)
    #[arg(long)]
    pub window: Option<Window>,
}

impl TuningArgs {
    /// Resolve file, preset and flag values; `max_lag` follows `j_n` unless
    /// set explicitly.
    pub fn resolve(&self) -> crate::output::CmdResult<Tuning> {
        let mut t = match &self.tuning_file {
            Some(p) => crate::output::read_json(p)?,
            None if self.dense => Tuning::dense(),
            None => Tuning::default(),
        };
        if let Some(c) = self.c {
            t.c = c;
        }
        if let Some(j) = self.jn {
            t.j_n = j;
            if self.max_lag.is_none() && self.tuning_file.is_none() {
                t.max_lag = j;
            }
        }
        if let Some(i) = self.i_n {
            t.i_n = i;
        }
        if let Some(m) = self.max_lag {
            t.max_lag = m;
        }
        if let Some(w) = self.window {
            t.window = w;
        }
        Ok(t)
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Series CSV with columns timestamp_seconds,log_price
    pub input: PathBuf,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Number of pipeline steps
    #[arg(long)]
    pub steps: Option<usize>,
    /// Confidence intervals have level 1 - alpha
    #[arg(long)]
    pub alpha: Option<f64>,
    /// none | tick | calendar:<seconds>
    #[arg(long, default_value = "none")]
    pub sampling: Sampling,
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    /// Series CSV with columns timestamp_seconds,log_price
    pub input: PathBuf,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Correct for the diffusion with this integrated-volatility value
    #[arg(long, conflicts_with = "two_step")]
    pub iv: Option<f64>,
    /// Correct for the diffusion with the step-1 pre-averaging estimate
    #[arg(long)]
    pub two_step: bool,
    /// Lags used by the AR(1) and log-linear fits (default: i_n)
    #[arg(long)]
    pub fit_lags: Option<usize>,
    /// none | tick | calendar:<seconds>
    #[arg(long, default_value = "none")]
    pub sampling: Sampling,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("design").required(true).args(["preset", "config"])))]
pub struct McArgs {
    /// table1 | table2 | sv-appendix | qq | rv-curve | acf-bands
    #[arg(long)]
    pub preset: Option<Preset>,
    /// JSON file with one experiment design or a list of designs
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replications per design (preset default 1000)
    #[arg(long)]
    pub reps: Option<usize>,
    /// Keep per-path records in report.json
    #[arg(long)]
    pub keep_paths: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tick CSV file (overrides `path` in --spec)
    pub input: Option<PathBuf>,
    /// JSON ingest spec
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// The file has no header row; columns must be given by index
    #[arg(long)]
    pub no_header: bool,
    /// Date column name or zero-based index
    #[arg(long)]
    pub date_col: Option<String>,
    /// Time column name or index
    #[arg(long)]
    pub time_col: Option<String>,
    /// Time column holds full date-times (no date column)
    #[arg(long)]
    pub datetime: bool,
    /// Price column name or index
    #[arg(long)]
    pub price_col: Option<String>,
    /// Session open, HH:MM:SS (inclusive)
    #[arg(long)]
    pub session_start: Option<String>,
    /// Session close, HH:MM:SS (inclusive)
    #[arg(long)]
    pub session_end: Option<String>,
    /// Prices are already logarithms
    #[arg(long)]
    pub log_prices: bool,
    /// Keep rows with repeated timestamps, shifted by 1 µs steps
    #[arg(long)]
    pub jitter_ties: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sampling_values() {
        assert_eq!("none".parse::<Sampling>().unwrap(), Sampling::None);
        assert_eq!("tick".parse::<Sampling>().unwrap(), Sampling::Tick);
        assert_eq!("calendar:1".parse::<Sampling>().unwrap(), Sampling::Calendar(1.0));
        assert_eq!("calendar:0.5".parse::<Sampling>().unwrap(), Sampling::Calendar(0.5));
        assert!("calendar:0".parse::<Sampling>().is_err());
        assert!("hourly".parse::<Sampling>().is_err());
    }
}
