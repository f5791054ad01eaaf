use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hpi_core::{ModelKind, MonthRange, MonthStamp, Scheme, SignLabel};

#[derive(Debug, Parser)]
#[command(
    name = "hpi",
    version,
    about = "Monthly price-index panel analysis",
    args_override_self = true
)]
pub struct Cli {
    /// JSON object of default flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for per-region work (default: number of processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PanelArgs {
    /// Panel file: `date` column plus one column per region, comma or tab separated.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a panel, optionally append a later extension, and write it back in canonical form.
    Ingest {
        #[command(flatten)]
        panel: PanelArgs,
        /// Later panel whose months are appended to matching regions.
        #[arg(long)]
        extension: Option<PathBuf>,
    },
    /// Monthly log growth rates per region.
    Growth {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long)]
        window: Option<MonthRange>,
    },
    /// Fit a bubble model to every region.
    Fit {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long, default_value = "power-law")]
        model: ModelKind,
        #[arg(long)]
        window: Option<MonthRange>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multistart size.
        #[arg(long, default_value_t = 32)]
        starts: usize,
    },
    /// Growth-versus-price points and regressions.
    Phase {
        #[command(flatten)]
        panel: PanelArgs,
        /// Months starting each new period, comma separated; `none` for a single period.
        #[arg(long, default_value = "2003-10,2004-10")]
        segments: String,
    },
    /// Finite-time singularity of dp/dt = alpha p^2 - beta p.
    Ode {
        /// Quadratic coefficient per index unit per month.
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Linear decay rate per month.
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long)]
        p0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// Trajectory samples written before the singularity.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Periodogram of each region's growth and their mean.
    Spectrum {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long)]
        window: Option<MonthRange>,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        /// Mirror the spectrum above the Nyquist frequency up to this many cycles/year.
        #[arg(long)]
        max_frequency: Option<f64>,
    },
    /// Mean and standard deviation of growth per calendar month.
    Profile {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long)]
        window: Option<MonthRange>,
        /// Shorthand for a window from the first growth month to this month.
        #[arg(long, conflicts_with = "window")]
        train_to: Option<MonthStamp>,
    },
    /// Bilinear year-by-month decomposition of growth.
    Decompose {
        #[command(flatten)]
        panel: PanelArgs,
        /// Years as `FIRST:LAST`; defaults to every year the growth covers.
        #[arg(long)]
        years: Option<String>,
    },
    /// Sign statistics of month-to-month growth increments.
    Signs {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long)]
        window: Option<MonthRange>,
        /// Last growth month used; the window starts at the first growth month.
        #[arg(long, conflicts_with = "window")]
        to: Option<MonthStamp>,
        #[arg(long, default_value = "origin")]
        label: SignLabel,
    },
    /// Seasonal level forecast per region.
    Forecast {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long, default_value = "pooled")]
        scheme: Scheme,
        /// Training window of growth months.
        #[arg(long)]
        window: Option<MonthRange>,
        /// Shorthand for a training window ending at this month.
        #[arg(long, conflicts_with = "window")]
        train_to: Option<MonthStamp>,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
    /// Predict increment signs from the input panel and score them on realised data.
    Evaluate {
        #[command(flatten)]
        panel: PanelArgs,
        /// Panel with the realised months, appended to the input before scoring.
        #[arg(long)]
        realized: PathBuf,
        /// Last growth month of the training table; defaults to the input's end.
        #[arg(long)]
        to: Option<MonthStamp>,
        /// Months to predict; defaults to every month the realised data can score.
        #[arg(long)]
        window: Option<MonthRange>,
        #[arg(long, default_value = "origin")]
        label: SignLabel,
    },
    /// Generate a synthetic panel and its ground truth from a scenario file.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Growth { .. } => "growth",
            Command::Fit { .. } => "fit",
            Command::Phase { .. } => "phase",
            Command::Ode { .. } => "ode",
            Command::Spectrum { .. } => "spectrum",
            Command::Profile { .. } => "profile",
            Command::Decompose { .. } => "decompose",
            Command::Signs { .. } => "signs",
            Command::Forecast { .. } => "forecast",
            Command::Evaluate { .. } => "evaluate",
            Command::Synth { .. } => "synth",
        }
    }
}
