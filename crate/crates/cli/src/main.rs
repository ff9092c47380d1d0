mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use commands::{RunConfig, SpectralRoute};
use config::{parse_kernel, parse_r_list, parse_region, positive, usage, Format, UsageError};

#[derive(Parser)]
#[command(name = "acc-specgram", version, about = "Accumulated spectrograms and number variance of projection kernels")]
struct Cli {
    /// Print the CSV column schema and exit
    #[arg(long)]
    schema: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct Common {
    /// sine, paley-wiener or ginibre
    #[arg(long)]
    kernel: Option<String>,
    /// Real dimension of a Paley–Wiener kernel
    #[arg(long)]
    dim: Option<usize>,
    /// Complex dimension of a Ginibre kernel
    #[arg(long)]
    cdim: Option<usize>,
    /// interval:a,b | cube:lo,hi | box:lo1,hi1,... | ball:[c1,...,]r | union:ball/ball/...
    #[arg(long)]
    region: Option<String>,
    /// Dilations, `a,b,c` or `lo:hi:logN`
    #[arg(long = "R", value_name = "LIST")]
    r: Option<String>,
    /// Grid cells per bounding-box axis
    #[arg(long)]
    n: Option<usize>,
    /// Grid spacing, used when --n is absent
    #[arg(long)]
    spacing: Option<f64>,
    /// Maximum number of quadrature nodes
    #[arg(long, default_value_t = acc_specgram::discretize::DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Evaluation margin around the region (default: 4 correlation lengths)
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (default: stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// L1 convergence of the accumulated spectrogram along dilations
    Spectrogram {
        #[command(flatten)]
        common: Common,
        /// CSV file for the per-node field (JSON output embeds it)
        #[arg(long)]
        fields: Option<PathBuf>,
    },
    /// Number variance along dilations, with the log-law fit for Paley–Wiener balls
    Variance {
        #[command(flatten)]
        common: Common,
        /// Skip the discretized spectral route
        #[arg(long)]
        no_spectral: bool,
        /// Largest grid for the spectral route; bigger grids are skipped
        #[arg(long, default_value_t = 2000)]
        spectral_max_nodes: usize,
    },
    /// Run every invariant on one discretization; exit 1 on any failure
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        /// Fault injection: cap the lens series at this many terms
        #[arg(long, value_name = "TERMS")]
        debug_truncate_series: Option<usize>,
    },
    /// Lens volume |B(r e1,R) \ B(0,R)| by series and by quadrature
    Lens {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        r: f64,
        #[arg(long = "R")]
        radius: f64,
    },
}

struct Defaults {
    kernel: Option<&'static str>,
    region: &'static str,
    r: &'static str,
    n: Option<usize>,
}

fn build_config(c: Common, defaults: Defaults, delta: f64) -> anyhow::Result<RunConfig> {
    let kernel = parse_kernel(c.kernel.as_deref().or(defaults.kernel), c.dim, c.cdim)?;
    let dim = kernel.ambient_dim();
    let region_spec = c.region.unwrap_or_else(|| defaults.region.to_string());
    let region = parse_region(&region_spec, dim)?;
    let r_list = parse_r_list(c.r.as_deref().unwrap_or(defaults.r))?;
    if c.n.is_some_and(|n| n < 2) {
        return Err(usage("n", "must be at least 2"));
    }
    if c.node_cap == 0 {
        return Err(usage("node-cap", "must be positive"));
    }
    Ok(RunConfig {
        kernel,
        region,
        r_list,
        n_per_axis: c.n.or(if c.spacing.is_none() { defaults.n } else { None }),
        spacing: positive("spacing", c.spacing)?,
        node_cap: c.node_cap,
        margin: positive("margin", c.margin)?,
        delta,
        format: c.format,
        output: c.output,
        fields: None,
    })
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("ACC_SPECGRAM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| usage("ACC_SPECGRAM_THREADS", format!("'{raw}' is not a thread count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.schema {
        print!("{}", output::SCHEMA);
        return Ok(ExitCode::SUCCESS);
    }
    configure_threads()?;
    let command = cli.command.ok_or_else(|| usage("command", "required (spectrogram, variance, check or lens)"))?;
    match command {
        Command::Spectrogram { common, fields } => {
            let defaults = Defaults { kernel: None, region: "cube:-1,1", r: "1", n: None };
            let mut cfg = build_config(common, defaults, 0.25)?;
            cfg.fields = fields;
            commands::spectrogram(&cfg)?;
        }
        Command::Variance { common, no_spectral, spectral_max_nodes } => {
            let defaults = Defaults { kernel: None, region: "ball:1", r: "1", n: None };
            let cfg = build_config(common, defaults, 0.25)?;
            commands::variance(&cfg, SpectralRoute { enabled: !no_spectral, max_nodes: spectral_max_nodes })?;
        }
        Command::Check { common, delta, debug_truncate_series } => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(usage("delta", format!("must lie in (0, 1), got {delta}")));
            }
            if debug_truncate_series == Some(0) {
                return Err(usage("debug-truncate-series", "must be positive"));
            }
            // sine on (-5, 5) with 400 cells unless overridden
            let defaults = Defaults { kernel: Some("sine"), region: "cube:-5,5", r: "1", n: Some(400) };
            let cfg = build_config(common, defaults, delta)?;
            if !commands::check(&cfg, debug_truncate_series)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Lens { dim, r, radius } => {
            if !r.is_finite() || !radius.is_finite() {
                return Err(usage("lens", "r and R must be finite"));
            }
            commands::lens(dim, r, radius)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
